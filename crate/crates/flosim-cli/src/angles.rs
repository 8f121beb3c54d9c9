//! Parsing of angles and angle grids.
//!
//! An angle is either plain radians (`0.25`) or a multiple of pi with a
//! `pi` suffix (`0.08pi`, `-0.5pi`). A grid is either a comma-separated
//! list of angles or a linear range `start:stop:count`.

use std::f64::consts::PI;

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim();
        if head.is_empty() {
            return Ok(PI);
        }
        head.parse::<f64>()
            .map(|v| v * PI)
            .map_err(|e| format!("invalid angle '{s}': {e}"))
    } else {
        t.parse::<f64>()
            .map_err(|e| format!("invalid angle '{s}': {e}"))
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let t = s.trim();
    let parts: Vec<&str> = t.split(':').collect();
    if parts.len() == 3 {
        let start = parse_angle(parts[0])?;
        let stop = parse_angle(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("invalid grid count '{}': {e}", parts[2]))?;
        if count < 1 {
            return Err("grid count must be at least 1".into());
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    if parts.len() != 1 {
        return Err(format!("invalid grid '{s}': expected list or start:stop:count"));
    }
    t.split(',').map(parse_angle).collect()
}

pub fn parse_distances(s: &str) -> Result<Vec<usize>, String> {
    let ds: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("invalid distance '{p}': {e}"))
        })
        .collect::<Result<_, _>>()?;
    for &d in &ds {
        if d < 3 || d % 2 == 0 {
            return Err(format!("distance {d} must be an odd integer >= 3"));
        }
    }
    Ok(ds)
}
