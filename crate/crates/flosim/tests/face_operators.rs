//! Dense-operator validation of the layout's sign conventions: around every
//! face (and the two logical faces), the product of link operators must equal
//! the product of the encoded vertex-pair operators exactly, not just up to
//! sign.

use std::collections::HashMap;

use flosim::layout::{CodeLayout, PauliKind};
use flosim::oracle::DenseMajorana;
use num_complex::Complex64;

struct Walk {
    vertices: Vec<usize>,
    /// (tail mode, head mode) of each walk edge, including virtual edges.
    links: Vec<(u32, u32)>,
}

fn real_face_walk(layout: &CodeLayout, fi: usize) -> Walk {
    let f = &layout.faces[fi];
    Walk {
        vertices: f.vertices.clone(),
        links: f
            .edges
            .iter()
            .map(|&e| (layout.edges[e].tail_mode(), layout.edges[e].head_mode()))
            .collect(),
    }
}

fn logical_face_walk(layout: &CodeLayout, top: bool) -> Walk {
    let lf = if top { &layout.top_face } else { &layout.left_face };
    let mut links = vec![lf.virtual_pair];
    links.extend(
        lf.path_edges
            .iter()
            .map(|&e| (layout.edges[e].tail_mode(), layout.edges[e].head_mode())),
    );
    Walk {
        vertices: lf.vertices.clone(),
        links,
    }
}

/// Mode of a walk edge at vertex `v`: whichever of its two modes lies in the
/// cluster of `v`.
fn link_mode_at(layout: &CodeLayout, link: (u32, u32), v: usize) -> u32 {
    if layout.clusters[v].contains(&link.0) {
        link.0
    } else {
        assert!(layout.clusters[v].contains(&link.1));
        link.1
    }
}

/// Canonical encoded arrow for the unordered position pair (0-based): X is
/// 1->2, X*S is 3->4, Z is 2->3, Z*S is 1->4.
fn pair_arrow(pa: usize, pb: usize) -> (usize, usize) {
    match (pa.min(pb), pa.max(pb)) {
        (0, 1) => (0, 1),
        (2, 3) => (2, 3),
        (1, 2) => (1, 2),
        (0, 3) => (0, 3),
        other => panic!("positions {other:?} are not an encoded pair"),
    }
}

fn check_walk(layout: &CodeLayout, walk: &Walk, kind: PauliKind) {
    let mut local: HashMap<u32, usize> = HashMap::new();
    for &(t, h) in &walk.links {
        for m in [t, h] {
            let next = local.len();
            local.entry(m).or_insert(next);
        }
    }
    let num_modes = local.len();
    assert!(num_modes <= 8);

    let psi = DenseMajorana::generic(num_modes);

    // Product of link operators i c_tail c_head applied to a generic state.
    let mut lhs = psi.clone();
    let mut lhs_phase = Complex64::new(1.0, 0.0);
    for &(t, h) in &walk.links {
        lhs.apply_c(local[&h]);
        lhs.apply_c(local[&t]);
        lhs_phase *= Complex64::new(0.0, 1.0);
    }

    // Product of encoded vertex-pair operators with canonical arrows.
    let mut rhs = psi.clone();
    let mut rhs_phase = Complex64::new(1.0, 0.0);
    let k = walk.vertices.len();
    for i in 0..k {
        let v = walk.vertices[i];
        let m_in = link_mode_at(layout, walk.links[(i + k - 1) % k], v);
        let m_out = link_mode_at(layout, walk.links[i], v);
        let cluster = &layout.clusters[v];
        let pa = cluster.iter().position(|&m| m == m_in).unwrap();
        let pb = cluster.iter().position(|&m| m == m_out).unwrap();
        let (tp, hp) = pair_arrow(pa, pb);
        let pair_kind = match (tp, hp) {
            (0, 1) | (2, 3) => PauliKind::X,
            _ => PauliKind::Z,
        };
        assert_eq!(pair_kind, kind, "wrong pair kind at vertex {v}");
        rhs.apply_c(local[&cluster[hp]]);
        rhs.apply_c(local[&cluster[tp]]);
        rhs_phase *= Complex64::new(0.0, 1.0);
    }

    let worst = lhs
        .amplitudes()
        .iter()
        .zip(rhs.amplitudes().iter())
        .map(|(a, b)| (lhs_phase * a - rhs_phase * b).norm())
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-9, "operator products differ by {worst:.3e}");
}

#[test]
fn link_products_equal_encoded_stabilizers() {
    for d in [3, 5] {
        let layout = CodeLayout::build(d).unwrap();
        for fi in 0..layout.faces.len() {
            let walk = real_face_walk(&layout, fi);
            check_walk(&layout, &walk, layout.faces[fi].kind);
        }
    }
}

#[test]
fn link_products_equal_encoded_logicals_d3() {
    let layout = CodeLayout::build(3).unwrap();
    check_walk(&layout, &logical_face_walk(&layout, true), PauliKind::Z);
    check_walk(&layout, &logical_face_walk(&layout, false), PauliKind::X);
}
