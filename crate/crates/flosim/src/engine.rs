//! Fermionic Gaussian state engine.
//!
//! A Gaussian state of `n` Majorana modes is represented by its real
//! antisymmetric covariance matrix `M` with `M[p][q] = <i c_p c_q>`. The
//! engine supports the three fermionic-linear-optics primitives (pair
//! initialization, two-mode rotations `exp(gamma c_p c_q)`, and pair-parity
//! projectors) together with attach/detach bookkeeping so that callers can
//! keep only a small window of active modes in memory.
//!
//! Rows and columns are addressed through stable global mode identifiers,
//! so modes can be attached and detached without renumbering anything else.

use std::collections::HashMap;

use thiserror::Error;

/// Stable global identifier of a Majorana mode. Assigned by the code layout;
/// the engine never interprets it.
pub type ModeId = u32;

/// Probabilities below this are treated as impossible outcomes.
pub const IMPOSSIBLE_EPS: f64 = 1e-12;
/// Tolerance for structural invariants (purity, decoupling).
pub const INVARIANT_EPS: f64 = 1e-9;

/// The pair-parity operator `sign * i c_p c_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModePair {
    pub p: ModeId,
    pub q: ModeId,
    /// +1 or -1; the stabilized operator is `sign * i c_p c_q`.
    pub sign: i8,
}

impl ModePair {
    pub fn new(p: ModeId, q: ModeId) -> Self {
        Self { p, q, sign: 1 }
    }

    pub fn with_sign(p: ModeId, q: ModeId, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Self { p, q, sign }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("mode {0} appears more than once in the pairing")]
    DuplicateMode(ModeId),
    #[error("mode {0} is not covered by the pairing")]
    UnmatchedMode(ModeId),
    #[error("Bloch vector norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("mode label {0} already present")]
    LabelCollision(ModeId),
    #[error("unknown mode {0}")]
    UnknownMode(ModeId),
    #[error("outcome {outcome} for pair ({p},{q}) has probability <= {eps:.0e}", eps = IMPOSSIBLE_EPS)]
    ImpossibleOutcome { p: ModeId, q: ModeId, outcome: i8 },
    #[error("Wick expectation requires an even number of modes, got {0}")]
    OddSubset(usize),
    #[error("pair ({p},{q}) is still coupled to other modes")]
    NotDecoupled { p: ModeId, q: ModeId },
}

/// Pure (or measurement-conditioned) fermionic Gaussian state.
#[derive(Debug, Clone)]
pub struct GaussianState {
    /// Matrix row index -> global mode id.
    labels: Vec<ModeId>,
    /// Global mode id -> matrix row index.
    index: HashMap<ModeId, usize>,
    /// Row-major covariance matrix with row stride `cap`.
    m: Vec<f64>,
    cap: usize,
    n: usize,
    peak: usize,
}

impl GaussianState {
    /// State of zero modes.
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            m: Vec::new(),
            cap: 0,
            n: 0,
            peak: 0,
        }
    }

    /// The unique pure Gaussian state stabilized by `sign * i c_p c_q = +1`
    /// for every pair of a perfect matching.
    pub fn from_pairing(pairs: &[ModePair]) -> Result<Self, EngineError> {
        let mut state = Self::empty();
        state.attach_pairs(pairs)?;
        Ok(state)
    }

    /// Like [`from_pairing`](Self::from_pairing), but checks the pairs
    /// against an explicitly declared mode set.
    pub fn from_pairing_on(modes: &[ModeId], pairs: &[ModePair]) -> Result<Self, EngineError> {
        let state = Self::from_pairing(pairs)?;
        for &mode in modes {
            if !state.index.contains_key(&mode) {
                return Err(EngineError::UnmatchedMode(mode));
            }
        }
        Ok(state)
    }

    /// Four-mode C4 encoding of a pure single-qubit state with Bloch vector
    /// `(bx, by, bz)`. The four matrix rows correspond to `labels` in order.
    pub fn from_bloch_c4(labels: [ModeId; 4], b: [f64; 3]) -> Result<Self, EngineError> {
        let [bx, by, bz] = b;
        let norm2 = bx * bx + by * by + bz * bz;
        if (norm2 - 1.0).abs() > INVARIANT_EPS {
            return Err(EngineError::NotNormalized((norm2.sqrt() - 1.0).abs()));
        }
        let mut state = Self::empty();
        state.grow_to(4)?;
        for (i, &l) in labels.iter().enumerate() {
            if state.index.insert(l, i).is_some() {
                return Err(EngineError::LabelCollision(l));
            }
            state.labels.push(l);
        }
        state.n = 4;
        state.peak = 4;
        let rows = [
            [0.0, bx, -by, bz],
            [-bx, 0.0, bz, by],
            [by, -bz, 0.0, bx],
            [-bz, -by, -bx, 0.0],
        ];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                state.m[i * state.cap + j] = v;
            }
        }
        Ok(state)
    }

    /// Tensor product: block-diagonal covariance, merged labels.
    pub fn tensor(a: GaussianState, b: GaussianState) -> Result<GaussianState, EngineError> {
        let mut a = a;
        a.attach_block(&b)?;
        Ok(a)
    }

    pub fn num_modes(&self) -> usize {
        self.n
    }

    /// Largest number of simultaneously active modes seen so far.
    pub fn peak_modes(&self) -> usize {
        self.peak
    }

    pub fn contains(&self, mode: ModeId) -> bool {
        self.index.contains_key(&mode)
    }

    pub fn mode_labels(&self) -> &[ModeId] {
        &self.labels
    }

    fn idx(&self, mode: ModeId) -> Result<usize, EngineError> {
        self.index
            .get(&mode)
            .copied()
            .ok_or(EngineError::UnknownMode(mode))
    }

    fn grow_to(&mut self, want: usize) -> Result<(), EngineError> {
        if want <= self.cap {
            return Ok(());
        }
        let new_cap = want.next_power_of_two().max(8);
        let mut m = vec![0.0; new_cap * new_cap];
        for r in 0..self.n {
            m[r * new_cap..r * new_cap + self.n]
                .copy_from_slice(&self.m[r * self.cap..r * self.cap + self.n]);
        }
        self.m = m;
        self.cap = new_cap;
        Ok(())
    }

    /// Attach fresh decoupled pairs, each stabilized by `sign * i c_p c_q`.
    pub fn attach_pairs(&mut self, pairs: &[ModePair]) -> Result<(), EngineError> {
        self.grow_to(self.n + 2 * pairs.len())?;
        for pair in pairs {
            if pair.p == pair.q {
                return Err(EngineError::DuplicateMode(pair.p));
            }
            for &l in &[pair.p, pair.q] {
                if self.index.contains_key(&l) {
                    return Err(EngineError::DuplicateMode(l));
                }
            }
            let i = self.push_label(pair.p);
            let j = self.push_label(pair.q);
            let s = f64::from(pair.sign);
            self.m[i * self.cap + j] = s;
            self.m[j * self.cap + i] = -s;
        }
        self.peak = self.peak.max(self.n);
        Ok(())
    }

    /// Tensor another state into this one in place.
    pub fn attach_block(&mut self, block: &GaussianState) -> Result<(), EngineError> {
        for &l in &block.labels {
            if self.index.contains_key(&l) {
                return Err(EngineError::LabelCollision(l));
            }
        }
        let base = self.n;
        self.grow_to(base + block.n)?;
        for &l in &block.labels {
            self.push_label(l);
        }
        for r in 0..block.n {
            for c in 0..block.n {
                self.m[(base + r) * self.cap + (base + c)] = block.m[r * block.cap + c];
            }
        }
        self.peak = self.peak.max(self.n);
        Ok(())
    }

    fn push_label(&mut self, label: ModeId) -> usize {
        let i = self.n;
        self.labels.push(label);
        self.index.insert(label, i);
        self.n += 1;
        i
    }

    /// Apply `exp(gamma c_p c_q)`. Cost O(num_modes).
    pub fn rotate(&mut self, p: ModeId, q: ModeId, gamma: f64) -> Result<(), EngineError> {
        let i = self.idx(p)?;
        let j = self.idx(q)?;
        if i == j {
            return Err(EngineError::UnknownMode(p));
        }
        let (c, s) = ((2.0 * gamma).cos(), (2.0 * gamma).sin());
        // Rows, then columns; M[p][q] is invariant under an in-plane rotation.
        for r in 0..self.n {
            if r == i || r == j {
                continue;
            }
            let mi = self.m[i * self.cap + r];
            let mj = self.m[j * self.cap + r];
            let ni = c * mi + s * mj;
            let nj = -s * mi + c * mj;
            self.m[i * self.cap + r] = ni;
            self.m[j * self.cap + r] = nj;
            self.m[r * self.cap + i] = -ni;
            self.m[r * self.cap + j] = -nj;
        }
        Ok(())
    }

    /// Probability that measuring `i c_p c_q` yields `outcome`.
    pub fn outcome_probability(&self, p: ModeId, q: ModeId, outcome: i8) -> Result<f64, EngineError> {
        let e = self.expectation_pair(p, q)?;
        Ok((1.0 + f64::from(outcome) * e) / 2.0)
    }

    /// Project onto `i c_p c_q = outcome` and renormalize. Returns the
    /// outcome probability; afterwards modes `p`, `q` are decoupled from the
    /// rest of the state. Cost O(num_modes^2).
    pub fn measure_pair(&mut self, p: ModeId, q: ModeId, outcome: i8) -> Result<f64, EngineError> {
        let mut i = self.idx(p)?;
        let mut j = self.idx(q)?;
        if i == j {
            return Err(EngineError::UnknownMode(p));
        }
        // Outcome -1 is the +1 measurement with p and q exchanged.
        if outcome < 0 {
            std::mem::swap(&mut i, &mut j);
        }
        let lambda = (1.0 + self.m[i * self.cap + j]) / 2.0;
        if lambda <= IMPOSSIBLE_EPS {
            return Err(EngineError::ImpossibleOutcome { p, q, outcome });
        }
        let inv = 1.0 / (2.0 * lambda);
        let k: Vec<f64> = (0..self.n).map(|r| self.m[r * self.cap + i]).collect();
        let l: Vec<f64> = (0..self.n).map(|r| self.m[r * self.cap + j]).collect();
        for r in 0..self.n {
            if r == i || r == j {
                continue;
            }
            let (kr, lr) = (k[r], l[r]);
            if kr == 0.0 && lr == 0.0 {
                continue;
            }
            let row = &mut self.m[r * self.cap..r * self.cap + self.n];
            for (s, e) in row.iter_mut().enumerate() {
                *e = (*e + inv * (lr * k[s] - kr * l[s])).clamp(-1.0, 1.0);
            }
        }
        for r in 0..self.n {
            self.m[r * self.cap + i] = 0.0;
            self.m[r * self.cap + j] = 0.0;
            self.m[i * self.cap + r] = 0.0;
            self.m[j * self.cap + r] = 0.0;
        }
        self.m[i * self.cap + j] = 1.0;
        self.m[j * self.cap + i] = -1.0;
        Ok(lambda)
    }

    /// `<i c_p c_q>`, read directly from the covariance matrix.
    pub fn expectation_pair(&self, p: ModeId, q: ModeId) -> Result<f64, EngineError> {
        let i = self.idx(p)?;
        let j = self.idx(q)?;
        if i == j {
            // The diagonal is excluded from the covariance matrix.
            return Err(EngineError::UnknownMode(p));
        }
        Ok(self.m[i * self.cap + j])
    }

    /// Wick expectation `<i^{k/2} c_{x1} ... c_{xk}>` of an even-sized mode
    /// subset, computed as the Pfaffian of the corresponding submatrix.
    /// Test-sized inputs only (recursive expansion, O(k!!)).
    pub fn wick_expectation(&self, modes: &[ModeId]) -> Result<f64, EngineError> {
        if modes.len() % 2 != 0 {
            return Err(EngineError::OddSubset(modes.len()));
        }
        let idx: Vec<usize> = modes
            .iter()
            .map(|&p| self.idx(p))
            .collect::<Result<_, _>>()?;
        let k = idx.len();
        let mut sub = vec![0.0; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[a * k + b] = if i == j { 0.0 } else { self.m[i * self.cap + j] };
            }
        }
        Ok(pfaffian(&sub, k))
    }

    /// Remove a fully decoupled pair from the state.
    pub fn detach_pair(&mut self, p: ModeId, q: ModeId) -> Result<(), EngineError> {
        let i = self.idx(p)?;
        let j = self.idx(q)?;
        for r in 0..self.n {
            if r == i || r == j {
                continue;
            }
            if self.m[i * self.cap + r].abs() > INVARIANT_EPS
                || self.m[j * self.cap + r].abs() > INVARIANT_EPS
            {
                return Err(EngineError::NotDecoupled { p, q });
            }
        }
        if self.m[i * self.cap + j].abs() < 1.0 - INVARIANT_EPS {
            return Err(EngineError::NotDecoupled { p, q });
        }
        let (first, second) = (i.min(j), i.max(j));
        self.remove_row_col(second);
        self.remove_row_col(first);
        Ok(())
    }

    /// Swap-remove row/column `r`, fixing up the label maps.
    fn remove_row_col(&mut self, r: usize) {
        let last = self.n - 1;
        if r != last {
            for c in 0..self.n {
                self.m[r * self.cap + c] = self.m[last * self.cap + c];
            }
            for row in 0..self.n {
                self.m[row * self.cap + r] = self.m[row * self.cap + last];
            }
            self.m[r * self.cap + r] = 0.0;
            let moved = self.labels[last];
            self.labels[r] = moved;
            self.index.insert(moved, r);
        }
        let gone = self.labels.pop().unwrap();
        if self.labels.get(r) != Some(&gone) {
            self.index.remove(&gone);
        }
        for c in 0..=last {
            self.m[last * self.cap + c] = 0.0;
            self.m[c * self.cap + last] = 0.0;
        }
        self.n = last;
    }

    /// Max absolute antisymmetry violation, for tests and debug checks.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in 0..self.n {
                worst = worst.max((self.m[r * self.cap + c] + self.m[c * self.cap + r]).abs());
            }
        }
        worst
    }

    /// Max deviation of M M^T from the identity; 0 for pure states.
    pub fn purity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in 0..self.n {
                let mut dot = 0.0;
                for k in 0..self.n {
                    dot += self.m[r * self.cap + k] * self.m[c * self.cap + k];
                }
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }
}

/// Pfaffian of a `k x k` antisymmetric matrix by recursive expansion along
/// the first row.
fn pfaffian(m: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k % 2 != 0 {
        return 0.0;
    }
    if k == 2 {
        return m[1];
    }
    let mut acc = 0.0;
    let mut sign = 1.0;
    for j in 1..k {
        let a = m[j];
        if a != 0.0 {
            let rest: Vec<usize> = (1..k).filter(|&r| r != j).collect();
            let kk = rest.len();
            let mut sub = vec![0.0; kk * kk];
            for (x, &r) in rest.iter().enumerate() {
                for (y, &c) in rest.iter().enumerate() {
                    sub[x * kk + y] = m[r * k + c];
                }
            }
            acc += sign * a * pfaffian(&sub, kk);
        }
        sign = -sign;
    }
    acc
}
