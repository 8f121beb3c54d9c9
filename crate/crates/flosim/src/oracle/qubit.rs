//! Brute-force qubit state-vector simulation of the surface code at small
//! distance (512 amplitudes at distance 3). Computes exact syndrome
//! distributions, residual logical rotation angles, and final logical Bloch
//! vectors, independently of the Gaussian-state engine.

use num_complex::Complex64;

use crate::decoder::{self, Correction, FaceGraph};
use crate::layout::{CodeLayout, PauliKind};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense state of `n` qubits, amplitude index bit `q` = qubit `q`.
#[derive(Debug, Clone)]
pub struct DenseState {
    pub n: usize,
    pub psi: Vec<Complex64>,
}

impl DenseState {
    pub fn product(qubits: &[[Complex64; 2]]) -> Self {
        let n = qubits.len();
        assert!(n <= 26, "dense statevector limited to 26 qubits");
        let mut psi = vec![Complex64::new(1.0, 0.0)];
        // Little-endian: each new qubit becomes the highest bit so far.
        for q in qubits {
            let mut out = vec![Complex64::ZERO; psi.len() * 2];
            for (idx, &a) in psi.iter().enumerate() {
                out[idx] = a * q[0];
                out[idx | psi.len()] = a * q[1];
            }
            psi = out;
        }
        Self { n, psi }
    }

    pub fn all_plus(n: usize) -> Self {
        let amp = Complex64::new((1.0 / 2f64.powi(n as i32)).sqrt(), 0.0);
        Self {
            n,
            psi: vec![amp; 1 << n],
        }
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        assert!(n > 1e-12);
        for a in &mut self.psi {
            *a /= n;
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.psi
            .iter()
            .zip(other.psi.iter())
            .map(|(a, b)| a.conj() * *b)
            .sum()
    }

    pub fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for idx in 0..self.psi.len() {
            if idx & bit == 0 {
                self.psi.swap(idx, idx | bit);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        let bit = 1usize << q;
        for (idx, a) in self.psi.iter_mut().enumerate() {
            if idx & bit != 0 {
                *a = -*a;
            }
        }
    }

    /// Multiply by `exp(i eta Z_q)`.
    pub fn rotate_z(&mut self, q: usize, eta: f64) {
        let bit = 1usize << q;
        let (pp, pm) = (Complex64::from_polar(1.0, eta), Complex64::from_polar(1.0, -eta));
        for (idx, a) in self.psi.iter_mut().enumerate() {
            *a *= if idx & bit == 0 { pp } else { pm };
        }
    }

    /// Apply the face stabilizer (X or Z product over the face's qubits).
    pub fn apply_face(&mut self, layout: &CodeLayout, fi: usize) {
        let f = &layout.faces[fi];
        match f.kind {
            PauliKind::X => {
                let mask: usize = f.vertices.iter().map(|&u| 1usize << u).sum();
                for idx in 0..self.psi.len() {
                    let j = idx ^ mask;
                    if idx < j {
                        self.psi.swap(idx, j);
                    }
                }
            }
            PauliKind::Z => {
                let mask: usize = f.vertices.iter().map(|&u| 1usize << u).sum();
                for (idx, a) in self.psi.iter_mut().enumerate() {
                    if (idx & mask).count_ones() % 2 == 1 {
                        *a = -*a;
                    }
                }
            }
        }
    }

    /// Project onto the `sign` eigenspace of face `fi` (no renormalization).
    pub fn project_face(&mut self, layout: &CodeLayout, fi: usize, sign: i8) {
        let mut flipped = self.clone();
        flipped.apply_face(layout, fi);
        let s = f64::from(sign);
        for (a, b) in self.psi.iter_mut().zip(flipped.psi.iter()) {
            *a = (*a + s * *b) / 2.0;
        }
    }

    /// Apply the logical Z (top row Z product).
    pub fn apply_logical_z(&mut self, layout: &CodeLayout) {
        let mask: usize = layout.logical_z_support.iter().map(|&u| 1usize << u).sum();
        for (idx, a) in self.psi.iter_mut().enumerate() {
            if (idx & mask).count_ones() % 2 == 1 {
                *a = -*a;
            }
        }
    }

    /// Apply the logical X (left column X product).
    pub fn apply_logical_x(&mut self, layout: &CodeLayout) {
        let mask: usize = layout.logical_x_support.iter().map(|&u| 1usize << u).sum();
        for idx in 0..self.psi.len() {
            let j = idx ^ mask;
            if idx < j {
                self.psi.swap(idx, j);
            }
        }
    }

    /// Multiply by `exp(i theta Z_L)`.
    pub fn rotate_logical_z(&mut self, layout: &CodeLayout, theta: f64) {
        let mask: usize = layout.logical_z_support.iter().map(|&u| 1usize << u).sum();
        let (pp, pm) = (
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
        );
        for (idx, a) in self.psi.iter_mut().enumerate() {
            *a *= if (idx & mask).count_ones() % 2 == 0 { pp } else { pm };
        }
    }

    /// Apply a Pauli correction (X support then Z support).
    pub fn apply_correction(&mut self, corr: &Correction) {
        for (q, &x) in corr.x_support.iter().enumerate() {
            if x {
                self.apply_x(q);
            }
        }
        for (q, &z) in corr.z_support.iter().enumerate() {
            if z {
                self.apply_z(q);
            }
        }
    }

    pub fn expect_logical(&self, layout: &CodeLayout, which: PauliKind) -> f64 {
        let mut t = self.clone();
        match which {
            PauliKind::X => t.apply_logical_x(layout),
            PauliKind::Z => t.apply_logical_z(layout),
        }
        self.inner(&t).re
    }

    pub fn expect_logical_y(&self, layout: &CodeLayout) -> f64 {
        let mut t = self.clone();
        t.apply_logical_z(layout);
        t.apply_logical_x(layout);
        (I * self.inner(&t)).re
    }
}

/// `|+_L>`: project the all-plus product state onto the codespace.
pub fn plus_logical(layout: &CodeLayout) -> DenseState {
    let mut s = DenseState::all_plus(layout.num_qubits());
    for fi in 0..layout.faces.len() {
        s.project_face(layout, fi, 1);
    }
    s.normalize();
    s
}

/// Encoded logical state with Bloch vector `b` (unit norm):
/// `cos(t/2)|0_L> + e^{i phi} sin(t/2)|1_L>`.
pub fn logical_state(layout: &CodeLayout, b: [f64; 3]) -> DenseState {
    let plus = plus_logical(layout);
    let mut zero = plus.clone();
    {
        let mut minus = plus.clone();
        minus.apply_logical_z(layout);
        for (a, m) in zero.psi.iter_mut().zip(minus.psi.iter()) {
            *a += *m;
        }
        zero.normalize();
    }
    let theta = b[2].clamp(-1.0, 1.0).acos();
    let phi = b[1].atan2(b[0]);
    let mut one = zero.clone();
    one.apply_logical_x(layout);
    let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let phase = Complex64::from_polar(1.0, phi);
    for (za, oa) in zero.psi.iter_mut().zip(one.psi.iter()) {
        *za = c * *za + sn * phase * *oa;
    }
    zero.normalize();
    zero
}

/// Exact syndrome distribution `p(s) = <psi|Pi_s|psi>` over all faces.
/// Returns (signs per face, probability), skipping zero-probability rows.
pub fn dense_syndrome_distribution(
    layout: &CodeLayout,
    state: &DenseState,
) -> Vec<(Vec<i8>, f64)> {
    let nf = layout.faces.len();
    assert!(nf <= 24);
    let mut out = Vec::new();
    for mask in 0..(1u32 << nf) {
        let signs: Vec<i8> = (0..nf)
            .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        let mut proj = state.clone();
        for (fi, &sf) in signs.iter().enumerate() {
            proj.project_face(layout, fi, sf);
        }
        let p = proj.norm().powi(2);
        if p > 1e-14 {
            out.push((signs, p));
        }
    }
    out
}

/// One row of the exact storage reference: an X-face defect set, its
/// probability, and the residual logical rotation angle in `[0, pi)`.
#[derive(Debug, Clone)]
pub struct StorageRow {
    /// Fired X faces (indices into `layout.faces`), ascending.
    pub defects: Vec<usize>,
    pub p: f64,
    pub theta: f64,
}

/// Exact storage reference at distance 3: applies per-qubit Z rotations to
/// `|+_L>`, enumerates X-face syndromes, decodes with the shared matching
/// decoder, and extracts the residual logical angle per syndrome. Optionally
/// asserts that the syndrome distribution and the residual rotation do not
/// depend on the initial logical state.
pub fn dense_storage_reference(
    layout: &CodeLayout,
    eta: &[f64],
    check_state_independence: bool,
) -> Vec<StorageRow> {
    let x_graph = FaceGraph::build(layout, PauliKind::X);
    let x_faces = x_graph.faces.clone();
    let plus = plus_logical(layout);

    let mut corrupted = plus.clone();
    for (q, &e) in eta.iter().enumerate() {
        corrupted.rotate_z(q, e);
    }

    let alt_states: Vec<DenseState> = if check_state_independence {
        [[0.6, 0.0, 0.8], [-0.36, 0.48, 0.8], [0.0, -1.0, 0.0]]
            .iter()
            .map(|&b| {
                let mut s = logical_state(layout, b);
                for (q, &e) in eta.iter().enumerate() {
                    s.rotate_z(q, e);
                }
                s
            })
            .collect()
    } else {
        Vec::new()
    };
    let alt_inputs: Vec<DenseState> = if check_state_independence {
        [[0.6, 0.0, 0.8], [-0.36, 0.48, 0.8], [0.0, -1.0, 0.0]]
            .iter()
            .map(|&b| logical_state(layout, b))
            .collect()
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for mask in 0..(1u32 << x_faces.len()) {
        let defects: Vec<usize> = x_faces
            .iter()
            .enumerate()
            .filter(|&(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &fi)| fi)
            .collect();
        let mut proj = corrupted.clone();
        for (bit, &fi) in x_faces.iter().enumerate() {
            proj.project_face(layout, fi, if mask >> bit & 1 == 1 { -1 } else { 1 });
        }
        let p = proj.norm().powi(2);
        if p <= 1e-14 {
            continue;
        }
        proj.normalize();
        let corr = decoder::mwpm_decode(layout, &x_graph, &defects);
        proj.apply_correction(&corr);
        let theta = logical_angle_of(layout, &plus, &proj);

        if check_state_independence {
            for (alt, input) in alt_states.iter().zip(alt_inputs.iter()) {
                let mut aproj = alt.clone();
                for (bit, &fi) in x_faces.iter().enumerate() {
                    aproj.project_face(layout, fi, if mask >> bit & 1 == 1 { -1 } else { 1 });
                }
                let ap = aproj.norm().powi(2);
                assert!((ap - p).abs() < 1e-10, "p(s) depends on the input state");
                aproj.normalize();
                aproj.apply_correction(&corr);
                let mut expected = input.clone();
                expected.rotate_logical_z(layout, theta);
                let fidelity = aproj.inner(&expected).norm();
                assert!(
                    fidelity > 1.0 - 1e-9,
                    "residual rotation depends on the input state: fidelity {fidelity}"
                );
            }
        }
        rows.push(StorageRow { defects, p, theta });
    }
    rows
}

/// Residual logical angle of a corrected state relative to `|+_L>`,
/// folded into `[0, pi)`.
fn logical_angle_of(layout: &CodeLayout, plus: &DenseState, phi: &DenseState) -> f64 {
    let a = plus.inner(phi);
    let mut zphi = phi.clone();
    zphi.apply_logical_z(layout);
    let b = plus.inner(&zphi);
    // phi = e^{i alpha} (cos t |+_L> + i sin t |-_L>) gives
    // b * conj(a) = i sin t cos t, |a|^2 = cos^2 t.
    let t = (b * a.conj()).im.atan2(a.norm_sqr());
    t.rem_euclid(std::f64::consts::PI)
}

/// One row of the exact preparation reference.
#[derive(Debug, Clone)]
pub struct PrepRow {
    pub signs: Vec<i8>,
    pub p: f64,
    /// Logical Bloch vector after the shared peel correction (before any
    /// sign fixing).
    pub bloch: [f64; 3],
}

/// Exact preparation reference: syndrome distribution and per-syndrome
/// logical Bloch vector for a product input state, using the same peel
/// decoder as the Gaussian pipeline.
pub fn dense_prep_reference(layout: &CodeLayout, qubits: &[[Complex64; 2]]) -> Vec<PrepRow> {
    let x_graph = FaceGraph::build(layout, PauliKind::X);
    let z_graph = FaceGraph::build(layout, PauliKind::Z);
    let state = DenseState::product(qubits);
    let mut rows = Vec::new();
    for (signs, p) in dense_syndrome_distribution(layout, &state) {
        let mut proj = state.clone();
        for (fi, &sf) in signs.iter().enumerate() {
            proj.project_face(layout, fi, sf);
        }
        proj.normalize();
        let corr = decoder::prep_correction(layout, &x_graph, &z_graph, &signs);
        proj.apply_correction(&corr);
        let bloch = [
            proj.expect_logical(layout, PauliKind::X),
            proj.expect_logical_y(layout),
            proj.expect_logical(layout, PauliKind::Z),
        ];
        rows.push(PrepRow { signs, p, bloch });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::CodeLayout;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plus_logical_is_stabilized() {
        let layout = CodeLayout::build(3).unwrap();
        let plus = plus_logical(&layout);
        assert!((plus.norm() - 1.0).abs() < 1e-12);
        for fi in 0..layout.faces.len() {
            let mut t = plus.clone();
            t.apply_face(&layout, fi);
            assert!((plus.inner(&t).re - 1.0).abs() < 1e-10);
        }
        assert!((plus.expect_logical(&layout, PauliKind::X) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn syndrome_distribution_completeness() {
        let layout = CodeLayout::build(3).unwrap();
        let state = DenseState::all_plus(9);
        let rows = dense_syndrome_distribution(&layout, &state);
        let total: f64 = rows.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);

        let trivial = dense_syndrome_distribution(&layout, &plus_logical(&layout));
        assert_eq!(trivial.len(), 1);
        assert!(trivial[0].0.iter().all(|&s| s == 1));
        assert!((trivial[0].1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn storage_reference_trivial_cases() {
        let layout = CodeLayout::build(3).unwrap();
        let rows = dense_storage_reference(&layout, &[0.0; 9], false);
        assert_eq!(rows.len(), 1);
        assert!(rows[0].defects.is_empty());
        assert!((rows[0].p - 1.0).abs() < 1e-10);
        assert!(rows[0].theta.abs() < 1e-9);

        // Uniform pi/2 rotation acts as a logical Z.
        let rows = dense_storage_reference(&layout, &[std::f64::consts::FRAC_PI_2; 9], false);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].p - 1.0).abs() < 1e-10);
        assert!((rows[0].theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn storage_reference_state_independence() {
        let layout = CodeLayout::build(3).unwrap();
        let eta: Vec<f64> = (0..9).map(|q| 0.07 * (q as f64 + 1.0)).collect();
        let rows = dense_storage_reference(&layout, &eta, true);
        let total: f64 = rows.iter().map(|r| r.p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prep_reference_trivial_case() {
        let layout = CodeLayout::build(3).unwrap();
        let plus_qubit = [c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
        let rows = dense_prep_reference(&layout, &[plus_qubit; 9]);
        let total: f64 = rows.iter().map(|r| r.p).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for r in &rows {
            assert!((r.bloch[0] - 1.0).abs() < 1e-7, "bloch {:?}", r.bloch);
            assert!(r.bloch[1].abs() < 1e-7 && r.bloch[2].abs() < 1e-7);
        }
    }

    #[test]
    fn prep_reference_blochs_are_unit_length() {
        let layout = CodeLayout::build(3).unwrap();
        let q = |theta: f64, phi: f64| -> [Complex64; 2] {
            // exp(i phi X) exp(i theta Z) |+>
            let a = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
            let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -theta);
            [
                phi.cos() * a + Complex64::new(0.0, 1.0) * phi.sin() * b,
                phi.cos() * b + Complex64::new(0.0, 1.0) * phi.sin() * a,
            ]
        };
        let rows = dense_prep_reference(&layout, &[q(0.3, 0.2); 9]);
        let total: f64 = rows.iter().map(|r| r.p).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for r in &rows {
            let norm = (r.bloch[0].powi(2) + r.bloch[1].powi(2) + r.bloch[2].powi(2)).sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "bloch norm {norm}");
        }
    }
}
