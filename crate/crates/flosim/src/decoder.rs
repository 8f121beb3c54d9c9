//! Syndrome decoders: minimum-weight perfect matching for storage, and a
//! simplified peel-to-boundary decoder for state preparation.
//!
//! Both operate on the face graph of one Pauli kind: two faces are adjacent
//! iff they share a qubit, and a face touches the boundary iff it contains a
//! qubit lying in exactly one face of that kind. Flipping the complementary
//! Pauli on a qubit toggles the adjacent faces' syndromes, so defect pairs
//! are corrected along shortest face-graph paths.

use std::collections::VecDeque;

use petgraph::graph::UnGraph;
use rustworkx_core::max_weight_matching::max_weight_matching;

use crate::layout::{CodeLayout, PauliKind};

/// A Pauli correction as X/Z support bit-vectors over qubits, with its
/// commutation signs against the logical operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correction {
    pub x_support: Vec<bool>,
    pub z_support: Vec<bool>,
    pub lambda_x: i8,
    pub lambda_y: i8,
    pub lambda_z: i8,
}

impl Correction {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            x_support: vec![false; num_qubits],
            z_support: vec![false; num_qubits],
            lambda_x: 1,
            lambda_y: 1,
            lambda_z: 1,
        }
    }

    pub fn weight(&self) -> usize {
        self.x_support
            .iter()
            .zip(self.z_support.iter())
            .filter(|&(&x, &z)| x || z)
            .count()
    }
}

/// Face graph of one Pauli kind, with boundary connections.
pub struct FaceGraph {
    kind: PauliKind,
    /// Indices into `layout.faces` of the faces of this kind.
    pub faces: Vec<usize>,
    /// Adjacency: for each local face, (neighbor local face, shared qubit),
    /// ascending by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
    /// Qubits connecting each local face to the boundary, ascending.
    boundary_qubits: Vec<Vec<usize>>,
}

impl FaceGraph {
    pub fn build(layout: &CodeLayout, kind: PauliKind) -> Self {
        let faces: Vec<usize> = layout
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind == kind)
            .map(|(i, _)| i)
            .collect();
        let local_of: Vec<Option<usize>> = {
            let mut v = vec![None; layout.faces.len()];
            for (li, &fi) in faces.iter().enumerate() {
                v[fi] = Some(li);
            }
            v
        };
        let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); layout.vertices.len()];
        for (li, &fi) in faces.iter().enumerate() {
            for &v in &layout.faces[fi].vertices {
                at_vertex[v].push(li);
            }
        }
        let mut adj = vec![Vec::new(); faces.len()];
        let mut boundary_qubits = vec![Vec::new(); faces.len()];
        for (v, locals) in at_vertex.iter().enumerate() {
            match locals.as_slice() {
                [only] => boundary_qubits[*only].push(v),
                [a, b] => {
                    adj[*a].push((*b, v));
                    adj[*b].push((*a, v));
                }
                other => panic!("qubit {v} lies in {} same-kind faces", other.len()),
            }
        }
        for list in &mut adj {
            list.sort();
        }
        for list in &mut boundary_qubits {
            list.sort();
        }
        let _ = local_of;
        Self {
            kind,
            faces,
            adj,
            boundary_qubits,
        }
    }

    pub fn kind(&self) -> PauliKind {
        self.kind
    }

    pub fn local_index(&self, face: usize) -> Option<usize> {
        self.faces.iter().position(|&f| f == face)
    }

    /// BFS from a local face: per-node distance and predecessor
    /// (previous local face, qubit used to step). Deterministic by
    /// ascending-neighbor expansion.
    fn bfs(&self, start: usize) -> (Vec<u32>, Vec<Option<(usize, usize)>>) {
        let mut dist = vec![u32::MAX; self.faces.len()];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; self.faces.len()];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(f) = queue.pop_front() {
            for &(g, q) in &self.adj[f] {
                if dist[g] == u32::MAX {
                    dist[g] = dist[f] + 1;
                    pred[g] = Some((f, q));
                    queue.push_back(g);
                }
            }
        }
        (dist, pred)
    }

    /// Qubits of the shortest path between two local faces.
    fn path_qubits(&self, from: usize, to: usize) -> Vec<usize> {
        let (dist, pred) = self.bfs(from);
        assert_ne!(dist[to], u32::MAX, "face graph is disconnected");
        let mut qubits = Vec::new();
        let mut cur = to;
        while cur != from {
            let (prev, q) = pred[cur].expect("predecessor chain broken");
            qubits.push(q);
            cur = prev;
        }
        qubits
    }

    /// Distance from a local face to the boundary, and the qubits of a
    /// shortest realizing path.
    fn boundary_path(&self, from: usize) -> (u32, Vec<usize>) {
        let (dist, pred) = self.bfs(from);
        let mut best: Option<(u32, usize)> = None;
        for (f, bq) in self.boundary_qubits.iter().enumerate() {
            if bq.is_empty() || dist[f] == u32::MAX {
                continue;
            }
            let total = dist[f] + 1;
            if best.map(|(w, _)| total < w).unwrap_or(true) {
                best = Some((total, f));
            }
        }
        let (w, via) = best.expect("no boundary reachable");
        let mut qubits = vec![self.boundary_qubits[via][0]];
        let mut cur = via;
        while cur != from {
            let (prev, q) = pred[cur].expect("predecessor chain broken");
            qubits.push(q);
            cur = prev;
        }
        (w, qubits)
    }

    fn pairwise_distance(&self, from: usize, to: usize) -> u32 {
        let (dist, _) = self.bfs(from);
        dist[to]
    }
}

/// Minimum-weight perfect matching correction for a set of defect faces of
/// one kind (X-face defects by default in storage). Flips the complementary
/// Pauli along shortest defect-pairing paths; unmatched defects pair with
/// the boundary through one virtual node each.
pub fn mwpm_decode(layout: &CodeLayout, graph: &FaceGraph, defects: &[usize]) -> Correction {
    let n = layout.num_qubits();
    let mut corr = Correction::identity(n);
    if defects.is_empty() {
        return corr;
    }
    let mut locals: Vec<usize> = defects
        .iter()
        .map(|&f| graph.local_index(f).expect("defect face of wrong kind"))
        .collect();
    locals.sort();
    let k = locals.len();

    // Node layout: 0..k defects, k..2k their virtual boundary twins.
    let mut dist = vec![vec![0u32; k]; k];
    let mut bdist = vec![0u32; k];
    let mut bpath: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        let (d, _) = graph.bfs(locals[i]);
        for j in 0..k {
            dist[i][j] = d[locals[j]];
        }
        let (w, path) = graph.boundary_path(locals[i]);
        bdist[i] = w;
        bpath.push(path);
    }

    let mut g: UnGraph<(), i128> = UnGraph::new_undirected();
    let nodes: Vec<_> = (0..2 * k).map(|_| g.add_node(())).collect();
    let mut wmax: i128 = 1;
    for i in 0..k {
        for j in i + 1..k {
            wmax = wmax.max(dist[i][j] as i128);
        }
        wmax = wmax.max(bdist[i] as i128);
    }
    for i in 0..k {
        for j in i + 1..k {
            g.add_edge(nodes[i], nodes[j], wmax + 1 - dist[i][j] as i128);
            g.add_edge(nodes[k + i], nodes[k + j], wmax + 1);
        }
        g.add_edge(nodes[i], nodes[k + i], wmax + 1 - bdist[i] as i128);
    }
    let matching = max_weight_matching(&g, true, |e| Ok::<i128, ()>(*e.weight()), true)
        .expect("matching failed");

    let mut flip = |qubits: &[usize]| {
        let support = if graph.kind() == PauliKind::X {
            &mut corr.z_support
        } else {
            &mut corr.x_support
        };
        for &q in qubits {
            support[q] = !support[q];
        }
    };
    for &(a, b) in &matching {
        let (a, b) = (a.min(b), a.max(b));
        if a < k && b < k {
            flip(&graph.path_qubits(locals[a], locals[b]));
        } else if a < k && b == k + a {
            flip(&bpath[a]);
        }
    }
    set_commutation_signs(layout, &mut corr);
    corr
}

/// Simplified preparation decoder: peel each defect to the boundary along a
/// canonical shortest path, independently per defect.
pub fn prep_correction(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    z_graph: &FaceGraph,
    s: &[i8],
) -> Correction {
    let mut corr = Correction::identity(layout.num_qubits());
    for (fi, &sf) in s.iter().enumerate() {
        if sf != -1 {
            continue;
        }
        let graph = if layout.faces[fi].kind == PauliKind::X {
            x_graph
        } else {
            z_graph
        };
        let local = graph.local_index(fi).unwrap();
        let (_, qubits) = graph.boundary_path(local);
        let support = if graph.kind() == PauliKind::X {
            &mut corr.z_support
        } else {
            &mut corr.x_support
        };
        for q in qubits {
            support[q] = !support[q];
        }
    }
    set_commutation_signs(layout, &mut corr);
    corr
}

/// Recompute lambda signs from support overlaps with the logical operators.
pub fn set_commutation_signs(layout: &CodeLayout, corr: &mut Correction) {
    let (lx, lz) = commutation_signs(layout, corr);
    corr.lambda_x = lx;
    corr.lambda_z = lz;
    corr.lambda_y = lx * lz;
}

/// (lambda^X, lambda^Z): parities of the correction's anticommuting overlap
/// with the logical X (left column) and logical Z (top row) supports.
pub fn commutation_signs(layout: &CodeLayout, corr: &Correction) -> (i8, i8) {
    let zx = layout
        .logical_x_support
        .iter()
        .filter(|&&u| corr.z_support[u])
        .count();
    let xz = layout
        .logical_z_support
        .iter()
        .filter(|&&u| corr.x_support[u])
        .count();
    (
        if zx % 2 == 0 { 1 } else { -1 },
        if xz % 2 == 0 { 1 } else { -1 },
    )
}

/// If the logical X expectation read with this correction is negative,
/// absorb a logical Z so the final state has `<X_L> >= 0`. Exactly zero
/// keeps the identity.
pub fn fix_sign(layout: &CodeLayout, corr: &mut Correction, bx: f64) -> bool {
    if bx >= 0.0 {
        return false;
    }
    for &u in &layout.logical_z_support {
        corr.z_support[u] = !corr.z_support[u];
    }
    corr.lambda_x = -corr.lambda_x;
    corr.lambda_y = -corr.lambda_y;
    true
}

/// Syndrome of a Pauli support: face `f` fires iff the anticommuting
/// support overlaps its vertex set oddly.
pub fn syndrome_of_support(layout: &CodeLayout, corr: &Correction) -> Vec<i8> {
    layout
        .faces
        .iter()
        .map(|f| {
            let support = if f.kind == PauliKind::X {
                &corr.z_support
            } else {
                &corr.x_support
            };
            let overlap = f.vertices.iter().filter(|&&u| support[u]).count();
            if overlap % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Exhaustive minimum-weight matching over defect pairings and boundary
/// assignments, for cross-checking mwpm on small defect sets.
pub fn exhaustive_min_weight(graph: &FaceGraph, defects: &[usize]) -> u32 {
    let locals: Vec<usize> = defects
        .iter()
        .map(|&f| graph.local_index(f).unwrap())
        .collect();
    assert!(locals.len() <= 8);
    let k = locals.len();
    let mut dist = vec![vec![0u32; k]; k];
    let mut bdist = vec![0u32; k];
    for i in 0..k {
        for j in 0..k {
            dist[i][j] = graph.pairwise_distance(locals[i], locals[j]);
        }
        bdist[i] = graph.boundary_path(locals[i]).0;
    }
    fn rec(rem: &mut Vec<usize>, dist: &[Vec<u32>], bdist: &[u32]) -> u32 {
        match rem.first().copied() {
            None => 0,
            Some(first) => {
                rem.remove(0);
                let mut best = bdist[first] + rec(rem, dist, bdist);
                let snapshot = rem.clone();
                for (pos, &other) in snapshot.iter().enumerate() {
                    rem.remove(pos);
                    best = best.min(dist[first][other] + rec(rem, dist, bdist));
                    rem.insert(pos, other);
                }
                rem.insert(0, first);
                best
            }
        }
    }
    let mut rem: Vec<usize> = (0..k).collect();
    rec(&mut rem, &dist, &bdist)
}
