//! Rotated surface-code geometry and its Majorana mode layout.
//!
//! A distance-`d` code has `n = d^2` qubits at the vertices of a `d x d`
//! grid, `2n - 2` edges and `n - 1` faces. Interior faces are squares with
//! four boundary edges; boundary stabilizers are 2-gons consisting of a grid
//! edge and a parallel arc edge. Each vertex hosts a cluster of four Majorana
//! modes encoding its qubit; each edge carries one mode at either endpoint,
//! and the four lattice corners carry one unpaired mode each.
//!
//! Edge orientations (which endpoint mode is the tail of the link operator
//! `i c_tail c_head`) are chosen so that the boundary of every face, plus the
//! four virtual logical faces closing the boundary paths between adjacent
//! corner modes, carries an odd number of clockwise arrows. This makes every
//! face's product of link operators equal `+1` times the encoded stabilizer,
//! and likewise for the encoded logical operators. All four virtual faces
//! must be constrained: with only two of them the solved gauge can violate
//! the global fermion parity of the corner pairings at certain distances,
//! which would wrongly assign probability zero to valid outcome strings.

use serde::Serialize;
use thiserror::Error;

use crate::engine::ModeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("distance must be an odd integer >= 3, got {0}")]
    InvalidDistance(usize),
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PauliKind {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// Straight lattice edge between adjacent vertices.
    Grid,
    /// Boundary arc parallel to a grid edge, closing a 2-gon stabilizer.
    Arc,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Vertex {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    /// Endpoint vertex indices, `a < b`.
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// Tail vertex of the link operator arrow (either `a` or `b`).
    pub tail: usize,
    pub mode_a: ModeId,
    pub mode_b: ModeId,
}

impl Edge {
    pub fn head(&self) -> usize {
        if self.tail == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn mode_at(&self, v: usize) -> ModeId {
        if v == self.a {
            self.mode_a
        } else {
            debug_assert_eq!(v, self.b);
            self.mode_b
        }
    }

    pub fn tail_mode(&self) -> ModeId {
        self.mode_at(self.tail)
    }

    pub fn head_mode(&self) -> ModeId {
        self.mode_at(self.head())
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Face {
    pub kind: PauliKind,
    /// Boundary walk in clockwise order: `edges[i]` connects `vertices[i]`
    /// to `vertices[(i + 1) % len]`.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Virtual face closing a logical operator: a boundary path of real edges
/// plus one virtual edge between two corner modes.
#[derive(Debug, Clone, Serialize)]
pub struct LogicalFace {
    pub kind: PauliKind,
    /// Corner modes (tail, head) of the virtual edge.
    pub virtual_pair: (ModeId, ModeId),
    /// Clockwise walk: `vertices[0]` carries the virtual tail mode, the
    /// virtual edge runs `vertices[0] -> vertices[1]`, then `path_edges[i]`
    /// connects `vertices[i + 1]` to `vertices[i + 2]` (cyclically).
    pub vertices: Vec<usize>,
    pub path_edges: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CodeLayout {
    pub d: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    /// Mode positions 1..4 of each vertex cluster, indexed by vertex.
    pub clusters: Vec<[ModeId; 4]>,
    /// The four unpaired corner modes: bottom-left, top-left, top-right,
    /// bottom-right (global ids 1..4).
    pub corners: [ModeId; 4],
    /// Vertex indices hosting the corner modes, same order as `corners`.
    pub corner_vertices: [usize; 4],
    /// Left logical face: virtual edge corner1 -> corner2 plus the LEFT path.
    pub left_face: LogicalFace,
    /// Top logical face: virtual edge corner2 -> corner3 plus the TOP path.
    pub top_face: LogicalFace,
    /// Right logical face: virtual edge corner3 -> corner4 plus the right
    /// boundary path. Closes the second X-basis corner pairing.
    pub right_face: LogicalFace,
    /// Bottom logical face: virtual edge corner1 -> corner4 plus the bottom
    /// boundary path. Closes the second Z-basis corner pairing.
    pub bottom_face: LogicalFace,
    /// Vertex indices of the logical X support (left column).
    pub logical_x_support: Vec<usize>,
    /// Vertex indices of the logical Z support (top row).
    pub logical_z_support: Vec<usize>,
    /// Incident edge indices per vertex, ascending.
    pub incident_edges: Vec<Vec<usize>>,
}

/// Which encoded single-qubit operator to express as a mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterOp {
    /// Encoded X: `i c_{u,1} c_{u,2}`.
    X,
    /// Encoded Z: `i c_{u,2} c_{u,3}`.
    Z,
    /// Encoded X times the cluster stabilizer: `i c_{u,3} c_{u,4}`.
    XS,
    /// Encoded Z times the cluster stabilizer: `i c_{u,1} c_{u,4}`.
    ZS,
}

/// One step of a measurement schedule with windowing hints.
#[derive(Debug, Clone)]
pub struct ScheduleStep {
    /// Clusters that must be active before this step.
    pub attach_vertices: Vec<usize>,
    /// Edge to measure (links flavor) or vertex to process (vertices flavor).
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleFlavor {
    LinksByColumn,
    VerticesByColumn,
}

const X_PAIRS: [[usize; 2]; 2] = [[0, 1], [2, 3]];
const Z_PAIRS: [[usize; 2]; 2] = [[1, 2], [0, 3]];

impl CodeLayout {
    pub fn build(d: usize) -> Result<Self, LayoutError> {
        if d < 3 || d % 2 == 0 {
            return Err(LayoutError::InvalidDistance(d));
        }
        let mut layout = Self::build_geometry(d);
        layout.solve_clusters();
        layout.solve_orientations();
        Ok(layout)
    }

    /// Qubit ordering: column-major, `index = col * d + row`.
    pub fn vertex_index(&self, row: usize, col: usize) -> usize {
        col * self.d + row
    }

    pub fn num_qubits(&self) -> usize {
        self.d * self.d
    }

    pub fn num_modes(&self) -> usize {
        4 * self.num_qubits()
    }

    fn build_geometry(d: usize) -> Self {
        let vidx = |row: usize, col: usize| col * d + row;
        let vertices: Vec<Vertex> = {
            let mut v = vec![Vertex { row: 0, col: 0 }; d * d];
            for row in 0..d {
                for col in 0..d {
                    v[vidx(row, col)] = Vertex { row, col };
                }
            }
            v
        };

        let mut edges: Vec<Edge> = Vec::with_capacity(2 * d * d - 2);
        let push_edge = |edges: &mut Vec<Edge>, u: usize, v: usize, kind: EdgeKind| -> usize {
            let (a, b) = (u.min(v), u.max(v));
            let i = edges.len();
            edges.push(Edge {
                a,
                b,
                kind,
                tail: a,
                mode_a: (5 + 2 * i) as ModeId,
                mode_b: (6 + 2 * i) as ModeId,
            });
            i
        };

        // Grid edges: horizontal then vertical, row-major.
        let mut hgrid = vec![vec![usize::MAX; d - 1]; d];
        let mut vgrid = vec![vec![usize::MAX; d]; d - 1];
        for row in 0..d {
            for col in 0..d - 1 {
                hgrid[row][col] =
                    push_edge(&mut edges, vidx(row, col), vidx(row, col + 1), EdgeKind::Grid);
            }
        }
        for row in 0..d - 1 {
            for col in 0..d {
                vgrid[row][col] =
                    push_edge(&mut edges, vidx(row, col), vidx(row + 1, col), EdgeKind::Grid);
            }
        }
        // Boundary arcs.
        let mut top_arc = vec![usize::MAX; d - 1];
        let mut bottom_arc = vec![usize::MAX; d - 1];
        let mut left_arc = vec![usize::MAX; d - 1];
        let mut right_arc = vec![usize::MAX; d - 1];
        for col in (0..d - 1).step_by(2) {
            top_arc[col] = push_edge(&mut edges, vidx(0, col), vidx(0, col + 1), EdgeKind::Arc);
        }
        for col in (1..d - 1).step_by(2) {
            bottom_arc[col] =
                push_edge(&mut edges, vidx(d - 1, col), vidx(d - 1, col + 1), EdgeKind::Arc);
        }
        for row in (1..d - 1).step_by(2) {
            left_arc[row] = push_edge(&mut edges, vidx(row, 0), vidx(row + 1, 0), EdgeKind::Arc);
        }
        for row in (0..d - 1).step_by(2) {
            right_arc[row] =
                push_edge(&mut edges, vidx(row, d - 1), vidx(row + 1, d - 1), EdgeKind::Arc);
        }
        debug_assert_eq!(edges.len(), 2 * d * d - 2);

        let mut faces: Vec<Face> = Vec::with_capacity(d * d - 1);
        // Interior squares, clockwise walk starting at the top-left vertex.
        for row in 0..d - 1 {
            for col in 0..d - 1 {
                faces.push(Face {
                    kind: if (row + col) % 2 == 1 {
                        PauliKind::X
                    } else {
                        PauliKind::Z
                    },
                    vertices: vec![
                        vidx(row, col),
                        vidx(row, col + 1),
                        vidx(row + 1, col + 1),
                        vidx(row + 1, col),
                    ],
                    edges: vec![
                        hgrid[row][col],
                        vgrid[row][col + 1],
                        hgrid[row + 1][col],
                        vgrid[row][col],
                    ],
                });
            }
        }
        // Boundary 2-gons, clockwise walks with the lattice interior inside.
        for col in 0..d - 1 {
            if top_arc[col] != usize::MAX {
                faces.push(Face {
                    kind: PauliKind::X,
                    vertices: vec![vidx(0, col), vidx(0, col + 1)],
                    edges: vec![top_arc[col], hgrid[0][col]],
                });
            }
            if bottom_arc[col] != usize::MAX {
                faces.push(Face {
                    kind: PauliKind::X,
                    vertices: vec![vidx(d - 1, col), vidx(d - 1, col + 1)],
                    edges: vec![hgrid[d - 1][col], bottom_arc[col]],
                });
            }
        }
        for row in 0..d - 1 {
            if left_arc[row] != usize::MAX {
                faces.push(Face {
                    kind: PauliKind::Z,
                    vertices: vec![vidx(row, 0), vidx(row + 1, 0)],
                    edges: vec![vgrid[row][0], left_arc[row]],
                });
            }
            if right_arc[row] != usize::MAX {
                faces.push(Face {
                    kind: PauliKind::Z,
                    vertices: vec![vidx(row + 1, d - 1), vidx(row, d - 1)],
                    edges: vec![vgrid[row][d - 1], right_arc[row]],
                });
            }
        }
        debug_assert_eq!(faces.len(), d * d - 1);

        let corners: [ModeId; 4] = [1, 2, 3, 4];
        let corner_vertices = [
            vidx(d - 1, 0),
            vidx(0, 0),
            vidx(0, d - 1),
            vidx(d - 1, d - 1),
        ];

        // Logical boundary paths, preferring arcs where one exists so that
        // every path vertex can satisfy its cluster pair constraints.
        let top_path: Vec<usize> = (0..d - 1)
            .map(|col| {
                if top_arc[col] != usize::MAX {
                    top_arc[col]
                } else {
                    hgrid[0][col]
                }
            })
            .collect();
        let left_path: Vec<usize> = (0..d - 1)
            .map(|row| {
                if left_arc[row] != usize::MAX {
                    left_arc[row]
                } else {
                    vgrid[row][0]
                }
            })
            .collect();
        let right_path: Vec<usize> = (0..d - 1)
            .map(|row| {
                if right_arc[row] != usize::MAX {
                    right_arc[row]
                } else {
                    vgrid[row][d - 1]
                }
            })
            .collect();
        let bottom_path: Vec<usize> = (0..d - 1)
            .map(|col| {
                if bottom_arc[col] != usize::MAX {
                    bottom_arc[col]
                } else {
                    hgrid[d - 1][col]
                }
            })
            .collect();

        // Top logical face walk: virtual edge corner2 -> corner3 traversed
        // left to right, then the TOP path right to left.
        let top_face = LogicalFace {
            kind: PauliKind::Z,
            virtual_pair: (corners[1], corners[2]),
            vertices: std::iter::once(vidx(0, 0))
                .chain((1..d).rev().map(|col| vidx(0, col)))
                .collect(),
            path_edges: top_path.iter().rev().copied().collect(),
        };
        // Left logical face walk: LEFT path top to bottom, then the virtual
        // edge corner1 -> corner2 traversed bottom to top.
        let left_face = LogicalFace {
            kind: PauliKind::X,
            virtual_pair: (corners[0], corners[1]),
            vertices: std::iter::once(vidx(d - 1, 0))
                .chain((0..d - 1).map(|row| vidx(row, 0)))
                .collect(),
            path_edges: left_path,
        };
        // Right logical face walk: virtual edge corner3 -> corner4 traversed
        // top to bottom, then the right boundary path bottom to top.
        let right_face = LogicalFace {
            kind: PauliKind::X,
            virtual_pair: (corners[2], corners[3]),
            vertices: std::iter::once(vidx(0, d - 1))
                .chain((1..d).rev().map(|row| vidx(row, d - 1)))
                .collect(),
            path_edges: right_path.iter().rev().copied().collect(),
        };
        // Bottom logical face walk: virtual edge corner1 -> corner4 traversed
        // left to right, then the bottom boundary path right to left.
        let bottom_face = LogicalFace {
            kind: PauliKind::Z,
            virtual_pair: (corners[0], corners[3]),
            vertices: std::iter::once(vidx(d - 1, 0))
                .chain((1..d).rev().map(|col| vidx(d - 1, col)))
                .collect(),
            path_edges: bottom_path.iter().rev().copied().collect(),
        };

        let mut incident_edges = vec![Vec::new(); d * d];
        for (i, e) in edges.iter().enumerate() {
            incident_edges[e.a].push(i);
            incident_edges[e.b].push(i);
        }

        CodeLayout {
            d,
            vertices,
            edges,
            faces,
            clusters: vec![[0; 4]; d * d],
            corners,
            corner_vertices,
            left_face,
            top_face,
            right_face,
            bottom_face,
            logical_x_support: (0..d).map(|row| vidx(row, 0)).collect(),
            logical_z_support: (0..d).map(|col| vidx(0, col)).collect(),
            incident_edges,
        }
    }

    /// Pair constraints per vertex: for every face the two boundary items
    /// meeting at a vertex must occupy an X-type or Z-type mode-position
    /// pair of that vertex's cluster.
    fn pair_constraints(&self) -> Vec<Vec<(ConstraintSlot, ConstraintSlot, PauliKind)>> {
        let mut cons: Vec<Vec<(ConstraintSlot, ConstraintSlot, PauliKind)>> =
            vec![Vec::new(); self.vertices.len()];
        for face in &self.faces {
            let k = face.vertices.len();
            for i in 0..k {
                let v = face.vertices[i];
                let e_in = face.edges[(i + k - 1) % k];
                let e_out = face.edges[i];
                cons[v].push((
                    ConstraintSlot::Edge(e_in),
                    ConstraintSlot::Edge(e_out),
                    face.kind,
                ));
            }
        }
        for lf in [
            &self.left_face,
            &self.top_face,
            &self.right_face,
            &self.bottom_face,
        ] {
            let k = lf.vertices.len();
            for i in 0..k {
                let v = lf.vertices[i];
                // Walk edges: index 0 is the virtual edge, then path edges.
                let slot_of = |j: usize| -> ConstraintSlot {
                    if j == 0 {
                        ConstraintSlot::Corner
                    } else {
                        ConstraintSlot::Edge(lf.path_edges[j - 1])
                    }
                };
                cons[v].push((slot_of((i + k - 1) % k), slot_of(i), lf.kind));
            }
        }
        cons
    }

    fn solve_clusters(&mut self) {
        let cons = self.pair_constraints();
        let is_corner: Vec<Option<ModeId>> = (0..self.vertices.len())
            .map(|v| {
                self.corner_vertices
                    .iter()
                    .position(|&cv| cv == v)
                    .map(|i| self.corners[i])
            })
            .collect();
        for v in 0..self.vertices.len() {
            // Slots: incident edges ascending, then the corner mode if any.
            let mut slots: Vec<(ConstraintSlot, ModeId)> = self.incident_edges[v]
                .iter()
                .map(|&e| (ConstraintSlot::Edge(e), self.edges[e].mode_at(v)))
                .collect();
            if let Some(c) = is_corner[v] {
                slots.push((ConstraintSlot::Corner, c));
            }
            assert_eq!(slots.len(), 4, "vertex {v} does not have 4 mode slots");
            let mut found = false;
            'perm: for perm in permutations4() {
                // perm[slot] = position 0..3
                for &(sa, sb, kind) in &cons[v] {
                    let pa = perm[slot_index(&slots, sa)];
                    let pb = perm[slot_index(&slots, sb)];
                    let pairset = if kind == PauliKind::X { &X_PAIRS } else { &Z_PAIRS };
                    let hit = pairset
                        .iter()
                        .any(|p| (p[0] == pa && p[1] == pb) || (p[0] == pb && p[1] == pa));
                    if !hit {
                        continue 'perm;
                    }
                }
                let mut cluster = [0 as ModeId; 4];
                for (si, &(_, mode)) in slots.iter().enumerate() {
                    cluster[perm[si]] = mode;
                }
                self.clusters[v] = cluster;
                found = true;
                break;
            }
            assert!(found, "no consistent cluster assignment at vertex {v}");
        }
    }

    fn position_of(&self, v: usize, mode: ModeId) -> usize {
        self.clusters[v]
            .iter()
            .position(|&m| m == mode)
            .expect("mode not in cluster")
    }

    /// The canonical arrow (tail position, head position) of the encoded
    /// operator occupying an unordered position pair.
    fn pair_arrow(pa: usize, pb: usize) -> (usize, usize) {
        let (lo, hi) = (pa.min(pb), pa.max(pb));
        match (lo, hi) {
            (0, 1) => (0, 1), // encoded X
            (2, 3) => (2, 3), // encoded X * S
            (1, 2) => (1, 2), // encoded Z
            (0, 3) => (0, 3), // encoded Z * S
            _ => panic!("positions {lo},{hi} do not form an encoded pair"),
        }
    }

    /// Parity (0/1) of clockwise vertex arrows plus fixed virtual-edge
    /// arrows around one face walk; `edge_dirs[i]` is the traversal
    /// direction of walk edge `i` as (from_vertex, to_vertex).
    fn walk_fixed_parity(&self, walk: &FaceWalk) -> usize {
        let k = walk.vertices.len();
        let mut parity = 0usize;
        for i in 0..k {
            let v = walk.vertices[i];
            let m_in = walk.mode_at(self, (i + k - 1) % k, v);
            let m_out = walk.mode_at(self, i, v);
            let (pa, pb) = (self.position_of(v, m_in), self.position_of(v, m_out));
            let (tail_pos, _) = Self::pair_arrow(pa, pb);
            if pa == tail_pos {
                parity ^= 1;
            }
        }
        for i in 0..k {
            if let WalkEdge::Virtual { tail, .. } = walk.edges[i] {
                let from = walk.vertices[i];
                // Clockwise iff the fixed arrow agrees with the traversal.
                let tail_vertex = self
                    .corner_vertices[self.corners.iter().position(|&c| c == tail).unwrap()];
                if tail_vertex == from {
                    parity ^= 1;
                }
            }
        }
        parity
    }

    fn all_walks(&self) -> Vec<FaceWalk> {
        let mut walks: Vec<FaceWalk> = self
            .faces
            .iter()
            .map(|f| FaceWalk {
                vertices: f.vertices.clone(),
                edges: f.edges.iter().map(|&e| WalkEdge::Real(e)).collect(),
            })
            .collect();
        for lf in [
            &self.left_face,
            &self.top_face,
            &self.right_face,
            &self.bottom_face,
        ] {
            let mut edges = vec![WalkEdge::Virtual {
                tail: lf.virtual_pair.0,
                head: lf.virtual_pair.1,
            }];
            edges.extend(lf.path_edges.iter().map(|&e| WalkEdge::Real(e)));
            walks.push(FaceWalk {
                vertices: lf.vertices.clone(),
                edges,
            });
        }
        walks
    }

    /// Choose edge orientations so that every face walk (real and logical)
    /// has an odd number of clockwise arrows: a GF(2) linear solve with one
    /// flip variable per edge.
    fn solve_orientations(&mut self) {
        let walks = self.all_walks();
        let ne = self.edges.len();
        let words = ne.div_ceil(64);
        // Row = equation: bitset of edge variables plus rhs bit.
        let mut rows: Vec<(Vec<u64>, u8)> = Vec::with_capacity(walks.len());
        for walk in &walks {
            let mut bits = vec![0u64; words];
            let mut rhs = 1 ^ self.walk_fixed_parity(walk) as u8;
            let k = walk.vertices.len();
            for i in 0..k {
                if let WalkEdge::Real(e) = walk.edges[i] {
                    bits[e / 64] ^= 1u64 << (e % 64);
                    // Default arrow a -> b is clockwise iff traversed a -> b.
                    if self.edges[e].a == walk.vertices[i] {
                        rhs ^= 1;
                    }
                }
            }
            rows.push((bits, rhs & 1));
        }
        // Gaussian elimination, pivoting on the lowest set bit.
        let mut flips = vec![false; ne];
        let mut pivot_of_row: Vec<usize> = Vec::new();
        let mut reduced: Vec<(Vec<u64>, u8)> = Vec::new();
        for (mut bits, mut rhs) in rows {
            loop {
                let pivot = lowest_bit(&bits);
                match pivot {
                    None => {
                        assert_eq!(rhs, 0, "inconsistent orientation parity system");
                        break;
                    }
                    Some(p) => {
                        if let Some(ri) = pivot_of_row.iter().position(|&q| q == p) {
                            let (rb, rr) = &reduced[ri];
                            for (x, y) in bits.iter_mut().zip(rb.iter()) {
                                *x ^= *y;
                            }
                            rhs ^= rr;
                        } else {
                            pivot_of_row.push(p);
                            reduced.push((bits, rhs));
                            break;
                        }
                    }
                }
            }
        }
        // Back-substitute with free variables set to 0. Each row's pivot is
        // its lowest set bit, so solving in decreasing pivot order ensures
        // all other variables of a row are already fixed.
        let mut row_order: Vec<usize> = (0..reduced.len()).collect();
        row_order.sort_by_key(|&i| std::cmp::Reverse(pivot_of_row[i]));
        for i in row_order {
            let (bits, rhs) = &reduced[i];
            let p = pivot_of_row[i];
            let mut val = *rhs;
            for e in (0..ne).filter(|&e| e != p) {
                if bits[e / 64] >> (e % 64) & 1 == 1 && flips[e] {
                    val ^= 1;
                }
            }
            flips[p] = val == 1;
        }
        for (e, flip) in flips.iter().enumerate() {
            if *flip {
                self.edges[e].tail = self.edges[e].b;
            }
        }
    }

    /// Recompute the clockwise-arrow parity of every face (real and
    /// logical) from the final orientations; returns the indices of walks
    /// whose parity is not odd (empty means all pass).
    pub fn check_orientations(&self) -> Vec<usize> {
        let mut bad = Vec::new();
        for (wi, walk) in self.all_walks().iter().enumerate() {
            let mut parity = self.walk_fixed_parity(walk);
            let k = walk.vertices.len();
            for i in 0..k {
                if let WalkEdge::Real(e) = walk.edges[i] {
                    if self.edges[e].tail == walk.vertices[i] {
                        parity ^= 1;
                    }
                }
            }
            if parity != 1 {
                bad.push(wi);
            }
        }
        bad
    }

    /// Face syndromes from link outcomes: `s_f = prod_{e in df} m_e`.
    pub fn face_syndromes(&self, m: &[i8]) -> Vec<i8> {
        self.faces
            .iter()
            .map(|f| f.edges.iter().map(|&e| m[e] as i32).product::<i32>() as i8)
            .collect()
    }

    /// X-face syndromes from per-vertex outcomes: `s_f = prod_{u in f} m_u`,
    /// reported as (face index, syndrome) for X faces only.
    pub fn x_face_syndromes_from_vertex_outcomes(&self, m: &[i8]) -> Vec<(usize, i8)> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind == PauliKind::X)
            .map(|(i, f)| {
                (
                    i,
                    f.vertices.iter().map(|&u| m[u] as i32).product::<i32>() as i8,
                )
            })
            .collect()
    }

    /// The mode pair realizing an encoded single-qubit operator at `u`.
    pub fn encoding_pairs(&self, u: usize, op: ClusterOp) -> Result<(ModeId, ModeId), LayoutError> {
        let c = self
            .clusters
            .get(u)
            .ok_or(LayoutError::UnknownVertex(u))?;
        Ok(match op {
            ClusterOp::X => (c[0], c[1]),
            ClusterOp::Z => (c[1], c[2]),
            ClusterOp::XS => (c[2], c[3]),
            ClusterOp::ZS => (c[0], c[3]),
        })
    }

    /// Edge sweep order for link measurements: by min endpoint column, then
    /// min endpoint row, then edge index. Keeps the active window O(d).
    pub fn link_sweep_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by_key(|&i| {
            let e = &self.edges[i];
            let (va, vb) = (&self.vertices[e.a], &self.vertices[e.b]);
            (va.col.min(vb.col), va.row.min(vb.row), i)
        });
        order
    }

    /// Qubit processing order: column-major (the vertex index order).
    pub fn vertex_order(&self) -> Vec<usize> {
        (0..self.vertices.len()).collect()
    }

    /// Measurement schedule with attach hints: before each step the listed
    /// clusters must be active; measured pairs can be detached afterwards.
    pub fn measurement_schedule(&self, flavor: ScheduleFlavor) -> Vec<ScheduleStep> {
        let mut attached = vec![false; self.vertices.len()];
        let mut steps = Vec::new();
        match flavor {
            ScheduleFlavor::LinksByColumn => {
                for e in self.link_sweep_order() {
                    let mut attach = Vec::new();
                    for v in [self.edges[e].a, self.edges[e].b] {
                        if !attached[v] {
                            attached[v] = true;
                            attach.push(v);
                        }
                    }
                    steps.push(ScheduleStep {
                        attach_vertices: attach,
                        target: e,
                    });
                }
            }
            ScheduleFlavor::VerticesByColumn => {
                for v in self.vertex_order() {
                    let mut attach = Vec::new();
                    if !attached[v] {
                        attached[v] = true;
                        attach.push(v);
                    }
                    steps.push(ScheduleStep {
                        attach_vertices: attach,
                        target: v,
                    });
                }
            }
        }
        steps
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serialization cannot fail")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ConstraintSlot {
    Edge(usize),
    Corner,
}

fn slot_index(slots: &[(ConstraintSlot, ModeId)], s: ConstraintSlot) -> usize {
    slots
        .iter()
        .position(|&(slot, _)| slot == s)
        .expect("constraint references a slot not incident to the vertex")
}

#[derive(Debug, Clone, Copy)]
enum WalkEdge {
    Real(usize),
    Virtual { tail: ModeId, head: ModeId },
}

struct FaceWalk {
    vertices: Vec<usize>,
    edges: Vec<WalkEdge>,
}

impl FaceWalk {
    /// Mode of walk edge `i` at vertex `v`.
    fn mode_at(&self, layout: &CodeLayout, i: usize, v: usize) -> ModeId {
        match self.edges[i] {
            WalkEdge::Real(e) => layout.edges[e].mode_at(v),
            WalkEdge::Virtual { tail, head } => {
                let ti = layout.corners.iter().position(|&c| c == tail).unwrap();
                if layout.corner_vertices[ti] == v {
                    tail
                } else {
                    head
                }
            }
        }
    }
}

fn permutations4() -> impl Iterator<Item = [usize; 4]> {
    let mut perms = Vec::with_capacity(24);
    let mut items = [0usize, 1, 2, 3];
    heap_permute(&mut items, 4, &mut perms);
    perms.sort();
    perms.into_iter()
}

fn heap_permute(items: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 1 {
        out.push(*items);
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn lowest_bit(bits: &[u64]) -> Option<usize> {
    for (w, &word) in bits.iter().enumerate() {
        if word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn invalid_distances_rejected() {
        assert!(matches!(
            CodeLayout::build(2),
            Err(LayoutError::InvalidDistance(2))
        ));
        assert!(matches!(
            CodeLayout::build(1),
            Err(LayoutError::InvalidDistance(1))
        ));
    }

    #[test]
    fn counts_d3_and_d5() {
        let l3 = CodeLayout::build(3).unwrap();
        assert_eq!(l3.vertices.len(), 9);
        assert_eq!(l3.edges.len(), 16);
        assert_eq!(l3.faces.len(), 8);
        assert_eq!(l3.num_modes(), 36);
        let x = l3.faces.iter().filter(|f| f.kind == PauliKind::X).count();
        assert_eq!(x, 4);

        let l5 = CodeLayout::build(5).unwrap();
        assert_eq!(l5.vertices.len(), 25);
        assert_eq!(l5.edges.len(), 48);
        assert_eq!(l5.faces.len(), 24);
        assert_eq!(l5.num_modes(), 100);
    }

    #[test]
    fn euler_relation() {
        for d in [3, 5, 7] {
            let l = CodeLayout::build(d).unwrap();
            let (v, e, f) = (l.vertices.len(), l.edges.len(), l.faces.len());
            assert_eq!(v as i64 - e as i64 + f as i64, 1);
        }
    }

    #[test]
    fn every_grid_edge_borders_one_x_one_z_face() {
        let l = CodeLayout::build(5).unwrap();
        for (ei, e) in l.edges.iter().enumerate() {
            if e.kind != EdgeKind::Grid {
                continue;
            }
            let kinds: Vec<PauliKind> = l
                .faces
                .iter()
                .filter(|f| f.edges.contains(&ei))
                .map(|f| f.kind)
                .collect();
            if kinds.len() == 2 {
                assert_ne!(kinds[0], kinds[1], "edge {ei} borders two same-kind faces");
            }
        }
    }

    #[test]
    fn clusters_partition_all_modes() {
        for d in [3, 5, 9] {
            let l = CodeLayout::build(d).unwrap();
            let mut seen = HashSet::new();
            for c in &l.clusters {
                for &m in c {
                    assert!(m >= 1 && m as usize <= l.num_modes());
                    assert!(seen.insert(m), "mode {m} in two clusters");
                }
            }
            assert_eq!(seen.len(), l.num_modes());
            for (i, &cm) in l.corners.iter().enumerate() {
                assert!(l.clusters[l.corner_vertices[i]].contains(&cm));
            }
        }
    }

    #[test]
    fn orientation_parity_holds() {
        for d in [3, 5, 7, 9] {
            let l = CodeLayout::build(d).unwrap();
            assert!(l.check_orientations().is_empty(), "bad parity at d={d}");
        }
    }

    #[test]
    fn flipping_one_edge_breaks_only_adjacent_faces() {
        let mut l = CodeLayout::build(3).unwrap();
        let e = l.faces[0].edges[0];
        l.edges[e].tail = l.edges[e].other(l.edges[e].tail);
        let bad = l.check_orientations();
        assert!(!bad.is_empty() && bad.len() <= 2);
        let walks_with_e: Vec<usize> = l
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.edges.contains(&e))
            .map(|(i, _)| i)
            .collect();
        for b in &bad {
            assert!(walks_with_e.contains(b) || *b >= l.faces.len());
        }
    }

    #[test]
    fn face_syndromes_products() {
        let l = CodeLayout::build(3).unwrap();
        let all_plus = vec![1i8; l.edges.len()];
        assert!(l.face_syndromes(&all_plus).iter().all(|&s| s == 1));

        // Flip one interior grid edge: exactly its adjacent faces flip.
        let mut m = all_plus.clone();
        let target = l
            .faces
            .iter()
            .find(|f| f.vertices.len() == 4)
            .unwrap()
            .edges[0];
        m[target] = -1;
        let s = l.face_syndromes(&m);
        for (fi, f) in l.faces.iter().enumerate() {
            let expected = if f.edges.contains(&target) { -1 } else { 1 };
            assert_eq!(s[fi], expected);
        }
    }

    #[test]
    fn vertex_outcome_syndromes() {
        let l = CodeLayout::build(3).unwrap();
        let all_plus = vec![1i8; l.vertices.len()];
        assert!(l
            .x_face_syndromes_from_vertex_outcomes(&all_plus)
            .iter()
            .all(|&(_, s)| s == 1));
        let mut m = all_plus;
        m[l.vertex_index(1, 1)] = -1;
        let fired: Vec<usize> = l
            .x_face_syndromes_from_vertex_outcomes(&m)
            .into_iter()
            .filter(|&(_, s)| s == -1)
            .map(|(f, _)| f)
            .collect();
        for &f in &fired {
            assert!(l.faces[f].vertices.contains(&l.vertex_index(1, 1)));
        }
        assert!(!fired.is_empty() && fired.len() <= 2);
    }

    #[test]
    fn logical_paths_have_length_d_minus_1() {
        for d in [3, 5, 7] {
            let l = CodeLayout::build(d).unwrap();
            assert_eq!(l.left_face.path_edges.len(), d - 1);
            assert_eq!(l.top_face.path_edges.len(), d - 1);
        }
    }

    #[test]
    fn schedule_covers_everything_once() {
        let l = CodeLayout::build(5).unwrap();
        let links = l.measurement_schedule(ScheduleFlavor::LinksByColumn);
        assert_eq!(links.len(), l.edges.len());
        let targets: HashSet<usize> = links.iter().map(|s| s.target).collect();
        assert_eq!(targets.len(), l.edges.len());
        let attached: usize = links.iter().map(|s| s.attach_vertices.len()).sum();
        assert_eq!(attached, l.vertices.len());

        let verts = l.measurement_schedule(ScheduleFlavor::VerticesByColumn);
        assert_eq!(verts.len(), l.vertices.len());
        for (i, s) in verts.iter().enumerate() {
            assert_eq!(s.target, i);
        }
    }

    #[test]
    fn layout_dump_is_valid_json() {
        let l = CodeLayout::build(3).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&l.to_json()).unwrap();
        assert_eq!(parsed["d"], 3);
    }
}
