//! Routing-card topologies, EP-layer scheduling via node-disjoint path
//! packing, exact verification of the graph-state Bell protocol and the
//! EP-mediated remote CX, and translation of card parameters into error
//! rates.
//!
//! External nodes couple to the intermediate-block modules (2 per module),
//! internal nodes only have on-card couplings. Thickness-1 topologies carry
//! a planar-embedding certificate (a rotation system) that is verified
//! against Euler's formula; Ruche networks need crossing couplers and are
//! tagged thickness 2.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::pauli::{Gate, PauliKind, PauliString};
use crate::tableau::{OutcomeSource, StabilizerTableau};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("node {node} has degree {degree}, exceeding the bound {bound}")]
    DegreeBound { node: u32, degree: usize, bound: usize },
    #[error("module count must be at least 1")]
    NoModules,
    #[error("ruche ring must fit 2M external nodes (ring {ring}, externals {externals})")]
    RingTooSmall { ring: usize, externals: usize },
    #[error("request endpoint {0} is not an external node")]
    NotExternal(u32),
    #[error("request ({0}, {1}) endpoints are disconnected")]
    Disconnected(u32, u32),
    #[error("topology parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("chain length must be at least 2 (got {0})")]
    ChainTooShort(usize),
    #[error("branch {branch:#b} of nu={nu} failed: {check} not satisfied after correction")]
    BellBranchFailed { nu: usize, branch: u64, check: &'static str },
    #[error("remote CX branch (m1={m1}, m2={m2}) failed Choi check {check}")]
    RemoteCxBranchFailed { m1: bool, m2: bool, check: &'static str },
}

/// Default cap on card-internal couplings per node.
pub const DEFAULT_DEGREE_BOUND: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    External,
    Internal,
}

/// A routing-card coupling graph.
#[derive(Debug, Clone)]
pub struct RoutingCardGraph {
    kinds: Vec<NodeKind>,
    adj: Vec<Vec<u32>>,
    thickness: u8,
    degree_bound: usize,
    /// Cyclic neighbor order per node, when a planar embedding is known.
    rotation: Option<Vec<Vec<u32>>>,
}

impl RoutingCardGraph {
    fn from_edges(
        kinds: Vec<NodeKind>,
        edges: &[(u32, u32)],
        thickness: u8,
        degree_bound: usize,
        rotation: Option<Vec<Vec<u32>>>,
    ) -> Result<Self, TopologyError> {
        let n = kinds.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            if !adj[a as usize].contains(&b) {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let g = RoutingCardGraph { kinds, adj, thickness, degree_bound, rotation };
        g.check_degree()?;
        Ok(g)
    }

    fn check_degree(&self) -> Result<(), TopologyError> {
        for (node, nbrs) in self.adj.iter().enumerate() {
            if nbrs.len() > self.degree_bound {
                return Err(TopologyError::DegreeBound {
                    node: node as u32,
                    degree: nbrs.len(),
                    bound: self.degree_bound,
                });
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn kind(&self, node: u32) -> NodeKind {
        self.kinds[node as usize]
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adj[node as usize]
    }

    pub fn external_nodes(&self) -> Vec<u32> {
        (0..self.node_count() as u32)
            .filter(|&v| self.kinds[v as usize] == NodeKind::External)
            .collect()
    }

    pub fn thickness(&self) -> u8 {
        self.thickness
    }

    /// Verify the stored rotation system against Euler's formula
    /// (V − E + F = 2 for a connected planar embedding).
    pub fn planar_certificate_ok(&self) -> bool {
        let Some(rotation) = &self.rotation else {
            return false;
        };
        let v = self.node_count();
        let e = self.edge_count();
        if e == 0 || !self.is_connected() {
            return false;
        }
        // Face tracing: the directed edge (u, v) is followed by (v, w) where
        // w succeeds u in the rotation at v.
        let mut visited: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
        let mut faces = 0usize;
        for u in 0..v as u32 {
            for &w in &self.adj[u as usize] {
                if visited.contains(&(u, w)) {
                    continue;
                }
                faces += 1;
                let (mut cu, mut cv) = (u, w);
                loop {
                    if !visited.insert((cu, cv)) {
                        return false; // inconsistent rotation
                    }
                    let rot = &rotation[cv as usize];
                    let pos = match rot.iter().position(|&x| x == cu) {
                        Some(p) => p,
                        None => return false,
                    };
                    let next = rot[(pos + 1) % rot.len()];
                    cu = cv;
                    cv = next;
                    if (cu, cv) == (u, w) {
                        break;
                    }
                }
            }
        }
        v as i64 - e as i64 + faces as i64 == 2
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Serialize as `node <id> <kind>` and `edge <a> <b>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, kind) in self.kinds.iter().enumerate() {
            let k = match kind {
                NodeKind::External => "external",
                NodeKind::Internal => "internal",
            };
            out.push_str(&format!("node {id} {k}\n"));
        }
        for (a, nbrs) in self.adj.iter().enumerate() {
            for &b in nbrs {
                if (a as u32) < b {
                    out.push_str(&format!("edge {a} {b}\n"));
                }
            }
        }
        out
    }

    /// Parse the text format produced by [`Self::to_text`].
    pub fn from_text(s: &str, degree_bound: usize) -> Result<Self, TopologyError> {
        let mut kinds: Vec<(u32, NodeKind)> = Vec::new();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["node", id, kind] => {
                    let id = id.parse().map_err(|_| TopologyError::Parse {
                        line: lineno,
                        msg: format!("bad node id `{id}`"),
                    })?;
                    let kind = match *kind {
                        "external" => NodeKind::External,
                        "internal" => NodeKind::Internal,
                        other => {
                            return Err(TopologyError::Parse {
                                line: lineno,
                                msg: format!("unknown node kind `{other}`"),
                            })
                        }
                    };
                    kinds.push((id, kind));
                }
                ["edge", a, b] => {
                    let pa = a.parse().map_err(|_| TopologyError::Parse {
                        line: lineno,
                        msg: format!("bad edge endpoint `{a}`"),
                    })?;
                    let pb = b.parse().map_err(|_| TopologyError::Parse {
                        line: lineno,
                        msg: format!("bad edge endpoint `{b}`"),
                    })?;
                    edges.push((pa, pb));
                }
                _ => {
                    return Err(TopologyError::Parse {
                        line: lineno,
                        msg: format!("unrecognized line `{line}`"),
                    })
                }
            }
        }
        kinds.sort_by_key(|&(id, _)| id);
        let kind_vec: Vec<NodeKind> = kinds.iter().map(|&(_, k)| k).collect();
        RoutingCardGraph::from_edges(kind_vec, &edges, 1, degree_bound, None)
    }
}

/// Single cycle alternating `2M` external nodes with `internals_per_gap`
/// internal nodes in every gap.
pub fn make_ring(m: usize, internals_per_gap: usize) -> Result<RoutingCardGraph, TopologyError> {
    if m == 0 {
        return Err(TopologyError::NoModules);
    }
    let stride = 1 + internals_per_gap;
    let n = 2 * m * stride;
    let kinds: Vec<NodeKind> = (0..n)
        .map(|p| if p % stride == 0 { NodeKind::External } else { NodeKind::Internal })
        .collect();
    let edges: Vec<(u32, u32)> = (0..n).map(|p| (p as u32, ((p + 1) % n) as u32)).collect();
    let rotation = if n > 2 {
        Some(
            (0..n)
                .map(|p| vec![((p + 1) % n) as u32, ((p + n - 1) % n) as u32])
                .collect(),
        )
    } else {
        None
    };
    RoutingCardGraph::from_edges(kinds, &edges, 1, DEFAULT_DEGREE_BOUND, rotation)
}

/// Two concentric cycles: the outer one is a ring as in [`make_ring`], the
/// inner one holds one internal node per external position, coupled
/// radially to its external node.
pub fn make_double_ring(
    m: usize,
    internals_per_gap: usize,
) -> Result<RoutingCardGraph, TopologyError> {
    if m == 0 {
        return Err(TopologyError::NoModules);
    }
    let stride = 1 + internals_per_gap;
    let n_out = 2 * m * stride;
    let n_in = 2 * m;
    let total = n_out + n_in;
    let mut kinds = vec![NodeKind::Internal; total];
    for e in 0..2 * m {
        kinds[e * stride] = NodeKind::External;
    }
    let mut edges: Vec<(u32, u32)> = (0..n_out)
        .map(|p| (p as u32, ((p + 1) % n_out) as u32))
        .collect();
    for j in 0..n_in {
        edges.push(((n_out + j) as u32, (n_out + (j + 1) % n_in) as u32));
    }
    for e in 0..2 * m {
        edges.push(((e * stride) as u32, (n_out + e) as u32));
    }
    // Planar embedding: outer circle CCW, inner circle CCW, radial spokes.
    let mut rotation: Vec<Vec<u32>> = Vec::with_capacity(total);
    for p in 0..n_out {
        let next = ((p + 1) % n_out) as u32;
        let prev = ((p + n_out - 1) % n_out) as u32;
        if p % stride == 0 {
            let inner = (n_out + p / stride) as u32;
            rotation.push(vec![next, inner, prev]);
        } else {
            rotation.push(vec![next, prev]);
        }
    }
    for j in 0..n_in {
        let next = (n_out + (j + 1) % n_in) as u32;
        let prev = (n_out + (j + n_in - 1) % n_in) as u32;
        let outer = (j * stride) as u32;
        rotation.push(vec![next, prev, outer]);
    }
    RoutingCardGraph::from_edges(kinds, &edges, 1, DEFAULT_DEGREE_BOUND, Some(rotation))
}

/// Ruche network: a ring with a chord from every `j`-th position to the
/// position `i` ahead. Chords are defined over all ring positions; external
/// nodes are evenly spaced as in [`make_ring`]. Tagged thickness 2.
pub fn make_ruche(
    i: usize,
    j: usize,
    m: usize,
    internals_per_gap: usize,
) -> Result<RoutingCardGraph, TopologyError> {
    if m == 0 {
        return Err(TopologyError::NoModules);
    }
    let stride = 1 + internals_per_gap;
    let n = 2 * m * stride;
    if n < 2 * m {
        return Err(TopologyError::RingTooSmall { ring: n, externals: 2 * m });
    }
    let kinds: Vec<NodeKind> = (0..n)
        .map(|p| if p % stride == 0 { NodeKind::External } else { NodeKind::Internal })
        .collect();
    let mut edges: Vec<(u32, u32)> = (0..n).map(|p| (p as u32, ((p + 1) % n) as u32)).collect();
    let mut has_chord = false;
    if j > 0 && i % n != 0 {
        let mut p = 0;
        while p < n {
            let q = (p + i) % n;
            if q != p {
                edges.push((p as u32, q as u32));
                has_chord = true;
            }
            p += j;
        }
    }
    let thickness = if has_chord { 2 } else { 1 };
    RoutingCardGraph::from_edges(kinds, &edges, thickness, DEFAULT_DEGREE_BOUND, None)
}

/// Dumbbell family: two pairs of external nodes joined through a chain of
/// internal nodes containing a single bridge edge (`arm_len >= 1` internal
/// nodes per side).
pub fn make_dumbbell(arm_len: usize) -> Result<RoutingCardGraph, TopologyError> {
    let arm = arm_len.max(1);
    // Layout: E0, E1 | left-arm internals | right-arm internals | E2, E3
    let total = 4 + 2 * arm;
    let mut kinds = vec![NodeKind::Internal; total];
    kinds[0] = NodeKind::External;
    kinds[1] = NodeKind::External;
    kinds[total - 2] = NodeKind::External;
    kinds[total - 1] = NodeKind::External;
    let left_first = 2;
    let right_last = 2 + 2 * arm - 1;
    let mut edges = vec![(0u32, left_first as u32), (1u32, left_first as u32)];
    for k in left_first..right_last {
        edges.push((k as u32, (k + 1) as u32));
    }
    edges.push((right_last as u32, (total - 2) as u32));
    edges.push((right_last as u32, (total - 1) as u32));
    RoutingCardGraph::from_edges(kinds, &edges, 1, DEFAULT_DEGREE_BOUND, None)
}

/// An EP request between two external nodes.
pub type EpRequest = (u32, u32);

/// One scheduled layer: node-disjoint paths realizing a subset of requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpLayer {
    pub paths: Vec<(EpRequest, Vec<u32>)>,
}

/// Ordered layers covering every request exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpSchedule {
    pub layers: Vec<EpLayer>,
}

impl EpSchedule {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

/// Greedy first-fit EP scheduling.
///
/// Per layer, requests are attempted in input order; each takes the shortest
/// path through currently unoccupied nodes (BFS, ties broken toward the
/// smallest node id). Unroutable requests defer to the next layer, where
/// availability resets. Deterministic for a fixed input order.
pub fn schedule_eps(
    requests: &[EpRequest],
    g: &RoutingCardGraph,
) -> Result<EpSchedule, TopologyError> {
    let all_avail = vec![true; g.node_count()];
    for &(a, b) in requests {
        for v in [a, b] {
            if v as usize >= g.node_count() || g.kind(v) != NodeKind::External {
                return Err(TopologyError::NotExternal(v));
            }
        }
        if bfs_path(g, a, b, &all_avail).is_none() {
            return Err(TopologyError::Disconnected(a, b));
        }
    }
    let mut pending: Vec<EpRequest> = requests.to_vec();
    let mut layers = Vec::new();
    while !pending.is_empty() {
        let mut available = vec![true; g.node_count()];
        let mut layer = EpLayer { paths: Vec::new() };
        let mut deferred = Vec::new();
        for &req in &pending {
            let (a, b) = req;
            if !available[a as usize] || !available[b as usize] {
                deferred.push(req);
                continue;
            }
            match bfs_path(g, a, b, &available) {
                Some(path) => {
                    for &v in &path {
                        available[v as usize] = false;
                    }
                    layer.paths.push((req, path));
                }
                None => deferred.push(req),
            }
        }
        assert!(
            !layer.paths.is_empty(),
            "connected request deferred on an empty layer"
        );
        layers.push(layer);
        pending = deferred;
    }
    Ok(EpSchedule { layers })
}

/// Shortest available path from `a` to `b`; neighbors are explored in
/// ascending id order so ties resolve deterministically.
fn bfs_path(g: &RoutingCardGraph, a: u32, b: u32, available: &[bool]) -> Option<Vec<u32>> {
    if a == b {
        return Some(vec![a]);
    }
    let n = g.node_count();
    let mut parent: Vec<u32> = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    parent[a as usize] = a;
    queue.push_back(a);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if parent[v as usize] != u32::MAX || !available[v as usize] {
                continue;
            }
            parent[v as usize] = u;
            if v == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = parent[cur as usize];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Per-sample EP-layer counts for uniform random perfect matchings of the
/// external nodes (`M` requests per sample).
pub fn ep_layer_benchmark(
    g: &RoutingCardGraph,
    samples: usize,
    seed: u64,
) -> Result<Vec<usize>, TopologyError> {
    let externals = g.external_nodes();
    assert!(externals.len() % 2 == 0, "external node count must be even");
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut ext = externals.clone();
            ext.shuffle(&mut rng);
            let requests: Vec<EpRequest> = ext.chunks(2).map(|pair| (pair[0], pair[1])).collect();
            schedule_eps(&requests, g).map(|sched| sched.layer_count())
        })
        .collect()
}

/// Outcome of one Bell-protocol verification run.
#[derive(Debug, Clone)]
pub struct BellReport {
    pub nu: usize,
    pub branches_checked: u64,
    /// Z- and X-correction exponents applied on qubit 1 in the last branch.
    pub last_correction: (u64, u64),
}

/// Build and verify the linear-graph-state Bell protocol on a chain of
/// length `nu`.
///
/// Protocol: prepare qubits 1..ν in |+⟩, apply S† to qubits 3..ν, apply
/// (S†)^(ν−2 mod 4) to qubit 1, CZ the chain, H on the last qubit of the
/// chain, measure qubits 2..ν−1 in the Y basis, then apply the tracked
/// correction `C = Z^Σ(ν−i)m_i · X^Σm_i` on qubit 1. The surviving pair
/// (1, ν) must be exactly |Φ+⟩: stabilized by +XX and +ZZ.
///
/// The Hadamard lands on the chain's last qubit (0-based index ν−1); an
/// exhaustive search over protocol readings shows this is the unique
/// placement for which every measurement branch yields |Φ+⟩ after only the
/// Pauli correction `C`.
///
/// With `branches = None`, all `2^(ν−2)` outcome branches are verified.
pub fn bell_via_graph_state(
    nu: usize,
    branches: Option<&[u64]>,
) -> Result<BellReport, ProtocolError> {
    if nu < 2 {
        return Err(ProtocolError::ChainTooShort(nu));
    }
    let inner = nu.saturating_sub(2);
    let all: Vec<u64>;
    let branch_list: &[u64] = match branches {
        Some(b) => b,
        None => {
            all = (0..(1u64 << inner)).collect();
            &all
        }
    };
    let mut last_correction = (0, 0);
    for &branch in branch_list {
        last_correction = run_bell_branch(nu, branch)?;
    }
    Ok(BellReport { nu, branches_checked: branch_list.len() as u64, last_correction })
}

fn run_bell_branch(nu: usize, branch: u64) -> Result<(u64, u64), ProtocolError> {
    let n = nu;
    let mut t = StabilizerTableau::identity(n).expect("nu >= 2");
    for q in 0..n {
        t.apply_gate(Gate::H(q)).unwrap();
    }
    // S† on qubits 3..=ν (1-based).
    for q in 2..n {
        t.apply_gate(Gate::SDag(q)).unwrap();
    }
    // (S†)^(ν−2 mod 4) on qubit 1.
    for _ in 0..((nu - 2) % 4) {
        t.apply_gate(Gate::SDag(0)).unwrap();
    }
    for q in 0..n - 1 {
        t.apply_gate(Gate::Cz(q, q + 1)).unwrap();
    }
    // H on the last qubit of the chain (0-based ν−1).
    t.apply_gate(Gate::H(nu - 1)).unwrap();
    // Y measurements on 1-based qubits 2..=ν−1, outcome bits from `branch`.
    let mut z_exp: u64 = 0;
    let mut x_exp: u64 = 0;
    for i in 2..=nu - 1 {
        let q = i - 1; // 0-based
        let m_i = (branch >> (i - 2)) & 1 == 1;
        let y = PauliString::single(n, q, PauliKind::Y);
        let meas = t
            .measure_pauli::<ChaCha8Rng>(&y, OutcomeSource::Forced(m_i))
            .expect("Y is Hermitian");
        debug_assert!(!meas.deterministic, "protocol Y measurements are random");
        if m_i {
            z_exp += (nu - i) as u64;
            x_exp += 1;
        }
    }
    // Correction C on qubit 1.
    if z_exp % 2 == 1 {
        t.apply_gate(Gate::Z(0)).unwrap();
    }
    if x_exp % 2 == 1 {
        t.apply_gate(Gate::X(0)).unwrap();
    }
    let (a, b) = (0, nu - 1);
    let xx = PauliString::from_sparse(n, &[(a, PauliKind::X), (b, PauliKind::X)]);
    let zz = PauliString::from_sparse(n, &[(a, PauliKind::Z), (b, PauliKind::Z)]);
    if !t.is_stabilized_by(&xx) {
        return Err(ProtocolError::BellBranchFailed { nu, branch, check: "+XX" });
    }
    if !t.is_stabilized_by(&zz) {
        return Err(ProtocolError::BellBranchFailed { nu, branch, check: "+ZZ" });
    }
    Ok((z_exp, x_exp))
}

/// Result of the remote-CX verification.
#[derive(Debug, Clone)]
pub struct RemoteCxReport {
    pub branches_checked: usize,
    /// For each of the 16 two-qubit Pauli inputs on (control, target), the
    /// conjugated output under the verified channel.
    pub pauli_table: Vec<(String, String)>,
}

/// Verify that the EP-consumption circuit implements an ideal CX in every
/// measurement branch.
///
/// The check prepares control and target each maximally entangled with a
/// reference qubit, runs the remote-CX circuit through a shared |Φ+⟩, forces
/// each of the four (m1, m2) branches, applies the outcome-conditioned Pauli
/// corrections, and asserts the four Choi-state stabilizer generators of CX.
/// Choi-state equality is equivalent to channel equality, so passing all
/// branches certifies the 16-entry Pauli transfer table.
pub fn remote_cx_check() -> Result<RemoteCxReport, ProtocolError> {
    // Qubits: 0 = ref(control), 1 = control, 2 = ref(target), 3 = target,
    //         4, 5 = EP halves.
    const N: usize = 6;
    for m1 in [false, true] {
        for m2 in [false, true] {
            let mut t = StabilizerTableau::identity(N).unwrap();
            for (r, q) in [(0, 1), (2, 3), (4, 5)] {
                t.apply_gate(Gate::H(r)).unwrap();
                t.apply_gate(Gate::Cx(r, q)).unwrap();
            }
            // Remote CX: control into EP half e1, other half e2 into target.
            t.apply_gate(Gate::Cx(1, 4)).unwrap();
            t.apply_gate(Gate::Cx(5, 3)).unwrap();
            let z4 = PauliString::single(N, 4, PauliKind::Z);
            let meas1 = t
                .measure_pauli::<ChaCha8Rng>(&z4, OutcomeSource::Forced(m1))
                .unwrap();
            debug_assert!(!meas1.deterministic);
            let x5 = PauliString::single(N, 5, PauliKind::X);
            let meas2 = t
                .measure_pauli::<ChaCha8Rng>(&x5, OutcomeSource::Forced(m2))
                .unwrap();
            debug_assert!(!meas2.deterministic);
            // Pauli corrections from the measurement record.
            if m1 {
                t.apply_gate(Gate::X(3)).unwrap();
            }
            if m2 {
                t.apply_gate(Gate::Z(1)).unwrap();
            }
            // Choi generators of CX on (control=1, target=3) with refs (0, 2).
            let checks: [(&'static str, PauliString); 4] = [
                (
                    "X_rc X_c X_t",
                    PauliString::from_sparse(
                        N,
                        &[(0, PauliKind::X), (1, PauliKind::X), (3, PauliKind::X)],
                    ),
                ),
                (
                    "Z_rc Z_c",
                    PauliString::from_sparse(N, &[(0, PauliKind::Z), (1, PauliKind::Z)]),
                ),
                (
                    "X_rt X_t",
                    PauliString::from_sparse(N, &[(2, PauliKind::X), (3, PauliKind::X)]),
                ),
                (
                    "Z_rt Z_c Z_t",
                    PauliString::from_sparse(
                        N,
                        &[(2, PauliKind::Z), (1, PauliKind::Z), (3, PauliKind::Z)],
                    ),
                ),
            ];
            for (name, op) in &checks {
                if !t.is_stabilized_by(op) {
                    return Err(ProtocolError::RemoteCxBranchFailed { m1, m2, check: name });
                }
            }
        }
    }
    // Channel == CX in every branch, so the Pauli transfer table is the
    // ideal CX conjugation table.
    let kinds = [PauliKind::I, PauliKind::X, PauliKind::Y, PauliKind::Z];
    let mut pauli_table = Vec::with_capacity(16);
    for &kc in &kinds {
        for &kt in &kinds {
            let mut p = PauliString::from_sparse(2, &[(0, kc), (1, kt)]);
            let input = format!("{p}");
            p.apply_gate(Gate::Cx(0, 1));
            pauli_table.push((input, format!("{p}")));
        }
    }
    Ok(RemoteCxReport { branches_checked: 4, pauli_table })
}

/// EP-generation error rates from the chain length:
/// `p_remote_x = ν·p_spam`, `p_remote_z = (ν/2)·p_spam`, clamped to [0, 1].
pub fn derive_remote_errors(nu: usize, p_spam: f64) -> (f64, f64) {
    let x = (nu as f64 * p_spam).clamp(0.0, 1.0);
    let z = (nu as f64 / 2.0 * p_spam).clamp(0.0, 1.0);
    (x, z)
}

/// Which latency expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatencyFormula {
    /// `1 − exp(−layers·t_ep/t1)`: the decay probability. Reproduces the
    /// reported 0.02 and 0.001 operating points.
    #[default]
    Decay,
    /// `exp(−layers·t_ep/t1)`: the survival form, kept behind this flag
    /// for comparison.
    PrintedSurvival,
}

/// Latency-induced depolarizing rate for waiting `ep_layers` rounds of EP
/// generation (each `t_ep` seconds) against a coherence time `t1`.
pub fn derive_latency_error(ep_layers: f64, t_ep: f64, t1: f64, formula: LatencyFormula) -> f64 {
    let ratio = ep_layers * t_ep / t1;
    match formula {
        LatencyFormula::Decay => 1.0 - (-ratio).exp(),
        LatencyFormula::PrintedSurvival => (-ratio).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseOracle;

    #[test]
    fn ring_counts() {
        let g = make_ring(2, 1).unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.external_nodes().len(), 4);
        assert_eq!(g.edge_count(), 8);
        assert!(g.planar_certificate_ok());
        assert_eq!(g.thickness(), 1);
    }

    #[test]
    fn double_ring_planarity() {
        let g = make_double_ring(3, 1).unwrap();
        assert_eq!(g.external_nodes().len(), 6);
        assert!(g.planar_certificate_ok());
        assert_eq!(g.thickness(), 1);
    }

    #[test]
    fn ruche_chord_count() {
        // Ruche(4,2) on a 12-node ring: 6 chords of stride 4.
        let g = make_ruche(4, 2, 3, 1).unwrap();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.edge_count(), 12 + 6);
        assert_eq!(g.thickness(), 2);
    }

    #[test]
    fn ruche_degree_within_bound() {
        for m in 1..=12 {
            let g = make_ruche(8, 4, m, 1).unwrap();
            for v in 0..g.node_count() as u32 {
                assert!(g.neighbors(v).len() <= DEFAULT_DEGREE_BOUND);
            }
        }
    }

    #[test]
    fn single_request_single_layer() {
        let g = make_ring(2, 1).unwrap();
        let ext = g.external_nodes();
        let sched = schedule_eps(&[(ext[0], ext[1])], &g).unwrap();
        assert_eq!(sched.layer_count(), 1);
    }

    #[test]
    fn dumbbell_needs_two_layers() {
        let g = make_dumbbell(1).unwrap();
        let ext = g.external_nodes();
        assert_eq!(ext.len(), 4);
        let sched = schedule_eps(&[(ext[0], ext[2]), (ext[1], ext[3])], &g).unwrap();
        assert_eq!(sched.layer_count(), 2);
    }

    #[test]
    fn dumbbell_family_bottleneck_bound() {
        for arm in 1..=5 {
            let g = make_dumbbell(arm).unwrap();
            let ext = g.external_nodes();
            let sched = schedule_eps(&[(ext[0], ext[2]), (ext[1], ext[3])], &g).unwrap();
            assert!(sched.layer_count() >= 2, "arm {arm}");
        }
    }

    #[test]
    fn opposite_arcs_share_a_layer() {
        // Ring M=2: externals at 0, 2, 4, 6. (0,2) and (4,6) use disjoint arcs.
        let g = make_ring(2, 1).unwrap();
        let sched = schedule_eps(&[(0, 2), (4, 6)], &g).unwrap();
        assert_eq!(sched.layer_count(), 1);
    }

    #[test]
    fn layers_are_node_disjoint_and_cover_requests() {
        let g = make_ruche(4, 2, 6, 1).unwrap();
        let ext = g.external_nodes();
        let requests: Vec<EpRequest> = ext.chunks(2).map(|p| (p[0], p[1])).collect();
        let sched = schedule_eps(&requests, &g).unwrap();
        let mut seen = 0;
        for layer in &sched.layers {
            let mut used = vec![false; g.node_count()];
            for ((a, b), path) in &layer.paths {
                seen += 1;
                assert_eq!(path.first(), Some(a));
                assert_eq!(path.last(), Some(b));
                for &v in path {
                    assert!(!used[v as usize]);
                    used[v as usize] = true;
                }
                for w in path.windows(2) {
                    assert!(g.neighbors(w[0]).contains(&w[1]));
                }
            }
        }
        assert_eq!(seen, requests.len());
    }

    #[test]
    fn benchmark_single_module_always_one_layer() {
        let g = make_ring(1, 1).unwrap();
        let layers = ep_layer_benchmark(&g, 20, 9).unwrap();
        assert!(layers.iter().all(|&l| l == 1));
    }

    #[test]
    fn bell_protocol_nu2_matches_dense_oracle() {
        bell_via_graph_state(2, None).unwrap();
        // Dense amplitudes: CZ on |++⟩ then the final H gives |Φ+⟩ (at
        // ν = 2 either qubit works; the implementation uses the last).
        let mut d = DenseOracle::new(2).unwrap();
        d.apply_gate(Gate::H(0)).unwrap();
        d.apply_gate(Gate::H(1)).unwrap();
        d.apply_gate(Gate::Cz(0, 1)).unwrap();
        d.apply_gate(Gate::H(1)).unwrap();
        let a = d.amplitudes();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0].re - s).abs() < 1e-12 && a[0].im.abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
        assert!((a[3].re - s).abs() < 1e-12 && a[3].im.abs() < 1e-12);
    }

    #[test]
    fn bell_protocol_nu3_both_branches() {
        let report = bell_via_graph_state(3, None).unwrap();
        assert_eq!(report.branches_checked, 2);
    }

    #[test]
    fn bell_protocol_nu3_dense_cross_check() {
        // Dense-oracle verification of both branches, including the
        // correction C = Z^{(ν−i)·m_i} X^{m_i} on qubit 1.
        for m in [false, true] {
            let nu = 3;
            let mut d = DenseOracle::new(nu).unwrap();
            for q in 0..nu {
                d.apply_gate(Gate::H(q)).unwrap();
            }
            d.apply_gate(Gate::SDag(2)).unwrap();
            d.apply_gate(Gate::SDag(0)).unwrap(); // (S†)^(ν−2 mod 4), ν = 3
            d.apply_gate(Gate::Cz(0, 1)).unwrap();
            d.apply_gate(Gate::Cz(1, 2)).unwrap();
            d.apply_gate(Gate::H(2)).unwrap();
            let y1 = PauliString::single(nu, 1, PauliKind::Y);
            let pr = d.measure_forced(&y1, m).unwrap();
            assert!((pr - 0.5).abs() < 1e-9);
            if m {
                // i = 2 (1-based), ν − i = 1: apply Z and X on qubit 1.
                d.apply_gate(Gate::Z(0)).unwrap();
                d.apply_gate(Gate::X(0)).unwrap();
            }
            let xx = PauliString::from_sparse(nu, &[(0, PauliKind::X), (2, PauliKind::X)]);
            let zz = PauliString::from_sparse(nu, &[(0, PauliKind::Z), (2, PauliKind::Z)]);
            assert!(d.is_stabilized_by(&xx), "branch {m}");
            assert!(d.is_stabilized_by(&zz), "branch {m}");
        }
    }

    #[test]
    fn bell_protocol_exhaustive_small() {
        for nu in 2..=8 {
            let report = bell_via_graph_state(nu, None).unwrap();
            assert_eq!(report.branches_checked, 1u64 << nu.saturating_sub(2));
        }
    }

    #[test]
    fn remote_cx_all_branches() {
        let report = remote_cx_check().unwrap();
        assert_eq!(report.branches_checked, 4);
        let find = |input: &str| -> &str {
            &report
                .pauli_table
                .iter()
                .find(|(i, _)| i == input)
                .unwrap()
                .1
        };
        assert_eq!(find("+X_"), "+XX");
        assert_eq!(find("+_Z"), "+ZZ");
        assert_eq!(find("+_X"), "+_X");
        assert_eq!(find("+Z_"), "+Z_");
    }

    #[test]
    fn remote_error_rates() {
        assert_eq!(derive_remote_errors(6, 0.01), (0.06, 0.03));
        assert_eq!(derive_remote_errors(2, 0.0), (0.0, 0.0));
        let (x, z) = derive_remote_errors(5, 0.01);
        assert!((x - 0.05).abs() < 1e-12);
        assert!((z - 0.025).abs() < 1e-12);
    }

    #[test]
    fn latency_rates() {
        let p = derive_latency_error(1.0, 2e-6, 100e-6, LatencyFormula::Decay);
        assert!((p - 0.0198).abs() < 2e-4, "got {p}");
        let p2 = derive_latency_error(1.0, 1e-6, 1e-3, LatencyFormula::Decay);
        assert!((p2 - 0.001).abs() < 1e-5, "got {p2}");
        assert_eq!(derive_latency_error(0.0, 2e-6, 100e-6, LatencyFormula::Decay), 0.0);
        let s = derive_latency_error(1.0, 2e-6, 100e-6, LatencyFormula::PrintedSurvival);
        assert!((s - 0.9802).abs() < 1e-4);
    }

    #[test]
    fn topology_text_round_trip() {
        let g = make_ring(2, 1).unwrap();
        let text = g.to_text();
        let back = RoutingCardGraph::from_text(&text, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(back.node_count(), g.node_count());
        assert_eq!(back.edge_count(), g.edge_count());
        assert_eq!(back.external_nodes(), g.external_nodes());
    }
}
