//! Weighted detector matching graph built by single-fault enumeration, a
//! union-find (cluster-growth) matching decoder, and an exhaustive
//! minimum-weight oracle for small instances.
//!
//! Every noise channel is expanded into its constituent Pauli faults; each
//! fault splits into an X part and a Z part carrying the composed marginal
//! probability of that part being applied. Each part is propagated
//! deterministically through the rest of the circuit; a part flipping two
//! detectors becomes an edge, one detector an edge to the boundary node.
//! Parts flipping more than two detectors make the model non-graphlike and
//! abort loudly.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, FaultPropagator, Opcode, SampleMatrix};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(
        "non-graphlike model: instruction {instruction} part {part} flips {flips} detectors"
    )]
    NonGraphlike { instruction: usize, part: String, flips: usize },
    #[error("fault with no detector signature flips observable(s) {mask:#x} (instruction {instruction})")]
    UndetectableLogical { instruction: usize, mask: u64 },
    #[error("odd cluster cannot reach the boundary: detector graph is malformed")]
    InfeasibleSyndrome,
    #[error("oracle search space too large: C({sites}, {max_faults}) exceeds {limit}")]
    OracleTooLarge { sites: usize, max_faults: usize, limit: u64 },
    #[error("no explanation within {max_faults} faults")]
    OracleIncomplete { max_faults: usize },
    #[error("more than 64 observables are not supported")]
    TooManyObservables,
}

/// Which error sector a fault part belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// X-type fault component (flips Z-type checks).
    X,
    /// Z-type fault component (flips X-type checks).
    Z,
}

/// Where an edge came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub instruction: usize,
    pub sector: Sector,
    /// Qubits carrying the fault part.
    pub qubits: Vec<u32>,
}

/// Index used for the boundary pseudo-node.
pub const BOUNDARY: u32 = u32::MAX;

/// One weighted matching-graph edge.
#[derive(Debug, Clone)]
pub struct GraphEdge {
    pub a: u32,
    /// Second endpoint; `BOUNDARY` for boundary edges.
    pub b: u32,
    pub p: f64,
    pub weight: f64,
    pub obs_mask: u64,
    pub provenance: Provenance,
}

/// Detector matching graph with a single boundary node.
#[derive(Debug, Clone)]
pub struct DetectorGraph {
    pub detector_count: usize,
    pub observable_count: usize,
    pub edges: Vec<GraphEdge>,
    /// Adjacency: per detector (plus boundary slot at the end), edge ids.
    adj: Vec<Vec<u32>>,
}

impl DetectorGraph {
    /// Edge ids incident to a node (`BOUNDARY` maps to the last slot).
    pub fn incident(&self, node: u32) -> &[u32] {
        if node == BOUNDARY {
            &self.adj[self.detector_count]
        } else {
            &self.adj[node as usize]
        }
    }

    /// Text dump: `edge a b weight p mask provenance` per line.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let b = if e.b == BOUNDARY { "boundary".to_string() } else { e.b.to_string() };
            let qubits: Vec<String> = e.provenance.qubits.iter().map(|q| q.to_string()).collect();
            out.push_str(&format!(
                "edge {} {} {:.6} {:.6e} {:#x} instr={} sector={:?} qubits={}\n",
                e.a,
                b,
                e.weight,
                e.p,
                e.obs_mask,
                e.provenance.instruction,
                e.provenance.sector,
                qubits.join(",")
            ));
        }
        out
    }
}

/// A fired-detector set.
#[derive(Debug, Clone, Default)]
pub struct Syndrome {
    pub fired: Vec<u32>,
}

impl Syndrome {
    pub fn new(mut fired: Vec<u32>) -> Self {
        fired.sort_unstable();
        fired.dedup();
        Syndrome { fired }
    }
}

/// Constituent Pauli components of a noise channel on its targets, with the
/// marginal probability of each X-part / Z-part.
fn channel_parts(op: Opcode, targets: &[u32], p: f64) -> Vec<(Sector, Vec<u32>, f64)> {
    match op {
        Opcode::XError => vec![(Sector::X, targets.to_vec(), p)],
        Opcode::ZError => vec![(Sector::Z, targets.to_vec(), p)],
        Opcode::Depolarize1 => {
            // Components X, Y, Z each p/3; X part fires for {X, Y}, Z part
            // for {Z, Y}: marginal 2p/3 each.
            vec![
                (Sector::X, targets.to_vec(), 2.0 * p / 3.0),
                (Sector::Z, targets.to_vec(), 2.0 * p / 3.0),
            ]
        }
        Opcode::Depolarize2 => {
            // 15 components, each p/15. Distinct non-identity X parts on the
            // pair: (X,I), (I,X), (X,X); each has marginal 4p/15. Same for
            // the Z parts.
            let (a, b) = (targets[0], targets[1]);
            let m = 4.0 * p / 15.0;
            vec![
                (Sector::X, vec![a], m),
                (Sector::X, vec![b], m),
                (Sector::X, vec![a, b], m),
                (Sector::Z, vec![a], m),
                (Sector::Z, vec![b], m),
                (Sector::Z, vec![a, b], m),
            ]
        }
        _ => Vec::new(),
    }
}

fn edge_weight(p: f64) -> f64 {
    // −ln(p/(1−p)); finite and positive for 0 < p < 0.5.
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    ((1.0 - p) / p).ln()
}

/// Build the matching graph by exhaustive single-fault propagation.
pub fn build_detector_graph(c: &Circuit) -> Result<DetectorGraph, DecodeError> {
    c.validate().map_err(DecodeError::Circuit)?;
    if c.observables.len() > 64 {
        return Err(DecodeError::TooManyObservables);
    }
    let propagator = FaultPropagator::new(c);
    // Keyed by (endpoints, observable mask): parallel edges with equal masks
    // compose probabilities; different masks stay separate edges.
    let mut merged: HashMap<(u32, u32, u64), (f64, Provenance)> = HashMap::new();

    for (idx, ins) in c.instructions.iter().enumerate() {
        if !ins.opcode.is_noise() {
            continue;
        }
        let p = ins.prob.unwrap_or(0.0);
        if p <= 0.0 {
            continue;
        }
        let groups: Vec<Vec<u32>> = if ins.opcode == Opcode::Depolarize2 {
            ins.targets.chunks(2).map(|c| c.to_vec()).collect()
        } else {
            ins.targets.iter().map(|&t| vec![t]).collect()
        };
        for group in groups {
            for (sector, qubits, marginal) in channel_parts(ins.opcode, &group, p) {
                let fault: Vec<(u32, bool, bool)> = qubits
                    .iter()
                    .map(|&q| match sector {
                        Sector::X => (q, true, false),
                        Sector::Z => (q, false, true),
                    })
                    .collect();
                let effect = propagator.effect(idx, &fault);
                let mut mask = 0u64;
                for &o in &effect.observables {
                    mask |= 1 << o;
                }
                let (a, b) = match effect.detectors.len() {
                    0 => {
                        if mask != 0 {
                            return Err(DecodeError::UndetectableLogical {
                                instruction: idx,
                                mask,
                            });
                        }
                        continue;
                    }
                    1 => (effect.detectors[0], BOUNDARY),
                    2 => (effect.detectors[0], effect.detectors[1]),
                    n => {
                        return Err(DecodeError::NonGraphlike {
                            instruction: idx,
                            part: format!("{sector:?} on {qubits:?}"),
                            flips: n,
                        })
                    }
                };
                let provenance = Provenance { instruction: idx, sector, qubits };
                merged
                    .entry((a, b, mask))
                    .and_modify(|(q, _)| {
                        // Exclusive-or composition of independent flips.
                        *q = *q * (1.0 - marginal) + marginal * (1.0 - *q);
                    })
                    .or_insert((marginal, provenance));
            }
        }
    }

    let detector_count = c.detectors.len();
    let mut edges: Vec<GraphEdge> = merged
        .into_iter()
        .map(|((a, b, obs_mask), (p, provenance))| GraphEdge {
            a,
            b,
            p,
            weight: edge_weight(p),
            obs_mask,
            provenance,
        })
        .collect();
    // Deterministic edge order for reproducible decoding.
    edges.sort_by(|x, y| {
        (x.a, x.b, x.obs_mask, x.provenance.instruction)
            .cmp(&(y.a, y.b, y.obs_mask, y.provenance.instruction))
    });

    let mut adj = vec![Vec::new(); detector_count + 1];
    for (id, e) in edges.iter().enumerate() {
        adj[e.a as usize].push(id as u32);
        let slot = if e.b == BOUNDARY { detector_count } else { e.b as usize };
        adj[slot].push(id as u32);
    }
    Ok(DetectorGraph {
        detector_count,
        observable_count: c.observables.len(),
        edges,
        adj,
    })
}

// ---------------------------------------------------------------------------
// Union-find cluster-growth decoder
// ---------------------------------------------------------------------------

/// Reusable decoder workspace (one per thread).
pub struct DecoderScratch {
    parent: Vec<u32>,
    // Per-root state, indexed by node id.
    odd: Vec<bool>,
    has_boundary: Vec<bool>,
    members: Vec<Vec<u32>>,
    frontier: Vec<Vec<u32>>,
    growth: Vec<f64>,
    touched_nodes: Vec<u32>,
    touched_edges: Vec<u32>,
    in_cluster: Vec<bool>,
    dist: Vec<f64>,
    mask_to: Vec<u64>,
    visited_epoch: Vec<u64>,
    epoch: u64,
    edge_seen_epoch: Vec<u64>,
    grow_epoch: u64,
}

impl DecoderScratch {
    pub fn new(g: &DetectorGraph) -> Self {
        let n = g.detector_count + 1; // boundary at slot detector_count
        DecoderScratch {
            parent: (0..n as u32).collect(),
            odd: vec![false; n],
            has_boundary: vec![false; n],
            members: vec![Vec::new(); n],
            frontier: vec![Vec::new(); n],
            growth: vec![0.0; g.edges.len()],
            touched_nodes: Vec::new(),
            touched_edges: Vec::new(),
            in_cluster: vec![false; n],
            dist: vec![f64::INFINITY; n],
            mask_to: vec![0; n],
            visited_epoch: vec![0; n],
            epoch: 0,
            edge_seen_epoch: vec![0; g.edges.len()],
            grow_epoch: 0,
        }
    }

    fn node_slot(&self, g: &DetectorGraph, v: u32) -> usize {
        if v == BOUNDARY {
            g.detector_count
        } else {
            v as usize
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let gp = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = gp;
            v = gp;
        }
        v
    }

    fn reset(&mut self) {
        for &v in &self.touched_nodes {
            let v = v as usize;
            self.parent[v] = v as u32;
            self.odd[v] = false;
            self.has_boundary[v] = false;
            self.members[v].clear();
            self.frontier[v].clear();
            self.in_cluster[v] = false;
        }
        for &e in &self.touched_edges {
            self.growth[e as usize] = 0.0;
        }
        self.touched_nodes.clear();
        self.touched_edges.clear();
    }
}

/// Decode one syndrome: returns the predicted observable-flip mask.
///
/// Weighted cluster growth: every odd cluster grows its frontier uniformly;
/// saturated edges merge clusters; clusters containing the boundary are
/// never odd. Once no odd cluster remains each cluster is solved exactly by
/// shortest-path matching among its fired detectors (Dijkstra inside the
/// cluster plus an optimal pairing over at most [`MATCH_CAP`] nodes).
pub fn decode_with(
    g: &DetectorGraph,
    scratch: &mut DecoderScratch,
    syndrome: &Syndrome,
) -> Result<u64, DecodeError> {
    if syndrome.fired.is_empty() {
        return Ok(0);
    }
    scratch.reset();
    // Activate clusters for fired detectors; the boundary node starts even.
    let bslot = g.detector_count as u32;
    for &d in &syndrome.fired {
        let slot = d;
        scratch.touched_nodes.push(slot);
        scratch.odd[slot as usize] = true;
        scratch.members[slot as usize].push(slot);
        scratch.in_cluster[slot as usize] = true;
        scratch.frontier[slot as usize] = g.incident(d).to_vec();
    }
    // Grow until no odd cluster remains.
    loop {
        // Collect roots of odd clusters.
        let mut odd_roots: Vec<u32> = Vec::new();
        for i in 0..scratch.touched_nodes.len() {
            let v = scratch.touched_nodes[i];
            let r = scratch.find(v);
            if r == v && scratch.odd[r as usize] && !scratch.has_boundary[r as usize] {
                odd_roots.push(r);
            }
        }
        if odd_roots.is_empty() {
            break;
        }
        // Find the minimum time until any frontier edge of an odd cluster
        // saturates. An edge grows at rate 1 per incident odd cluster.
        let mut best: Option<(f64, u32)> = None;
        for &root in &odd_roots {
            let frontier = std::mem::take(&mut scratch.frontier[root as usize]);
            for &eid in &frontier {
                let e = &g.edges[eid as usize];
                let sa = scratch.node_slot(g, e.a) as u32;
                let sb = scratch.node_slot(g, e.b) as u32;
                let ra = scratch.find(sa);
                let rb = scratch.find(sb);
                if ra == rb {
                    continue; // internal edge
                }
                let mut rate = 0.0;
                if scratch.odd[ra as usize] && !scratch.has_boundary[ra as usize] {
                    rate += 1.0;
                }
                if scratch.odd[rb as usize] && !scratch.has_boundary[rb as usize] {
                    rate += 1.0;
                }
                if rate == 0.0 {
                    continue;
                }
                let remaining = (e.weight - scratch.growth[eid as usize]).max(0.0);
                let t = remaining / rate;
                match best {
                    None => best = Some((t, eid)),
                    Some((bt, bid)) => {
                        if t < bt - 1e-12 || (t < bt + 1e-12 && eid < bid) {
                            best = Some((t, eid));
                        }
                    }
                }
            }
            scratch.frontier[root as usize] = frontier;
        }
        let Some((dt, _)) = best else {
            return Err(DecodeError::InfeasibleSyndrome);
        };
        // Advance every frontier edge of every odd cluster by dt·rate and
        // merge the ones that saturate.
        scratch.grow_epoch += 1;
        let grow_epoch = scratch.grow_epoch;
        let mut to_merge: Vec<u32> = Vec::new();
        for &root in &odd_roots {
            let frontier = std::mem::take(&mut scratch.frontier[root as usize]);
            for &eid in &frontier {
                let e = &g.edges[eid as usize];
                let sa = scratch.node_slot(g, e.a) as u32;
                let sb = scratch.node_slot(g, e.b) as u32;
                let ra = scratch.find(sa);
                let rb = scratch.find(sb);
                if ra == rb {
                    continue;
                }
                if scratch.edge_seen_epoch[eid as usize] == grow_epoch {
                    continue; // already advanced from the other side
                }
                scratch.edge_seen_epoch[eid as usize] = grow_epoch;
                let mut rate = 0.0;
                if scratch.odd[ra as usize] && !scratch.has_boundary[ra as usize] {
                    rate += 1.0;
                }
                if scratch.odd[rb as usize] && !scratch.has_boundary[rb as usize] {
                    rate += 1.0;
                }
                if scratch.growth[eid as usize] == 0.0 {
                    scratch.touched_edges.push(eid);
                }
                scratch.growth[eid as usize] += dt * rate;
                if scratch.growth[eid as usize] + 1e-12 >= e.weight {
                    to_merge.push(eid);
                }
            }
            scratch.frontier[root as usize] = frontier;
        }
        for eid in to_merge {
            let e = &g.edges[eid as usize];
            let sa = scratch.node_slot(g, e.a) as u32;
            let sb = scratch.node_slot(g, e.b) as u32;
            merge_clusters(g, scratch, sa, sb, bslot);
        }
    }
    // Solve each cluster exactly.
    let mut prediction = 0u64;
    let mut roots: Vec<u32> = Vec::new();
    for i in 0..scratch.touched_nodes.len() {
        let v = scratch.touched_nodes[i];
        let r = scratch.find(v);
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    for root in roots {
        let fired: Vec<u32> = scratch.members[root as usize]
            .iter()
            .copied()
            .filter(|&v| v != bslot && syndrome.fired.binary_search(&v).is_ok())
            .collect();
        if fired.is_empty() {
            continue;
        }
        prediction ^= match_cluster(g, scratch, root, &fired, bslot)?;
    }
    Ok(prediction)
}

fn merge_clusters(g: &DetectorGraph, s: &mut DecoderScratch, a: u32, b: u32, bslot: u32) {
    // Ensure both slots participate (boundary or fresh nodes join lazily).
    for v in [a, b] {
        if !s.in_cluster[v as usize] {
            s.in_cluster[v as usize] = true;
            s.touched_nodes.push(v);
            s.members[v as usize].push(v);
            if v == bslot {
                s.has_boundary[v as usize] = true;
            } else {
                s.frontier[v as usize] = g.incident(v).to_vec();
            }
        }
    }
    let ra = s.find(a);
    let rb = s.find(b);
    if ra == rb {
        return;
    }
    // Union by member count.
    let (big, small) = if s.members[ra as usize].len() >= s.members[rb as usize].len() {
        (ra, rb)
    } else {
        (rb, ra)
    };
    s.parent[small as usize] = big;
    let moved = std::mem::take(&mut s.members[small as usize]);
    s.members[big as usize].extend(moved);
    let moved_frontier = std::mem::take(&mut s.frontier[small as usize]);
    s.frontier[big as usize].extend(moved_frontier);
    s.odd[big as usize] ^= s.odd[small as usize];
    s.has_boundary[big as usize] |= s.has_boundary[small as usize];
}

/// Fired nodes above this count fall back to greedy nearest pairing.
const MATCH_CAP: usize = 12;

/// Exact minimum-weight pairing of the fired detectors inside one cluster,
/// using shortest paths restricted to cluster nodes. Boundary pairing is
/// allowed when the cluster absorbed the boundary.
fn match_cluster(
    g: &DetectorGraph,
    s: &mut DecoderScratch,
    root: u32,
    fired: &[u32],
    bslot: u32,
) -> Result<u64, DecodeError> {
    let has_boundary = s.has_boundary[root as usize];
    let k = fired.len();
    if k == 1 && !has_boundary {
        return Err(DecodeError::InfeasibleSyndrome);
    }
    // Pairwise shortest paths among fired nodes (and to the boundary).
    let mut dist = vec![vec![f64::INFINITY; k + 1]; k];
    let mut mask = vec![vec![0u64; k + 1]; k];
    for (i, &src) in fired.iter().enumerate() {
        let (d, m) = dijkstra_in_cluster(g, s, root, src, bslot);
        for (j, &dst) in fired.iter().enumerate() {
            dist[i][j] = d[dst as usize];
            mask[i][j] = m[dst as usize];
        }
        dist[i][k] = d[bslot as usize];
        mask[i][k] = m[bslot as usize];
    }
    if k > MATCH_CAP {
        // Greedy fallback: repeatedly take the globally nearest pair or
        // boundary hop.
        let mut used = vec![false; k];
        let mut out = 0u64;
        loop {
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..k {
                if used[i] {
                    continue;
                }
                for j in i + 1..k + 1 {
                    if j < k && used[j] {
                        continue;
                    }
                    if j == k && !has_boundary {
                        continue;
                    }
                    let w = dist[i][j];
                    if best.map_or(true, |(bw, _, _)| w < bw) {
                        best = Some((w, i, j));
                    }
                }
            }
            let Some((_, i, j)) = best else { break };
            used[i] = true;
            out ^= mask[i][j];
            if j < k {
                used[j] = true;
            }
            if used.iter().all(|&u| u) {
                break;
            }
        }
        return Ok(out);
    }
    // Exact pairing by bitmask DP over fired nodes.
    let full = (1usize << k) - 1;
    let mut best = vec![(f64::INFINITY, 0u64); full + 1];
    best[0] = (0.0, 0);
    for state in 0..=full {
        let (cost, acc) = best[state];
        if !cost.is_finite() {
            continue;
        }
        let Some(i) = (0..k).find(|&i| state & (1 << i) == 0) else { continue };
        // Pair i with another unmatched node.
        for j in i + 1..k {
            if state & (1 << j) != 0 {
                continue;
            }
            let ns = state | (1 << i) | (1 << j);
            let nc = cost + dist[i][j];
            if nc < best[ns].0 {
                best[ns] = (nc, acc ^ mask[i][j]);
            }
        }
        // Or send i to the boundary.
        if has_boundary && dist[i][k].is_finite() {
            let ns = state | (1 << i);
            let nc = cost + dist[i][k];
            if nc < best[ns].0 {
                best[ns] = (nc, acc ^ mask[i][k]);
            }
        }
    }
    if !best[full].0.is_finite() {
        return Err(DecodeError::InfeasibleSyndrome);
    }
    Ok(best[full].1)
}

/// Dijkstra from `src` using only edges whose endpoints are in the cluster.
/// Returns distances and path observable masks indexed by node slot.
fn dijkstra_in_cluster(
    g: &DetectorGraph,
    s: &mut DecoderScratch,
    root: u32,
    src: u32,
    bslot: u32,
) -> (Vec<f64>, Vec<u64>) {
    s.epoch += 1;
    let epoch = s.epoch;
    // Monotone map from non-negative f64 to u64 for heap ordering.
    fn ordered(x: f64) -> u64 {
        x.to_bits()
    }
    // Lazily reset dist/mask via the epoch stamp.
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, u32)>> = Default::default();
    let visit = |s: &mut DecoderScratch, v: usize, epoch: u64| {
        if s.visited_epoch[v] != epoch {
            s.visited_epoch[v] = epoch;
            s.dist[v] = f64::INFINITY;
            s.mask_to[v] = 0;
        }
    };
    visit(s, src as usize, epoch);
    s.dist[src as usize] = 0.0;
    heap.push(std::cmp::Reverse((ordered(0.0), src)));
    while let Some(std::cmp::Reverse((du, u))) = heap.pop() {
        visit(s, u as usize, epoch);
        if f64::from_bits(du) > s.dist[u as usize] + 1e-15 {
            continue;
        }
        let incident = if u == bslot {
            g.incident(BOUNDARY)
        } else {
            g.incident(u)
        };
        for &eid in incident {
            let e = &g.edges[eid as usize];
            let sa = if e.a == BOUNDARY { bslot } else { e.a };
            let sb = if e.b == BOUNDARY { bslot } else { e.b };
            let v = if sa == u { sb } else { sa };
            // Stay inside the cluster.
            if !s.in_cluster[v as usize] || s.find(v) != root {
                continue;
            }
            visit(s, v as usize, epoch);
            let nd = s.dist[u as usize] + e.weight;
            if nd + 1e-15 < s.dist[v as usize] {
                s.dist[v as usize] = nd;
                s.mask_to[v as usize] = s.mask_to[u as usize] ^ e.obs_mask;
                heap.push(std::cmp::Reverse((ordered(nd), v)));
            }
        }
    }
    // Materialize outputs (small: only cluster nodes are finite).
    let mut dist = vec![f64::INFINITY; g.detector_count + 1];
    let mut mask = vec![0u64; g.detector_count + 1];
    for v in 0..g.detector_count + 1 {
        if s.visited_epoch[v] == epoch {
            dist[v] = s.dist[v];
            mask[v] = s.mask_to[v];
        }
    }
    (dist, mask)
}

/// Convenience wrapper allocating a fresh workspace.
pub fn decode(g: &DetectorGraph, syndrome: &Syndrome) -> Result<u64, DecodeError> {
    let mut scratch = DecoderScratch::new(g);
    decode_with(g, &mut scratch, syndrome)
}

/// Decode every shot of a sample matrix; returns the number of shots whose
/// predicted observable flip disagrees with the sampled observable bits.
pub fn decode_batch(g: &DetectorGraph, samples: &SampleMatrix) -> Result<usize, DecodeError> {
    let shots: Vec<usize> = (0..samples.shots).collect();
    let counts: Result<Vec<usize>, DecodeError> = shots
        .par_chunks(256)
        .map(|chunk| {
            let mut scratch = DecoderScratch::new(g);
            let mut errors = 0usize;
            for &shot in chunk {
                let syndrome = Syndrome::new(samples.fired_detectors(shot));
                let predicted = decode_with(g, &mut scratch, &syndrome)?;
                let mut actual = 0u64;
                for o in 0..samples.observable_count {
                    if samples.observable(shot, o) {
                        actual |= 1 << o;
                    }
                }
                if predicted != actual {
                    errors += 1;
                }
            }
            Ok(errors)
        })
        .collect();
    Ok(counts?.into_iter().sum())
}

// ---------------------------------------------------------------------------
// Exhaustive minimum-weight oracle
// ---------------------------------------------------------------------------

/// Oracle verdict: minimum-weight prediction plus tie information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub prediction: u64,
    pub weight: f64,
    /// True when two equal-weight explanations disagree on the prediction.
    pub tie: bool,
}

const ORACLE_LIMIT: u64 = 10_000_000;

/// Exhaustive search over edge subsets of size ≤ `max_faults` whose detector
/// signature equals the syndrome; returns the minimum-total-weight
/// explanation's observable parity. Ties between explanations of equal
/// weight and different parity are reported; the lowest lexicographic edge
/// subset wins the returned prediction.
pub fn ml_oracle_decode(
    g: &DetectorGraph,
    syndrome: &Syndrome,
    max_faults: usize,
) -> Result<OracleOutcome, DecodeError> {
    let max_faults = max_faults.min(3);
    let sites = g.edges.len() as u64;
    let mut space = 1u64;
    for i in 0..max_faults as u64 {
        space = space.saturating_mul(sites.saturating_sub(i)) / (i + 1);
        if space > ORACLE_LIMIT {
            return Err(DecodeError::OracleTooLarge {
                sites: g.edges.len(),
                max_faults,
                limit: ORACLE_LIMIT,
            });
        }
    }
    if syndrome.fired.is_empty() {
        return Ok(OracleOutcome { prediction: 0, weight: 0.0, tie: false });
    }
    // Lookup: canonical detector signature -> candidate edges.
    let mut by_sig: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for (id, e) in g.edges.iter().enumerate() {
        let key = sig_key(e.a, e.b);
        by_sig.entry(key).or_default().push(id as u32);
    }
    let target: Vec<u32> = syndrome.fired.clone();

    struct Best {
        weight: f64,
        prediction: u64,
        subset: Vec<u32>,
        tie: bool,
    }
    let mut best: Option<Best> = None;
    let consider = |edges: &[u32], g: &DetectorGraph, best: &mut Option<Best>| {
        let mut w = 0.0;
        let mut pred = 0u64;
        for &e in edges {
            w += g.edges[e as usize].weight;
            pred ^= g.edges[e as usize].obs_mask;
        }
        let mut subset: Vec<u32> = edges.to_vec();
        subset.sort_unstable();
        match best {
            None => {
                *best = Some(Best { weight: w, prediction: pred, subset, tie: false })
            }
            Some(b) => {
                if w + 1e-9 < b.weight {
                    *best = Some(Best { weight: w, prediction: pred, subset, tie: false });
                } else if (w - b.weight).abs() <= 1e-9 {
                    if pred != b.prediction {
                        b.tie = true;
                    }
                    if subset < b.subset {
                        let tie = b.tie;
                        *best = Some(Best { weight: w, prediction: pred, subset, tie });
                    }
                }
            }
        }
    };

    // Size 1: a single edge must match the signature exactly.
    if target.len() <= 2 {
        let key = if target.len() == 1 {
            sig_key(target[0], BOUNDARY)
        } else {
            sig_key(target[0], target[1])
        };
        if let Some(cands) = by_sig.get(&key) {
            for &e in cands {
                consider(&[e], g, &mut best);
            }
        }
    }
    // Size 2: one edge must touch a fired detector.
    if max_faults >= 2 {
        let incident = incident_to_fired(g, &target);
        for &e1 in &incident {
            let rem = xor_sig(&target, g, e1);
            if rem.len() > 2 {
                continue;
            }
            let key = match rem.len() {
                0 => continue, // would need an empty-signature partner
                1 => sig_key(rem[0], BOUNDARY),
                _ => sig_key(rem[0], rem[1]),
            };
            if let Some(cands) = by_sig.get(&key) {
                for &e2 in cands {
                    if e2 == e1 {
                        continue;
                    }
                    consider(&[e1, e2], g, &mut best);
                }
            }
        }
    }
    // Size 3: two edges touch the target, the third closes it.
    if max_faults >= 3 {
        let incident = incident_to_fired(g, &target);
        for (i, &e1) in incident.iter().enumerate() {
            let rem1 = xor_sig(&target, g, e1);
            for &e2 in &incident[i + 1..] {
                if e2 == e1 {
                    continue;
                }
                let rem2 = xor_sig(&rem1, g, e2);
                if rem2.len() > 2 {
                    continue;
                }
                let key = match rem2.len() {
                    0 => continue,
                    1 => sig_key(rem2[0], BOUNDARY),
                    _ => sig_key(rem2[0], rem2[1]),
                };
                if let Some(cands) = by_sig.get(&key) {
                    for &e3 in cands {
                        if e3 == e1 || e3 == e2 {
                            continue;
                        }
                        consider(&[e1, e2, e3], g, &mut best);
                    }
                }
            }
        }
    }
    match best {
        Some(b) => Ok(OracleOutcome { prediction: b.prediction, weight: b.weight, tie: b.tie }),
        None => Err(DecodeError::OracleIncomplete { max_faults }),
    }
}

fn sig_key(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn incident_to_fired(g: &DetectorGraph, fired: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for &d in fired {
        out.extend_from_slice(g.incident(d));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Detector signature of `target XOR edge(e)`, sorted.
fn xor_sig(target: &[u32], g: &DetectorGraph, e: u32) -> Vec<u32> {
    let edge = &g.edges[e as usize];
    let mut out: Vec<u32> = target.to_vec();
    for d in [edge.a, edge.b] {
        if d == BOUNDARY {
            continue;
        }
        match out.binary_search(&d) {
            Ok(pos) => {
                out.remove(pos);
            }
            Err(pos) => out.insert(pos, d),
        }
    }
    out
}

/// The detector signature of one edge, as a syndrome.
pub fn edge_syndrome(g: &DetectorGraph, edge: usize) -> Syndrome {
    let e = &g.edges[edge];
    let mut fired = vec![e.a];
    if e.b != BOUNDARY {
        fired.push(e.b);
    }
    Syndrome::new(fired)
}

/// The combined signature of two edges.
pub fn pair_syndrome(g: &DetectorGraph, e1: usize, e2: usize) -> Syndrome {
    let s1 = edge_syndrome(g, e1);
    Syndrome::new(xor_sig(&s1.fired, g, e2 as u32))
}
