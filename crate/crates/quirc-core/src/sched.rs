//! Dense Pauli-product workloads and their collision-free layer
//! decompositions on multi-module intermediate-block line graphs.
//!
//! Each module is a line of `L = N/M` qubit-ancilla vertices; card
//! connectors sit at the 1-based within-module indices `⌈L/3⌉` and `⌈2L/3⌉`.
//! Inter-module hops are idealized: any connector reaches any other in one
//! hop, consuming both connector vertices. A committed path is the set of
//! line vertices it occupies; within a layer committed paths must be
//! vertex-disjoint.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SchedError {
    #[error("operator density violated: P·K = {got} but N = {n}")]
    Density { got: usize, n: usize },
    #[error("module count {m} does not divide qubit count {n}")]
    NonDividingModules { m: usize, n: usize },
    #[error("operator weight {k} exceeds the brute-force cap of {cap}")]
    WeightTooLarge { k: usize, cap: usize },
    #[error("operator {op} could not be routed in an empty layer")]
    Infeasible { op: usize },
    #[error("order statistic domain error: k = {k} but N = {n}")]
    OrderDomain { k: usize, n: usize },
}

/// Maximum operator weight accepted by the visiting-order brute force.
pub const MAX_OPERATOR_WEIGHT: usize = 8;

/// A dense random workload: `P` disjoint `K`-qubit operators covering 1..N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSet {
    pub n: usize,
    /// Each operator is a sorted list of distinct qubit indices in `1..=N`.
    pub operators: Vec<Vec<usize>>,
}

/// Uniform random partition of `{1..N}` into `P` blocks of size `K`.
pub fn sample_operator_set(
    n: usize,
    p: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<OperatorSet, SchedError> {
    if p * k != n {
        return Err(SchedError::Density { got: p * k, n });
    }
    let mut qubits: Vec<usize> = (1..=n).collect();
    qubits.shuffle(rng);
    let operators = qubits
        .chunks(k)
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(OperatorSet { n, operators })
}

/// M equal line-graph modules with idealized connector-to-connector hops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleGraph {
    pub n: usize,
    pub m: usize,
    /// Qubits per module.
    pub l: usize,
    /// 0-based within-module connector positions (may coincide when L = 1).
    pub connectors: Vec<usize>,
}

impl ModuleGraph {
    pub fn new(n: usize, m: usize) -> Result<Self, SchedError> {
        if m == 0 || n % m != 0 {
            return Err(SchedError::NonDividingModules { m, n });
        }
        let l = n / m;
        let c1 = l.div_ceil(3);
        let c2 = (2 * l).div_ceil(3);
        let connectors = if c1 == c2 { vec![c1 - 1] } else { vec![c1 - 1, c2 - 1] };
        Ok(ModuleGraph { n, m, l, connectors })
    }

    /// Module and 0-based position of a 1-based qubit index.
    #[inline]
    pub fn locate(&self, qubit: usize) -> (usize, usize) {
        ((qubit - 1) / self.l, (qubit - 1) % self.l)
    }

    /// Global vertex id for (module, position).
    #[inline]
    pub fn vertex(&self, module: usize, pos: usize) -> usize {
        module * self.l + pos
    }
}

/// One committed operator path: the set of line vertices it occupies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommittedPath {
    pub operator_index: usize,
    /// Sorted global vertex ids.
    pub vertices: Vec<usize>,
}

impl CommittedPath {
    /// Occupied-vertex count (the ancilla length metric).
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Collision-free layer decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSchedule {
    pub layers: Vec<Vec<CommittedPath>>,
    /// Path length per operator, indexed like `OperatorSet::operators`.
    pub path_lengths: Vec<usize>,
}

impl LayerSchedule {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

/// Interval [lo, hi] of 0-based positions consumed by one module visit.
#[derive(Debug, Clone, Copy)]
struct Visit {
    module: usize,
    lo: usize,
    hi: usize,
}

fn span(points: impl IntoIterator<Item = usize>) -> (usize, usize) {
    let mut lo = usize::MAX;
    let mut hi = 0;
    for p in points {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Cheapest end-visit interval: qubit span extended to the nearest connector.
fn end_visit(g: &ModuleGraph, module: usize, qubits: &[usize]) -> Visit {
    let (qlo, qhi) = span(qubits.iter().copied());
    let best = g
        .connectors
        .iter()
        .map(|&c| {
            let lo = qlo.min(c);
            let hi = qhi.max(c);
            (hi - lo, lo, hi)
        })
        .min()
        .expect("at least one connector");
    Visit { module, lo: best.1, hi: best.2 }
}

/// Middle-visit interval: enter at one connector, exit at the other, covering
/// the module's qubits on the way.
fn middle_visit(g: &ModuleGraph, module: usize, qubits: &[usize]) -> Visit {
    let (qlo, qhi) = span(
        qubits
            .iter()
            .copied()
            .chain(g.connectors.iter().copied()),
    );
    Visit { module, lo: qlo, hi: qhi }
}

/// Try to route one operator on the currently available vertices.
///
/// Brute-forces the module visiting order (the within-module qubit order is
/// forced monotone by the span semantics) and returns the minimum-length
/// available path, or `None` if every order is blocked.
fn route_operator(
    g: &ModuleGraph,
    qubits: &[usize],
    available: &[bool],
) -> Option<Vec<usize>> {
    // Group qubit positions by module, preserving a deterministic order.
    let mut modules: Vec<(usize, Vec<usize>)> = Vec::new();
    for &q in qubits {
        let (m, pos) = g.locate(q);
        match modules.iter_mut().find(|(mm, _)| *mm == m) {
            Some((_, v)) => v.push(pos),
            None => modules.push((m, vec![pos])),
        }
    }
    modules.sort_by_key(|(m, _)| *m);

    let commit = |visits: &[Visit]| -> Option<Vec<usize>> {
        let mut verts = Vec::new();
        for v in visits {
            for pos in v.lo..=v.hi {
                let id = g.vertex(v.module, pos);
                if !available[id] {
                    return None;
                }
                verts.push(id);
            }
        }
        verts.sort_unstable();
        verts.dedup();
        Some(verts)
    };

    if modules.len() == 1 {
        // Single-module operator: the inclusive qubit span, no connectors.
        let (m, ref pos) = modules[0];
        let (lo, hi) = span(pos.iter().copied());
        return commit(&[Visit { module: m, lo, hi }]);
    }

    // Multi-module: ends get the cheap treatment, middles consume the
    // connector-to-connector span. Only the (first, last) choice matters.
    let mut best: Option<Vec<usize>> = None;
    let idxs: Vec<usize> = (0..modules.len()).collect();
    for (&first, &last) in idxs.iter().cartesian_product(&idxs) {
        if first == last {
            continue;
        }
        let mut visits = Vec::with_capacity(modules.len());
        for (i, (m, pos)) in modules.iter().enumerate() {
            let v = if i == first || i == last {
                end_visit(g, *m, pos)
            } else {
                middle_visit(g, *m, pos)
            };
            visits.push(v);
        }
        if let Some(verts) = commit(&visits) {
            let better = match &best {
                None => true,
                Some(b) => verts.len() < b.len(),
            };
            if better {
                best = Some(verts);
            }
        }
    }
    best
}

/// Greedy first-fit transpilation of an operator set into collision-free
/// layers. Operators are attempted in sample order; unroutable operators
/// defer to the next layer, where vertex availability resets.
pub fn transpile_layers(s: &OperatorSet, g: &ModuleGraph) -> Result<LayerSchedule, SchedError> {
    for op in &s.operators {
        if op.len() > MAX_OPERATOR_WEIGHT {
            return Err(SchedError::WeightTooLarge { k: op.len(), cap: MAX_OPERATOR_WEIGHT });
        }
    }
    let mut pending: Vec<usize> = (0..s.operators.len()).collect();
    let mut layers = Vec::new();
    let mut path_lengths = vec![0usize; s.operators.len()];
    while !pending.is_empty() {
        let mut available = vec![true; s.n];
        let mut layer = Vec::new();
        let mut deferred = Vec::new();
        for &op in &pending {
            match route_operator(g, &s.operators[op], &available) {
                Some(vertices) => {
                    for &v in &vertices {
                        available[v] = false;
                    }
                    path_lengths[op] = vertices.len();
                    layer.push(CommittedPath { operator_index: op, vertices });
                }
                None => deferred.push(op),
            }
        }
        if layer.is_empty() {
            return Err(SchedError::Infeasible { op: deferred[0] });
        }
        layers.push(layer);
        pending = deferred;
    }
    Ok(LayerSchedule { layers, path_lengths })
}

/// Mean committed path length and the per-operator lengths.
pub fn ancilla_stats(sched: &LayerSchedule) -> (f64, Vec<usize>) {
    let lengths = sched.path_lengths.clone();
    let mean = lengths.iter().sum::<usize>() as f64 / lengths.len().max(1) as f64;
    (mean, lengths)
}

/// Order statistics for k uniform draws without replacement from 1..N:
///
/// ```text
/// E[k_max] = k (N+1) / (k+1)
/// E[k_min] = N − k (N+1) / (k+1)        (symmetry form)
/// E[span]  = (N (k−1) + 2k) / (k+1)
/// ```
///
/// The span expression equals the expectation of the inclusive span
/// `max − min + 1` over the draws.
pub fn expected_order_stats(n: usize, k: usize) -> Result<(f64, f64, f64), SchedError> {
    let (smax, smin, sspan) = expected_order_stats_rational(n, k)?;
    Ok((
        smax.0 as f64 / smax.1 as f64,
        smin.0 as f64 / smin.1 as f64,
        sspan.0 as f64 / sspan.1 as f64,
    ))
}

/// The same statistics as reduced exact fractions `(numerator, denominator)`.
pub fn expected_order_stats_rational(
    n: usize,
    k: usize,
) -> Result<((i64, i64), (i64, i64), (i64, i64)), SchedError> {
    if k == 0 || k > n {
        return Err(SchedError::OrderDomain { k, n });
    }
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let reduce = |num: i64, den: i64| -> (i64, i64) {
        let g = gcd(num, den).max(1);
        (num / g, den / g)
    };
    let (ni, ki) = (n as i64, k as i64);
    let e_max = reduce(ki * (ni + 1), ki + 1);
    let e_min = reduce(ni * (ki + 1) - ki * (ni + 1), ki + 1);
    let e_span = reduce(ni * (ki - 1) + 2 * ki, ki + 1);
    Ok((e_max, e_min, e_span))
}

/// One benchmark cell: raw per-sample results for a (P, K, M) triple.
#[derive(Debug, Clone)]
pub struct BenchmarkCell {
    pub p: usize,
    pub k: usize,
    pub m: usize,
    pub layers: Vec<usize>,
    pub mean_ancilla: Vec<f64>,
}

impl BenchmarkCell {
    pub fn mean_layers(&self) -> f64 {
        self.layers.iter().sum::<usize>() as f64 / self.layers.len().max(1) as f64
    }

    pub fn mean_ancilla_len(&self) -> f64 {
        self.mean_ancilla.iter().sum::<f64>() / self.mean_ancilla.len().max(1) as f64
    }
}

/// Full benchmark grid over (P, K) combos and module counts.
///
/// The same 100 operator samples per (P, K, sample index) are reused across
/// every M so that reductions relative to M = 1 are matched-sample.
#[derive(Debug, Clone)]
pub struct BenchmarkGrid {
    pub cells: Vec<BenchmarkCell>,
    pub samples: usize,
    pub seed: u64,
}

impl BenchmarkGrid {
    pub fn cell(&self, p: usize, k: usize, m: usize) -> Option<&BenchmarkCell> {
        self.cells.iter().find(|c| c.p == p && c.k == k && c.m == m)
    }

    /// Percentage reduction of mean layers at (p, k, m) relative to M = 1,
    /// pooled definition: `100 · (1 − mean_m / mean_1)`.
    pub fn layer_reduction_pct(&self, p: usize, k: usize, m: usize) -> Option<f64> {
        let base = self.cell(p, k, 1)?.mean_layers();
        let at = self.cell(p, k, m)?.mean_layers();
        Some(100.0 * (1.0 - at / base))
    }

    pub fn ancilla_reduction_pct(&self, p: usize, k: usize, m: usize) -> Option<f64> {
        let base = self.cell(p, k, 1)?.mean_ancilla_len();
        let at = self.cell(p, k, m)?.mean_ancilla_len();
        Some(100.0 * (1.0 - at / base))
    }

    /// Per-sample (matched) mean of reductions: `100 · mean_s(1 − x_m(s)/x_1(s))`.
    pub fn layer_reduction_per_sample_pct(&self, p: usize, k: usize, m: usize) -> Option<f64> {
        let base = self.cell(p, k, 1)?;
        let at = self.cell(p, k, m)?;
        let vals: Vec<f64> = base
            .layers
            .iter()
            .zip(&at.layers)
            .map(|(&b, &a)| 100.0 * (1.0 - a as f64 / b as f64))
            .collect();
        Some(vals.iter().sum::<f64>() / vals.len().max(1) as f64)
    }
}

pub const DEFAULT_COMBOS: [(usize, usize); 4] = [(3, 8), (4, 6), (6, 4), (8, 3)];
pub const DEFAULT_MODULE_COUNTS: [usize; 7] = [1, 2, 3, 4, 6, 8, 12];

pub fn benchmark_grid(
    n: usize,
    combos: &[(usize, usize)],
    module_counts: &[usize],
    samples: usize,
    seed: u64,
) -> Result<BenchmarkGrid, SchedError> {
    for &m in module_counts {
        if m == 0 || n % m != 0 {
            return Err(SchedError::NonDividingModules { m, n });
        }
    }
    let mut cells = Vec::new();
    for &(p, k) in combos {
        // Sample the operator sets once per (P, K); reuse across all M.
        let sets: Vec<OperatorSet> = (0..samples)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((p as u64) << 32) ^ ((k as u64) << 16) ^ s as u64);
                sample_operator_set(n, p, k, &mut rng)
            })
            .collect::<Result<_, _>>()?;
        for &m in module_counts {
            let g = ModuleGraph::new(n, m)?;
            let results: Vec<(usize, f64)> = sets
                .par_iter()
                .map(|s| {
                    let sched = transpile_layers(s, &g).expect("valid module graph");
                    let (mean_len, _) = ancilla_stats(&sched);
                    (sched.layer_count(), mean_len)
                })
                .collect();
            cells.push(BenchmarkCell {
                p,
                k,
                m,
                layers: results.iter().map(|r| r.0).collect(),
                mean_ancilla: results.iter().map(|r| r.1).collect(),
            });
        }
    }
    Ok(BenchmarkGrid { cells, samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn operator_sets_partition_the_qubits() {
        let s = sample_operator_set(24, 8, 3, &mut rng(1)).unwrap();
        assert_eq!(s.operators.len(), 8);
        let mut all: Vec<usize> = s.operators.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (1..=24).collect::<Vec<_>>());
        assert!(s.operators.iter().all(|o| o.len() == 3));
    }

    #[test]
    fn density_enforced() {
        assert_eq!(
            sample_operator_set(24, 8, 4, &mut rng(1)).unwrap_err(),
            SchedError::Density { got: 32, n: 24 }
        );
    }

    #[test]
    fn only_partition_of_two() {
        let s = sample_operator_set(2, 1, 2, &mut rng(9)).unwrap();
        assert_eq!(s.operators, vec![vec![1, 2]]);
    }

    #[test]
    fn pairings_are_uniform() {
        // All 15 perfect pairings of 6 qubits within 3 sigma of 1/15.
        let trials = 10_000;
        let mut counts: HashMap<Vec<Vec<usize>>, usize> = HashMap::new();
        let mut r = rng(42);
        for _ in 0..trials {
            let mut s = sample_operator_set(6, 3, 2, &mut r).unwrap();
            s.operators.sort();
            *counts.entry(s.operators).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        let expect = trials as f64 / 15.0;
        let sigma = (trials as f64 * (1.0 / 15.0) * (14.0 / 15.0)).sqrt();
        for (_, &c) in &counts {
            assert!(
                (c as f64 - expect).abs() < 3.0 * sigma,
                "pairing count {c} outside {expect} ± {}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn connector_indices_match_ceiling_rule() {
        let g = ModuleGraph::new(24, 2).unwrap(); // L = 12
        assert_eq!(g.connectors, vec![3, 7]); // 1-based 4 and 8
        let g = ModuleGraph::new(24, 8).unwrap(); // L = 3
        assert_eq!(g.connectors, vec![0, 1]);
        let g = ModuleGraph::new(24, 24).unwrap(); // L = 1: single connector
        assert_eq!(g.connectors, vec![0]);
    }

    #[test]
    fn fully_distributed_always_one_layer() {
        let g = ModuleGraph::new(24, 24).unwrap();
        let mut r = rng(7);
        for &(p, k) in &DEFAULT_COMBOS {
            for _ in 0..20 {
                let s = sample_operator_set(24, p, k, &mut r).unwrap();
                let sched = transpile_layers(&s, &g).unwrap();
                assert_eq!(sched.layer_count(), 1, "(P,K)=({p},{k})");
                // No bridging ancilla: path length = K for every operator.
                assert!(sched.path_lengths.iter().all(|&l| l == k));
            }
        }
    }

    #[test]
    fn adversarial_pairing_needs_p_layers() {
        // {i, N+1-i} pairs on a single module.
        let n = 24;
        let g = ModuleGraph::new(n, 1).unwrap();
        let operators: Vec<Vec<usize>> = (1..=n / 2).map(|i| vec![i, n + 1 - i]).collect();
        let s = OperatorSet { n, operators };
        let sched = transpile_layers(&s, &g).unwrap();
        assert_eq!(sched.layer_count(), n / 2);
    }

    #[test]
    fn hand_traced_single_module_case() {
        // (1,6) blocks 1..6; (2,5) blocks 2..5; (3,4) goes last.
        let g = ModuleGraph::new(6, 1).unwrap();
        let s = OperatorSet { n: 6, operators: vec![vec![1, 6], vec![2, 5], vec![3, 4]] };
        let sched = transpile_layers(&s, &g).unwrap();
        assert_eq!(sched.layer_count(), 3);
        assert_eq!(sched.path_lengths, vec![6, 4, 2]);
    }

    #[test]
    fn layers_are_vertex_disjoint_and_complete() {
        let mut r = rng(3);
        for &m in &[1usize, 2, 3, 4, 6, 8, 12] {
            let g = ModuleGraph::new(24, m).unwrap();
            for &(p, k) in &DEFAULT_COMBOS {
                let s = sample_operator_set(24, p, k, &mut r).unwrap();
                let sched = transpile_layers(&s, &g).unwrap();
                let mut seen_ops = vec![false; p];
                for layer in &sched.layers {
                    let mut used = vec![false; 24];
                    for path in layer {
                        assert!(!seen_ops[path.operator_index]);
                        seen_ops[path.operator_index] = true;
                        for &v in &path.vertices {
                            assert!(!used[v], "vertex {v} shared within a layer");
                            used[v] = true;
                        }
                        // Path covers all the operator's qubit vertices.
                        for &q in &s.operators[path.operator_index] {
                            let (module, pos) = g.locate(q);
                            assert!(path.vertices.contains(&g.vertex(module, pos)));
                        }
                    }
                }
                assert!(seen_ops.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn order_stats_formulas() {
        let (_, _, e24) = expected_order_stats(24, 24).unwrap();
        assert!((e24 - 24.0).abs() < 1e-12);
        let (_, _, e1) = expected_order_stats(24, 1).unwrap();
        assert!((e1 - 1.0).abs() < 1e-12);
        let (emax, emin, espan) = expected_order_stats(24, 3).unwrap();
        assert!((emax - 18.75).abs() < 1e-12);
        assert!((emin - 5.25).abs() < 1e-12);
        assert!((espan - 13.5).abs() < 1e-12);
        assert!(expected_order_stats(24, 25).is_err());
    }

    #[test]
    fn monte_carlo_span_matches_eq3() {
        let n = 24;
        let trials = 100_000;
        let mut r = rng(100);
        for &k in &[2usize, 3, 6, 12] {
            let mut qubits: Vec<usize> = (1..=n).collect();
            let mut sum = 0f64;
            let mut sumsq = 0f64;
            for _ in 0..trials {
                qubits.shuffle(&mut r);
                let (lo, hi) = span(qubits[..k].iter().copied());
                let s = (hi - lo + 1) as f64;
                sum += s;
                sumsq += s * s;
            }
            let mean = sum / trials as f64;
            let var = (sumsq / trials as f64 - mean * mean).max(0.0);
            let sem = (var / trials as f64).sqrt();
            let (_, _, expect) = expected_order_stats(n, k).unwrap();
            assert!(
                (mean - expect).abs() < 3.0 * sem + 1e-9,
                "k={k}: {mean} vs {expect} ± {}",
                3.0 * sem
            );
        }
    }

    #[test]
    fn single_operator_span_is_inclusive() {
        let g = ModuleGraph::new(6, 1).unwrap();
        let s = OperatorSet { n: 6, operators: vec![vec![1, 6]] };
        let sched = transpile_layers(&s, &g).unwrap();
        assert_eq!(sched.path_lengths, vec![6]);
    }
}
