//! Temporary probe: search for low-weight undetectable observable flips in
//! the merge-circuit detector graph (effective-distance diagnostic).

use std::collections::HashMap;

use quirc_core::circuit::noise::NoiseParams;
use quirc_core::decoder::{build_detector_graph, BOUNDARY};
use quirc_core::surgery::{build_layout, build_merge_circuit, MergeOptions};

#[test]
#[ignore]
fn find_low_weight_logicals() {
    for d in [3usize, 5] {
        let l = build_layout(d, None).unwrap();
        let np = NoiseParams::local_only(0.01, 0.01);
        let merge = build_merge_circuit(&l, &np, MergeOptions::standard(d)).unwrap();
        let g = build_detector_graph(&merge.circuit).unwrap();
        println!("d={d}: {} detectors, {} edges", g.detector_count, g.edges.len());

        // Weight-1: an edge with empty signature cannot exist (checked in
        // the builder). Weight-2: two parallel edges with different masks.
        let mut groups: HashMap<(u32, u32), (bool, bool)> = HashMap::new();
        for e in &g.edges {
            let key = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
            let entry = groups.entry(key).or_insert((false, false));
            if e.obs_mask == 0 {
                entry.0 = true;
            } else {
                entry.1 = true;
            }
        }
        let weight2: Vec<_> = groups
            .iter()
            .filter(|(_, &(zero, one))| zero && one)
            .map(|(k, _)| *k)
            .collect();
        println!("  weight-2 undetectable logicals: {}", weight2.len());
        for (a, b) in weight2.iter().take(8) {
            let da = describe(&merge, *a);
            let db = describe(&merge, *b);
            println!("    pair at ({a}, {b}): {da} / {db}");
            for e in g.edges.iter().filter(|e| {
                let key = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
                key == (*a, *b)
            }) {
                println!(
                    "      edge mask={} p={:.4} instr={} sector={:?} qubits={:?}",
                    e.obs_mask, e.p, e.provenance.instruction, e.provenance.sector,
                    e.provenance.qubits
                );
            }
        }

        // Weight-3 triangles with odd mask: e1, e2 share a node; residual
        // signature must be closed by a third edge with the right mask.
        let mut sig_lookup: HashMap<(u32, u32), Vec<(u64, f64)>> = HashMap::new();
        for e in &g.edges {
            let key = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
            sig_lookup.entry(key).or_default().push((e.obs_mask, e.p));
        }
        let mut tri = 0usize;
        let mut example: Option<(usize, usize)> = None;
        for (i, e1) in g.edges.iter().enumerate() {
            for (j, e2) in g.edges.iter().enumerate().skip(i + 1) {
                // Residual of e1 ⊕ e2.
                let mut nodes: Vec<u32> = Vec::new();
                for n in [e1.a, e1.b, e2.a, e2.b] {
                    if n == BOUNDARY {
                        continue;
                    }
                    match nodes.iter().position(|&x| x == n) {
                        Some(pos) => {
                            nodes.remove(pos);
                        }
                        None => nodes.push(n),
                    }
                }
                if nodes.len() > 2 {
                    continue;
                }
                let key = match nodes.len() {
                    0 => continue, // weight-2 case already handled
                    1 => (nodes[0].min(BOUNDARY), nodes[0].max(BOUNDARY)),
                    _ => {
                        let (x, y) = (nodes[0], nodes[1]);
                        if x <= y {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    }
                };
                let key = if key.1 == BOUNDARY { (key.0, BOUNDARY) } else { key };
                if let Some(cands) = sig_lookup.get(&key) {
                    let want = 1 ^ e1.obs_mask ^ e2.obs_mask;
                    if cands.iter().any(|&(m, _)| m == want) {
                        tri += 1;
                        if example.is_none() {
                            example = Some((i, j));
                        }
                    }
                }
            }
        }
        println!("  weight-3 undetectable logical combos: {tri}");
        if let Some((i, j)) = example {
            let (e1, e2) = (&g.edges[i], &g.edges[j]);
            println!(
                "    example: e1 instr={} {:?} {:?}, e2 instr={} {:?} {:?}",
                e1.provenance.instruction,
                e1.provenance.sector,
                e1.provenance.qubits,
                e2.provenance.instruction,
                e2.provenance.sector,
                e2.provenance.qubits
            );
        }
        if d == 3 {
            assert!(weight2.is_empty(), "d=3 must have no weight-2 logicals");
        } else {
            assert!(weight2.is_empty(), "d=5 must have no weight-2 logicals");
            assert_eq!(tri, 0, "d=5 must have no weight-3 logicals");
        }
    }
}

fn describe(merge: &quirc_core::surgery::MergeCircuit, node: u32) -> String {
    if node == BOUNDARY {
        return "boundary".into();
    }
    let info = merge.detector_info[node as usize];
    format!("{:?}@{:?} round {}", info.kind, info.center, info.round)
}
