//! Driver and target selection for the control triplet (A, B, C).
//!
//! Drivers guarantee controllability of (A, B): with pairwise distinct
//! diagonal entries, one independent input reaching every root strongly
//! connected component of the graph suffices, so the selection places one
//! driver per root component of the condensation and fills the remaining
//! slots at random.

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::{self, EigDecomp};
use crate::mp::{log10_f64, PrecisionConfig};
use crate::netgen::Network;
use crate::rng;

/// Driver (input) node set; induces the n x m versor matrix B.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputSet {
    nodes: Vec<usize>,
}

/// Target node set; induces the p x n versor matrix C.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetSet {
    nodes: Vec<usize>,
}

fn validate_nodes(nodes: &[usize], n: usize, what: &str) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Config(format!("{what} set is empty")));
    }
    let mut seen = std::collections::HashSet::new();
    for &v in nodes {
        if v >= n {
            return Err(Error::Config(format!(
                "{what} node {v} out of range for n = {n}"
            )));
        }
        if !seen.insert(v) {
            return Err(Error::Config(format!("duplicate {what} node {v}")));
        }
    }
    Ok(())
}

impl InputSet {
    pub fn new(mut nodes: Vec<usize>, n: usize) -> Result<Self> {
        validate_nodes(&nodes, n, "driver")?;
        nodes.sort_unstable();
        Ok(InputSet { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl TargetSet {
    pub fn new(mut nodes: Vec<usize>, n: usize) -> Result<Self> {
        validate_nodes(&nodes, n, "target")?;
        nodes.sort_unstable();
        Ok(TargetSet { nodes })
    }

    /// All nodes of an n-node network.
    pub fn all(n: usize) -> Self {
        TargetSet {
            nodes: (0..n).collect(),
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_subset_of(&self, other: &TargetSet) -> bool {
        self.nodes.iter().all(|v| other.nodes.binary_search(v).is_ok())
    }
}

/// Iterative Tarjan strongly connected components. Returns the component id
/// of every node; ids are in reverse topological order of the condensation
/// (a component's id is larger than the ids of components it reaches).
pub fn strongly_connected_components(n: usize, adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0usize;
    let mut n_comps = 0usize;

    for start in 0..n {
        if index[start] != UNVISITED {
            continue;
        }
        call.push((start, 0));
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*ei) {
                *ei += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = n_comps;
                        if w == v {
                            break;
                        }
                    }
                    n_comps += 1;
                }
                call.pop();
                if let Some(&mut (u, _)) = call.last_mut() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    (n_comps, comp)
}

/// Root components of the condensation (no incoming edge from another
/// component), as lists of member nodes.
fn root_components(net: &Network) -> Vec<Vec<usize>> {
    let n = net.n();
    let mut adj = vec![Vec::new(); n];
    for e in net.edges() {
        adj[e.src].push(e.dst);
    }
    let (n_comps, comp) = strongly_connected_components(n, &adj);
    let mut has_incoming = vec![false; n_comps];
    for e in net.edges() {
        if comp[e.src] != comp[e.dst] {
            has_incoming[comp[e.dst]] = true;
        }
    }
    let mut members = vec![Vec::new(); n_comps];
    for v in 0..n {
        members[comp[v]].push(v);
    }
    (0..n_comps)
        .filter(|&c| !has_incoming[c])
        .map(|c| members[c].clone())
        .collect()
}

/// Select `m` driver nodes: one random member of every root strongly
/// connected component (an over-estimate of the power dominating set that
/// keeps every node reachable), then uniformly random non-driver nodes until
/// `m` drivers are placed.
pub fn select_drivers(net: &Network, m: usize, seed: u64) -> Result<InputSet> {
    let n = net.n();
    if m == 0 || m > n {
        return Err(Error::Config(format!(
            "driver count {m} out of range for n = {n}"
        )));
    }
    let roots = root_components(net);
    if m < roots.len() {
        return Err(Error::Config(format!(
            "driver count {m} is below the number of root components; minimum feasible is {}",
            roots.len()
        )));
    }
    let mut rng = rng::stream(seed, &[0x6472]);
    let mut chosen: Vec<usize> = roots
        .iter()
        .map(|members| *members.choose(&mut rng).expect("root component is nonempty"))
        .collect();
    let taken: std::collections::HashSet<usize> = chosen.iter().copied().collect();
    let remaining: Vec<usize> = (0..n).filter(|v| !taken.contains(v)).collect();
    let extra = m - chosen.len();
    chosen.extend(remaining.choose_multiple(&mut rng, extra).copied());
    InputSet::new(chosen, n)
}

/// Nodes reachable from the driver set (used by tests and audits).
pub fn all_reachable(net: &Network, inputs: &InputSet) -> bool {
    let n = net.n();
    let mut adj = vec![Vec::new(); n];
    for e in net.edges() {
        adj[e.src].push(e.dst);
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = inputs.nodes().to_vec();
    for &v in inputs.nodes() {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// The n x m versor matrix B: one unit column per driver node.
pub fn build_input_matrix(inputs: &InputSet, n: usize) -> Result<Array2<f64>> {
    validate_nodes(inputs.nodes(), n, "driver")?;
    let mut b = Array2::<f64>::zeros((n, inputs.len()));
    for (j, &node) in inputs.nodes().iter().enumerate() {
        b[(node, j)] = 1.0;
    }
    Ok(b)
}

/// The p x n versor matrix C: one unit row per target node.
pub fn build_output_matrix(targets: &TargetSet, n: usize) -> Result<Array2<f64>> {
    validate_nodes(targets.nodes(), n, "target")?;
    let mut c = Array2::<f64>::zeros((targets.len(), n));
    for (i, &node) in targets.nodes().iter().enumerate() {
        c[(i, node)] = 1.0;
    }
    Ok(c)
}

/// Uniform random target set of size p.
pub fn sample_target_set(n: usize, p: usize, seed: u64) -> Result<TargetSet> {
    if p == 0 || p > n {
        return Err(Error::Config(format!(
            "target count {p} out of range for n = {n}"
        )));
    }
    let mut rng = rng::stream(seed, &[0x7467]);
    let nodes = rand::seq::index::sample(&mut rng, n, p).into_vec();
    TargetSet::new(nodes, n)
}

/// Nested chain of target sets P_1 in P_2 in ... in P_n from a uniformly
/// random removal order.
pub fn sample_nested_chain(n: usize, seed: u64) -> Vec<TargetSet> {
    let mut rng = rng::stream(seed, &[0x6368]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    (1..=n)
        .map(|p| TargetSet::new(order[..p].to_vec(), n).expect("chain prefix is valid"))
        .collect()
}

/// Result of the output-controllability probe.
#[derive(Clone, Debug, Serialize)]
pub struct ControllabilityReport {
    pub controllable: bool,
    pub log10_mu1: f64,
    pub mu1: f64,
    pub floor_digits: u32,
}

/// Spectral output-controllability test: the triplet is output controllable
/// iff the smallest Gramian eigenvalue clears the precision floor
/// `10^(-digits/2)`. Equivalent to the Kalman rank condition for a positive
/// horizon, but meaningful at scales where the rank test is numerically
/// hopeless.
pub fn output_controllability_check(
    net: &Network,
    inputs: &InputSet,
    targets: &TargetSet,
    horizon: (f64, f64),
    prec: &PrecisionConfig,
) -> Result<ControllabilityReport> {
    let decomp = gramian::eig_decompose(net)?;
    output_controllability_check_with(&decomp, inputs, targets, horizon, prec)
}

/// Same as [`output_controllability_check`] with a precomputed
/// eigendecomposition.
pub fn output_controllability_check_with(
    decomp: &EigDecomp,
    inputs: &InputSet,
    targets: &TargetSet,
    horizon: (f64, f64),
    prec: &PrecisionConfig,
) -> Result<ControllabilityReport> {
    let gram = gramian::compute_gramian(decomp, &gramian::InputMatrix::Versors(inputs), targets, horizon.0, horizon.1, prec)?;
    let mu1 = gram.smallest_eigenvalue();
    let floor = prec.controllability_floor();
    Ok(ControllabilityReport {
        controllable: *mu1 > floor,
        log10_mu1: log10_f64(mu1),
        mu1: mu1.to_f64(),
        floor_digits: prec.digits() / 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{assign_weights, generate_static, stabilize, Network};

    fn chain3() -> Network {
        // 0 -> 1 -> 2
        let net = Network::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        stabilize(&assign_weights(&net, 3).unwrap()).unwrap()
    }

    #[test]
    fn chain_needs_one_driver_at_head() {
        let net = chain3();
        let drivers = select_drivers(&net, 1, 42).unwrap();
        assert_eq!(drivers.nodes(), &[0]);
        assert!(all_reachable(&net, &drivers));
    }

    #[test]
    fn isolated_nodes_are_all_roots() {
        let net = Network::from_edges(2, []).unwrap();
        let net = stabilize(&assign_weights(&net, 1).unwrap()).unwrap();
        let err = select_drivers(&net, 1, 7).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let drivers = select_drivers(&net, 2, 7).unwrap();
        assert_eq!(drivers.nodes(), &[0, 1]);
    }

    #[test]
    fn two_cycle_needs_one_driver() {
        let net = Network::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let net = stabilize(&assign_weights(&net, 1).unwrap()).unwrap();
        let drivers = select_drivers(&net, 1, 5).unwrap();
        assert_eq!(drivers.len(), 1);
        assert!(all_reachable(&net, &drivers));
    }

    #[test]
    fn random_nets_always_reachable() {
        for seed in 0..10 {
            let net = generate_static(60, 2.5, 2.5, 2.0, seed).unwrap();
            let net = stabilize(&assign_weights(&net, seed).unwrap()).unwrap();
            let roots = root_components(&net).len();
            let m = roots.max(30);
            let drivers = select_drivers(&net, m, seed ^ 99).unwrap();
            assert!(all_reachable(&net, &drivers), "seed {seed}");
            assert_eq!(drivers.len(), m);
        }
    }

    #[test]
    fn input_matrix_is_orthonormal() {
        let inputs = InputSet::new(vec![2, 0], 3).unwrap();
        let b = build_input_matrix(&inputs, 3).unwrap();
        let btb = b.t().dot(&b);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(btb[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(b[(0, 0)], 1.0); // sorted: node 0 first
        assert_eq!(b[(2, 1)], 1.0);
    }

    #[test]
    fn output_matrix_ccT_is_identity() {
        let targets = TargetSet::new(vec![3], 4).unwrap();
        let c = build_output_matrix(&targets, 4).unwrap();
        assert_eq!(c[(0, 3)], 1.0);
        let all = TargetSet::all(4);
        let c = build_output_matrix(&all, 4).unwrap();
        let cct = c.dot(&c.t());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(cct[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn full_target_sample_is_everything() {
        let t = sample_target_set(5, 5, 3).unwrap();
        assert_eq!(t.nodes(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn singleton_sampling_is_uniform() {
        let n = 10;
        let draws = 10_000;
        let mut counts = vec![0usize; n];
        for k in 0..draws {
            let t = sample_target_set(n, 1, k as u64).unwrap();
            counts[t.nodes()[0]] += 1;
        }
        let expected = draws as f64 / n as f64;
        let sigma = (draws as f64 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64)).sqrt();
        for (node, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() < 3.0 * sigma,
                "node {node} drawn {c} times (expected {expected:.0} +- {:.0})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_target_set(20, 7, 5).unwrap();
        let b = sample_target_set(20, 7, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nested_chain_is_nested_and_complete() {
        let chain = sample_nested_chain(6, 11);
        assert_eq!(chain.len(), 6);
        for k in 1..chain.len() {
            assert_eq!(chain[k].len(), k + 1);
            assert!(chain[k - 1].is_subset_of(&chain[k]));
        }
        assert_eq!(chain[5].nodes(), &[0, 1, 2, 3, 4, 5]);
        let again = sample_nested_chain(6, 11);
        assert_eq!(chain, again);
    }

    #[test]
    fn scc_on_cycle_plus_tail() {
        // 0 <-> 1, 1 -> 2
        let adj = vec![vec![1], vec![0, 2], vec![]];
        let (n_comps, comp) = strongly_connected_components(3, &adj);
        assert_eq!(n_comps, 2);
        assert_eq!(comp[0], comp[1]);
        assert_ne!(comp[0], comp[2]);
    }
}
