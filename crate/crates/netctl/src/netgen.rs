//! Model-network construction and ingestion.
//!
//! Networks are directed simple graphs with weighted edges, per-node diagonal
//! noise and a global stabilizing shift. The adjacency convention is
//! `A[i][j] != 0` iff node `i` receives an edge from node `j`; self-dynamics
//! live only on the diagonal, `a_ii = delta_i + eps`.

use std::collections::HashSet;
use std::io::BufRead;

use ndarray::Array2;
use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

/// Spectral placement tolerance for stabilization.
pub const SPECTRAL_TOL: f64 = 1e-8;

const DELTA_RETRY_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma_in: Option<f64>, // None = infinite exponent (Erdos-Renyi limit)
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma_out: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_av: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dpr_swaps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub duplicate_lines: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub self_loop_lines: Option<usize>,
}

/// A directed weighted network in one of three stages: topology only,
/// weighted, or stabilized (weights, diagonal noise and shift all present).
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    delta: Option<Vec<f64>>,
    shift: Option<f64>,
    pub meta: NetworkMeta,
}

/// Per-node in/out degrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    pub in_degrees: Vec<usize>,
    pub out_degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn average(&self) -> f64 {
        let total: usize = self.out_degrees.iter().sum();
        total as f64 / self.out_degrees.len() as f64
    }

    pub fn edge_count(&self) -> usize {
        self.out_degrees.iter().sum()
    }
}

impl Network {
    /// Topology-only network from an explicit edge list.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (src, dst) in edges {
            if src >= n || dst >= n {
                return Err(Error::Generation(format!(
                    "edge ({src}, {dst}) out of range for n = {n}"
                )));
            }
            if src == dst {
                return Err(Error::Generation(format!("self-edge at node {src}")));
            }
            if !seen.insert((src, dst)) {
                return Err(Error::Generation(format!("duplicate edge ({src}, {dst})")));
            }
            out.push(Edge {
                src,
                dst,
                weight: None,
            });
        }
        Ok(Network {
            n,
            edges: out,
            delta: None,
            shift: None,
            meta: NetworkMeta {
                source: "explicit".into(),
                ..Default::default()
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn delta(&self) -> Option<&[f64]> {
        self.delta.as_deref()
    }

    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_some()) && self.delta.is_some()
    }

    pub fn is_stabilized(&self) -> bool {
        self.is_weighted() && self.shift.is_some()
    }

    /// Replace the diagonal noise (values must be pairwise distinct).
    /// Invalidates any previous stabilization.
    pub fn with_delta(mut self, delta: Vec<f64>) -> Result<Self> {
        if delta.len() != self.n {
            return Err(Error::Generation(format!(
                "delta has {} entries, expected {}",
                delta.len(),
                self.n
            )));
        }
        let mut seen = HashSet::new();
        for &d in &delta {
            if !seen.insert(d.to_bits()) {
                return Err(Error::Generation(
                    "diagonal noise values must be pairwise distinct".into(),
                ));
            }
        }
        self.delta = Some(delta);
        self.shift = None;
        Ok(self)
    }

    /// Dense adjacency matrix; requires a stabilized network.
    pub fn matrix(&self) -> Result<Array2<f64>> {
        let shift = self.shift.ok_or_else(|| {
            Error::InvalidState("network is not stabilized; call stabilize first".into())
        })?;
        self.matrix_with_shift(shift)
    }

    fn matrix_with_shift(&self, shift: f64) -> Result<Array2<f64>> {
        let delta = self
            .delta
            .as_ref()
            .ok_or_else(|| Error::InvalidState("diagonal noise not assigned".into()))?;
        let mut a = Array2::<f64>::zeros((self.n, self.n));
        for e in &self.edges {
            let w = e.weight.ok_or_else(|| {
                Error::InvalidState("edge weights not assigned; call assign_weights first".into())
            })?;
            // node dst receives from src
            a[(e.dst, e.src)] = w;
        }
        for i in 0..self.n {
            a[(i, i)] = delta[i] + shift;
        }
        Ok(a)
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        let mut ins = vec![0usize; self.n];
        let mut outs = vec![0usize; self.n];
        for e in &self.edges {
            outs[e.src] += 1;
            ins[e.dst] += 1;
        }
        DegreeSequence {
            in_degrees: ins,
            out_degrees: outs,
        }
    }

    /// Largest real part over the spectrum of the stabilized matrix.
    pub fn spectral_abscissa(&self) -> Result<f64> {
        linalg::spectral_abscissa(&self.matrix()?)
    }

    pub fn to_json(&self) -> Result<String> {
        let shift = self.shift.ok_or_else(|| {
            Error::InvalidState("only stabilized networks can be serialized".into())
        })?;
        let delta = self.delta.as_ref().expect("stabilized implies delta");
        let file = NetworkFile {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| (e.src, e.dst, e.weight.expect("stabilized implies weights")))
                .collect(),
            diag: delta.iter().map(|d| d + shift).collect(),
            meta: FileMeta {
                meta: self.meta.clone(),
                shift,
                delta: Some(delta.clone()),
            },
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        let shift = file.meta.shift;
        // diag - shift does not reproduce delta bit-exactly, so files we wrote
        // carry the noise vector itself; externally written files may not.
        let delta: Vec<f64> = match file.meta.delta {
            Some(d) => d,
            None => file.diag.iter().map(|d| d - shift).collect(),
        };
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(file.edges.len());
        for (src, dst, w) in file.edges {
            if src >= file.n || dst >= file.n {
                return Err(Error::Generation(format!(
                    "edge ({src}, {dst}) out of range for n = {}",
                    file.n
                )));
            }
            if src == dst {
                return Err(Error::Generation("self-edge in network file".into()));
            }
            if !seen.insert((src, dst)) {
                return Err(Error::Generation("duplicate edge in network file".into()));
            }
            edges.push(Edge {
                src,
                dst,
                weight: Some(w),
            });
        }
        let net = Network {
            n: file.n,
            edges,
            delta: None,
            shift: None,
            meta: file.meta.meta,
        }
        .with_delta(delta)?;
        Ok(Network {
            shift: Some(shift),
            ..net
        })
    }
}

#[derive(Serialize, Deserialize)]
struct FileMeta {
    #[serde(flatten)]
    meta: NetworkMeta,
    shift: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    delta: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
    meta: FileMeta,
}

/// Construct the topology of a scale-free network with the static model.
///
/// Edge endpoints are sampled with node weights `i^-alpha`, `alpha = 1/(gamma
/// - 1)`, independently for the out- and in- sides; an infinite exponent means
/// uniform weights, the Erdos-Renyi limit. Exactly `round(n * k_av)` directed
/// edges are placed, rejecting self-loops and duplicates. Weights and
/// diagonals are not assigned yet.
pub fn generate_static(
    n: usize,
    gamma_in: f64,
    gamma_out: f64,
    k_av: f64,
    seed: u64,
) -> Result<Network> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
    }
    for (name, g) in [("gamma_in", gamma_in), ("gamma_out", gamma_out)] {
        if !(g > 2.0) {
            return Err(Error::Config(format!(
                "{name} must exceed 2 (or be infinite for the Erdos-Renyi limit), got {g}"
            )));
        }
    }
    if !(k_av > 0.0) {
        return Err(Error::Config(format!("k_av must be positive, got {k_av}")));
    }
    let m_edges = (n as f64 * k_av).round() as usize;
    if m_edges > n * (n - 1) {
        return Err(Error::Generation(format!(
            "infeasible edge count: round(n * k_av) = {m_edges} exceeds simple-graph capacity {}",
            n * (n - 1)
        )));
    }
    if m_edges == 0 {
        return Err(Error::Generation("round(n * k_av) is zero".into()));
    }

    let alpha_out = if gamma_out.is_infinite() {
        0.0
    } else {
        1.0 / (gamma_out - 1.0)
    };
    let alpha_in = if gamma_in.is_infinite() {
        0.0
    } else {
        1.0 / (gamma_in - 1.0)
    };
    let node_weights = |alpha: f64| -> Vec<f64> {
        (1..=n).map(|i| (i as f64).powf(-alpha)).collect()
    };
    let dist_out = WeightedAliasIndex::new(node_weights(alpha_out))
        .map_err(|e| Error::Generation(format!("out-weight table: {e}")))?;
    let dist_in = WeightedAliasIndex::new(node_weights(alpha_in))
        .map_err(|e| Error::Generation(format!("in-weight table: {e}")))?;

    let mut rng = rng::stream(seed, &[0x6e65]);
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(m_edges * 2);
    let mut edges = Vec::with_capacity(m_edges);
    let attempt_cap = 200 * m_edges + 10_000;
    let mut attempts = 0usize;
    while edges.len() < m_edges {
        attempts += 1;
        if attempts > attempt_cap {
            return Err(Error::Generation(format!(
                "rejection sampling stalled after {attempts} attempts ({} of {m_edges} edges placed); \
                 the requested density is infeasible under the weight skew",
                edges.len()
            )));
        }
        let src = dist_out.sample(&mut rng);
        let dst = dist_in.sample(&mut rng);
        if src == dst || !seen.insert((src, dst)) {
            continue;
        }
        edges.push(Edge {
            src,
            dst,
            weight: None,
        });
    }

    Ok(Network {
        n,
        edges,
        delta: None,
        shift: None,
        meta: NetworkMeta {
            source: "static".into(),
            gamma_in: gamma_in.is_finite().then_some(gamma_in),
            gamma_out: gamma_out.is_finite().then_some(gamma_out),
            k_av: Some(k_av),
            seed: Some(seed),
            ..Default::default()
        },
    })
}

/// Draw missing edge weights from U(0.5, 1.5) and fresh diagonal noise from
/// U(-1, 1), resampling diagonal values until pairwise distinct. Invalidates
/// any previous stabilization.
pub fn assign_weights(net: &Network, seed: u64) -> Result<Network> {
    let mut rng = rng::stream(seed, &[0x7765]);
    let mut out = net.clone();
    for e in &mut out.edges {
        if e.weight.is_none() {
            e.weight = Some(rng.gen_range(0.5..1.5));
        }
    }
    let mut delta = Vec::with_capacity(net.n);
    let mut seen: HashSet<u64> = HashSet::with_capacity(net.n);
    for i in 0..net.n {
        let mut tries = 0;
        loop {
            let d: f64 = rng.gen_range(-1.0..1.0);
            if seen.insert(d.to_bits()) {
                delta.push(d);
                break;
            }
            tries += 1;
            if tries > DELTA_RETRY_CAP {
                return Err(Error::Generation(format!(
                    "could not draw a distinct diagonal value for node {i} after {DELTA_RETRY_CAP} tries"
                )));
            }
        }
    }
    out.delta = Some(delta);
    out.shift = None;
    out.meta.weight_seed = Some(seed);
    Ok(out)
}

/// Choose the shift so the largest real part of the spectrum equals -1, which
/// makes the matrix Hurwitz. Idempotent up to spectral tolerance.
pub fn stabilize(net: &Network) -> Result<Network> {
    if net.delta.is_none() || !net.edges.iter().all(|e| e.weight.is_some()) {
        return Err(Error::InvalidState(
            "assign weights and diagonal noise before stabilizing".into(),
        ));
    }
    let a0 = net.matrix_with_shift(0.0)?;
    let abscissa = linalg::spectral_abscissa(&a0)?;
    let shift = -1.0 - abscissa;
    let mut out = net.clone();
    out.shift = Some(shift);
    let check = out.spectral_abscissa()?;
    if (check + 1.0).abs() > SPECTRAL_TOL {
        return Err(Error::Eigen(format!(
            "stabilization check failed: spectral abscissa {check:.3e} after shift \
             (possibly defective matrix; re-noise the diagonal)"
        )));
    }
    Ok(out)
}

/// Degree-preserving randomization by double-edge swaps.
///
/// Performs `iterations` accepted swaps of receiving nodes between random
/// edge pairs; swaps that would create self-loops or duplicate edges are
/// skipped and do not count. Weights travel with the edge's source stub. The
/// diagonal is re-noised and the result re-stabilized. If the attempt cap is
/// reached (tiny or rigid graphs), the network is returned with however many
/// swaps were accepted.
pub fn degree_preserving_randomize(net: &Network, iterations: u64, seed: u64) -> Result<Network> {
    if net.edge_count() < 2 {
        return Err(Error::Generation(
            "degree-preserving randomization needs at least 2 edges".into(),
        ));
    }
    if !net.edges.iter().all(|e| e.weight.is_some()) {
        return Err(Error::InvalidState(
            "assign weights before degree-preserving randomization".into(),
        ));
    }
    let mut rng = rng::stream(seed, &[0x6470]);
    let mut edges = net.edges.clone();
    let m = edges.len();
    let mut seen: HashSet<(usize, usize)> = edges.iter().map(|e| (e.src, e.dst)).collect();

    let attempt_cap = iterations.saturating_mul(200).max(10_000);
    let mut attempts = 0u64;
    let mut accepted = 0u64;
    while accepted < iterations && attempts < attempt_cap {
        attempts += 1;
        let i1 = rng.gen_range(0..m);
        let i2 = rng.gen_range(0..m);
        if i1 == i2 {
            continue;
        }
        let (a, b) = (edges[i1].src, edges[i1].dst);
        let (c, d) = (edges[i2].src, edges[i2].dst);
        if a == c || b == d {
            continue; // swap would be a no-op
        }
        if a == d || c == b {
            continue; // self-loop
        }
        if seen.contains(&(a, d)) || seen.contains(&(c, b)) {
            continue; // duplicate
        }
        seen.remove(&(a, b));
        seen.remove(&(c, d));
        seen.insert((a, d));
        seen.insert((c, b));
        edges[i1].dst = d;
        edges[i2].dst = b;
        accepted += 1;
    }
    if accepted < iterations {
        log::warn!(
            "degree-preserving randomization accepted {accepted} of {iterations} swaps \
             before the attempt cap"
        );
    }

    let rewired = Network {
        n: net.n,
        edges,
        delta: None,
        shift: None,
        meta: NetworkMeta {
            dpr_swaps: Some(accepted),
            ..net.meta.clone()
        },
    };
    let renoised = assign_weights(&rewired, rng::derive(seed, &[0x6471]))?;
    // re-noising must not overwrite the swapped weights, only the diagonal
    debug_assert!(renoised
        .edges
        .iter()
        .zip(&rewired.edges)
        .all(|(a, b)| a.weight == b.weight));
    stabilize(&renoised)
}

/// Default swap budget for degree-preserving randomization.
pub fn default_dpr_iterations(net: &Network) -> u64 {
    10 * net.edge_count() as u64
}

/// Parse a whitespace-separated edge list ("src dst [weight]", `#` comments),
/// normalize ids to a dense 0-based index, then draw missing weights and
/// diagonal noise and stabilize. Undirected inputs expand to symmetric
/// directed pairs.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool, seed: u64) -> Result<Network> {
    let mut raw: Vec<(u64, u64, Option<f64>)> = Vec::new();
    let mut self_loops = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::EdgeList {
            line: line_no,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::EdgeList {
                line: line_no,
                msg: format!("expected 'src dst [weight]', got {} fields", tokens.len()),
            });
        }
        let parse_id = |s: &str| -> Result<u64> {
            s.parse::<u64>().map_err(|e| Error::EdgeList {
                line: line_no,
                msg: format!("bad node id {s:?}: {e}"),
            })
        };
        let src = parse_id(tokens[0])?;
        let dst = parse_id(tokens[1])?;
        let weight = if tokens.len() == 3 {
            Some(tokens[2].parse::<f64>().map_err(|e| Error::EdgeList {
                line: line_no,
                msg: format!("bad weight {:?}: {e}", tokens[2]),
            })?)
        } else {
            None
        };
        if src == dst {
            self_loops += 1;
            log::warn!("line {line_no}: ignoring self-loop at node {src} (self-dynamics live on the diagonal)");
            continue;
        }
        raw.push((src, dst, weight));
    }
    if raw.is_empty() {
        return Err(Error::EdgeList {
            line: 0,
            msg: "empty input: no edges found".into(),
        });
    }

    let mut labels: Vec<u64> = raw
        .iter()
        .flat_map(|&(s, d, _)| [s, d])
        .collect::<std::collections::BTreeSet<u64>>()
        .into_iter()
        .collect();
    labels.sort_unstable();
    let index_of = |id: u64| labels.binary_search(&id).expect("label map covers all ids");

    let n = labels.len();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut duplicates = 0usize;
    let mut push = |src: usize, dst: usize, weight: Option<f64>, dups: &mut usize| {
        if seen.insert((src, dst)) {
            edges.push(Edge { src, dst, weight });
        } else {
            *dups += 1;
        }
    };
    for (s, d, w) in raw {
        let (i, j) = (index_of(s), index_of(d));
        push(i, j, w, &mut duplicates);
        if !directed {
            push(j, i, w, &mut duplicates);
        }
    }
    if duplicates > 0 {
        log::warn!("{duplicates} duplicate edge line(s) collapsed; the first occurrence wins");
    }

    let net = Network {
        n,
        edges,
        delta: None,
        shift: None,
        meta: NetworkMeta {
            source: "edge-list".into(),
            labels: Some(labels.iter().map(|l| l.to_string()).collect()),
            duplicate_lines: (duplicates > 0).then_some(duplicates),
            self_loop_lines: (self_loops > 0).then_some(self_loops),
            ..Default::default()
        },
    };
    stabilize(&assign_weights(&net, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn finalized_static(n: usize, gamma: f64, k_av: f64, seed: u64) -> Network {
        let net = generate_static(n, gamma, gamma, k_av, seed).unwrap();
        stabilize(&assign_weights(&net, seed ^ 1).unwrap()).unwrap()
    }

    #[test]
    fn er_limit_has_exact_edge_count() {
        let net = generate_static(100, f64::INFINITY, f64::INFINITY, 4.0, 7).unwrap();
        assert_eq!(net.edge_count(), 400);
        let deg = net.degree_sequence();
        assert_eq!(deg.edge_count(), 400);
        assert_relative_eq!(deg.average(), 4.0);
        // no self-loops or duplicates by construction
        let mut seen = HashSet::new();
        for e in net.edges() {
            assert_ne!(e.src, e.dst);
            assert!(seen.insert((e.src, e.dst)));
        }
    }

    #[test]
    fn finite_gamma_has_exact_edge_count() {
        let net = generate_static(200, 2.5, 2.5, 2.5, 11).unwrap();
        assert_eq!(net.edge_count(), 500);
    }

    #[test]
    fn two_node_capacity_is_the_two_cycle() {
        let net = generate_static(2, 3.0, 3.0, 1.0, 5).unwrap();
        let mut pairs: Vec<(usize, usize)> = net.edges().iter().map(|e| (e.src, e.dst)).collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn infeasible_edge_count_is_rejected() {
        let err = generate_static(2, 3.0, 3.0, 2.0, 5).unwrap_err();
        assert!(matches!(err, Error::Generation(_)));
    }

    #[test]
    fn weights_are_in_range_and_delta_distinct() {
        let net = generate_static(50, 2.5, 2.5, 3.0, 3).unwrap();
        let w = assign_weights(&net, 9).unwrap();
        for e in w.edges() {
            let x = e.weight.unwrap();
            assert!((0.5..1.5).contains(&x));
        }
        let delta = w.delta().unwrap();
        let mut seen = HashSet::new();
        for d in delta {
            assert!(seen.insert(d.to_bits()));
        }
    }

    #[test]
    fn assignment_is_deterministic() {
        let net = generate_static(30, 2.5, 2.5, 2.0, 3).unwrap();
        let a = assign_weights(&net, 42).unwrap();
        let b = assign_weights(&net, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stabilize_scalar() {
        let net = Network::from_edges(1, [])
            .unwrap()
            .with_delta(vec![0.3])
            .unwrap();
        let s = stabilize(&net).unwrap();
        assert_relative_eq!(s.shift().unwrap(), -1.3, epsilon = 1e-12);
        let a = s.matrix().unwrap();
        assert_relative_eq!(a[(0, 0)], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn stabilize_diagonal_pair() {
        let net = Network::from_edges(2, [])
            .unwrap()
            .with_delta(vec![0.5, -0.5])
            .unwrap();
        let s = stabilize(&net).unwrap();
        assert_relative_eq!(s.shift().unwrap(), -1.5, epsilon = 1e-12);
        let a = s.matrix().unwrap();
        assert_relative_eq!(a[(0, 0)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(a[(1, 1)], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn stabilized_abscissa_is_minus_one() {
        let net = finalized_static(50, 2.5, 2.5, 17);
        let s = net.spectral_abscissa().unwrap();
        assert!((s + 1.0).abs() <= SPECTRAL_TOL);
    }

    #[test]
    fn stabilize_is_idempotent() {
        let net = finalized_static(30, 2.5, 2.0, 23);
        let again = stabilize(&net).unwrap();
        assert_relative_eq!(
            net.shift().unwrap(),
            again.shift().unwrap(),
            epsilon = SPECTRAL_TOL
        );
    }

    #[test]
    fn dpr_preserves_degree_sequence() {
        let net = finalized_static(50, 2.5, 3.0, 31);
        let before = net.degree_sequence();
        let rewired = degree_preserving_randomize(&net, 10 * net.edge_count() as u64, 77).unwrap();
        assert_eq!(before, rewired.degree_sequence());
        assert_eq!(net.edge_count(), rewired.edge_count());
        assert!(rewired.is_stabilized());
    }

    #[test]
    fn dpr_on_two_cycle_is_identity() {
        let net = Network::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let net = stabilize(&assign_weights(&net, 5).unwrap()).unwrap();
        let rewired = degree_preserving_randomize(&net, 10, 99).unwrap();
        let mut pairs: Vec<(usize, usize)> =
            rewired.edges().iter().map(|e| (e.src, e.dst)).collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn dpr_moves_most_edges() {
        // edge-set Jaccard similarity to the original drops below 0.5 on average
        let mut total = 0.0;
        let trials = 20;
        for t in 0..trials {
            let net = finalized_static(50, 2.5, 3.0, 100 + t);
            let original: HashSet<(usize, usize)> =
                net.edges().iter().map(|e| (e.src, e.dst)).collect();
            let rewired =
                degree_preserving_randomize(&net, 10 * net.edge_count() as u64, 200 + t).unwrap();
            let new: HashSet<(usize, usize)> =
                rewired.edges().iter().map(|e| (e.src, e.dst)).collect();
            let inter = original.intersection(&new).count() as f64;
            let union = original.union(&new).count() as f64;
            total += inter / union;
        }
        assert!(total / (trials as f64) < 0.5);
    }

    #[test]
    fn edge_list_chain() {
        let net = load_edge_list("1 2\n2 3\n".as_bytes(), true, 4).unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.edge_count(), 2);
        assert!(net.is_stabilized());
    }

    #[test]
    fn edge_list_explicit_weight() {
        let net = load_edge_list("1 2 0.7".as_bytes(), true, 4).unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_relative_eq!(net.edges()[0].weight.unwrap(), 0.7);
    }

    #[test]
    fn edge_list_duplicate_collapses() {
        let net = load_edge_list("1 2\n1 2\n2 1\n".as_bytes(), true, 4).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.meta.duplicate_lines, Some(1));
    }

    #[test]
    fn edge_list_undirected_expands() {
        let net = load_edge_list("1 2 0.3\n".as_bytes(), false, 4).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert!(net.edges().iter().all(|e| e.weight == Some(0.3)));
    }

    #[test]
    fn edge_list_malformed_line_reports_number() {
        let err = load_edge_list("1 2\nbogus\n".as_bytes(), true, 4).unwrap_err();
        match err {
            Error::EdgeList { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn edge_list_empty_is_an_error() {
        assert!(load_edge_list("# nothing\n".as_bytes(), true, 4).is_err());
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let net = finalized_static(20, 2.5, 2.0, 55);
        let text = net.to_json().unwrap();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(net, back);
        assert_eq!(text, back.to_json().unwrap());
    }

    #[test]
    fn full_pipeline_is_deterministic() {
        let a = finalized_static(40, 2.5, 2.5, 9);
        let b = finalized_static(40, 2.5, 2.5, 9);
        assert_eq!(a, b);
    }
}
