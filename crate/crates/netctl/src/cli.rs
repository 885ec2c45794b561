//! Command implementations behind the `netctl` binary.
//!
//! Every command is a pure function of (config, seed): all randomness flows
//! through tagged streams derived from the master seed, and emitted files
//! contain no timestamps, so re-running a command reproduces its outputs
//! byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::{CostPaths, ExperimentConfig, TargetSpec, YfSpec};
use crate::ctrlcfg::{
    build_input_matrix, output_controllability_check_with, sample_target_set, select_drivers,
    ControllabilityReport, InputSet, TargetSet,
};
use crate::error::{Error, Result};
use crate::gramian::{compute_gramian, eig_decompose, eig_decompose_matrix, InputMatrix};
use crate::lqcontrol::{
    bar_matrices, lq_energy, lq_optimal_input, solve_care, tilde_system, LqEnergy, QuadraticCost,
    RiccatiSolution, TildeSystem,
};
use crate::minenergy::{
    energy_closed_form, energy_quadrature, maneuver, min_energy_input, simulate, ControlProblem,
    ControlSignal, EnergyValue, Trajectory,
};
use crate::mp::PrecisionConfig;
use crate::netgen::{
    assign_weights, default_dpr_iterations, generate_static, load_edge_list, stabilize, Network,
};
use crate::quad::QuadratureRule;
use crate::rng;
use crate::scaling::{
    dpr_significance, draw_target_sets, fit_eta, sample_energies, DprReport, EnergySample,
    EnergyTable, ScalingResult,
};
use crate::linalg;

const TAG_NET: u64 = 0x01;
const TAG_WEIGHTS: u64 = 0x02;
const TAG_DRIVERS: u64 = 0x03;
const TAG_TARGETS: u64 = 0x04;
const TAG_YF: u64 = 0x05;
const TAG_SCALING: u64 = 0x06;
const TAG_DPR: u64 = 0x07;
const TAG_EDGELIST: u64 = 0x08;

/// Bound worker parallelism; `None` keeps the default (all cores). Call once
/// before any parallel section.
pub fn init_workers(workers: Option<usize>) {
    if let Some(k) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global();
    }
}

/// 17-significant-digit decimal form, bit-exact across runs.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Build the network from whichever source the config names.
pub fn resolve_network(cfg: &ExperimentConfig) -> Result<Network> {
    if let Some(path) = &cfg.network_file {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        return Network::from_json(&text);
    }
    if let Some(path) = &cfg.edge_list {
        let file = fs::File::open(path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        return load_edge_list(
            std::io::BufReader::new(file),
            cfg.directed,
            rng::derive(cfg.seed, &[TAG_EDGELIST]),
        );
    }
    let n = cfg
        .n
        .ok_or_else(|| Error::Config("generation needs n".into()))?;
    let k_av = cfg
        .k_av
        .ok_or_else(|| Error::Config("generation needs k_av".into()))?;
    let gamma_in = cfg.gamma_in.map(|g| g.0).unwrap_or(f64::INFINITY);
    let gamma_out = cfg.gamma_out.map(|g| g.0).unwrap_or(f64::INFINITY);
    let net = generate_static(n, gamma_in, gamma_out, k_av, rng::derive(cfg.seed, &[TAG_NET]))?;
    stabilize(&assign_weights(&net, rng::derive(cfg.seed, &[TAG_WEIGHTS]))?)
}

/// Driver set from explicit nodes, a count, or the n_d fraction.
pub fn resolve_drivers(cfg: &ExperimentConfig, net: &Network) -> Result<InputSet> {
    if let Some(nodes) = &cfg.drivers {
        return InputSet::new(nodes.clone(), net.n());
    }
    let m = match cfg.m {
        Some(m) => m,
        None => ((cfg.n_d * net.n() as f64).round() as usize).clamp(1, net.n()),
    };
    select_drivers(net, m, rng::derive(cfg.seed, &[TAG_DRIVERS]))
}

fn resolve_targets(cfg: &ExperimentConfig, n: usize) -> Result<TargetSet> {
    match &cfg.targets {
        None => Ok(TargetSet::all(n)),
        Some(TargetSpec::Nodes(nodes)) => TargetSet::new(nodes.clone(), n),
        Some(TargetSpec::Count { count }) => {
            sample_target_set(n, *count, rng::derive(cfg.seed, &[TAG_TARGETS]))
        }
    }
}

fn resolve_problem(cfg: &ExperimentConfig, net: Network, inputs: InputSet) -> Result<ControlProblem> {
    let n = net.n();
    let targets = resolve_targets(cfg, n)?;
    let p = targets.len();
    let x0 = match &cfg.x0 {
        Some(v) => {
            if v.len() != n {
                return Err(Error::Config(format!(
                    "x0 has {} entries, expected {n}",
                    v.len()
                )));
            }
            Array1::from_vec(v.clone())
        }
        None => Array1::zeros(n),
    };
    let yf = match &cfg.yf {
        Some(YfSpec::Values(v)) => {
            if v.len() != p {
                return Err(Error::Config(format!(
                    "yf has {} entries, expected {p}",
                    v.len()
                )));
            }
            Array1::from_vec(v.clone())
        }
        _ => random_unit_vector(p, rng::derive(cfg.seed, &[TAG_YF])),
    };
    ControlProblem::new(net, inputs, targets, x0, yf, cfg.t0, cfg.tf)
}

fn random_unit_vector(p: usize, seed: u64) -> Array1<f64> {
    let mut rng = rng::from_seed(seed);
    let mut v: Array1<f64> =
        Array1::from_iter((0..p).map(|_| StandardNormal.sample(&mut rng)));
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v /= norm;
    } else {
        v[0] = 1.0;
    }
    v
}

fn load_cost(paths: &CostPaths, n: usize, m: usize) -> Result<QuadraticCost> {
    let q = match &paths.q {
        Some(p) => crate::config::load_matrix_csv(p)?,
        None => Array2::zeros((n, n)),
    };
    let mm = match &paths.m {
        Some(p) => crate::config::load_matrix_csv(p)?,
        None => Array2::zeros((n, m)),
    };
    let r = match &paths.r {
        Some(p) => crate::config::load_matrix_csv(p)?,
        None => Array2::eye(m),
    };
    QuadraticCost::new(q, mm, r)
}

// ---------------------------------------------------------------------------
// gen

#[derive(Debug, Serialize)]
pub struct GenSummary {
    pub n: usize,
    pub edges: usize,
    pub k_av_realized: f64,
    pub spectral_abscissa: f64,
    pub spectral_min_re: f64,
    pub network_file: PathBuf,
}

pub fn cmd_gen(cfg: &ExperimentConfig, out: &Path) -> Result<GenSummary> {
    let net = resolve_network(cfg)?;
    let vals = linalg::eigenvalues(&net.matrix()?)?;
    let max_re = vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_re = vals.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let network_file = write_text(out, "network.json", &net.to_json()?)?;
    let summary = GenSummary {
        n: net.n(),
        edges: net.edge_count(),
        k_av_realized: net.edge_count() as f64 / net.n() as f64,
        spectral_abscissa: max_re,
        spectral_min_re: min_re,
        network_file,
    };
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// energy

#[derive(Debug, Serialize)]
pub struct EnergyReport {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub log10_mu1: f64,
    pub e_closed_form: EnergyValue,
    pub e_quadrature: f64,
    pub reach_error: f64,
    pub beta_magnitude: f64,
    pub energy_bounds: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lq: Option<LqReportPart>,
}

#[derive(Debug, Serialize)]
pub struct LqReportPart {
    pub care_residual: f64,
    pub energy: LqEnergy,
    pub feedforward_quadratic_form: EnergyValue,
    pub reach_error: f64,
}

fn reach_error(traj: &Trajectory, yf: &Array1<f64>) -> f64 {
    let num = traj
        .final_output
        .iter()
        .zip(yf.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den = yf.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    num / den
}

fn signal_csvs(out: &Path, u: &ControlSignal, traj: &Trajectory) -> Result<()> {
    let m = u.channels();
    let mut ucsv = String::from("t");
    for j in 1..=m {
        ucsv.push_str(&format!(",u_{j}"));
    }
    ucsv.push('\n');
    let mut unorm = String::from("t,u_norm_sq\n");
    for (k, &t) in u.times().iter().enumerate() {
        ucsv.push_str(&fmt17(t));
        let mut nsq = 0.0;
        for j in 0..m {
            let v = u.samples()[(k, j)];
            ucsv.push_str(&format!(",{}", fmt17(v)));
            nsq += v * v;
        }
        ucsv.push('\n');
        unorm.push_str(&format!("{},{}\n", fmt17(t), fmt17(nsq)));
    }
    write_text(out, "u.csv", &ucsv)?;
    write_text(out, "u_norm_sq.csv", &unorm)?;
    write_traj_csv(out, "x.csv", &traj.times, &traj.states, "x")?;
    write_traj_csv(out, "y.csv", &traj.times, &traj.outputs, "y")?;
    Ok(())
}

fn write_traj_csv(
    out: &Path,
    name: &str,
    times: &[f64],
    values: &Array2<f64>,
    prefix: &str,
) -> Result<()> {
    let cols = values.ncols();
    let mut csv = String::from("t");
    for j in 1..=cols {
        csv.push_str(&format!(",{prefix}_{j}"));
    }
    csv.push('\n');
    for (k, &t) in times.iter().enumerate() {
        csv.push_str(&fmt17(t));
        for j in 0..cols {
            csv.push_str(&format!(",{}", fmt17(values[(k, j)])));
        }
        csv.push('\n');
    }
    write_text(out, name, &csv)?;
    Ok(())
}

pub fn cmd_energy(cfg: &ExperimentConfig, out: &Path) -> Result<EnergyReport> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let prob = resolve_problem(cfg, net, inputs)?;

    let decomp = eig_decompose(&prob.net)?;
    let gram = compute_gramian(
        &decomp,
        &InputMatrix::Versors(&prob.inputs),
        &prob.targets,
        prob.t0,
        prob.tf,
        &prec,
    )?;
    let floor = prec.controllability_floor();
    if *gram.smallest_eigenvalue() <= floor {
        return Err(Error::NotControllable {
            log10_mu1: gram.log10_mu1(),
            floor_digits: prec.digits() / 2,
        });
    }

    let u = min_energy_input(&prob, &gram, &decomp, cfg.report_points)?;
    let traj = simulate(&prob, &u, cfg.report_points)?;
    let man = maneuver(&prob, &decomp);
    let e_cf = energy_closed_form(&man, &gram)?;
    let rule = QuadratureRule::legendre_gauss(cfg.quadrature_nodes)?;
    let e_q = energy_quadrature(&u, &rule);
    let bounds = crate::minenergy::energy_bounds(&man, &gram)?;

    signal_csvs(out, &u, &traj)?;

    let lq = match &cfg.cost {
        Some(paths) => {
            let cost = load_cost(paths, prob.n(), prob.m())?;
            Some(run_lq_problem(&prob, &cost, &prec, cfg, out)?)
        }
        None => None,
    };

    let report = EnergyReport {
        n: prob.n(),
        m: prob.m(),
        p: prob.p(),
        log10_mu1: gram.log10_mu1(),
        e_closed_form: e_cf,
        e_quadrature: e_q,
        reach_error: reach_error(&traj, &prob.yf),
        beta_magnitude: man.magnitude(),
        energy_bounds: bounds,
        lq,
    };
    write_json(out, "energy_report.json", &report)?;
    Ok(report)
}

fn run_lq_problem(
    prob: &ControlProblem,
    cost: &QuadraticCost,
    prec: &PrecisionConfig,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<LqReportPart> {
    let a = prob.net.matrix()?;
    let b = build_input_matrix(&prob.inputs, prob.n())?;
    let care = solve_care(bar_matrices(&a, &b, cost)?)?;
    let tilde = tilde_system(prob, &care, prec)?;
    let control = lq_optimal_input(prob, cost, &care, &tilde, cfg.report_points)?;
    let rule = QuadratureRule::legendre_gauss(cfg.quadrature_nodes)?;
    let energy = lq_energy(&control, &rule);
    let ff = crate::lqcontrol::feedforward_quadratic_form(&tilde)?;
    write_traj_csv(
        out,
        "x_lq.csv",
        &control.trajectory.times,
        &control.trajectory.states,
        "x",
    )?;
    let err = reach_error(&control.trajectory, &prob.yf);
    Ok(LqReportPart {
        care_residual: care.residual,
        energy,
        feedforward_quadratic_form: ff,
        reach_error: err,
    })
}

// ---------------------------------------------------------------------------
// eta

pub fn cmd_eta(cfg: &ExperimentConfig, out: &Path) -> Result<ScalingResult> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let table = sample_energies(
        &net,
        &inputs,
        &cfg.fractions,
        cfg.samples,
        (cfg.t0, cfg.tf),
        &prec,
        rng::derive(cfg.seed, &[TAG_SCALING]),
    )?;
    let result = fit_eta(&table)?;
    write_json(out, "scaling.json", &result)?;
    let mut csv = String::from("fraction,mean_log10_e,std_log10_e\n");
    for k in 0..result.fractions.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt17(result.fractions[k]),
            fmt17(result.mean_log10_e[k]),
            fmt17(result.std_log10_e[k])
        ));
    }
    write_text(out, "scaling.csv", &csv)?;
    Ok(result)
}

// ---------------------------------------------------------------------------
// dpr

pub fn cmd_dpr(cfg: &ExperimentConfig, out: &Path) -> Result<DprReport> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let iterations = cfg.iterations.unwrap_or_else(|| default_dpr_iterations(&net));
    let report = dpr_significance(
        &net,
        &inputs,
        &cfg.fractions,
        cfg.samples,
        cfg.replicas,
        iterations,
        (cfg.t0, cfg.tf),
        &prec,
        rng::derive(cfg.seed, &[TAG_DPR]),
    )?;
    write_json(out, "dpr.json", &report)?;
    let mut csv = String::from("replica,eta\n");
    for (i, eta) in report.eta_replicas.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i, fmt17(*eta)));
    }
    write_text(out, "dpr_etas.csv", &csv)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// lq sweep

#[derive(Debug, Serialize)]
pub struct LqSweepRow {
    pub zeta: f64,
    pub eta: f64,
    pub mean_log10_e: f64,
    pub r_squared: f64,
    pub care_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct LqSweep {
    pub rows: Vec<LqSweepRow>,
}

/// Worst-case LQ energies over the zeta sweep. For each zeta the closed-loop
/// Gramian is computed once and reduced per sampled target set; the sample's
/// boundary data is the worst-case unit direction, so the feedforward energy
/// is exactly `1/mu_1(~W_p)` and the state/cross terms are added from the
/// realized closed-loop trajectory (they vanish identically at `S = 0`).
pub fn cmd_lq(cfg: &ExperimentConfig, out: &Path) -> Result<LqSweep> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let n = net.n();
    let m = inputs.len();
    let a = net.matrix()?;
    let b = build_input_matrix(&inputs, n)?;
    let rule = QuadratureRule::legendre_gauss(cfg.quadrature_nodes)?;

    // identical target draws as cmd_eta, shared across all zeta values
    let draws = draw_target_sets(
        n,
        &cfg.fractions,
        cfg.samples,
        rng::derive(cfg.seed, &[TAG_SCALING]),
    )?;

    let mut rows = Vec::new();
    let mut points_csv = String::from("zeta,p_over_n,mean_log10_ec,std_log10_ec,eta_fit\n");
    for &zeta in &cfg.zeta {
        let cost = QuadraticCost::uniform_state_weight(n, m, zeta)?;
        let care = solve_care(bar_matrices(&a, &b, &cost)?)?;
        let row = lq_sweep_point(
            cfg, &net, &inputs, &cost, &care, &draws, &prec, &rule, zeta,
        )?;
        for k in 0..row.fit.fractions.len() {
            points_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(zeta),
                fmt17(row.fit.fractions[k]),
                fmt17(row.fit.mean_log10_e[k]),
                fmt17(row.fit.std_log10_e[k]),
                fmt17(row.fit.eta)
            ));
        }
        rows.push(LqSweepRow {
            zeta,
            eta: row.fit.eta,
            mean_log10_e: row.grand_mean,
            r_squared: row.fit.r_squared,
            care_residual: row.care_residual,
        });
    }

    let mut sweep_csv = String::from("zeta,eta,mean_log10_e\n");
    for r in &rows {
        sweep_csv.push_str(&format!(
            "{},{},{}\n",
            fmt17(r.zeta),
            fmt17(r.eta),
            fmt17(r.mean_log10_e)
        ));
    }
    write_text(out, "lq_sweep.csv", &sweep_csv)?;
    write_text(out, "lq_points.csv", &points_csv)?;
    let sweep = LqSweep { rows };
    write_json(out, "lq.json", &sweep)?;
    Ok(sweep)
}

struct LqPoint {
    fit: ScalingResult,
    grand_mean: f64,
    care_residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn lq_sweep_point(
    cfg: &ExperimentConfig,
    net: &Network,
    inputs: &InputSet,
    cost: &QuadraticCost,
    care: &RiccatiSolution,
    draws: &[(usize, usize, usize, TargetSet)],
    prec: &PrecisionConfig,
    rule: &QuadratureRule,
    _zeta: f64,
) -> Result<LqPoint> {
    let n = net.n();
    let g = care.bars.b_bar.dot(&care.bars.b_bar.t());
    let a_tilde = &care.bars.a_bar - &g.dot(&care.s);
    let decomp = eig_decompose_matrix(&a_tilde)?;
    let b = build_input_matrix(inputs, n)?;
    let b_eff = b.dot(&care.bars.r_inv_sqrt);
    let full = compute_gramian(
        &decomp,
        &InputMatrix::Dense(&b_eff),
        &TargetSet::all(n),
        cfg.t0,
        cfg.tf,
        prec,
    )?;
    let floor = prec.controllability_floor();
    if *full.smallest_eigenvalue() <= floor {
        return Err(Error::NotControllable {
            log10_mu1: full.log10_mu1(),
            floor_digits: prec.digits() / 2,
        });
    }
    let s_is_zero = linalg::frob(&care.s) == 0.0;

    // evaluate each distinct target set once
    use std::collections::HashMap;
    let mut unique: Vec<&TargetSet> = Vec::new();
    let mut key_of: HashMap<&[usize], usize> = HashMap::new();
    for (_, _, _, t) in draws {
        if !key_of.contains_key(t.nodes()) {
            key_of.insert(t.nodes(), unique.len());
            unique.push(t);
        }
    }
    use rayon::prelude::*;
    let evaluated: Vec<Option<f64>> = unique
        .par_iter()
        .map(|t| -> Result<Option<f64>> {
            let gram = if t.len() == n {
                full.clone()
            } else {
                full.reduce(t)?
            };
            if *gram.smallest_eigenvalue() <= floor {
                return Ok(None);
            }
            let log10_emax = -gram.log10_mu1();
            if s_is_zero {
                // u_c1 = 0 identically: E_c is exactly the worst case
                return Ok(Some(log10_emax));
            }
            // worst-case boundary data: x0 = 0, yf = unit v_1
            let p = t.len();
            let mut yf = Array1::<f64>::zeros(p);
            for i in 0..p {
                yf[i] = gram.eigenvectors().get(i, 0).to_f64();
            }
            let norm = yf.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                yf /= norm;
            }
            let prob = ControlProblem::new(
                net.clone(),
                inputs.clone(),
                (*t).clone(),
                Array1::zeros(n),
                yf,
                cfg.t0,
                cfg.tf,
            )?;
            let tilde = TildeSystem::from_parts(
                a_tilde.clone(),
                decomp.clone(),
                gram,
                prob.yf.clone(),
                b_eff.clone(),
            );
            let control = lq_optimal_input(&prob, cost, care, &tilde, 2)?;
            let energy = lq_energy(&control, rule);
            let emax = 10f64.powf(log10_emax);
            let rest = energy.state_term + energy.cross_term;
            let log10_ec = if emax.is_finite() && emax + rest > 0.0 {
                (emax + rest).log10()
            } else {
                log10_emax
            };
            Ok(Some(log10_ec))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(draws.len());
    let mut failures = 0usize;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (fi, s, p, t) in draws {
        let value = evaluated[key_of[t.nodes()]];
        match value {
            Some(v) => {
                sum += v;
                count += 1;
            }
            None => failures += 1,
        }
        rows.push(EnergySample {
            fraction: cfg.fractions[*fi],
            p: *p,
            sample: *s,
            log10_emax: value,
        });
    }
    let table = EnergyTable {
        n,
        samples_per_fraction: cfg.samples,
        rows,
        failures,
    };
    let fit = fit_eta(&table)?;
    Ok(LqPoint {
        fit,
        grand_mean: sum / count.max(1) as f64,
        care_residual: care.residual,
    })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub n: usize,
    pub p: usize,
    pub free_response: bool,
    pub final_output: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach_error: Option<f64>,
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateReport> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let prob = resolve_problem(cfg, net, inputs)?;
    let decomp = eig_decompose(&prob.net)?;

    let (u, controlled) = if cfg.free_response {
        (None, false)
    } else {
        let gram = compute_gramian(
            &decomp,
            &InputMatrix::Versors(&prob.inputs),
            &prob.targets,
            prob.t0,
            prob.tf,
            &prec,
        )?;
        (
            Some(min_energy_input(&prob, &gram, &decomp, cfg.report_points)?),
            true,
        )
    };
    let traj = match &u {
        Some(u) => simulate(&prob, u, cfg.report_points)?,
        None => {
            // zero-input trajectory
            let zero = crate::minenergy::zero_signal(prob.m(), prob.t0, prob.tf, cfg.report_points);
            simulate(&prob, &zero, cfg.report_points)?
        }
    };
    write_traj_csv(out, "x.csv", &traj.times, &traj.states, "x")?;
    write_traj_csv(out, "y.csv", &traj.times, &traj.outputs, "y")?;
    if let Some(u) = &u {
        signal_csvs(out, u, &traj)?;
    }
    let report = SimulateReport {
        n: prob.n(),
        p: prob.p(),
        free_response: !controlled,
        final_output: traj.final_output.to_vec(),
        reach_error: controlled.then(|| reach_error(&traj, &prob.yf)),
    };
    write_json(out, "simulate_report.json", &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// check

pub fn cmd_check(cfg: &ExperimentConfig, out: &Path) -> Result<ControllabilityReport> {
    let prec = PrecisionConfig::new(cfg.digits)?;
    let net = resolve_network(cfg)?;
    let inputs = resolve_drivers(cfg, &net)?;
    let targets = resolve_targets(cfg, net.n())?;
    let decomp = eig_decompose(&net)?;
    let report = output_controllability_check_with(
        &decomp,
        &inputs,
        &targets,
        (cfg.t0, cfg.tf),
        &prec,
    )?;
    write_json(out, "check.json", &report)?;
    Ok(report)
}
