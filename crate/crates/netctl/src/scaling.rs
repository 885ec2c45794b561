//! Ensemble estimation of the energy scaling law.
//!
//! Worst-case energies `E_max = 1/mu_1(W_p)` are sampled over random target
//! sets at a grid of target fractions; the slope of `<ln E_max>` against
//! `p/n` is the network's scaling rate eta. The full Gramian is computed once
//! per network and every sample is a principal-submatrix reduction of it.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::ctrlcfg::{sample_target_set, select_drivers, InputSet, TargetSet};
use crate::error::{Error, Result};
use crate::gramian::{self, compute_gramian, eig_decompose, Gramian, InputMatrix};
use crate::mp::PrecisionConfig;
use crate::netgen::{degree_preserving_randomize, Network};
use crate::rng;

const TAG_SAMPLE: u64 = 0x7361;
const TAG_REAL: u64 = 0x7265;
const TAG_DPR: u64 = 0x6477;
const TAG_DRIVER: u64 = 0x6476;

const REPLICA_RETRY_CAP: usize = 5;

/// One sampled worst-case energy; `log10_emax` is `None` when the reduced
/// Gramian failed the controllability floor.
#[derive(Clone, Debug, Serialize)]
pub struct EnergySample {
    pub fraction: f64,
    pub p: usize,
    pub sample: usize,
    pub log10_emax: Option<f64>,
}

/// Raw sampling table for one network.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyTable {
    pub n: usize,
    pub samples_per_fraction: usize,
    pub rows: Vec<EnergySample>,
    pub failures: usize,
}

/// Draw `samples` random target sets at each fraction and record
/// `log10 E_max^(p)`. Output controllability is checked once at `p = n`;
/// individual samples below the floor are recorded as failures, not dropped.
pub fn sample_energies(
    net: &Network,
    inputs: &InputSet,
    fractions: &[f64],
    samples: usize,
    horizon: (f64, f64),
    prec: &PrecisionConfig,
    seed: u64,
) -> Result<EnergyTable> {
    validate_fractions(fractions)?;
    if samples < 2 {
        return Err(Error::Config(format!(
            "need at least 2 samples per fraction for the std to be defined, got {samples}"
        )));
    }
    let n = net.n();
    let decomp = eig_decompose(net)?;
    let full = compute_gramian(
        &decomp,
        &InputMatrix::Versors(inputs),
        &TargetSet::all(n),
        horizon.0,
        horizon.1,
        prec,
    )?;
    let floor = prec.controllability_floor();
    if *full.smallest_eigenvalue() <= floor {
        return Err(Error::NotControllable {
            log10_mu1: full.log10_mu1(),
            floor_digits: prec.digits() / 2,
        });
    }

    // draw every target set up front, then evaluate each distinct set once
    let draws = draw_target_sets(n, fractions, samples, seed)?;
    let mut unique: Vec<&TargetSet> = Vec::new();
    let mut key_of: HashMap<&[usize], usize> = HashMap::new();
    for (_, _, _, t) in &draws {
        if !key_of.contains_key(t.nodes()) {
            key_of.insert(t.nodes(), unique.len());
            unique.push(t);
        }
    }
    let evaluated: Vec<Option<f64>> = unique
        .par_iter()
        .map(|t| -> Result<Option<f64>> {
            let gram = if t.len() == n {
                full.clone()
            } else {
                full.reduce(t)?
            };
            if *gram.smallest_eigenvalue() <= floor {
                Ok(None)
            } else {
                Ok(Some(-gram.log10_mu1()))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(draws.len());
    let mut failures = 0usize;
    for (fi, s, p, t) in &draws {
        let value = evaluated[key_of[t.nodes()]];
        if value.is_none() {
            failures += 1;
        }
        rows.push(EnergySample {
            fraction: fractions[*fi],
            p: *p,
            sample: *s,
            log10_emax: value,
        });
    }
    Ok(EnergyTable {
        n,
        samples_per_fraction: samples,
        rows,
        failures,
    })
}

fn validate_fractions(fractions: &[f64]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::Config("fraction list is empty".into()));
    }
    for w in fractions.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config("fractions must be strictly ascending".into()));
        }
    }
    if fractions[0] <= 0.0 || *fractions.last().unwrap() > 1.0 {
        return Err(Error::Config("fractions must lie in (0, 1]".into()));
    }
    Ok(())
}

/// Fitted scaling law. `eta` is the slope of `<ln E_max>` against `p/n`
/// (natural-log convention, so `E_max ~ exp(eta p/n + c)`); the per-point
/// statistics stay in log10 for plotting.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingResult {
    pub fractions: Vec<f64>,
    pub mean_log10_e: Vec<f64>,
    pub std_log10_e: Vec<f64>,
    pub samples_per_point: usize,
    pub eta: f64,
    pub intercept_ln: f64,
    pub r_squared: f64,
    pub failures: usize,
    pub eta_convention: &'static str,
}

pub const ETA_CONVENTION: &str =
    "eta is the natural-log slope of mean ln E_max versus p/n; plotted statistics are log10";

/// Ordinary least squares of mean `ln E_max` against the realized `p/n`.
pub fn fit_eta(table: &EnergyTable) -> Result<ScalingResult> {
    let mut by_p: Vec<(usize, Vec<f64>)> = Vec::new();
    for row in &table.rows {
        if let Some(v) = row.log10_emax {
            match by_p.iter_mut().find(|(p, _)| *p == row.p) {
                Some((_, vals)) => vals.push(v),
                None => by_p.push((row.p, vec![v])),
            }
        }
    }
    if by_p.len() < 3 {
        return Err(Error::Config(format!(
            "eta fit needs at least 3 distinct target sizes with data, got {}",
            by_p.len()
        )));
    }
    let n = table.n as f64;
    let mut xs = Vec::new();
    let mut means10 = Vec::new();
    let mut stds10 = Vec::new();
    for (p, vals) in &by_p {
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = if vals.len() > 1 {
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() - 1) as f64
        } else {
            0.0
        };
        xs.push(*p as f64 / n);
        means10.push(m);
        stds10.push(var.sqrt());
    }

    let ln10 = std::f64::consts::LN_10;
    let ys: Vec<f64> = means10.iter().map(|m| m * ln10).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-300 {
        return Err(Error::Numerical("degenerate abscissa in eta fit".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot <= 1e-300 {
        if ss_res <= 1e-300 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    if !slope.is_finite() {
        return Err(Error::Numerical("eta fit produced a non-finite slope".into()));
    }

    Ok(ScalingResult {
        fractions: xs,
        mean_log10_e: means10,
        std_log10_e: stds10,
        samples_per_point: table.samples_per_fraction,
        eta: slope,
        intercept_ln: intercept,
        r_squared,
        failures: table.failures,
        eta_convention: ETA_CONVENTION,
    })
}

/// Per-step eta ratios along a nested chain, with the telescoping audit.
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub sizes: Vec<usize>,
    pub log10_emax: Vec<f64>,
    pub ln_eta_steps: Vec<f64>,
    pub geo_mean_ln_eta: f64,
    pub telescoping_residual: f64,
}

/// Exact per-step energy ratios for a nested chain of target sets
/// (ascending sizes). Verifies the telescoping identity
/// `sum ln eta_i = ln E_max^(j) - ln E_max^(k)`.
pub fn eta_exact_chain(
    net: &Network,
    inputs: &InputSet,
    chain: &[TargetSet],
    horizon: (f64, f64),
    prec: &PrecisionConfig,
) -> Result<ChainReport> {
    if chain.len() < 2 {
        return Err(Error::Config("chain needs at least two target sets".into()));
    }
    for w in chain.windows(2) {
        if w[0].len() >= w[1].len() || !w[0].is_subset_of(&w[1]) {
            return Err(Error::Config(
                "chain must be strictly nested with ascending sizes".into(),
            ));
        }
    }
    let decomp = eig_decompose(net)?;
    let top = compute_gramian(
        &decomp,
        &InputMatrix::Versors(inputs),
        chain.last().unwrap(),
        horizon.0,
        horizon.1,
        prec,
    )?;

    // reduce down the chain, largest set first
    let mut grams: Vec<Gramian> = vec![top];
    for t in chain.iter().rev().skip(1) {
        let parent = grams.last().unwrap();
        grams.push(parent.reduce(t)?);
    }
    grams.reverse(); // ascending sizes, aligned with `chain`

    let bits = prec.bits();
    let mut sizes = Vec::with_capacity(chain.len());
    let mut log10_emax = Vec::with_capacity(chain.len());
    let mut ln_mu: Vec<Float> = Vec::with_capacity(chain.len());
    for g in &grams {
        sizes.push(g.p());
        log10_emax.push(-g.log10_mu1());
        ln_mu.push(Float::with_val(bits, g.smallest_eigenvalue().ln_ref()));
    }
    // per-step ratios, accumulated in extended precision so the telescoping
    // audit is limited by the eigensolver, not by f64 truncation
    let mut ln_eta_steps = Vec::with_capacity(chain.len() - 1);
    let mut sum_ln = Float::new(bits);
    for k in (1..grams.len()).rev() {
        gramian::eta_step(&grams[k], &grams[k - 1])?; // interlacing fault check
        let step_ln = Float::with_val(bits, &ln_mu[k - 1] - &ln_mu[k]);
        ln_eta_steps.push(step_ln.to_f64());
        sum_ln += &step_ln;
    }

    // telescoping: sum of per-step logs against the endpoint mu_1 ratio
    let ratio_ln = Float::with_val(bits, ln_mu.first().unwrap() - ln_mu.last().unwrap());
    let residual = (Float::with_val(bits, &sum_ln - &ratio_ln)).to_f64().abs();
    let geo_mean = sum_ln.to_f64() / (grams.len() - 1) as f64;

    Ok(ChainReport {
        sizes,
        log10_emax,
        ln_eta_steps,
        geo_mean_ln_eta: geo_mean,
        telescoping_residual: residual,
    })
}

/// Comparison of a network's eta against degree-preserving rewirings.
#[derive(Clone, Debug, Serialize)]
pub struct DprReport {
    pub eta_real: f64,
    pub eta_replicas: Vec<f64>,
    pub p_value: f64,
    pub replicas: usize,
    pub iterations: u64,
    pub degree_preserved: bool,
}

/// Empirical one-sided significance of the real network's eta against an
/// ensemble of degree-preserving randomizations. Each replica gets freshly
/// selected drivers of the same count; replicas that fail controllability at
/// `p = n` are regenerated up to a retry cap.
#[allow(clippy::too_many_arguments)]
pub fn dpr_significance(
    net: &Network,
    inputs: &InputSet,
    fractions: &[f64],
    samples: usize,
    replicas: usize,
    iterations: u64,
    horizon: (f64, f64),
    prec: &PrecisionConfig,
    seed: u64,
) -> Result<DprReport> {
    if replicas < 20 {
        return Err(Error::Config(format!(
            "need at least 20 replicas for a meaningful p-value, got {replicas}"
        )));
    }
    let table = sample_energies(
        net,
        inputs,
        fractions,
        samples,
        horizon,
        prec,
        rng::derive(seed, &[TAG_REAL]),
    )?;
    let eta_real = fit_eta(&table)?.eta;

    let original_degrees = net.degree_sequence();
    let m = inputs.len();
    let results: Vec<(f64, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<(f64, bool)> {
            let mut last_err: Option<Error> = None;
            for attempt in 0..REPLICA_RETRY_CAP {
                let tags = [TAG_DPR, r as u64, attempt as u64];
                let rewired = degree_preserving_randomize(net, iterations, rng::derive(seed, &tags))?;
                let degrees_ok = rewired.degree_sequence() == original_degrees;
                let drivers = match select_drivers(
                    &rewired,
                    m,
                    rng::derive(seed, &[TAG_DRIVER, r as u64, attempt as u64]),
                ) {
                    Ok(d) => d,
                    Err(e) => {
                        last_err = Some(e);
                        continue;
                    }
                };
                match sample_energies(
                    &rewired,
                    &drivers,
                    fractions,
                    samples,
                    horizon,
                    prec,
                    rng::derive(seed, &[TAG_DPR, r as u64, 0xeeee + attempt as u64]),
                ) {
                    Ok(t) => return Ok((fit_eta(&t)?.eta, degrees_ok)),
                    Err(e @ Error::NotControllable { .. }) => {
                        last_err = Some(e);
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(last_err.unwrap_or_else(|| {
                Error::Generation("replica generation failed with no recorded error".into())
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let eta_replicas: Vec<f64> = results.iter().map(|(e, _)| *e).collect();
    let degree_preserved = results.iter().all(|(_, ok)| *ok);
    let exceed = eta_replicas.iter().filter(|&&e| e >= eta_real).count();
    let p_value = (1 + exceed) as f64 / (replicas + 1) as f64;

    Ok(DprReport {
        eta_real,
        eta_replicas,
        p_value,
        replicas,
        iterations,
        degree_preserved,
    })
}
