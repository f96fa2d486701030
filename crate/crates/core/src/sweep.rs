//! Seeded stability sweep over random pairs of trigonometric polynomials.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circlefn::Tolerances;
use crate::distance::{edit_distance, DistanceOptions};
use crate::error::Error;
use crate::homotopy::{trace_generic, TRACE_TOLERANCE};
use crate::parallel::par_map_range;
use crate::pseudodist::improved_edit_lower;
use crate::random::random_simple_morse_with;
use crate::reeb::LabelledReebGraph;

pub const CSV_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 14] = [
    "trial",
    "degree_f",
    "degree_g",
    "c0_norm",
    "c1_norm",
    "c2_norm",
    "d_lower",
    "d_upper",
    "script_cost",
    "events",
    "perturbed",
    "trace_pass",
    "upper_pass",
    "lower_pass",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub degree_range: (usize, usize),
    pub coefficient_scale: f64,
    /// Overrides for [`Tolerances`] by field name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            trials: 200,
            degree_range: (1, 4),
            coefficient_scale: 1.0,
            tolerances: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<Tolerances, String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        let (lo, hi) = self.degree_range;
        if lo == 0 || lo > hi {
            return Err(format!("invalid degree range ({lo}, {hi})"));
        }
        if !(self.coefficient_scale > 0.0 && self.coefficient_scale.is_finite()) {
            return Err(format!("coefficient scale {}", self.coefficient_scale));
        }
        let mut tol = Tolerances::default();
        for (name, &v) in &self.tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive"));
            }
            match name.as_str() {
                "root" => tol.root = v,
                "value" => tol.value = v,
                "degenerate" => tol.degenerate = v,
                "grid" => tol.grid = v as usize,
                _ => return Err(format!("unknown tolerance {name}")),
            }
        }
        Ok(tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub degree_f: usize,
    pub degree_g: usize,
    pub c0_norm: f64,
    pub c1_norm: f64,
    pub c2_norm: f64,
    pub d_lower: f64,
    pub d_upper: f64,
    pub script_cost: f64,
    pub events: usize,
    /// Whether `g` had to be nudged off a non-generic path.
    pub perturbed: bool,
    pub trace_pass: bool,
    pub upper_pass: bool,
    pub lower_pass: bool,
}

impl TrialRow {
    pub fn passed(&self) -> bool {
        self.trace_pass && self.upper_pass && self.lower_pass
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = crate::random::rng(seed);
    rng.set_stream(trial as u64);
    rng
}

/// One trial; deterministic in `(config.seed, trial)`.
pub fn run_trial(config: &RunConfig, tol: &Tolerances, trial: usize) -> Result<TrialRow, Error> {
    let mut rng = trial_rng(config.seed, trial);
    let (lo, hi) = config.degree_range;
    let degree_f = rng.gen_range(lo..=hi);
    let degree_g = rng.gen_range(lo..=hi);
    let f = random_simple_morse_with(&mut rng, degree_f, config.coefficient_scale, tol)?;
    let g = random_simple_morse_with(&mut rng, degree_g, config.coefficient_scale, tol)?;
    let (traced, g_used) = trace_generic(&f, &g, rng.gen(), 5)?;
    let diff = f.difference(&g_used)?;
    let c0_norm = diff.cr_norm(0, tol)?;
    let c1_norm = diff.cr_norm(1, tol)?;
    let c2_norm = traced.c2_bound;
    let g1 = LabelledReebGraph::extract(&f, tol)?;
    let g2 = LabelledReebGraph::extract(&g_used, tol)?;
    let est = edit_distance(&g1, &g2, &DistanceOptions::default())?;
    let d_lower = est.lower.max(improved_edit_lower(&f, &g_used, tol));
    Ok(TrialRow {
        trial,
        degree_f,
        degree_g,
        c0_norm,
        c1_norm,
        c2_norm,
        d_lower,
        d_upper: est.upper,
        script_cost: traced.script_cost,
        events: traced.events.len(),
        perturbed: g_used != g,
        trace_pass: traced.script_cost <= c2_norm + TRACE_TOLERANCE,
        upper_pass: est.upper <= c2_norm + TRACE_TOLERANCE,
        lower_pass: d_lower <= est.upper + TRACE_TOLERANCE,
    })
}

/// All trials, in trial order regardless of scheduling.
pub fn run(config: &RunConfig) -> Result<Vec<TrialRow>, Error> {
    let tol = config
        .validate()
        .map_err(crate::error::FunctionError::InvalidFunction)?;
    par_map_range(config.trials, |t| run_trial(config, &tol, t))
        .into_iter()
        .collect()
}

/// CSV with a versioned header comment and 17 significant digits per float.
pub fn to_csv(config: &RunConfig, rows: &[TrialRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# reeb-edit sweep v{CSV_VERSION} seed={} trials={} degrees={}..={} scale={:.16e}",
        config.seed, config.trials, config.degree_range.0, config.degree_range.1, config.coefficient_scale
    );
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{}",
            r.trial,
            r.degree_f,
            r.degree_g,
            r.c0_norm,
            r.c1_norm,
            r.c2_norm,
            r.d_lower,
            r.d_upper,
            r.script_cost,
            r.events,
            r.perturbed,
            r.trace_pass,
            r.upper_pass,
            r.lower_pass
        );
    }
    out
}
