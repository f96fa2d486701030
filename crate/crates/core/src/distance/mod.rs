//! Bounds on the editing distance between labelled Reeb graphs.
//!
//! The lower bound is the persistence/extrema bound, which holds for every
//! deformation. The upper bound is the cheaper of the best single-round plan
//! and the canonical connecting path, and always comes with a script that
//! replays to the target.

mod oracle;
mod plan;

use serde::{Deserialize, Serialize};

use crate::circlefn::{CircleFunction, Tolerances};
use crate::edits::{connect_canonical, Deformation};
use crate::error::DistanceError;
use crate::pseudodist::{graph_lower_bound, improved_edit_lower};
use crate::reeb::LabelledReebGraph;

pub use oracle::brute_force_oracle;
pub use plan::{chain_cost, plan_cost, Plan, SearchLimits};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub limits: SearchLimits,
}

/// Which candidate produced the upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperSource {
    SingleRound,
    ConnectCanonical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Script cost minus `upper`; the slack of the tiny pairs.
    pub eta: f64,
    pub witness: Deformation,
    pub plan: Option<Plan>,
    pub upper_source: UpperSource,
}

impl DistanceEstimate {
    pub fn is_exact(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol
    }
}

/// Lower and upper bounds on the editing distance from `g1` to `g2`, with a
/// witness script whose cost is `upper + eta`.
pub fn edit_distance(
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
    opts: &DistanceOptions,
) -> Result<DistanceEstimate, DistanceError> {
    let lower = graph_lower_bound(g1, g2);
    let canonical = connect_canonical(g1, g2);
    let (_, canonical_cost) = canonical.apply(g1)?;
    let single = plan::best_single_round(g1, g2, &opts.limits)
        .and_then(|sol| plan::witness(g1, g2, &sol).map(|(s, c)| (sol, s, c)));
    let est = match single {
        Some((sol, script, cost)) if sol.cost <= canonical_cost => DistanceEstimate {
            lower,
            upper: sol.cost,
            eta: (cost - sol.cost).max(0.0),
            witness: script,
            plan: Some(sol.plan()),
            upper_source: UpperSource::SingleRound,
        },
        other => {
            if let Some((sol, _, _)) = other {
                log::info!(
                    "canonical path ({canonical_cost}) beats the best single-round plan ({})",
                    sol.cost
                );
            }
            DistanceEstimate {
                lower,
                upper: canonical_cost,
                eta: 0.0,
                witness: canonical,
                plan: None,
                upper_source: UpperSource::ConnectCanonical,
            }
        }
    };
    Ok(est)
}

/// [`edit_distance`] between the labelled Reeb graphs of two functions. The
/// lower bound also uses the function-level bound.
pub fn function_edit_distance(
    f: &CircleFunction,
    g: &CircleFunction,
    tol: &Tolerances,
    opts: &DistanceOptions,
) -> Result<DistanceEstimate, DistanceError> {
    let g1 = LabelledReebGraph::extract(f, tol)?;
    let g2 = LabelledReebGraph::extract(g, tol)?;
    let mut est = edit_distance(&g1, &g2, opts)?;
    est.lower = est.lower.max(improved_edit_lower(f, g, tol));
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edits::apply_sequence;

    fn g(l: &[f64]) -> LabelledReebGraph {
        LabelledReebGraph::from_labels(l).unwrap()
    }

    fn check(g1: &LabelledReebGraph, g2: &LabelledReebGraph) -> DistanceEstimate {
        let est = edit_distance(g1, g2, &DistanceOptions::default()).unwrap();
        assert!(est.lower <= est.upper + 1e-12);
        let (out, cost) = apply_sequence(&est.witness.steps, g1).unwrap();
        assert!(out.is_isomorphic(g2, 0.0));
        assert!((cost - est.upper - est.eta).abs() < 1e-9);
        est
    }

    #[test]
    fn pse1_is_exact() {
        let est = check(&g(&[0.0, 0.6, 0.2, 1.0]), &g(&[0.0, 1.0]));
        assert!((est.lower - 0.2).abs() < 1e-12 && (est.upper - 0.2).abs() < 1e-12);
        assert!(est.eta < 1e-6);
    }

    #[test]
    fn pse2_single_round_beats_canonical() {
        let g1 = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        let g2 = g(&[0.0, 1.0]);
        let (_, canon) = connect_canonical(&g1, &g2).apply(&g1).unwrap();
        assert!((canon - 0.4).abs() < 1e-9);
        let est = check(&g1, &g2);
        assert_eq!(est.upper_source, UpperSource::SingleRound);
        assert!((est.upper - 0.2).abs() < 1e-12 && (est.lower - 0.2).abs() < 1e-12);
    }

    #[test]
    fn identity_and_relabel() {
        let a = g(&[0.0, 0.6, 0.2, 1.0]);
        let est = check(&a, &a);
        assert_eq!((est.lower, est.upper), (0.0, 0.0));
        let est = check(&g(&[0.0, 1.0]), &g(&[0.1, 1.2]));
        assert!((est.upper - 0.2).abs() < 1e-12 && (est.lower - 0.2).abs() < 1e-12);
    }

    #[test]
    fn function_level_bounds() {
        let f = CircleFunction::sine(1.0);
        let est = function_edit_distance(&f, &f, &Tolerances::default(), &Default::default()).unwrap();
        assert!(est.upper < 1e-12);
    }
}
