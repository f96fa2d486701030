//! Seeded generators for functions, graphs and elementary deformations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circlefn::{CircleFunction, CriticalIndex, Tolerances, TrigPoly};
use crate::edits::{find_deletable_pairs, ElementaryDeformation};
use crate::error::FunctionError;
use crate::reeb::LabelledReebGraph;

pub const MAX_REDRAWS: usize = 1000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Trig polynomial with coefficients uniform in `[−scale, scale]`.
pub fn random_trig<R: Rng>(rng: &mut R, degree: usize, scale: f64) -> CircleFunction {
    let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-scale..=scale)).collect() };
    let a0 = draw(1)[0];
    let (c, s) = (draw(degree), draw(degree));
    CircleFunction::Trig(TrigPoly::new(a0, c, s).expect("finite coefficients"))
}

/// Redraws [`random_trig`] until the function is simple Morse.
pub fn random_simple_morse_with<R: Rng>(
    rng: &mut R,
    degree: usize,
    scale: f64,
    tol: &Tolerances,
) -> Result<CircleFunction, FunctionError> {
    if degree == 0 {
        return Err(FunctionError::InvalidFunction("degree must be at least 1".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(FunctionError::InvalidFunction(format!("scale {scale}")));
    }
    for _ in 0..MAX_REDRAWS {
        let f = random_trig(rng, degree, scale);
        if f.genericity_report(tol).is_simple {
            return Ok(f);
        }
    }
    Err(FunctionError::RejectionBudgetExceeded {
        attempts: MAX_REDRAWS,
    })
}

/// Deterministic per seed.
pub fn random_simple_morse(seed: u64, degree: usize, scale: f64) -> Result<CircleFunction, FunctionError> {
    random_simple_morse_with(&mut rng(seed), degree, scale, &Tolerances::default())
}

/// Random valid graph with `n` vertices (even, ≥ 2) and labels in `[0, 1)`.
/// Minima are uniform; each maximum sits above both neighbouring minima.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> LabelledReebGraph {
    assert!(n >= 2 && n.is_multiple_of(2), "vertex count must be even and at least 2");
    loop {
        let mins: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(0.0..0.8)).collect();
        let labels: Vec<f64> = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    mins[i / 2]
                } else {
                    let floor = mins[i / 2].max(mins[(i / 2 + 1) % (n / 2)]);
                    rng.gen_range(floor..1.0)
                }
            })
            .collect();
        if let Ok(g) = LabelledReebGraph::from_labels(&labels) {
            return g;
        }
    }
}

/// Random valid graph with `n` vertices and labels `k · step`, `k ∈ [0, levels)`.
pub fn random_grid_graph<R: Rng>(rng: &mut R, n: usize, step: f64, levels: i64) -> LabelledReebGraph {
    assert!(n >= 2 && n.is_multiple_of(2) && levels as usize >= n);
    loop {
        let mut ks: Vec<i64> = (0..levels).collect();
        ks.shuffle(rng);
        let labels: Vec<f64> = ks[..n].iter().map(|&k| k as f64 * step).collect();
        if let Ok(g) = LabelledReebGraph::from_labels(&labels) {
            return g;
        }
    }
}

/// A random valid Birth, Death or Relabel on `g`.
pub fn random_op<R: Rng>(rng: &mut R, g: &LabelledReebGraph) -> ElementaryDeformation {
    let n = g.len();
    loop {
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..n);
                let (a, b) = (g.at(i), g.at((i + 1) % n));
                let (lo, hi) = if a.label < b.label { (a, b) } else { (b, a) };
                let x = rng.gen_range(lo.label..hi.label);
                let y = rng.gen_range(lo.label..hi.label);
                let (mn, mx) = (x.min(y), x.max(y));
                if lo.label < mn && mn < mx && mx < hi.label {
                    return ElementaryDeformation::birth(lo.id, hi.id, mx, mn);
                }
            }
            1 => {
                let deaths = find_deletable_pairs(g);
                if let Some(d) = deaths.choose(rng) {
                    return d.clone();
                }
            }
            _ => {
                // shrink or stretch around the midpoint keeps every order
                // relation between neighbours
                let s = rng.gen_range(0.5..1.5);
                let shift = rng.gen_range(-0.5..0.5);
                let map: BTreeMap<_, _> = g
                    .vertices()
                    .iter()
                    .map(|v| {
                        let wiggle = match v.index {
                            CriticalIndex::Min => -1.0,
                            CriticalIndex::Max => 1.0,
                        } * rng.gen_range(0.0..0.1);
                        (v.id, v.label * s + shift + wiggle)
                    })
                    .collect();
                let op = ElementaryDeformation::Relabel { map };
                if op.apply(g).is_ok() {
                    return op;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_morse_is_deterministic() {
        let a = random_simple_morse(7, 3, 1.0).unwrap();
        let b = random_simple_morse(7, 3, 1.0).unwrap();
        assert_eq!(a, b);
        let tol = Tolerances::default();
        let n = a.critical_points(&tol).unwrap().len();
        assert!((2..=6).contains(&n));
    }

    #[test]
    fn degree_one_is_always_simple() {
        for seed in 0..20 {
            let f = random_simple_morse(seed, 1, 1.0).unwrap();
            assert_eq!(f.critical_points(&Tolerances::default()).unwrap().len(), 2);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(random_simple_morse(1, 0, 1.0).is_err());
        assert!(random_simple_morse(1, 2, 0.0).is_err());
    }

    #[test]
    fn graphs_and_ops_are_valid() {
        let mut r = rng(3);
        for n in [2, 4, 6, 8] {
            let g = random_graph(&mut r, n);
            assert_eq!(g.len(), n);
            for _ in 0..20 {
                let op = random_op(&mut r, &g);
                assert!(op.apply(&g).is_ok(), "{op:?}");
            }
        }
        let g = random_grid_graph(&mut r, 4, 0.02, 50);
        assert!(g.labels().iter().all(|x| ((x / 0.02).round() * 0.02 - x).abs() < 1e-12));
    }
}
