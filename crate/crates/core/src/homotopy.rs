//! Tracing the straight path `h(λ) = (1 − λ) f + λ g` through the strata of
//! non-generic functions, and the edit script it certifies.
//!
//! Between events the critical points move continuously, so one Relabel per
//! event-free segment carries every label from one end to the other; its cost
//! is at most `‖f − g‖_C⁰` times the segment length. At a fold a pair of
//! critical points is born or dies with an almost zero value gap. Value
//! swaps need no structural step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circlefn::{CircleFunction, CriticalIndex, CriticalPoint, Tolerances};
use crate::edits::{apply_sequence, Deformation, ElementaryDeformation};
use crate::error::{FunctionError, HomotopyError};
use crate::parallel::par_map;
use crate::random;
use crate::reeb::{LabelledReebGraph, VertexId};

/// Slack allowed between the script cost and the C² bound.
pub const TRACE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A degenerate critical point: a pair is created or annihilated.
    BirthDeath,
    /// Two critical points share a value.
    ValueSwap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumEvent {
    pub lambda: f64,
    pub kind: EventKind,
    /// Change in the number of critical points: +2, −2 or 0.
    pub vertex_delta: i64,
    /// Positions of the two critical points involved, on the side where
    /// both exist.
    pub positions: (f64, f64),
    pub values: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub events: Vec<StratumEvent>,
    pub script: Deformation,
    pub script_cost: f64,
    pub c2_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub coarse_steps: usize,
    pub max_steps: usize,
    pub lambda_tol: f64,
    pub tol: Tolerances,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            coarse_steps: 256,
            max_steps: 4096,
            lambda_tol: 1e-10,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug)]
struct Sample {
    lambda: f64,
    cps: Vec<CriticalPoint>,
}

/// Vertex count and value ranks read from the global minimum onwards; equal
/// signatures mean equal labelled graphs up to label values.
fn signature(cps: &[CriticalPoint]) -> Vec<usize> {
    let n = cps.len();
    if n == 0 {
        return Vec::new();
    }
    let start = (0..n)
        .min_by(|&a, &b| cps[a].value.total_cmp(&cps[b].value))
        .unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cps[a].value.total_cmp(&cps[b].value));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    (0..n).map(|k| rank[(start + k) % n]).collect()
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Rotation `r` with `to[(k + r) % n] ↔ from[k]` preserving indices and
/// moving positions least.
fn align(from: &[CriticalPoint], to: &[CriticalPoint]) -> Option<(usize, f64)> {
    let n = from.len();
    if n != to.len() || n == 0 {
        return None;
    }
    (0..n)
        .filter(|&r| from[0].index == to[r % n].index)
        .map(|r| {
            let worst = (0..n)
                .map(|k| circular_gap(from[k].position, to[(k + r) % n].position))
                .fold(0.0, f64::max);
            (r, worst)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// The adjacent pair of `more` whose removal aligns best with `fewer`:
/// `(k, rotation)` where the pair is `(k, k + 1)`.
fn vanishing_pair(more: &[CriticalPoint], fewer: &[CriticalPoint]) -> Option<(usize, usize)> {
    let n = more.len();
    (0..n)
        .filter_map(|k| {
            let rest: Vec<CriticalPoint> = (2..n).map(|t| more[(k + t) % n]).collect();
            align(&rest, fewer).map(|(r, w)| (k, r, w))
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(k, r, _)| (k, r))
}

struct Path<'a> {
    f: &'a CircleFunction,
    g: &'a CircleFunction,
    opts: &'a TraceOptions,
}

impl Path<'_> {
    fn at(&self, lambda: f64) -> Result<Sample, HomotopyError> {
        let h = self.f.linear_combination(self.g, lambda)?;
        Ok(Sample {
            lambda,
            cps: h.critical_points_unchecked(&self.opts.tol),
        })
    }

    fn grid(&self, steps: usize) -> Result<Vec<Sample>, HomotopyError> {
        let lambdas: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        par_map(&lambdas, |&l| self.at(l)).into_iter().collect()
    }

    /// Brackets the first signature change after `a`, assuming `b` differs.
    fn bracket(&self, a: &Sample, b: &Sample) -> Result<(Sample, Sample), HomotopyError> {
        let sig = signature(&a.cps);
        let (mut lo, mut hi) = (a.clone(), b.clone());
        while hi.lambda - lo.lambda > self.opts.lambda_tol {
            let mid = self.at(0.5 * (lo.lambda + hi.lambda))?;
            if signature(&mid.cps) == sig {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    }
}

fn classify(lo: &Sample, hi: &Sample) -> Result<StratumEvent, HomotopyError> {
    let lambda = 0.5 * (lo.lambda + hi.lambda);
    let nongeneric = |m: &str| HomotopyError::NonGeneric(format!("{m} near λ={lambda}"));
    let (n_lo, n_hi) = (lo.cps.len(), hi.cps.len());
    if n_lo.abs_diff(n_hi) == 2 {
        let (more, fewer) = if n_lo > n_hi { (lo, hi) } else { (hi, lo) };
        let (k, _) = vanishing_pair(&more.cps, &fewer.cps)
            .ok_or_else(|| nongeneric("no vanishing pair"))?;
        let n = more.cps.len();
        let rest: Vec<CriticalPoint> = (2..n).map(|t| more.cps[(k + t) % n]).collect();
        if signature(&rest) != signature(&fewer.cps) {
            return Err(nongeneric("fold coincides with another event"));
        }
        let (p, q) = (more.cps[k], more.cps[(k + 1) % n]);
        return Ok(StratumEvent {
            lambda,
            kind: EventKind::BirthDeath,
            vertex_delta: n_hi as i64 - n_lo as i64,
            positions: (p.position, q.position),
            values: (p.value, q.value),
        });
    }
    if n_lo != n_hi {
        return Err(nongeneric("several folds at once"));
    }
    let (r, _) = align(&lo.cps, &hi.cps).ok_or_else(|| nongeneric("critical points jump"))?;
    let n = n_lo;
    let mut swapped = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let before = lo.cps[i].value < lo.cps[j].value;
            let after = hi.cps[(i + r) % n].value < hi.cps[(j + r) % n].value;
            if before != after {
                swapped.push((i, j));
            }
        }
    }
    match swapped.as_slice() {
        [(i, j)] => Ok(StratumEvent {
            lambda,
            kind: EventKind::ValueSwap,
            vertex_delta: 0,
            positions: (lo.cps[*i].position, lo.cps[*j].position),
            values: (lo.cps[*i].value, lo.cps[*j].value),
        }),
        _ => Err(nongeneric("several critical values coincide")),
    }
}

fn check_endpoint(f: &CircleFunction, tol: &Tolerances, name: &str) -> Result<(), HomotopyError> {
    if !f.is_trig() {
        return Err(FunctionError::UnsupportedDerivative {
            order: 2,
            theta: 0.0,
        }
        .into());
    }
    let report = f.genericity_report(tol);
    if !report.is_simple {
        return Err(HomotopyError::NonGeneric(format!(
            "{name} is not simple Morse: {}",
            report.violations.join("; ")
        )));
    }
    Ok(())
}

/// Events along the path with their bracketing samples, refining the grid
/// when a coarse interval hides more than one fold.
fn events_with_brackets(
    path: &Path,
) -> Result<Vec<(StratumEvent, Sample, Sample, Vec<Sample>)>, HomotopyError> {
    let mut steps = path.opts.coarse_steps.max(1);
    'refine: loop {
        let grid = path.grid(steps)?;
        let mut out: Vec<(StratumEvent, Sample, Sample, Vec<Sample>)> = Vec::new();
        // grid samples strictly inside the current segment, for tracking
        let mut segment: Vec<Sample> = Vec::new();
        for w in grid.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.cps.len().abs_diff(b.cps.len()) > 2 && steps < path.opts.max_steps {
                steps = (steps * 4).min(path.opts.max_steps);
                continue 'refine;
            }
            let target = signature(&b.cps);
            let mut cur = a.clone();
            while signature(&cur.cps) != target {
                let (lo, hi) = path.bracket(&cur, b)?;
                let ev = classify(&lo, &hi)?;
                if let Some((prev, ..)) = out.last() {
                    let prev: &StratumEvent = prev;
                    if ev.lambda - prev.lambda <= path.opts.lambda_tol {
                        return Err(HomotopyError::NonGeneric(format!(
                            "events at λ={} and λ={} coincide",
                            prev.lambda, ev.lambda
                        )));
                    }
                }
                cur = hi.clone();
                out.push((ev, lo, hi, std::mem::take(&mut segment)));
            }
            segment.push(b.clone());
        }
        let tail = segment;
        return Ok(out
            .into_iter()
            .chain(std::iter::once((
                StratumEvent {
                    lambda: 1.0,
                    kind: EventKind::ValueSwap,
                    vertex_delta: 0,
                    positions: (0.0, 0.0),
                    values: (0.0, 0.0),
                },
                grid[steps].clone(),
                grid[steps].clone(),
                tail,
            )))
            .collect());
    }
}

/// Crossings of the non-generic strata along `(1 − λ) f + λ g`.
pub fn detect_events(
    f: &CircleFunction,
    g: &CircleFunction,
    coarse_steps: usize,
) -> Result<Vec<StratumEvent>, HomotopyError> {
    let opts = TraceOptions {
        coarse_steps,
        ..TraceOptions::default()
    };
    detect_events_with(f, g, &opts)
}

pub fn detect_events_with(
    f: &CircleFunction,
    g: &CircleFunction,
    opts: &TraceOptions,
) -> Result<Vec<StratumEvent>, HomotopyError> {
    check_endpoint(f, &opts.tol, "f")?;
    check_endpoint(g, &opts.tol, "g")?;
    let path = Path { f, g, opts };
    let mut all = events_with_brackets(&path)?;
    all.pop();
    Ok(all.into_iter().map(|(e, ..)| e).collect())
}

/// Follows ids from one sample to the next with the same vertex count.
fn carry(ids: &[VertexId], from: &Sample, to: &Sample) -> Result<Vec<VertexId>, HomotopyError> {
    let (r, _) = align(&from.cps, &to.cps).ok_or_else(|| {
        HomotopyError::NonGeneric(format!(
            "critical points cannot be followed from λ={} to λ={}",
            from.lambda, to.lambda
        ))
    })?;
    let n = ids.len();
    let mut out = vec![VertexId(0); n];
    for k in 0..n {
        out[(k + r) % n] = ids[k];
    }
    Ok(out)
}

fn relabel_to(
    graph: &mut LabelledReebGraph,
    ids: &[VertexId],
    s: &Sample,
    script: &mut Vec<ElementaryDeformation>,
) -> Result<(), HomotopyError> {
    let map: std::collections::BTreeMap<VertexId, f64> =
        ids.iter().zip(&s.cps).map(|(&id, c)| (id, c.value)).collect();
    let unchanged = map
        .iter()
        .all(|(&id, &v)| graph.vertex(id).map(|x| x.label == v).unwrap_or(false));
    if unchanged {
        return Ok(());
    }
    let op = ElementaryDeformation::Relabel { map };
    *graph = op.apply(graph)?;
    script.push(op);
    Ok(())
}

/// Edit script certified by the straight path from `f` to `g`.
pub fn trace(f: &CircleFunction, g: &CircleFunction) -> Result<TraceResult, HomotopyError> {
    trace_with(f, g, &TraceOptions::default())
}

pub fn trace_with(
    f: &CircleFunction,
    g: &CircleFunction,
    opts: &TraceOptions,
) -> Result<TraceResult, HomotopyError> {
    check_endpoint(f, &opts.tol, "f")?;
    check_endpoint(g, &opts.tol, "g")?;
    let c2_bound = f.difference(g)?.cr_norm(2, &opts.tol)?;
    let start = LabelledReebGraph::extract(f, &opts.tol)?;
    let target = LabelledReebGraph::extract(g, &opts.tol)?;
    let path = Path { f, g, opts };
    let segments = events_with_brackets(&path)?;
    let mut graph = start.clone();
    let mut ids: Vec<VertexId> = graph.vertices().iter().map(|v| v.id).collect();
    let mut cur = path.at(0.0)?;
    if cur.cps.len() != ids.len() {
        return Err(HomotopyError::ReplayMismatch("start sample disagrees with f".into()));
    }
    let mut script = Vec::new();
    let mut events = Vec::new();
    for (ev, lo, hi, inside) in segments {
        for s in inside.iter().chain(std::iter::once(&lo)) {
            if s.lambda > cur.lambda {
                ids = carry(&ids, &cur, s)?;
                cur = s.clone();
            }
        }
        let last = hi.lambda == lo.lambda;
        if last || ev.kind == EventKind::BirthDeath {
            relabel_to(&mut graph, &ids, &cur, &mut script)?;
        }
        if last {
            break;
        }
        match ev.vertex_delta {
            -2 => {
                let (k, _) = vanishing_pair(&lo.cps, &hi.cps).unwrap();
                let n = ids.len();
                let (a, b) = (k, (k + 1) % n);
                let (u1, u2) = if lo.cps[a].index == CriticalIndex::Max {
                    (ids[a], ids[b])
                } else {
                    (ids[b], ids[a])
                };
                let op = ElementaryDeformation::death(u1, u2);
                graph = op.apply(&graph)?;
                script.push(op);
                let rest_ids: Vec<VertexId> = (2..n).map(|t| ids[(k + t) % n]).collect();
                let rest = Sample {
                    lambda: lo.lambda,
                    cps: (2..n).map(|t| lo.cps[(k + t) % n]).collect(),
                };
                ids = carry(&rest_ids, &rest, &hi)?;
            }
            2 => {
                let (k, r) = vanishing_pair(&hi.cps, &lo.cps).unwrap();
                let n = hi.cps.len();
                // rest[t] = hi[(k + 2 + t) % n] ↔ lo[(t + r) % (n − 2)]
                let m = n - 2;
                let mut new_ids = vec![VertexId(0); n];
                for t in 0..m {
                    new_ids[(k + 2 + t) % n] = ids[(t + r) % m];
                }
                let (x, y) = (hi.cps[k], hi.cps[(k + 1) % n]);
                let (prev, next) = (new_ids[(k + n - 1) % n], new_ids[(k + 2) % n]);
                let (lp, ln) = (graph.vertex(prev)?.label, graph.vertex(next)?.label);
                let (v1, v2) = if lp < ln { (prev, next) } else { (next, prev) };
                let (mx, mn) = if x.index == CriticalIndex::Max {
                    (x.value, y.value)
                } else {
                    (y.value, x.value)
                };
                let fresh = graph.max_id().0;
                let op = ElementaryDeformation::birth(v1, v2, mx, mn);
                graph = op.apply(&graph)?;
                script.push(op);
                let (max_id, min_id) = (VertexId(fresh + 1), VertexId(fresh + 2));
                let (kx, ky) = (k, (k + 1) % n);
                if x.index == CriticalIndex::Max {
                    new_ids[kx] = max_id;
                    new_ids[ky] = min_id;
                } else {
                    new_ids[kx] = min_id;
                    new_ids[ky] = max_id;
                }
                ids = new_ids;
            }
            _ => {
                ids = carry(&ids, &lo, &hi)?;
            }
        }
        cur = hi;
        events.push(ev);
    }
    let script = Deformation::new(script);
    let (end, script_cost) = apply_sequence(&script.steps, &start)?;
    if !end.is_isomorphic(&target, 1e-6) {
        return Err(HomotopyError::ReplayMismatch(format!(
            "ended at {:?}, expected {:?}",
            end.labels(),
            target.labels()
        )));
    }
    Ok(TraceResult {
        events,
        script,
        script_cost,
        c2_bound,
    })
}

/// Adds seeded noise of size `magnitude` to every coefficient of `g`.
pub fn perturb(g: &CircleFunction, seed: u64, magnitude: f64) -> CircleFunction {
    let mut rng = random::rng(seed);
    match g {
        CircleFunction::Trig(p) => {
            let mut jitter = |v: &[f64]| -> Vec<f64> {
                v.iter().map(|x| x + rng.gen_range(-magnitude..=magnitude)).collect()
            };
            let a0 = jitter(&[p.a0()])[0];
            let (c, s) = (jitter(p.cos_coeffs()), jitter(p.sin_coeffs()));
            CircleFunction::trig(a0, c, s).expect("finite coefficients")
        }
        CircleFunction::PiecewiseLinear(p) => {
            let pts = p
                .points()
                .iter()
                .map(|&(t, y)| (t, y + rng.gen_range(-magnitude..=magnitude)))
                .collect();
            CircleFunction::piecewise_linear(pts).expect("same breakpoints")
        }
    }
}

/// [`trace`], retrying with `g` perturbed by 1e−6 noise when the path is
/// not generic. Returns the result and the endpoint actually used.
pub fn trace_generic(
    f: &CircleFunction,
    g: &CircleFunction,
    seed: u64,
    attempts: usize,
) -> Result<(TraceResult, CircleFunction), HomotopyError> {
    let mut last = None;
    for k in 0..attempts.max(1) {
        let g_k = if k == 0 {
            g.clone()
        } else {
            perturb(g, seed.wrapping_add(k as u64), 1e-6)
        };
        match trace(f, &g_k) {
            Ok(r) => return Ok((r, g_k)),
            Err(e @ HomotopyError::NonGeneric(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Half the smallest gap between critical values.
pub fn stability_radius(f: &CircleFunction, tol: &Tolerances) -> Result<f64, HomotopyError> {
    let mut values: Vec<f64> = f.critical_points(tol)?.iter().map(|c| c.value).collect();
    values.sort_by(f64::total_cmp);
    Ok(values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueMatch {
    pub value: f64,
    pub index: CriticalIndex,
    /// Closest critical value of `g` with the same index, if any.
    pub nearest: Option<f64>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub delta: f64,
    pub matches: Vec<ValueMatch>,
    pub all_matched: bool,
}

/// For every critical value `c` of `f`, whether `g` has a critical value of
/// the same index within `[c − δ, c + δ]`.
pub fn check_critical_value_stability(
    f: &CircleFunction,
    g: &CircleFunction,
    delta: f64,
    tol: &Tolerances,
) -> Result<StabilityReport, HomotopyError> {
    let c0 = f.difference(g)?.cr_norm(0, tol)?;
    if c0 > delta + tol.value {
        return Err(HomotopyError::PreconditionViolated(format!(
            "‖f − g‖_C⁰ = {c0} exceeds δ = {delta}"
        )));
    }
    let radius = stability_radius(f, tol)?;
    if delta > radius {
        return Err(HomotopyError::PreconditionViolated(format!(
            "δ = {delta} exceeds the stability radius {radius}"
        )));
    }
    let gs = g.critical_points(tol)?;
    let matches: Vec<ValueMatch> = f
        .critical_points(tol)?
        .iter()
        .map(|c| {
            let nearest = gs
                .iter()
                .filter(|d| d.index == c.index)
                .map(|d| d.value)
                .min_by(|a, b| (a - c.value).abs().total_cmp(&(b - c.value).abs()));
            ValueMatch {
                value: c.value,
                index: c.index,
                nearest,
                matched: nearest.is_some_and(|v| (v - c.value).abs() <= delta + tol.value),
            }
        })
        .collect();
    Ok(StabilityReport {
        delta,
        all_matched: matches.iter().all(|m| m.matched),
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(a0: f64, c: &[f64], s: &[f64]) -> CircleFunction {
        CircleFunction::trig(a0, c.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn constant_shift_is_one_relabel() {
        let f = CircleFunction::sine(1.0);
        let g = trig(0.3, &[0.0], &[1.0]);
        assert!(detect_events(&f, &g, 64).unwrap().is_empty());
        let r = trace(&f, &g).unwrap();
        assert_eq!(r.script.len(), 1);
        assert!((r.script_cost - 0.3).abs() < 1e-9);
        assert!((r.c2_bound - 0.3).abs() < 1e-9);
    }

    #[test]
    fn identical_endpoints_need_nothing() {
        let f = trig(0.0, &[0.0, 0.2], &[1.0, 0.6]);
        let r = trace(&f, &f).unwrap();
        assert!(r.script.is_empty() && r.script_cost == 0.0);
    }

    #[test]
    fn fold_is_one_death() {
        // four critical points shrinking to two
        let f = trig(0.0, &[0.0, 0.0], &[1.0, 0.6]);
        let g = CircleFunction::sine(1.0);
        let r = trace(&f, &g).unwrap();
        let folds: Vec<_> = r.events.iter().filter(|e| e.kind == EventKind::BirthDeath).collect();
        assert_eq!(folds.len(), 1);
        assert_eq!(folds[0].vertex_delta, -2);
        assert!(r.script.steps.iter().any(|s| s.kind() == "death"));
        assert!(r.script_cost <= r.c2_bound + TRACE_TOLERANCE);
        // and the reverse path is one birth
        let back = trace(&g, &f).unwrap();
        assert_eq!(back.events.iter().filter(|e| e.vertex_delta == 2).count(), 1);
        assert!(back.script_cost <= back.c2_bound + TRACE_TOLERANCE);
    }

    #[test]
    fn swapped_inner_values_give_one_swap() {
        // sin 2θ + a sin θ + 0.05 cos θ: the minima swap order at a = 0.05
        let f = trig(0.0, &[0.05, 0.0], &[0.1, 1.0]);
        let g = trig(0.0, &[0.05, 0.0], &[0.0, 1.0]);
        let ev = detect_events(&f, &g, 256).unwrap();
        assert_eq!(ev.iter().filter(|e| e.kind == EventKind::ValueSwap).count(), 1, "{ev:?}");
        let r = trace(&f, &g).unwrap();
        assert!(r.script_cost <= r.c2_bound + TRACE_TOLERANCE);
    }

    #[test]
    fn event_parity_and_bound_on_random_pairs() {
        let tol = Tolerances::default();
        for seed in 0..6 {
            let f = random::random_simple_morse(seed, 3, 1.0).unwrap();
            let g = random::random_simple_morse(seed + 100, 3, 1.0).unwrap();
            let (r, g) = trace_generic(&f, &g, seed, 5).unwrap();
            let nf = f.critical_points(&tol).unwrap().len() as i64;
            let ng = g.critical_points(&tol).unwrap().len() as i64;
            let signed: i64 = r.events.iter().map(|e| e.vertex_delta).sum();
            assert_eq!(ng - nf, signed);
            assert!(r.script_cost <= r.c2_bound + TRACE_TOLERANCE);
        }
    }

    #[test]
    fn radius_examples() {
        let tol = Tolerances::default();
        assert!((stability_radius(&CircleFunction::sine(1.0), &tol).unwrap() - 1.0).abs() < 1e-9);
        let pl = LabelledReebGraph::from_labels(&[0.0, 0.6, 0.2, 1.0]).unwrap().realize();
        assert!((stability_radius(&pl, &tol).unwrap() - 0.1).abs() < 1e-12);
        let pl = LabelledReebGraph::from_labels(&[0.0, 0.5, 0.25, 0.75]).unwrap().realize();
        assert!((stability_radius(&pl, &tol).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn critical_values_stay_close() {
        let tol = Tolerances::default();
        let f = CircleFunction::sine(1.0);
        let g = trig(0.05, &[0.0], &[1.0]);
        let rep = check_critical_value_stability(&f, &g, 0.05, &tol).unwrap();
        assert!(rep.all_matched);
        assert!(check_critical_value_stability(&f, &g, 0.01, &tol).is_err());
        assert!(check_critical_value_stability(&f, &f, 0.0, &tol).unwrap().all_matched);
    }

    #[test]
    fn piecewise_linear_paths_are_rejected() {
        let pl = LabelledReebGraph::from_labels(&[0.0, 1.0]).unwrap().realize();
        assert!(trace(&pl, &pl).is_err());
    }
}
