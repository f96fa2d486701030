//! Bounds on the natural pseudo-distance `inf_τ ‖f − g∘τ‖_∞` over
//! homeomorphisms τ of the circle.
//!
//! Lower bounds come from reparameterization invariants: the global extrema
//! and the 0-dimensional persistence diagrams of sub- and superlevel sets.
//! The upper bound is a bottleneck monotone alignment of dense samples.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::circlefn::{CircleFunction, Tolerances};
use crate::error::DistanceError;
use crate::parallel::par_map;
use crate::reeb::LabelledReebGraph;

/// `max(|max f − max g|, |min f − min g|)`.
pub fn pseudo_lower(f: &CircleFunction, g: &CircleFunction, tol: &Tolerances) -> f64 {
    let (fl, fh) = f.extrema(tol);
    let (gl, gh) = g.extrema(tol);
    (fh - gh).abs().max((fl - gl).abs())
}

/// A finite point `(birth, death)` of a persistence diagram.
pub type PersistencePair = (f64, f64);

/// Finite 0-dimensional sublevel-set persistence of a cyclic sequence of
/// values (elder rule). The essential class of the global minimum is omitted.
pub fn sublevel_persistence(values: &[f64]) -> Vec<PersistencePair> {
    let n = values.len();
    if n < 2 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    // birth vertex of each root
    let birth: Vec<usize> = (0..n).collect();
    let rank_of = {
        let mut r = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            r[i] = k;
        }
        r
    };
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut pairs = Vec::new();
    for &v in &order {
        seen[v] = true;
        let mut roots: Vec<usize> = Vec::with_capacity(2);
        for u in [(v + n - 1) % n, (v + 1) % n] {
            if u != v && seen[u] {
                let r = find(&mut parent, u);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        match roots.as_slice() {
            [] => {}
            [r] => parent[v] = *r,
            [r1, r2] => {
                let (old, young) = if rank_of[birth[*r1]] < rank_of[birth[*r2]] {
                    (*r1, *r2)
                } else {
                    (*r2, *r1)
                };
                let b = values[birth[young]];
                if values[v] > b {
                    pairs.push((b, values[v]));
                }
                parent[young] = old;
                parent[v] = old;
            }
            _ => unreachable!(),
        }
    }
    pairs
}

/// Finite superlevel-set persistence, reported as `(birth, death)` with
/// `birth > death`.
pub fn superlevel_persistence(values: &[f64]) -> Vec<PersistencePair> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    sublevel_persistence(&neg)
        .into_iter()
        .map(|(b, d)| (-b, -d))
        .collect()
}

fn linf(a: PersistencePair, b: PersistencePair) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(a: PersistencePair) -> f64 {
    (a.1 - a.0).abs() / 2.0
}

/// Bottleneck distance between two finite persistence diagrams.
pub fn bottleneck_distance(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
    let mut cand: Vec<f64> = a.iter().chain(b).map(|&p| to_diagonal(p)).collect();
    for &p in a {
        for &q in b {
            cand.push(linf(p, q));
        }
    }
    cand.push(0.0);
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bottleneck_feasible(a, b, cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

fn bottleneck_feasible(a: &[PersistencePair], b: &[PersistencePair], eps: f64) -> bool {
    let (p, q) = (a.len(), b.len());
    // left: a[0..p], then diagonal images of b; right: b[0..q], then diagonal images of a
    let size = p + q;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for i in 0..p {
        for j in 0..q {
            if linf(a[i], b[j]) <= eps {
                adj[i].push(j);
            }
        }
        if to_diagonal(a[i]) <= eps {
            adj[i].push(q + i);
        }
    }
    for j in 0..q {
        if to_diagonal(b[j]) <= eps {
            adj[p + j].push(j);
        }
        adj[p + j].extend(q..q + p);
    }
    let mut match_right = vec![usize::MAX; size];
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [usize],
    ) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if match_right[v] == usize::MAX || augment(match_right[v], adj, seen, match_right) {
                    match_right[v] = u;
                    return true;
                }
            }
        }
        false
    }
    for u in 0..size {
        let mut seen = vec![false; size];
        if !augment(u, &adj, &mut seen, &mut match_right) {
            return false;
        }
    }
    true
}

/// Values at critical points (or breakpoints) in cyclic order.
fn value_sequence(f: &CircleFunction, tol: &Tolerances) -> Vec<f64> {
    match f {
        CircleFunction::PiecewiseLinear(p) => p.points().iter().map(|&(_, y)| y).collect(),
        CircleFunction::Trig(_) => f
            .critical_points_unchecked(tol)
            .iter()
            .map(|c| c.value)
            .collect(),
    }
}

/// Lower bound from cyclic value sequences: extrema differences and
/// bottleneck distances between sub- and superlevel persistence diagrams.
pub fn sequence_lower_bound(a: &[f64], b: &[f64]) -> f64 {
    let ext = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)))
    };
    let ((al, ah), (bl, bh)) = (ext(a), ext(b));
    let extrema = (al - bl).abs().max((ah - bh).abs());
    let sub = bottleneck_distance(&sublevel_persistence(a), &sublevel_persistence(b));
    let sup = bottleneck_distance(&superlevel_persistence(a), &superlevel_persistence(b));
    extrema.max(sub).max(sup)
}

/// A certified lower bound on the pseudo-distance, hence on the editing
/// distance of the two labelled Reeb graphs. At least [`pseudo_lower`].
pub fn improved_edit_lower(f: &CircleFunction, g: &CircleFunction, tol: &Tolerances) -> f64 {
    let (a, b) = (value_sequence(f, tol), value_sequence(g, tol));
    let pers = if a.is_empty() || b.is_empty() {
        0.0
    } else {
        sequence_lower_bound(&a, &b)
    };
    pseudo_lower(f, g, tol).max(pers)
}

/// [`improved_edit_lower`] evaluated directly on labelled graphs.
pub fn graph_lower_bound(g1: &LabelledReebGraph, g2: &LabelledReebGraph) -> f64 {
    sequence_lower_bound(&g1.labels(), &g2.labels())
}

/// A monotone correspondence between samples of f and g.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// `max |f(θ_f) − g(θ_g)|` over the pairs.
    pub cost: f64,
    /// True when τ reverses orientation.
    pub reversed: bool,
    /// `(θ_f, θ_g)` pairs in traversal order.
    pub pairs: Vec<(f64, f64)>,
}

struct Samples {
    theta: Vec<f64>,
    value: Vec<f64>,
}

/// Uniform grid plus all critical points, so that the function is monotone
/// between consecutive samples. Grids at resolution 2N contain those at N.
fn samples(f: &CircleFunction, resolution: usize, tol: &Tolerances) -> Samples {
    let mut theta: Vec<f64> = (0..resolution)
        .map(|i| TAU * i as f64 / resolution as f64)
        .collect();
    theta.extend(f.critical_points_unchecked(tol).iter().map(|c| c.position));
    theta.sort_by(f64::total_cmp);
    theta.dedup();
    let value = theta.iter().map(|&t| f.value(t)).collect();
    Samples { theta, value }
}

/// Bottleneck cost of the best monotone cyclic path pairing `a[i0]` with
/// `b[j0]` first, or `None` when it cannot beat `best`. Both functions are
/// monotone between consecutive samples, so a diagonal step costs only the
/// larger endpoint difference and the discrete cost bounds the continuous one.
fn offset_cost(a: &[f64], b: &[f64], i0: usize, j0: usize, best: f64) -> Option<f64> {
    let (n, m) = (a.len(), b.len());
    let bb: Vec<f64> = (0..=m).map(|j| b[(j0 + j) % m]).collect();
    let mut row = vec![0.0f64; m + 1];
    let a0 = a[i0];
    let mut acc = 0.0f64;
    for j in 0..=m {
        acc = acc.max((a0 - bb[j]).abs());
        row[j] = acc;
    }
    if row[0] > best {
        return None;
    }
    for i in 1..=n {
        let ai = a[(i0 + i) % n];
        let mut diag = row[0];
        let mut left = (ai - bb[0]).abs().max(row[0]);
        row[0] = left;
        let mut row_min = left;
        for j in 1..=m {
            let up = row[j];
            let v = (ai - bb[j]).abs().max(left.min(up).min(diag));
            diag = up;
            row[j] = v;
            left = v;
            row_min = row_min.min(v);
        }
        if row_min > best {
            return None;
        }
    }
    (row[m] <= best).then_some(row[m])
}

fn backtrack(a: &[f64], b: &[f64], i0: usize, j0: usize) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut c = vec![0.0f64; (n + 1) * w];
    let d = |i: usize, j: usize| (a[(i0 + i) % n] - b[(j0 + j) % m]).abs();
    for i in 0..=n {
        for j in 0..=m {
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => c[j - 1],
                (_, 0) => c[(i - 1) * w],
                _ => c[(i - 1) * w + j]
                    .min(c[i * w + j - 1])
                    .min(c[(i - 1) * w + j - 1]),
            };
            c[i * w + j] = d(i, j).max(prev);
        }
    }
    let (mut i, mut j) = (n, m);
    let mut path = vec![(i, j)];
    while (i, j) != (0, 0) {
        if i == 0 {
            j -= 1;
        } else if j == 0 {
            i -= 1;
        } else {
            let (d, u, l) = (
                c[(i - 1) * w + j - 1],
                c[(i - 1) * w + j],
                c[i * w + j - 1],
            );
            if d <= u && d <= l {
                i -= 1;
                j -= 1;
            } else if u <= l {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        path.push((i, j));
    }
    path.reverse();
    path.into_iter()
        .map(|(i, j)| ((i0 + i) % n, (j0 + j) % m))
        .collect()
}

struct Best {
    cost: f64,
    reversed: bool,
    i0: usize,
    j0: usize,
}

fn search(fs: &Samples, gs: &Samples, init: f64) -> Best {
    let a = &fs.value;
    let argext = |pick_max: bool| {
        (0..a.len())
            .max_by(|&x, &y| {
                let o = a[x].total_cmp(&a[y]);
                if pick_max {
                    o
                } else {
                    o.reverse()
                }
            })
            .unwrap()
    };
    let bf: Vec<f64> = gs.value.clone();
    let br: Vec<f64> = gs.value.iter().rev().copied().collect();
    let shared = AtomicU64::new(init.to_bits());
    let mut result = Best {
        cost: f64::INFINITY,
        reversed: false,
        i0: 0,
        j0: 0,
    };
    for (reversed, b) in [(false, &bf), (true, &br)] {
        let best0 = f64::from_bits(shared.load(Ordering::Relaxed));
        let candidates = |i0: usize| -> Vec<usize> {
            (0..b.len())
                .filter(|&j| (a[i0] - b[j]).abs() <= best0)
                .collect()
        };
        let (lo, hi) = (argext(false), argext(true));
        let (cl, ch) = (candidates(lo), candidates(hi));
        let (i0, offsets) = if cl.len() <= ch.len() { (lo, cl) } else { (hi, ch) };
        let costs = par_map(&offsets, |&j0| {
            let best = f64::from_bits(shared.load(Ordering::Relaxed));
            let c = offset_cost(a, b, i0, j0, best);
            if let Some(c) = c {
                shared.fetch_min_f64(c);
            }
            c
        });
        for (&j0, c) in offsets.iter().zip(costs) {
            if let Some(c) = c {
                if c < result.cost {
                    result = Best {
                        cost: c,
                        reversed,
                        i0,
                        j0,
                    };
                }
            }
        }
    }
    result
}

trait FetchMinF64 {
    fn fetch_min_f64(&self, v: f64);
}

impl FetchMinF64 for AtomicU64 {
    // costs are nonnegative, so the bit patterns order like the values
    fn fetch_min_f64(&self, v: f64) {
        self.fetch_min(v.to_bits(), Ordering::Relaxed);
    }
}

/// Upper bound from a bottleneck monotone alignment of `resolution` uniform
/// samples (plus critical points) of each function, over both orientations
/// and all cyclic offsets. Cost is Θ(resolution³) in the worst case; see
/// [`pseudo_upper`] for the fast equivalent.
pub fn pseudo_upper_dense(
    f: &CircleFunction,
    g: &CircleFunction,
    resolution: usize,
    tol: &Tolerances,
) -> Result<Alignment, DistanceError> {
    let required = check_resolution(f, g, resolution, tol)?;
    // A coarser pass on the nested grid seeds the pruning threshold; its
    // alignment is kept when the finer grid cannot beat it, which makes the
    // bound monotone along the ladder N, 2N, 4N, …
    let coarse = if resolution.is_multiple_of(2) && resolution / 2 >= required.max(64) {
        Some(pseudo_upper_dense(f, g, resolution / 2, tol)?)
    } else {
        None
    };
    let init = coarse.as_ref().map_or(f64::INFINITY, |a| a.cost);
    let fs = samples(f, resolution, tol);
    let gs = samples(g, resolution, tol);
    let best = search(&fs, &gs, init);
    if !(best.cost < init) {
        if let Some(c) = coarse {
            return Ok(c);
        }
    }
    Ok(alignment_from(&fs, &gs, &best))
}

fn check_resolution(
    f: &CircleFunction,
    g: &CircleFunction,
    resolution: usize,
    tol: &Tolerances,
) -> Result<usize, DistanceError> {
    let crit = f.critical_points_unchecked(tol).len() + g.critical_points_unchecked(tol).len();
    let required = (4 * crit).max(4);
    if resolution < required {
        return Err(DistanceError::ResolutionTooLow {
            resolution,
            required,
        });
    }
    Ok(required)
}

fn alignment_from(fs: &Samples, gs: &Samples, best: &Best) -> Alignment {
    let m = gs.value.len();
    let b: Vec<f64> = if best.reversed {
        gs.value.iter().rev().copied().collect()
    } else {
        gs.value.clone()
    };
    let path = backtrack(&fs.value, &b, best.i0, best.j0);
    let pairs = path
        .into_iter()
        .map(|(i, j)| {
            let jg = if best.reversed { m - 1 - j } else { j };
            (fs.theta[i], gs.theta[jg])
        })
        .collect();
    Alignment {
        cost: best.cost,
        reversed: best.reversed,
        pairs,
    }
}

/// Cyclic sequence of turning points: the function is monotone between
/// consecutive entries.
fn turning_points(f: &CircleFunction, tol: &Tolerances) -> Samples {
    let mut theta: Vec<f64> = match f {
        CircleFunction::PiecewiseLinear(p) => p.points().iter().map(|&(t, _)| t).collect(),
        CircleFunction::Trig(_) => f
            .critical_points_unchecked(tol)
            .iter()
            .map(|c| c.position)
            .collect(),
    };
    if theta.is_empty() {
        theta.push(0.0);
    }
    let mut value: Vec<f64> = theta.iter().map(|&t| f.value(t)).collect();
    // drop interior points of monotone runs
    loop {
        let n = value.len();
        if n <= 2 {
            break;
        }
        let drop = (0..n).find(|&i| {
            let (p, c, q) = (value[(i + n - 1) % n], value[i], value[(i + 1) % n]);
            (p <= c && c <= q) || (p >= c && c >= q)
        });
        match drop {
            Some(i) => {
                theta.remove(i);
                value.remove(i);
            }
            None => break,
        }
    }
    Samples { theta, value }
}

/// Inserts every crossing of the given levels strictly inside each monotone
/// segment. Angles are located by bisection when `f` is given.
fn refine(s: &Samples, levels: &[f64], f: Option<&CircleFunction>) -> Samples {
    let n = s.value.len();
    let mut theta = Vec::new();
    let mut value = Vec::new();
    for i in 0..n {
        let (u, v) = (s.value[i], s.value[(i + 1) % n]);
        let (ta, mut tb) = (s.theta[i], s.theta[(i + 1) % n]);
        if tb <= ta {
            tb += TAU;
        }
        theta.push(ta);
        value.push(u);
        let (lo, hi) = (u.min(v), u.max(v));
        let mut inside: Vec<f64> = levels.iter().copied().filter(|&l| lo < l && l < hi).collect();
        inside.sort_by(f64::total_cmp);
        inside.dedup();
        if u > v {
            inside.reverse();
        }
        for l in inside {
            let t = match f {
                Some(f) => level_crossing(f, ta, tb, u, l),
                None => f64::NAN,
            };
            theta.push(t);
            value.push(l);
        }
    }
    Samples { theta, value }
}

fn level_crossing(f: &CircleFunction, mut a: f64, mut b: f64, fa: f64, level: f64) -> f64 {
    let below = fa < level;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if (f.value(m) < level) == below {
            a = m;
        } else {
            b = m;
        }
    }
    crate::circlefn::wrap_angle(0.5 * (a + b))
}

/// Shared level grid: every turning value of either function, and those
/// values shifted by ±ε.
fn levels_for(p: &[f64], q: &[f64], eps: f64) -> Vec<f64> {
    let mut l: Vec<f64> = p
        .iter()
        .chain(q)
        .flat_map(|&x| [x - eps, x, x + eps])
        .collect();
    l.sort_by(f64::total_cmp);
    l.dedup();
    l
}

/// Upper bound on the pseudo-distance, equal to the `resolution → ∞` limit
/// of [`pseudo_upper_dense`].
///
/// Each function is reduced to its turning points; a monotone piece is a
/// segment of the real line whatever its parameterization. For a candidate
/// threshold ε both sequences are refined on a shared level grid (all
/// turning values and those values ± ε), and a bottleneck monotone alignment of the
/// refined sequences decides feasibility. Candidates are the differences
/// `|p − q|` and half-differences `|p − p′|/2`, `|q − q′|/2` of turning
/// values; the smallest feasible one is returned with its alignment.
/// `resolution` is validated as for the dense variant.
pub fn pseudo_upper(
    f: &CircleFunction,
    g: &CircleFunction,
    resolution: usize,
    tol: &Tolerances,
) -> Result<Alignment, DistanceError> {
    check_resolution(f, g, resolution, tol)?;
    let fs = turning_points(f, tol);
    let gs = turning_points(g, tol);
    let (p, q) = (&fs.value, &gs.value);
    let mut cand = vec![0.0];
    for &x in p {
        for &y in q {
            cand.push((x - y).abs());
        }
    }
    for v in [p, q] {
        for i in 0..v.len() {
            for k in i + 1..v.len() {
                cand.push((v[i] - v[k]).abs() / 2.0);
            }
        }
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let decide = |eps: f64| -> Option<f64> {
        let levels = levels_for(p, q, eps);
        let fr = refine(&fs, &levels, None);
        let gr = refine(&gs, &levels, None);
        let b = search(&fr, &gr, eps);
        (b.cost <= eps).then_some(b.cost)
    };
    // the largest candidate pairs everything within range, so it is feasible
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match decide(cand[mid]) {
            Some(c) => hi = cand.partition_point(|&x| x < c).min(mid),
            None => lo = mid + 1,
        }
    }
    let eps = cand[lo];
    let levels = levels_for(p, q, eps);
    let fr = refine(&fs, &levels, Some(f));
    let gr = refine(&gs, &levels, Some(g));
    let best = search(&fr, &gr, eps);
    let mut a = alignment_from(&fr, &gr, &best);
    // report the cost actually achieved at the located angles
    a.cost = a
        .pairs
        .iter()
        .map(|&(x, y)| (f.value(x) - g.value(y)).abs())
        .fold(best.cost, f64::max);
    Ok(a)
}
