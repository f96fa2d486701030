//! Shortest paths over grid-quantized labelled graphs.
//!
//! States are canonical label sequences in integer grid units. Arcs are
//! Deaths, Births of narrow grid pairs, and unit Relabels that move every vertex
//! by at most one grid step. Costs are kept in half-grid units so that all
//! arithmetic is exact. A* with the persistence lower bound as heuristic;
//! states may be reopened, so the first time the target is popped its cost is
//! optimal within this state graph. Ties on the estimate prefer deeper states.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::DistanceError;
use crate::reeb::LabelledReebGraph;

const MAX_INPUT_VERTICES: usize = 4;
const MAX_STATE_VERTICES: usize = 6;

/// Labels relative to the search floor, at most six of them.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Labels {
    n: usize,
    v: [i64; MAX_STATE_VERTICES],
}

impl Labels {
    fn from_slice(s: &[i64]) -> Self {
        let mut v = [0; MAX_STATE_VERTICES];
        v[..s.len()].copy_from_slice(s);
        Labels { n: s.len(), v }
    }

    fn as_slice(&self) -> &[i64] {
        &self.v[..self.n]
    }

    /// Packs the lexicographically least rotation or reflection; labels
    /// must lie in `0..256`.
    fn key(&self) -> u64 {
        let n = self.n;
        let mut best = u64::MAX;
        for reflect in [false, true] {
            for start in 0..n {
                let mut k = 0u64;
                for t in 0..n {
                    let i = if reflect { start + n - t } else { start + t };
                    k = (k << 8) | self.v[i % n] as u64;
                }
                best = best.min(k);
            }
        }
        // the length goes in the top byte so keys of different sizes differ
        best | (n as u64) << 56
    }

    fn from_key(key: u64) -> Self {
        let n = (key >> 56) as usize;
        let mut v = [0; MAX_STATE_VERTICES];
        for (t, slot) in v[..n].iter_mut().enumerate() {
            *slot = ((key >> (8 * (n - 1 - t))) & 0xff) as i64;
        }
        Labels { n, v }
    }
}

#[cfg(test)]
fn canonical(s: &[i64]) -> Vec<i64> {
    Labels::from_key(Labels::from_slice(s).key()).as_slice().to_vec()
}

/// Alternation and strict local extremality.
fn valid(s: &[i64]) -> bool {
    let n = s.len();
    if n < 2 || n % 2 == 1 {
        return false;
    }
    (0..n).all(|i| {
        let (a, b, c) = (s[(i + n - 1) % n], s[i], s[(i + 1) % n]);
        (b > a && b > c) || (b < a && b < c)
    })
}

type Diagram = Vec<(i64, i64)>;

/// Finite sublevel persistence pairs of a short cyclic sequence (elder rule).
fn sublevel_pairs(v: &[i64]) -> Diagram {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (v[i], i));
    let mut root: [usize; MAX_STATE_VERTICES] = [0, 1, 2, 3, 4, 5];
    let mut seen = [false; MAX_STATE_VERTICES];
    let find = |root: &[usize; MAX_STATE_VERTICES], mut x: usize| {
        while root[x] != x {
            x = root[x];
        }
        x
    };
    let mut out = Vec::new();
    for &i in &order {
        seen[i] = true;
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        let mut roots = [usize::MAX; 2];
        for (k, u) in [l, r].into_iter().enumerate() {
            if seen[u] && u != i {
                roots[k] = find(&root, u);
            }
        }
        match roots {
            [a, b] if a != usize::MAX && b != usize::MAX && a != b => {
                // roots are their own birth vertices; the lower one survives
                let (old, young) = if (v[a], a) < (v[b], b) { (a, b) } else { (b, a) };
                if v[i] > v[young] {
                    out.push((v[young], v[i]));
                }
                root[young] = old;
                root[i] = old;
            }
            [a, _] if a != usize::MAX => root[i] = a,
            [_, b] if b != usize::MAX => root[i] = b,
            _ => {}
        }
    }
    out
}

fn superlevel_pairs(v: &[i64]) -> Diagram {
    let neg: Vec<i64> = v.iter().map(|x| -x).collect();
    sublevel_pairs(&neg)
}

/// Bottleneck distance in half-steps between two tiny diagrams, by
/// enumerating every partial matching.
fn bottleneck_half(a: &[(i64, i64)], b: &[(i64, i64)]) -> i64 {
    fn go(a: &[(i64, i64)], b: &[(i64, i64)], used: &mut Vec<bool>) -> i64 {
        let Some((&p, rest)) = a.split_first() else {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(q, _)| (q.1 - q.0).abs())
                .max()
                .unwrap_or(0);
        };
        let mut best = (p.1 - p.0).abs().max(go(rest, b, used));
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let c = 2 * (p.0 - b[j].0).abs().max((p.1 - b[j].1).abs());
                best = best.min(c.max(go(rest, b, used)));
                used[j] = false;
            }
        }
        best
    }
    go(a, b, &mut vec![false; b.len()])
}

struct Search {
    top: i64,
    target: Labels,
    target_sub: Diagram,
    target_sup: Diagram,
}

impl Search {
    /// Extrema and persistence lower bound, in half-steps.
    fn heuristic(&self, key: u64) -> u64 {
        let s = Labels::from_key(key);
        let (v, t) = (s.as_slice(), self.target.as_slice());
        let ext = |x: &[i64]| (*x.iter().min().unwrap(), *x.iter().max().unwrap());
        let ((al, ah), (bl, bh)) = (ext(v), ext(t));
        let extrema = 2 * (al - bl).abs().max((ah - bh).abs());
        let sub = bottleneck_half(&sublevel_pairs(v), &self.target_sub);
        let sup = bottleneck_half(&superlevel_pairs(v), &self.target_sup);
        extrema.max(sub).max(sup) as u64
    }

    fn neighbours(&self, s: &Labels, out: &mut Vec<(u64, u64)>) {
        out.clear();
        let n = s.n;
        let v = s.as_slice();
        // deaths of an adjacent (max, min) pair
        if n >= 4 {
            for i in 0..n {
                let j = (i + 1) % n;
                let (a, b) = (v[(i + n - 1) % n], v[(j + 1) % n]);
                let (u, w) = (v[i], v[j]);
                let ok = if u > w { a < w && u < b } else { b < u && w < a };
                if ok {
                    let mut t = [0; MAX_STATE_VERTICES];
                    let mut m = 0;
                    for (k, &x) in v.iter().enumerate() {
                        if k != i && k != j {
                            t[m] = x;
                            m += 1;
                        }
                    }
                    out.push((Labels { n: m, v: t }.key(), (u - w).unsigned_abs()));
                }
            }
        }
        // births of one- and two-step pairs; a wider pair costs the same as
        // a narrow one stretched by unit relabels
        if n + 2 <= MAX_STATE_VERTICES {
            for i in 0..n {
                let (a, b) = (v[i], v[(i + 1) % n]);
                let (l, h) = (a.min(b), a.max(b));
                for m in l + 1..h {
                    for mx in m + 1..h.min(m + 3) {
                        // walking from the low endpoint: max first, then min
                        let pair = if a < b { [mx, m] } else { [m, mx] };
                        let mut t = [0; MAX_STATE_VERTICES];
                        t[..=i].copy_from_slice(&v[..=i]);
                        t[i + 1..i + 3].copy_from_slice(&pair);
                        t[i + 3..n + 2].copy_from_slice(&v[i + 1..]);
                        out.push((Labels { n: n + 2, v: t }.key(), (mx - m) as u64));
                    }
                }
            }
        }
        // unit relabels
        let combos = 3usize.pow(n as u32);
        for c in 0..combos {
            let mut k = c;
            let mut t = *s;
            for x in t.v[..n].iter_mut() {
                *x += (k % 3) as i64 - 1;
                k /= 3;
            }
            if t != *s
                && t.as_slice().iter().all(|&x| (0..=self.top).contains(&x))
                && valid(t.as_slice())
            {
                out.push((t.key(), 2));
            }
        }
    }
}

fn to_grid(g: &LabelledReebGraph, step: f64) -> Result<Vec<i64>, DistanceError> {
    g.labels()
        .iter()
        .map(|&x| {
            let q = (x / step).round();
            if (x - q * step).abs() > 1e-9 * step.max(x.abs()) {
                Err(DistanceError::InvalidInput(format!(
                    "label {x} is not on the grid of step {step}"
                )))
            } else {
                Ok(q as i64)
            }
        })
        .collect()
}

/// Cost of a cheapest grid path from `g1` to `g2`. Converges to the editing
/// distance from above as `grid_step → 0`. `max_ops` caps the number of
/// state expansions.
pub fn brute_force_oracle(
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
    grid_step: f64,
    max_ops: usize,
) -> Result<f64, DistanceError> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(DistanceError::InvalidInput(format!("grid step {grid_step}")));
    }
    if g1.len() > MAX_INPUT_VERTICES || g2.len() > MAX_INPUT_VERTICES {
        return Err(DistanceError::InvalidInput(format!(
            "oracle accepts at most {MAX_INPUT_VERTICES} vertices per graph"
        )));
    }
    let (a, b) = (to_grid(g1, grid_step)?, to_grid(g2, grid_step)?);
    // shift so that the search range [min − 1, max + 1] starts at zero
    let floor = a.iter().chain(&b).min().unwrap() - 1;
    let top = a.iter().chain(&b).max().unwrap() + 1 - floor;
    if top > 255 {
        return Err(DistanceError::InvalidInput(format!(
            "label range spans more than 253 grid steps of {grid_step}"
        )));
    }
    let shift = |s: &[i64]| Labels::from_slice(&s.iter().map(|x| x - floor).collect::<Vec<_>>());
    let (start, target) = (shift(&a).key(), shift(&b).key());
    let target_labels = Labels::from_key(target);
    let search = Search {
        top,
        target: target_labels,
        target_sub: sublevel_pairs(target_labels.as_slice()),
        target_sup: superlevel_pairs(target_labels.as_slice()),
    };
    // best known cost and cached heuristic per state
    let mut seen: HashMap<u64, (u64, u64)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let h0 = search.heuristic(start);
    seen.insert(start, (0, h0));
    heap.push((Reverse(h0), 0u64, start));
    let mut ops = 0;
    let mut buf = Vec::new();
    while let Some((_, d, s)) = heap.pop() {
        if seen.get(&s).is_some_and(|&(best, _)| best < d) {
            continue;
        }
        if s == target {
            return Ok(d as f64 * grid_step / 2.0);
        }
        ops += 1;
        if ops > max_ops {
            return Err(DistanceError::BudgetExceeded { max_ops });
        }
        search.neighbours(&Labels::from_key(s), &mut buf);
        for &(t, w) in &buf {
            let nd = d + w;
            let h = match seen.get(&t) {
                Some(&(old, _)) if old <= nd => continue,
                Some(&(_, h)) => h,
                None => search.heuristic(t),
            };
            seen.insert(t, (nd, h));
            heap.push((Reverse(nd + h), nd, t));
        }
    }
    Err(DistanceError::InvalidInput("target unreachable on this grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(l: &[f64]) -> LabelledReebGraph {
        LabelledReebGraph::from_labels(l).unwrap()
    }

    #[test]
    fn integer_bound_matches_float_bound() {
        use crate::pseudodist::sequence_lower_bound;
        let cases: [&[i64]; 5] = [&[0, 6, 2, 10], &[0, 10], &[1, 5, 3, 9, 0, 7], &[4, 8], &[2, 9, 5, 6]];
        for a in cases {
            for b in cases {
                let t = Labels::from_slice(b);
                let s = Search {
                    top: 20,
                    target: t,
                    target_sub: sublevel_pairs(b),
                    target_sup: superlevel_pairs(b),
                };
                let fa: Vec<f64> = a.iter().map(|&x| x as f64).collect();
                let fb: Vec<f64> = b.iter().map(|&x| x as f64).collect();
                let want = sequence_lower_bound(&fa, &fb) * 2.0;
                assert_eq!(s.heuristic(Labels::from_slice(a).key()) as f64, want, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn canonical_is_dihedral() {
        assert_eq!(canonical(&[3, 0, 2, 1]), canonical(&[1, 2, 0, 3]));
        assert_eq!(canonical(&[3, 0, 2, 1]), vec![0, 2, 1, 3]);
    }

    #[test]
    fn equal_graphs_cost_nothing() {
        assert_eq!(brute_force_oracle(&g(&[0.0, 1.0]), &g(&[0.0, 1.0]), 0.01, 10).unwrap(), 0.0);
    }

    #[test]
    fn relabel_instance() {
        let d = brute_force_oracle(&g(&[0.0, 1.0]), &g(&[0.1, 1.2]), 0.01, 1_000_000).unwrap();
        assert!((d - 0.2).abs() <= 0.01, "{d}");
    }

    #[test]
    fn pse1_instance() {
        let d = brute_force_oracle(&g(&[0.0, 0.6, 0.2, 1.0]), &g(&[0.0, 1.0]), 0.01, 1_000_000)
            .unwrap();
        assert!((d - 0.2).abs() <= 0.02, "{d}");
    }

    #[test]
    fn rejects_off_grid_and_large_inputs() {
        assert!(matches!(
            brute_force_oracle(&g(&[0.0, 1.005]), &g(&[0.0, 1.0]), 0.01, 10),
            Err(DistanceError::InvalidInput(_))
        ));
        let big = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        assert!(brute_force_oracle(&big, &g(&[0.0, 1.0]), 0.01, 10).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        assert_eq!(
            brute_force_oracle(&g(&[0.0, 1.0]), &g(&[0.0, 0.6, 0.2, 1.0]), 0.01, 0),
            Err(DistanceError::BudgetExceeded { max_ops: 0 })
        );
    }
}
