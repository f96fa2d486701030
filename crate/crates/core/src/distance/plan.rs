//! Single-round plans: Births of tiny pairs, one Relabel, Deaths of the
//! shrunk pairs, with the cost evaluated in the limit of vanishing pairs.
//!
//! A plan matches some vertices of G1 to vertices of G2 in cyclic order.
//! Unmatched G1 vertices are deleted in adjacent pairs, unmatched G2
//! vertices are inserted in adjacent pairs, and both kinds of pairs are
//! interleaved inside each gap between consecutive matched vertices. The
//! merged cycle H holds every vertex: initially the inserted pairs are tiny,
//! finally the deleted pairs are. A maximal run of tiny pairs between two
//! vertices `lo < hi` must sit on a staircase `lo < t_1 < … < t_r < hi`, which
//! gives the closed-form run cost in [`chain_cost`].

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::circlefn::CriticalIndex;
use crate::edits::{apply_sequence, find_deletable_pairs, Deformation, ElementaryDeformation};
use crate::error::DistanceError;
use crate::parallel::par_map;
use crate::reeb::{LabelledReebGraph, Vertex, VertexId};

/// Matched vertices plus the paired deletions and insertions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    /// `(G1 id, G2 id)` in G1 cyclic order.
    pub matching: Vec<(VertexId, VertexId)>,
    /// Adjacent G1 pairs removed by Deaths.
    pub deletions: Vec<(VertexId, VertexId)>,
    /// Adjacent G2 pairs created by Births.
    pub insertions: Vec<(VertexId, VertexId)>,
    /// True when G2 is traversed against its stored orientation.
    pub reversed: bool,
}

/// One vertex of the merged cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Entry {
    Matched(VertexId, VertexId),
    Deleted(VertexId),
    Inserted(VertexId),
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub cost: f64,
    pub reversed: bool,
    pub merged: Vec<Entry>,
}

impl Solution {
    pub fn plan(&self) -> Plan {
        let mut matching = Vec::new();
        let mut deletions = Vec::new();
        let mut insertions = Vec::new();
        let (mut del, mut ins): (Vec<VertexId>, Vec<VertexId>) = (Vec::new(), Vec::new());
        for e in &self.merged {
            match *e {
                Entry::Matched(a, b) => matching.push((a, b)),
                Entry::Deleted(a) => {
                    del.push(a);
                    if del.len() == 2 {
                        deletions.push((del[0], del[1]));
                        del.clear();
                    }
                }
                Entry::Inserted(b) => {
                    ins.push(b);
                    if ins.len() == 2 {
                        insertions.push((ins[0], ins[1]));
                        ins.clear();
                    }
                }
            }
        }
        Plan {
            matching,
            deletions,
            insertions,
            reversed: self.reversed,
        }
    }
}

/// Minimal bottleneck movement of a run of tiny pairs between endpoints
/// `lo < hi`. Pairs are `(max, min)` labels ordered from the `lo` side.
pub fn chain_cost(pairs: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return f64::INFINITY;
    }
    let mut c: f64 = 0.0;
    let mut prefix_max = f64::NEG_INFINITY;
    for &(mx, mn) in pairs {
        prefix_max = prefix_max.max(mx);
        c = c.max(mx - hi).max(lo - mn).max((prefix_max - mn) / 2.0);
    }
    c
}

/// A run in traversal order between a left and a right endpoint. Every run
/// inside one gap has a left endpoint of the same index as the gap start.
fn run_cost(traversal: &[(f64, f64)], left: f64, right: f64, left_is_min: bool) -> f64 {
    if left_is_min {
        chain_cost(traversal, left, right)
    } else {
        let rev: Vec<(f64, f64)> = traversal.iter().rev().map(|&(a, b)| (b, a)).collect();
        chain_cost(&rev, right, left)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RunKind {
    Delete,
    Insert,
}

/// Data for one gap between matched vertices A and B.
struct Gap {
    a_init: f64,
    a_final: f64,
    b_init: f64,
    b_final: f64,
    a_is_min: bool,
    /// G1 labels of deleted pairs in traversal order.
    del: Vec<(f64, f64)>,
    /// G2 labels of inserted pairs in traversal order.
    ins: Vec<(f64, f64)>,
}

impl Gap {
    /// Cheapest interleaving and its run sequence.
    fn solve(&self) -> (f64, Vec<(RunKind, usize)>) {
        let (p, q) = (self.del.len(), self.ins.len());
        if p == 0 && q == 0 {
            return (0.0, Vec::new());
        }
        // state (i, j, last): i deleted and j inserted pairs placed;
        // last: 0 = none, 1 = delete run, 2 = insert run
        let idx = |i: usize, j: usize, l: usize| (i * (q + 1) + j) * 3 + l;
        let mut best = vec![f64::INFINITY; (p + 1) * (q + 1) * 3];
        let mut from: Vec<Option<(usize, RunKind, usize)>> = vec![None; best.len()];
        best[idx(0, 0, 0)] = 0.0;
        for i in 0..=p {
            for j in 0..=q {
                for last in 0..3 {
                    let cur = best[idx(i, j, last)];
                    if !cur.is_finite() {
                        continue;
                    }
                    if last != 1 {
                        for r in 1..=p - i {
                            let left = if i == 0 && j == 0 {
                                self.a_final
                            } else {
                                self.ins[j - 1].1
                            };
                            let right = if i + r == p && j == q {
                                self.b_final
                            } else if j < q {
                                self.ins[j].0
                            } else {
                                continue;
                            };
                            let c = run_cost(&self.del[i..i + r], left, right, self.a_is_min);
                            let v = cur.max(c);
                            let k = idx(i + r, j, 1);
                            if v < best[k] {
                                best[k] = v;
                                from[k] = Some((idx(i, j, last), RunKind::Delete, r));
                            }
                        }
                    }
                    if last != 2 {
                        for r in 1..=q - j {
                            let left = if i == 0 && j == 0 {
                                self.a_init
                            } else {
                                self.del[i - 1].1
                            };
                            let right = if i == p && j + r == q {
                                self.b_init
                            } else if i < p {
                                self.del[i].0
                            } else {
                                continue;
                            };
                            let c = run_cost(&self.ins[j..j + r], left, right, self.a_is_min);
                            let v = cur.max(c);
                            let k = idx(i, j + r, 2);
                            if v < best[k] {
                                best[k] = v;
                                from[k] = Some((idx(i, j, last), RunKind::Insert, r));
                            }
                        }
                    }
                }
            }
        }
        let end = [idx(p, q, 1), idx(p, q, 2)]
            .into_iter()
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        let cost = best[end];
        let mut runs = Vec::new();
        let mut k = end;
        while let Some((prev, kind, r)) = from[k] {
            runs.push((kind, r));
            k = prev;
        }
        runs.reverse();
        (cost, runs)
    }
}

/// One graph seen in a fixed orientation, indexed by unrolled position.
struct Side<'a> {
    g: &'a LabelledReebGraph,
    reversed: bool,
}

impl Side<'_> {
    fn n(&self) -> usize {
        self.g.len()
    }

    fn at(&self, pos: usize) -> &Vertex {
        let n = self.n();
        let k = pos % n;
        if self.reversed {
            &self.g.vertices()[(n - k) % n]
        } else {
            &self.g.vertices()[k]
        }
    }
}

/// Limits on the plan search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Graphs with at most this many vertices are searched exhaustively.
    pub exhaustive_max_vertices: usize,
    /// Beyond that, at most this many deleted (inserted) pairs per gap and
    /// only starts at the extrema of G1 are tried.
    pub max_gap_pairs: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            exhaustive_max_vertices: 12,
            max_gap_pairs: 3,
        }
    }
}

struct Instance<'a> {
    s1: Side<'a>,
    s2: Side<'a>,
    cap1: usize,
    cap2: usize,
    table: Vec<f64>,
}

impl<'a> Instance<'a> {
    fn new(g1: &'a LabelledReebGraph, g2: &'a LabelledReebGraph, reversed: bool, cap: usize) -> Self {
        let s1 = Side { g: g1, reversed: false };
        let s2 = Side { g: g2, reversed };
        let cap1 = cap.min((g1.len() - 2) / 2);
        let cap2 = cap.min((g2.len() - 2) / 2);
        let mut inst = Instance {
            s1,
            s2,
            cap1,
            cap2,
            table: Vec::new(),
        };
        let (n1, n2) = (g1.len(), g2.len());
        let mut table = Vec::with_capacity(n1 * (cap1 + 1) * n2 * (cap2 + 1));
        for i in 0..n1 {
            for p in 0..=cap1 {
                for j in 0..n2 {
                    for q in 0..=cap2 {
                        table.push(inst.gap(i, p, j, q).solve().0);
                    }
                }
            }
        }
        inst.table = table;
        inst
    }

    fn gap_cost(&self, i: usize, p: usize, j: usize, q: usize) -> f64 {
        let (n1, n2) = (self.s1.n(), self.s2.n());
        let k = (((i % n1) * (self.cap1 + 1) + p) * n2 + j % n2) * (self.cap2 + 1) + q;
        self.table[k]
    }

    /// Gap after matched positions `i` (G1) and `j` (G2) with `p` deleted
    /// and `q` inserted pairs.
    fn gap(&self, i: usize, p: usize, j: usize, q: usize) -> Gap {
        let (s1, s2) = (&self.s1, &self.s2);
        let pairs = |s: &Side, start: usize, k: usize| -> Vec<(f64, f64)> {
            (0..k)
                .map(|t| (s.at(start + 1 + 2 * t).label, s.at(start + 2 + 2 * t).label))
                .collect()
        };
        Gap {
            a_init: s1.at(i).label,
            a_final: s2.at(j).label,
            b_init: s1.at(i + 2 * p + 1).label,
            b_final: s2.at(j + 2 * q + 1).label,
            a_is_min: s1.at(i).index == CriticalIndex::Min,
            del: pairs(s1, i, p),
            ins: pairs(s2, j, q),
        }
    }

    fn moved(&self, i: usize, j: usize) -> f64 {
        (self.s1.at(i).label - self.s2.at(j).label).abs()
    }

    /// Bottleneck DP over matchings starting with `(i0, j0)`. Returns the
    /// cost and, when `trace` is set, the matched offsets in order.
    fn run(&self, i0: usize, j0: usize, bound: f64, trace: bool) -> (f64, Vec<(usize, usize)>) {
        let (n1, n2) = (self.s1.n(), self.s2.n());
        let w = n2 + 1;
        let mut dp = vec![f64::INFINITY; (n1 + 1) * w];
        let mut parent = vec![usize::MAX; if trace { dp.len() } else { 0 }];
        dp[0] = self.moved(i0, j0);
        if dp[0] > bound {
            return (f64::INFINITY, Vec::new());
        }
        for di in 0..n1 {
            for dj in 0..n2 {
                let cur = dp[di * w + dj];
                if !(cur <= bound) {
                    continue;
                }
                for p in 0..=self.cap1 {
                    let di2 = di + 2 * p + 1;
                    if di2 > n1 {
                        break;
                    }
                    for q in 0..=self.cap2 {
                        let dj2 = dj + 2 * q + 1;
                        if dj2 > n2 {
                            break;
                        }
                        if (di2 == n1) != (dj2 == n2) {
                            continue;
                        }
                        let mv = if di2 == n1 {
                            0.0
                        } else {
                            self.moved(i0 + di2, j0 + dj2)
                        };
                        let v = cur.max(mv).max(self.gap_cost(i0 + di, p, j0 + dj, q));
                        let k = di2 * w + dj2;
                        if v < dp[k] {
                            dp[k] = v;
                            if trace {
                                parent[k] = di * w + dj;
                            }
                        }
                    }
                }
            }
        }
        let end = n1 * w + n2;
        let mut path = Vec::new();
        if trace && dp[end].is_finite() {
            let mut k = end;
            while k != 0 {
                k = parent[k];
                path.push((k / w, k % w));
            }
            path.reverse();
        }
        (dp[end], path)
    }

    /// Merged cycle for a matched sequence of offsets.
    fn merged(&self, i0: usize, j0: usize, path: &[(usize, usize)]) -> Vec<Entry> {
        let (n1, n2) = (self.s1.n(), self.s2.n());
        let mut out = Vec::new();
        for (k, &(di, dj)) in path.iter().enumerate() {
            let (ni, nj) = path.get(k + 1).copied().unwrap_or((n1, n2));
            let (i, j) = (i0 + di, j0 + dj);
            out.push(Entry::Matched(self.s1.at(i).id, self.s2.at(j).id));
            let (p, q) = ((ni - di - 1) / 2, (nj - dj - 1) / 2);
            let (_, runs) = self.gap(i, p, j, q).solve();
            let (mut a, mut b) = (0, 0);
            for (kind, r) in runs {
                for _ in 0..2 * r {
                    match kind {
                        RunKind::Delete => {
                            a += 1;
                            out.push(Entry::Deleted(self.s1.at(i + a).id));
                        }
                        RunKind::Insert => {
                            b += 1;
                            out.push(Entry::Inserted(self.s2.at(j + b).id));
                        }
                    }
                }
            }
        }
        out
    }
}

fn argext(g: &LabelledReebGraph, max: bool) -> usize {
    let vs = g.vertices();
    (0..vs.len())
        .max_by(|&a, &b| {
            let o = vs[a].label.total_cmp(&vs[b].label);
            if max {
                o
            } else {
                o.reverse()
            }
        })
        .unwrap()
}

/// Cheapest single-round plan with at least two matched vertices.
pub(crate) fn best_single_round(
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
    limits: &SearchLimits,
) -> Option<Solution> {
    let exhaustive = g1.len() <= limits.exhaustive_max_vertices
        && g2.len() <= limits.exhaustive_max_vertices;
    let cap = if exhaustive {
        usize::MAX
    } else {
        limits.max_gap_pairs
    };
    let shared = AtomicU64::new(f64::INFINITY.to_bits());
    let mut best: Option<(f64, bool, usize, usize)> = None;
    let mut instances = Vec::new();
    for reversed in [false, true] {
        let inst = Instance::new(g1, g2, reversed, cap);
        let starts_1: Vec<usize> = if exhaustive {
            (0..g1.len()).collect()
        } else {
            vec![argext(g1, false), argext(g1, true)]
        };
        let starts: Vec<(usize, usize)> = starts_1
            .iter()
            .flat_map(|&i| {
                let inst = &inst;
                (0..g2.len())
                    .filter(move |&j| inst.s1.at(i).index == inst.s2.at(j).index)
                    .map(move |j| (i, j))
            })
            .collect();
        let costs = par_map(&starts, |&(i0, j0)| {
            let bound = f64::from_bits(shared.load(Ordering::Relaxed));
            let (c, _) = inst.run(i0, j0, bound, false);
            if c.is_finite() {
                shared.fetch_min(c.to_bits(), Ordering::Relaxed);
            }
            c
        });
        for (&(i0, j0), c) in starts.iter().zip(costs) {
            if c.is_finite() && best.is_none_or(|b| c < b.0) {
                best = Some((c, reversed, i0, j0));
            }
        }
        instances.push(inst);
    }
    let (cost, reversed, i0, j0) = best?;
    let inst = &instances[reversed as usize];
    let (c, path) = inst.run(i0, j0, f64::INFINITY, true);
    debug_assert_eq!(c, cost);
    Some(Solution {
        cost,
        reversed,
        merged: inst.merged(i0, j0, &path),
    })
}

/// Limit cost of an explicit plan: the bottleneck over matched moves and the
/// cheapest interleaving inside every gap.
pub fn plan_cost(
    plan: &Plan,
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
) -> Result<f64, DistanceError> {
    let bad = |m: &str| DistanceError::InvalidPlan(m.to_string());
    let m = plan.matching.len();
    if m < 2 {
        return Err(bad("at least two matched vertices are required"));
    }
    let s1 = Side { g: g1, reversed: false };
    let s2 = Side {
        g: g2,
        reversed: plan.reversed,
    };
    let pos = |s: &Side, id: VertexId| -> Result<usize, DistanceError> {
        let i = s.g.position(id)?;
        let n = s.n();
        Ok(if s.reversed { (n - i) % n } else { i })
    };
    let p1: Vec<usize> = plan
        .matching
        .iter()
        .map(|&(a, _)| pos(&s1, a))
        .collect::<Result<_, _>>()?;
    let p2: Vec<usize> = plan
        .matching
        .iter()
        .map(|&(_, b)| pos(&s2, b))
        .collect::<Result<_, _>>()?;
    let inst = Instance {
        s1,
        s2,
        cap1: 0,
        cap2: 0,
        table: Vec::new(),
    };
    let (n1, n2) = (g1.len(), g2.len());
    let forward = |v: &[usize], n: usize, k: usize| (v[(k + 1) % m] + n - v[k]) % n;
    let (span1, span2): (usize, usize) = (0..m)
        .map(|k| (forward(&p1, n1, k), forward(&p2, n2, k)))
        .fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
    if span1 != n1 || span2 != n2 {
        return Err(bad("matching does not respect cyclic order"));
    }
    let mut deleted: Vec<(VertexId, VertexId)> = Vec::new();
    let mut inserted: Vec<(VertexId, VertexId)> = Vec::new();
    let mut cost: f64 = 0.0;
    for k in 0..m {
        let (i, j) = (p1[k], p2[k]);
        if inst.s1.at(i).index != inst.s2.at(j).index {
            return Err(bad("matched vertices differ in index"));
        }
        cost = cost.max(inst.moved(i, j));
        let (l1, l2) = (forward(&p1, n1, k), forward(&p2, n2, k));
        if l1 % 2 == 0 || l2 % 2 == 0 {
            return Err(bad("consecutive matched vertices must alternate"));
        }
        let gap = inst.gap(i, (l1 - 1) / 2, j, (l2 - 1) / 2);
        for t in 0..(l1 - 1) / 2 {
            deleted.push((inst.s1.at(i + 1 + 2 * t).id, inst.s1.at(i + 2 + 2 * t).id));
        }
        for t in 0..(l2 - 1) / 2 {
            inserted.push((inst.s2.at(j + 1 + 2 * t).id, inst.s2.at(j + 2 + 2 * t).id));
        }
        cost = cost.max(gap.solve().0);
    }
    let same = |a: &[(VertexId, VertexId)], b: &[(VertexId, VertexId)]| {
        let norm = |v: &[(VertexId, VertexId)]| {
            let mut v: Vec<(VertexId, VertexId)> =
                v.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
            v.sort();
            v
        };
        norm(a) == norm(b)
    };
    if !same(&deleted, &plan.deletions) {
        return Err(bad("deletions are not the adjacent pairs of the gaps"));
    }
    if !same(&inserted, &plan.insertions) {
        return Err(bad("insertions are not the adjacent pairs of the gaps"));
    }
    Ok(cost)
}

/// Labels for one run of tiny pairs on a strict staircase within budget `c`.
/// `traversal` holds the entries' large labels in cyclic order.
fn place_run(
    traversal: &[(f64, f64)],
    left: f64,
    right: f64,
    left_is_min: bool,
    c: f64,
    eps: f64,
) -> Option<Vec<(f64, f64)>> {
    let (lo, hi) = if left_is_min { (left, right) } else { (right, left) };
    let order: Vec<usize> = if left_is_min {
        (0..traversal.len()).collect()
    } else {
        (0..traversal.len()).rev().collect()
    };
    let mut out = vec![(0.0, 0.0); traversal.len()];
    let mut floor = lo + 2.0 * eps;
    for k in order {
        let (a, b) = traversal[k];
        let (mx, mn) = if left_is_min { (a, b) } else { (b, a) };
        let t = floor.max(mx - c);
        if t > mn + c || t + 2.0 * eps >= hi {
            return None;
        }
        floor = t + 3.0 * eps;
        // tiny labels in the same (first, second) order as the traversal
        out[k] = if left_is_min {
            (t + eps, t - eps)
        } else {
            (t - eps, t + eps)
        };
    }
    Some(out)
}

/// Builds a concrete script for a plan solution with cost at most
/// `cost + kappa` plus the tiny Birth/Death costs.
fn witness_attempt(
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
    sol: &Solution,
    kappa: f64,
) -> Option<Deformation> {
    let h = &sol.merged;
    let n = h.len();
    let c = sol.cost + kappa;
    let pairs = h.iter().filter(|e| !matches!(e, Entry::Matched(..))).count() / 2;
    let eps = kappa / (10.0 * (pairs as f64 + 1.0));
    let l1 = |id: VertexId| g1.vertex(id).copied().ok();
    let l2 = |id: VertexId| g2.vertex(id).copied().ok();
    // large labels at the start (G1) and end (G2) of the Relabel
    let mut init = vec![f64::NAN; n];
    let mut fin = vec![f64::NAN; n];
    let mut index = vec![CriticalIndex::Min; n];
    for (k, e) in h.iter().enumerate() {
        match *e {
            Entry::Matched(a, b) => {
                init[k] = l1(a)?.label;
                fin[k] = l2(b)?.label;
                index[k] = l1(a)?.index;
            }
            Entry::Deleted(a) => {
                init[k] = l1(a)?.label;
                index[k] = l1(a)?.index;
            }
            Entry::Inserted(b) => {
                fin[k] = l2(b)?.label;
                index[k] = l2(b)?.index;
            }
        }
    }
    // tiny levels: inserted runs against initial labels, deleted runs
    // against final labels
    for kind in [RunKind::Insert, RunKind::Delete] {
        let is_kind = |e: &Entry| match kind {
            RunKind::Insert => matches!(e, Entry::Inserted(_)),
            RunKind::Delete => matches!(e, Entry::Deleted(_)),
        };
        let anchor = (0..n).find(|&k| !is_kind(&h[k]))?;
        let mut k = 0;
        while k < n {
            let start = (anchor + k) % n;
            if !is_kind(&h[start]) {
                k += 1;
                continue;
            }
            let mut len = 0;
            while is_kind(&h[(start + len) % n]) {
                len += 1;
            }
            let left = (start + n - 1) % n;
            let right = (start + len) % n;
            let (known, target) = match kind {
                RunKind::Insert => (&init, &fin),
                RunKind::Delete => (&fin, &init),
            };
            let trav: Vec<(f64, f64)> = (0..len / 2)
                .map(|t| {
                    (
                        target[(start + 2 * t) % n],
                        target[(start + 2 * t + 1) % n],
                    )
                })
                .collect();
            let left_is_min = index[left] == CriticalIndex::Min;
            let placed = place_run(&trav, known[left], known[right], left_is_min, c, eps)?;
            let slot = match kind {
                RunKind::Insert => &mut init,
                RunKind::Delete => &mut fin,
            };
            for (t, (x, y)) in placed.into_iter().enumerate() {
                slot[(start + 2 * t) % n] = x;
                slot[(start + 2 * t + 1) % n] = y;
            }
            k += len;
        }
    }
    // the merged cycle before the Relabel, with temporary ids for inserted
    // vertices
    let temp_base = (g1.max_id().0.max(g2.max_id().0) + 1) << 20;
    let temp = |k: usize| VertexId(temp_base + k as u64);
    let ids: Vec<VertexId> = h
        .iter()
        .enumerate()
        .map(|(k, e)| match *e {
            Entry::Matched(a, _) | Entry::Deleted(a) => a,
            Entry::Inserted(_) => temp(k),
        })
        .collect();
    let verts = |labels: &[f64]| -> Vec<Vertex> {
        (0..n)
            .map(|k| Vertex {
                id: ids[k],
                label: labels[k],
                index: index[k],
            })
            .collect()
    };
    let h_init = LabelledReebGraph::new(verts(&init)).ok()?;
    let is_temp = |id: VertexId| id.0 >= temp_base;
    // deaths of the tiny inserted pairs reduce the merged cycle to G1; the
    // Births are their inverses in reverse order
    let mut cur = h_init;
    let mut removals = Vec::new();
    while cur.len() > g1.len() {
        let d = find_deletable_pairs(&cur).into_iter().find(|d| match d {
            ElementaryDeformation::Death { pair: (a, b) } => is_temp(*a) && is_temp(*b),
            _ => false,
        })?;
        let next = d.apply(&cur).ok()?;
        removals.push((d, std::mem::replace(&mut cur, next)));
    }
    let mut steps = Vec::new();
    let mut real = g1.clone();
    let mut rename: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let map = |rename: &BTreeMap<VertexId, VertexId>, id: VertexId| *rename.get(&id).unwrap_or(&id);
    for (d, before) in removals.iter().rev() {
        let ElementaryDeformation::Birth { edge: (v1, v2), labels } = d.invert(before).ok()? else {
            return None;
        };
        let ElementaryDeformation::Death { pair: (u1, u2) } = d else {
            return None;
        };
        let b = ElementaryDeformation::Birth {
            edge: (map(&rename, v1), map(&rename, v2)),
            labels,
        };
        let next_id = real.max_id().0;
        real = b.apply(&real).ok()?;
        rename.insert(*u1, VertexId(next_id + 1));
        rename.insert(*u2, VertexId(next_id + 2));
        steps.push(b);
    }
    let relabel: BTreeMap<VertexId, f64> = (0..n).map(|k| (map(&rename, ids[k]), fin[k])).collect();
    let r = ElementaryDeformation::Relabel { map: relabel };
    real = r.apply(&real).ok()?;
    steps.push(r);
    let deleted: Vec<VertexId> = h
        .iter()
        .filter_map(|e| match *e {
            Entry::Deleted(a) => Some(a),
            _ => None,
        })
        .collect();
    while real.len() > g2.len() {
        let d = find_deletable_pairs(&real).into_iter().find(|d| match d {
            ElementaryDeformation::Death { pair: (a, b) } => {
                deleted.contains(a) && deleted.contains(b)
            }
            _ => false,
        })?;
        real = d.apply(&real).ok()?;
        steps.push(d);
    }
    let script = Deformation::new(steps);
    let (out, _) = apply_sequence(&script.steps, g1).ok()?;
    out.is_isomorphic(g2, 0.0).then_some(script)
}

/// Concrete script for a solution, trying progressively larger slack.
/// Returns the script and its total cost.
pub(crate) fn witness(
    g1: &LabelledReebGraph,
    g2: &LabelledReebGraph,
    sol: &Solution,
) -> Option<(Deformation, f64)> {
    let scale = g1
        .vertices()
        .iter()
        .chain(g2.vertices())
        .map(|v| v.label.abs())
        .fold(1.0, f64::max);
    let mut kappa = 1e-9 * scale;
    while kappa <= 1e-3 * scale {
        if let Some(s) = witness_attempt(g1, g2, sol, kappa) {
            let (_, cost) = apply_sequence(&s.steps, g1).ok()?;
            return Some((s, cost));
        }
        kappa *= 10.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(l: &[f64]) -> LabelledReebGraph {
        LabelledReebGraph::from_labels(l).unwrap()
    }

    #[test]
    fn chain_cost_single_pair() {
        assert!((chain_cost(&[(0.6, 0.2)], 0.0, 1.0) - 0.2).abs() < 1e-15);
        // endpoint forces the level up
        assert!((chain_cost(&[(0.6, 0.2)], 0.5, 1.0) - 0.3).abs() < 1e-15);
        assert_eq!(chain_cost(&[(0.6, 0.2)], 1.0, 0.5), f64::INFINITY);
    }

    #[test]
    fn chain_cost_matches_grid_search_oracle() {
        // oracle: brute-force staircase levels on a fine grid
        let pairs = [(0.5, 0.1), (0.52, 0.12), (0.3, 0.25)];
        let (lo, hi) = (0.0, 1.0);
        let steps = 200;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in a..=steps {
                for c in b..=steps {
                    let t = [a, b, c].map(|x| lo + (hi - lo) * x as f64 / steps as f64);
                    let cost = pairs
                        .iter()
                        .zip(t)
                        .map(|(&(mx, mn), t)| (mx - t).abs().max((t - mn).abs()))
                        .fold(0.0, f64::max);
                    best = best.min(cost);
                }
            }
        }
        let c = chain_cost(&pairs, lo, hi);
        assert!(c <= best + 1e-12 && best - c <= 0.005, "{c} vs {best}");
    }

    #[test]
    fn pse1_plan_costs_half_gap() {
        let g1 = g(&[0.0, 0.6, 0.2, 1.0]);
        let g2 = g(&[0.0, 1.0]);
        let sol = best_single_round(&g1, &g2, &SearchLimits::default()).unwrap();
        assert!((sol.cost - 0.2).abs() < 1e-12);
        let plan = sol.plan();
        assert_eq!(plan.matching.len(), 2);
        assert_eq!(plan.deletions.len(), 1);
        assert!((plan_cost(&plan, &g1, &g2).unwrap() - 0.2).abs() < 1e-12);
        let (script, c) = witness(&g1, &g2, &sol).unwrap();
        assert!((0.2..0.2 + 1e-6).contains(&c), "{c}");
        assert!(apply_sequence(&script.steps, &g1).unwrap().0.is_isomorphic(&g2, 0.0));
    }

    #[test]
    fn pse2_merged_relabel_beats_two_deaths() {
        let g1 = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        let g2 = g(&[0.0, 1.0]);
        let sol = best_single_round(&g1, &g2, &SearchLimits::default()).unwrap();
        assert!((sol.cost - 0.2).abs() < 1e-12, "{}", sol.cost);
        let (script, c) = witness(&g1, &g2, &sol).unwrap();
        assert!(c < 0.2 + 1e-6, "{c}");
        assert_eq!(script.steps.iter().filter(|s| s.kind() == "death").count(), 2);
    }

    #[test]
    fn identity_and_births() {
        let g1 = g(&[0.0, 0.6, 0.2, 1.0]);
        let sol = best_single_round(&g1, &g1, &SearchLimits::default()).unwrap();
        assert_eq!(sol.cost, 0.0);
        let g2 = g(&[0.0, 1.0]);
        let back = best_single_round(&g2, &g1, &SearchLimits::default()).unwrap();
        assert!((back.cost - 0.2).abs() < 1e-12);
        let (script, c) = witness(&g2, &g1, &back).unwrap();
        assert!(c < 0.2 + 1e-6);
        assert_eq!(script.steps[0].kind(), "birth");
    }

    #[test]
    fn relabel_only_plan() {
        let g1 = g(&[0.0, 1.0]);
        let g2 = g(&[0.1, 1.2]);
        let sol = best_single_round(&g1, &g2, &SearchLimits::default()).unwrap();
        assert!((sol.cost - 0.2).abs() < 1e-12);
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let g1 = g(&[0.0, 0.6, 0.2, 1.0]);
        let g2 = g(&[0.0, 1.0]);
        let id = VertexId;
        let p = Plan {
            matching: vec![(id(0), id(0))],
            deletions: vec![],
            insertions: vec![],
            reversed: false,
        };
        assert!(plan_cost(&p, &g1, &g2).is_err());
        let p = Plan {
            matching: vec![(id(0), id(1)), (id(1), id(0))],
            deletions: vec![(id(2), id(3))],
            insertions: vec![],
            reversed: false,
        };
        assert!(matches!(plan_cost(&p, &g1, &g2), Err(DistanceError::InvalidPlan(_))));
        let p = Plan {
            matching: vec![(id(0), id(0)), (id(3), id(1))],
            deletions: vec![(id(2), id(1))],
            insertions: vec![],
            reversed: false,
        };
        assert!((plan_cost(&p, &g1, &g2).unwrap() - 0.2).abs() < 1e-12);
    }
}
