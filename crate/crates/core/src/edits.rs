//! Elementary deformations of labelled Reeb graphs: Birth, Death and
//! Relabel, with their costs, inverses and the greedy connecting sequence.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::circlefn::CriticalIndex;
use crate::error::EditError;
use crate::reeb::{LabelledReebGraph, Vertex, VertexId};

/// One elementary deformation. Births take the fresh ids `max_id + 1`
/// (the new Max) and `max_id + 2` (the new Min).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ElementaryDeformation {
    /// Inserts a Max `u1` next to `edge.0` and a Min `u2` next to `edge.1`.
    /// `labels` is `(max, min)`.
    Birth {
        edge: (VertexId, VertexId),
        labels: (f64, f64),
    },
    /// Removes the adjacent pair `(Max, Min)`.
    Death { pair: (VertexId, VertexId) },
    /// Assigns a new label to every vertex.
    Relabel { map: BTreeMap<VertexId, f64> },
}

/// An ordered list of elementary deformations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub steps: Vec<ElementaryDeformation>,
}

fn invalid(msg: impl Into<String>) -> EditError {
    EditError::InvalidDeformation(msg.into())
}

impl ElementaryDeformation {
    pub fn birth(v1: VertexId, v2: VertexId, max_label: f64, min_label: f64) -> Self {
        Self::Birth {
            edge: (v1, v2),
            labels: (max_label, min_label),
        }
    }

    pub fn death(u1: VertexId, u2: VertexId) -> Self {
        Self::Death { pair: (u1, u2) }
    }

    /// Relabel that keeps every label except those given.
    pub fn relabel_partial(g: &LabelledReebGraph, changes: &[(VertexId, f64)]) -> Self {
        let mut map: BTreeMap<VertexId, f64> =
            g.vertices().iter().map(|v| (v.id, v.label)).collect();
        for &(id, l) in changes {
            map.insert(id, l);
        }
        Self::Relabel { map }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Birth { .. } => "birth",
            Self::Death { .. } => "death",
            Self::Relabel { .. } => "relabel",
        }
    }

    /// Checks validity on `g` and returns the cost.
    pub fn cost(&self, g: &LabelledReebGraph) -> Result<f64, EditError> {
        self.check(g).map(|c| c.cost)
    }

    pub fn apply(&self, g: &LabelledReebGraph) -> Result<LabelledReebGraph, EditError> {
        self.check(g).map(|c| c.result)
    }

    /// Applies the step and returns the result together with its cost.
    pub fn apply_with_cost(
        &self,
        g: &LabelledReebGraph,
    ) -> Result<(LabelledReebGraph, f64), EditError> {
        self.check(g).map(|c| (c.result, c.cost))
    }

    /// The deformation undoing `self`, valid on `self.apply(g_before)`.
    pub fn invert(&self, g_before: &LabelledReebGraph) -> Result<Self, EditError> {
        let after = self.apply(g_before)?;
        Ok(match self {
            Self::Birth { .. } => {
                let next = g_before.max_id().0;
                Self::death(VertexId(next + 1), VertexId(next + 2))
            }
            Self::Death { pair: (u1, u2) } => {
                let (v1, v2) = death_outer(g_before, *u1, *u2)?;
                let l1 = g_before.vertex(*u1)?.label;
                let l2 = g_before.vertex(*u2)?.label;
                // v1 < v2 in label; the Max u1 sits next to v1
                Self::birth(v1, v2, l1, l2)
            }
            Self::Relabel { .. } => Self::Relabel {
                map: g_before
                    .vertices()
                    .iter()
                    .filter(|v| after.position(v.id).is_ok())
                    .map(|v| (v.id, v.label))
                    .collect(),
            },
        })
    }

    fn check(&self, g: &LabelledReebGraph) -> Result<Checked, EditError> {
        match self {
            Self::Birth {
                edge: (v1, v2),
                labels: (lmax, lmin),
            } => check_birth(g, *v1, *v2, *lmax, *lmin),
            Self::Death { pair: (u1, u2) } => check_death(g, *u1, *u2),
            Self::Relabel { map } => check_relabel(g, map),
        }
    }
}

struct Checked {
    result: LabelledReebGraph,
    cost: f64,
}

fn check_birth(
    g: &LabelledReebGraph,
    v1: VertexId,
    v2: VertexId,
    lmax: f64,
    lmin: f64,
) -> Result<Checked, EditError> {
    let i1 = g.position(v1)?;
    let i2 = g.position(v2)?;
    if !lmax.is_finite() || !lmin.is_finite() {
        return Err(invalid("birth labels must be finite"));
    }
    let n = g.len();
    let a = g.vertices()[i1];
    let b = g.vertices()[i2];
    if !(a.label < lmin && lmin < lmax && lmax < b.label) {
        return Err(invalid(format!(
            "birth requires label(v1) < min < max < label(v2), got {} < {} < {} < {}",
            a.label, lmin, lmax, b.label
        )));
    }
    if g.vertices().iter().any(|v| v.label == lmin || v.label == lmax) {
        return Err(invalid("birth labels must differ from existing labels"));
    }
    let id = g.max_id().0;
    let u1 = Vertex {
        id: VertexId(id + 1),
        label: lmax,
        index: CriticalIndex::Max,
    };
    let u2 = Vertex {
        id: VertexId(id + 2),
        label: lmin,
        index: CriticalIndex::Min,
    };
    let mut vs = g.vertices().to_vec();
    if (i1 + 1) % n == i2 {
        vs.splice(i1 + 1..i1 + 1, [u1, u2]);
    } else if (i2 + 1) % n == i1 {
        vs.splice(i2 + 1..i2 + 1, [u2, u1]);
    } else {
        return Err(invalid(format!("birth edge ({v1}, {v2}) is not an edge")));
    }
    Ok(Checked {
        result: LabelledReebGraph::from_valid(vs),
        cost: (lmax - lmin) / 2.0,
    })
}

/// Outer neighbours `(v1, v2)` of an adjacent Max/Min pair `(u1, u2)`.
fn death_outer(
    g: &LabelledReebGraph,
    u1: VertexId,
    u2: VertexId,
) -> Result<(VertexId, VertexId), EditError> {
    let a = *g.vertex(u1)?;
    let b = *g.vertex(u2)?;
    if a.index != CriticalIndex::Max || b.index != CriticalIndex::Min {
        return Err(invalid(format!(
            "death pair must be (Max, Min), got ({}, {})",
            a.index, b.index
        )));
    }
    if g.len() < 4 {
        return Err(EditError::DeathOnTwoVertexGraph);
    }
    let (p1, n1) = g.neighbours(u1)?;
    let v1 = if p1.id == u2 {
        n1.id
    } else if n1.id == u2 {
        p1.id
    } else {
        return Err(invalid(format!("death pair ({u1}, {u2}) is not adjacent")));
    };
    let (p2, n2) = g.neighbours(u2)?;
    let v2 = if p2.id == u1 { n2.id } else { p2.id };
    Ok((v1, v2))
}

fn check_death(g: &LabelledReebGraph, u1: VertexId, u2: VertexId) -> Result<Checked, EditError> {
    let (v1, v2) = death_outer(g, u1, u2)?;
    let l = |id| g.vertex(id).map(|v| v.label);
    let (lv1, lu2, lu1, lv2) = (l(v1)?, l(u2)?, l(u1)?, l(v2)?);
    if !(lv1 < lu2 && lu2 < lu1 && lu1 < lv2) {
        return Err(invalid(format!(
            "death requires label(v1) < label(u2) < label(u1) < label(v2), got {lv1} < {lu2} < {lu1} < {lv2}"
        )));
    }
    let vs: Vec<Vertex> = g
        .vertices()
        .iter()
        .filter(|v| v.id != u1 && v.id != u2)
        .copied()
        .collect();
    Ok(Checked {
        result: LabelledReebGraph::from_valid(vs),
        cost: (lu1 - lu2) / 2.0,
    })
}

fn check_relabel(g: &LabelledReebGraph, map: &BTreeMap<VertexId, f64>) -> Result<Checked, EditError> {
    if map.len() != g.len() {
        for id in map.keys() {
            g.position(*id)?;
        }
        return Err(invalid(format!(
            "relabel must assign every vertex ({} of {} given)",
            map.len(),
            g.len()
        )));
    }
    let mut cost: f64 = 0.0;
    let mut vs = Vec::with_capacity(g.len());
    for v in g.vertices() {
        let l = *map.get(&v.id).ok_or(EditError::UnknownVertexId(v.id))?;
        cost = cost.max((l - v.label).abs());
        vs.push(Vertex { label: l, ..*v });
    }
    let result = LabelledReebGraph::new(vs)?;
    Ok(Checked { result, cost })
}

impl Deformation {
    pub fn new(steps: Vec<ElementaryDeformation>) -> Self {
        Deformation { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays all steps, returning the final graph and the summed cost.
    pub fn apply(&self, g: &LabelledReebGraph) -> Result<(LabelledReebGraph, f64), EditError> {
        apply_sequence(&self.steps, g)
    }
}

pub fn apply_sequence(
    steps: &[ElementaryDeformation],
    g: &LabelledReebGraph,
) -> Result<(LabelledReebGraph, f64), EditError> {
    let mut cur = g.clone();
    let mut total = 0.0;
    for (k, op) in steps.iter().enumerate() {
        let (next, c) = op.apply_with_cost(&cur).map_err(|e| EditError::AtStep {
            step: k,
            source: Box::new(e),
        })?;
        cur = next;
        total += c;
    }
    Ok((cur, total))
}

/// Every valid Death on `g`. Nonempty whenever `g` has at least four vertices.
pub fn find_deletable_pairs(g: &LabelledReebGraph) -> Vec<ElementaryDeformation> {
    if g.len() < 4 {
        return Vec::new();
    }
    let n = g.len();
    let vs = g.vertices();
    let mut out = Vec::new();
    for i in 0..n {
        let u1 = vs[i];
        if u1.index != CriticalIndex::Max {
            continue;
        }
        for (u2, v1, v2) in [
            (vs[(i + 1) % n], vs[(i + n - 1) % n], vs[(i + 2) % n]),
            (vs[(i + n - 1) % n], vs[(i + 1) % n], vs[(i + n - 2) % n]),
        ] {
            if v1.label < u2.label && u1.label < v2.label {
                out.push(ElementaryDeformation::death(u1.id, u2.id));
            }
        }
    }
    out
}

fn half_gap(g: &LabelledReebGraph, op: &ElementaryDeformation) -> f64 {
    match op {
        ElementaryDeformation::Death { pair: (a, b) } => {
            (g.vertex(*a).map(|v| v.label).unwrap_or(0.0)
                - g.vertex(*b).map(|v| v.label).unwrap_or(0.0))
                / 2.0
        }
        _ => f64::INFINITY,
    }
}

/// Greedily deletes the cheapest pair until two vertices remain.
/// Returns the Deaths and the graph before each of them.
pub fn greedy_reduction(
    g: &LabelledReebGraph,
) -> (Vec<ElementaryDeformation>, Vec<LabelledReebGraph>) {
    let mut cur = g.clone();
    let mut deaths = Vec::new();
    let mut before = Vec::new();
    while cur.len() > 2 {
        let best = find_deletable_pairs(&cur)
            .into_iter()
            .min_by(|a, b| half_gap(&cur, a).total_cmp(&half_gap(&cur, b)))
            .expect("graphs with four or more vertices have a deletable pair");
        let next = best.apply(&cur).expect("deletable pair is valid");
        before.push(std::mem::replace(&mut cur, next));
        deaths.push(best);
    }
    (deaths, before)
}

/// Deaths reducing `g1` to two vertices, one Relabel, then Births rebuilding
/// `g2`. The result is always valid and ends isomorphic to `g2`.
pub fn connect_canonical(g1: &LabelledReebGraph, g2: &LabelledReebGraph) -> Deformation {
    let (mut steps, before1) = greedy_reduction(g1);
    let core1 = match steps.last() {
        Some(last) => last.apply(before1.last().unwrap()).unwrap(),
        None => g1.clone(),
    };
    let (deaths2, before2) = greedy_reduction(g2);
    let core2 = match deaths2.last() {
        Some(last) => last.apply(before2.last().unwrap()).unwrap(),
        None => g2.clone(),
    };
    let find = |g: &LabelledReebGraph, idx| g.vertices().iter().find(|v| v.index == idx).copied();
    let (m1, mx1) = (
        find(&core1, CriticalIndex::Min).unwrap(),
        find(&core1, CriticalIndex::Max).unwrap(),
    );
    let (m2, mx2) = (
        find(&core2, CriticalIndex::Min).unwrap(),
        find(&core2, CriticalIndex::Max).unwrap(),
    );
    steps.push(ElementaryDeformation::Relabel {
        map: BTreeMap::from([(m1.id, m2.label), (mx1.id, mx2.label)]),
    });
    let mut cur = ElementaryDeformation::Relabel {
        map: BTreeMap::from([(m1.id, m2.label), (mx1.id, mx2.label)]),
    }
    .apply(&core1)
    .unwrap();
    let mut phi: HashMap<VertexId, VertexId> = HashMap::from([(m2.id, m1.id), (mx2.id, mx1.id)]);
    for (death, g_before) in deaths2.iter().zip(&before2).rev() {
        let ElementaryDeformation::Birth {
            edge: (v1, v2),
            labels,
        } = death.invert(g_before).unwrap()
        else {
            unreachable!("inverse of a death is a birth")
        };
        let ElementaryDeformation::Death { pair: (u1, u2) } = death else {
            unreachable!()
        };
        let birth = ElementaryDeformation::Birth {
            edge: (phi[&v1], phi[&v2]),
            labels,
        };
        let next_id = cur.max_id().0;
        cur = birth.apply(&cur).unwrap();
        phi.insert(*u1, VertexId(next_id + 1));
        phi.insert(*u2, VertexId(next_id + 2));
        steps.push(birth);
    }
    Deformation { steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(labels: &[f64]) -> LabelledReebGraph {
        LabelledReebGraph::from_labels(labels).unwrap()
    }

    fn id(i: u64) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn death_then_birth() {
        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        let d = ElementaryDeformation::death(id(1), id(2));
        let g2 = d.apply(&g4).unwrap();
        assert_eq!(g2.labels(), vec![0.0, 1.0]);
        assert!((d.cost(&g4).unwrap() - 0.2).abs() < 1e-15);

        let b = ElementaryDeformation::birth(id(0), id(1), 0.6, 0.2);
        let back = b.apply(&g(&[0.0, 1.0])).unwrap();
        assert_eq!(back.labels(), vec![0.0, 0.6, 0.2, 1.0]);
        assert_eq!(back.vertices()[1].id, id(2));
        assert_eq!(back.vertices()[2].id, id(3));
        assert!((b.cost(&g(&[0.0, 1.0])).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn relabel_cost_and_validity() {
        let g2 = g(&[0.0, 1.0]);
        let r = ElementaryDeformation::Relabel {
            map: BTreeMap::from([(id(0), 0.1), (id(1), 0.9)]),
        };
        assert_eq!(r.apply(&g2).unwrap().labels(), vec![0.1, 0.9]);
        assert!((r.cost(&g2).unwrap() - 0.1).abs() < 1e-15);
        let ident = ElementaryDeformation::relabel_partial(&g2, &[]);
        assert_eq!(ident.cost(&g2).unwrap(), 0.0);
        let swap = ElementaryDeformation::Relabel {
            map: BTreeMap::from([(id(0), 1.0), (id(1), 0.0)]),
        };
        assert!(matches!(swap.apply(&g2), Err(EditError::InvalidDeformation(_))));
        let partial = ElementaryDeformation::Relabel {
            map: BTreeMap::from([(id(0), 0.5)]),
        };
        assert!(partial.apply(&g2).is_err());
        let unknown = ElementaryDeformation::Relabel {
            map: BTreeMap::from([(id(7), 0.5)]),
        };
        assert_eq!(unknown.apply(&g2), Err(EditError::UnknownVertexId(id(7))));
    }

    #[test]
    fn relabel_may_cross_non_adjacent_labels() {
        // 0.6 and 0.2 leave the global order but keep the local pattern
        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        let r = ElementaryDeformation::relabel_partial(&g4, &[(id(2), 0.7), (id(1), 0.8)]);
        assert_eq!(r.apply(&g4).unwrap().labels(), vec![0.0, 0.8, 0.7, 1.0]);
    }

    #[test]
    fn invalid_steps_are_rejected() {
        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        assert_eq!(
            ElementaryDeformation::death(id(1), id(0)).apply(&g(&[0.0, 1.0])),
            Err(EditError::DeathOnTwoVertexGraph)
        );
        // outer neighbours 0.0 and 0.6: 0.0 < 0.2 < 1.0 < 0.6 fails
        let e = ElementaryDeformation::death(id(3), id(2)).apply(&g4).unwrap_err();
        assert!(e.to_string().contains("label(v1)"), "{e}");
        assert!(ElementaryDeformation::death(id(2), id(1)).apply(&g4).is_err());
        assert!(ElementaryDeformation::death(id(1), id(0)).apply(&g4).is_err());
        assert!(ElementaryDeformation::death(id(9), id(0)).apply(&g4).is_err());
        assert!(ElementaryDeformation::birth(id(0), id(1), 0.2, 0.6).apply(&g4).is_err());
        assert!(ElementaryDeformation::birth(id(0), id(1), 0.5, 0.5).apply(&g4).is_err());
        assert!(ElementaryDeformation::birth(id(0), id(2), 0.1, 0.05).apply(&g4).is_err());
        assert!(ElementaryDeformation::birth(id(0), id(1), 0.6, 0.1).apply(&g4).is_err());
    }

    #[test]
    fn inverses_restore_the_graph_at_equal_cost() {
        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        let ops = [
            ElementaryDeformation::death(id(1), id(2)),
            ElementaryDeformation::birth(id(2), id(3), 0.8, 0.4),
            ElementaryDeformation::birth(id(0), id(3), 0.9, 0.1),
            ElementaryDeformation::relabel_partial(&g4, &[(id(3), 3.0), (id(0), -1.0)]),
        ];
        for op in ops {
            let after = op.apply(&g4).unwrap();
            let inv = op.invert(&g4).unwrap();
            let back = inv.apply(&after).unwrap();
            assert!(back.is_isomorphic(&g4, 0.0), "{op:?}");
            assert_eq!(inv.cost(&after).unwrap(), op.cost(&g4).unwrap());
        }
    }

    #[test]
    fn sequences_sum_costs_and_report_failing_step() {
        let g2 = g(&[0.0, 1.0]);
        let (same, c) = apply_sequence(&[], &g2).unwrap();
        assert_eq!((same, c), (g2.clone(), 0.0));
        let r = ElementaryDeformation::Relabel {
            map: BTreeMap::from([(id(0), 0.1), (id(1), 1.2)]),
        };
        let (out, c) = apply_sequence(std::slice::from_ref(&r), &g2).unwrap();
        assert_eq!(out.labels(), vec![0.1, 1.2]);
        assert!((c - 0.2).abs() < 1e-15);
        let err = apply_sequence(&[r, ElementaryDeformation::death(id(1), id(0))], &g2).unwrap_err();
        assert!(matches!(err, EditError::AtStep { step: 1, .. }));
    }

    #[test]
    fn deletable_pairs_match_definition() {
        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        assert_eq!(
            find_deletable_pairs(&g4),
            vec![ElementaryDeformation::death(id(1), id(2))]
        );
        assert!(find_deletable_pairs(&g(&[0.0, 1.0])).is_empty());
        let g6 = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        let pairs = find_deletable_pairs(&g6);
        assert!(pairs.contains(&ElementaryDeformation::death(id(1), id(2))));
        assert!(pairs.contains(&ElementaryDeformation::death(id(5), id(4))));
        for p in pairs {
            assert!(p.apply(&g6).is_ok());
        }
    }

    #[test]
    fn connect_canonical_examples() {
        let g2 = g(&[0.0, 1.0]);
        let t = connect_canonical(&g2, &g2);
        assert_eq!(t.len(), 1);
        assert_eq!(t.apply(&g2).unwrap().1, 0.0);

        let g4 = g(&[0.0, 0.6, 0.2, 1.0]);
        let t = connect_canonical(&g4, &g2);
        let (out, c) = t.apply(&g4).unwrap();
        assert!(out.is_isomorphic(&g2, 0.0));
        assert!((c - 0.2).abs() < 1e-15);

        let g6 = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        let t = connect_canonical(&g6, &g2);
        assert_eq!(t.steps.iter().filter(|s| s.kind() == "death").count(), 2);
        let (out, c) = t.apply(&g6).unwrap();
        assert!(out.is_isomorphic(&g2, 0.0));
        assert!((c - 0.4).abs() < 1e-12);

        let t = connect_canonical(&g2, &g6);
        let (out, c) = t.apply(&g2).unwrap();
        assert!(out.is_isomorphic(&g6, 0.0));
        assert!((c - 0.4).abs() < 1e-12);
    }

    #[test]
    fn script_json_shape() {
        let t = Deformation::new(vec![
            ElementaryDeformation::death(id(1), id(2)),
            ElementaryDeformation::birth(id(0), id(3), 0.6, 0.2),
            ElementaryDeformation::Relabel {
                map: BTreeMap::from([(id(0), 0.1)]),
            },
        ]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"steps":[{"op":"death","pair":[1,2]},{"op":"birth","edge":[0,3],"labels":[0.6,0.2]},{"op":"relabel","map":{"0":0.1}}]}"#
        );
        assert_eq!(serde_json::from_str::<Deformation>(&s).unwrap(), t);
    }
}
