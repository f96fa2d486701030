//! Labelled Reeb graphs of simple Morse functions on the circle.
//!
//! For a circle function the Reeb graph is a cycle whose vertices are the
//! critical points, alternating between minima and maxima. Vertices carry
//! their critical values as labels and a stable id that survives relabelling.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circlefn::{CircleFunction, CriticalIndex, Tolerances};
use crate::error::{FunctionError, GraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

// JSON object keys arrive as strings, so accept both forms.
impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = VertexId;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer vertex id")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<VertexId, E> {
                Ok(VertexId(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<VertexId, E> {
                u64::try_from(v)
                    .map(VertexId)
                    .map_err(|_| E::custom("vertex id must be nonnegative"))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<VertexId, E> {
                v.parse().map(VertexId).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub label: f64,
    pub index: CriticalIndex,
}

/// Unvalidated graph data, exactly as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphData {
    pub vertices: Vec<Vertex>,
}

/// A cycle graph with alternating Min/Max vertices in cyclic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphData", into = "GraphData")]
pub struct LabelledReebGraph {
    vertices: Vec<Vertex>,
}

impl TryFrom<GraphData> for LabelledReebGraph {
    type Error = GraphError;

    fn try_from(d: GraphData) -> Result<Self, GraphError> {
        LabelledReebGraph::new(d.vertices)
    }
}

impl From<LabelledReebGraph> for GraphData {
    fn from(g: LabelledReebGraph) -> Self {
        GraphData {
            vertices: g.vertices,
        }
    }
}

/// A dihedral correspondence between two graphs: `pairs[k] = (v, Φ(v))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isomorphism {
    pub pairs: Vec<(VertexId, VertexId)>,
    pub reflected: bool,
}

impl LabelledReebGraph {
    /// Validates every graph invariant; the error names the first one broken.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, GraphError> {
        let n = vertices.len();
        if n < 2 || n % 2 == 1 {
            return Err(GraphError::InvalidGraph(format!(
                "vertex count must be even and at least 2, got {n}"
            )));
        }
        let mut ids = HashSet::with_capacity(n);
        for v in &vertices {
            if !ids.insert(v.id) {
                return Err(GraphError::InvalidGraph(format!("duplicate vertex id={}", v.id)));
            }
            if !v.label.is_finite() {
                return Err(GraphError::InvalidGraph(format!(
                    "label of id={} is not finite",
                    v.id
                )));
            }
        }
        for i in 0..n {
            let v = vertices[i];
            let next = vertices[(i + 1) % n];
            if v.index == next.index {
                return Err(GraphError::InvalidGraph(format!(
                    "indices do not alternate at id={} and id={}",
                    v.id, next.id
                )));
            }
        }
        let mut labels: Vec<(f64, VertexId)> = vertices.iter().map(|v| (v.label, v.id)).collect();
        labels.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in labels.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GraphError::InvalidGraph(format!(
                    "labels not injective: id={} and id={} share label {}",
                    w[0].1, w[1].1, w[0].0
                )));
            }
        }
        for i in 0..n {
            let v = vertices[i];
            let prev = vertices[(i + n - 1) % n].label;
            let next = vertices[(i + 1) % n].label;
            let ok = match v.index {
                CriticalIndex::Max => v.label > prev && v.label > next,
                CriticalIndex::Min => v.label < prev && v.label < next,
            };
            if !ok {
                return Err(GraphError::InvalidGraph(format!(
                    "local extremality violated at id={}",
                    v.id
                )));
            }
        }
        Ok(LabelledReebGraph { vertices })
    }

    /// Builds a graph from labels in cyclic order with ids `0..n`; the index
    /// of each vertex is read off from its neighbours.
    pub fn from_labels(labels: &[f64]) -> Result<Self, GraphError> {
        let n = labels.len();
        if n < 2 {
            return Err(GraphError::InvalidGraph(format!(
                "vertex count must be even and at least 2, got {n}"
            )));
        }
        let mut vertices = Vec::with_capacity(n);
        for i in 0..n {
            let (prev, next) = (labels[(i + n - 1) % n], labels[(i + 1) % n]);
            let index = if labels[i] < prev && labels[i] < next {
                CriticalIndex::Min
            } else if labels[i] > prev && labels[i] > next {
                CriticalIndex::Max
            } else {
                return Err(GraphError::InvalidGraph(format!(
                    "local extremality violated at id={i}"
                )));
            };
            vertices.push(Vertex {
                id: VertexId(i as u64),
                label: labels[i],
                index,
            });
        }
        Self::new(vertices)
    }

    /// Graph of a simple Morse function: one vertex per critical point.
    pub fn extract(f: &CircleFunction, tol: &Tolerances) -> Result<Self, FunctionError> {
        let cps = f.critical_points(tol)?;
        let vertices = cps
            .iter()
            .enumerate()
            .map(|(i, c)| Vertex {
                id: VertexId(i as u64),
                label: c.value,
                index: c.index,
            })
            .collect();
        Self::new(vertices).map_err(|e| FunctionError::NotSimpleMorse(e.to_string()))
    }

    /// Piecewise-linear function with the labels at uniformly spaced angles.
    pub fn realize(&self) -> CircleFunction {
        let n = self.vertices.len() as f64;
        let points = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (TAU * i as f64 / n, v.label))
            .collect();
        CircleFunction::piecewise_linear(points).expect("uniform breakpoints are valid")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.label).collect()
    }

    pub fn position(&self, id: VertexId) -> Result<usize, GraphError> {
        self.vertices
            .iter()
            .position(|v| v.id == id)
            .ok_or(GraphError::UnknownVertex(id))
    }

    pub fn vertex(&self, id: VertexId) -> Result<&Vertex, GraphError> {
        self.position(id).map(|i| &self.vertices[i])
    }

    /// Vertex at cyclic position `i` (taken modulo the length).
    pub fn at(&self, i: usize) -> &Vertex {
        &self.vertices[i % self.vertices.len()]
    }

    /// Previous and next vertex in cyclic order.
    pub fn neighbours(&self, id: VertexId) -> Result<(&Vertex, &Vertex), GraphError> {
        let n = self.len();
        let i = self.position(id)?;
        Ok((&self.vertices[(i + n - 1) % n], &self.vertices[(i + 1) % n]))
    }

    pub fn are_adjacent(&self, a: VertexId, b: VertexId) -> Result<bool, GraphError> {
        let (p, q) = self.neighbours(a)?;
        self.position(b)?;
        Ok(p.id == b || q.id == b)
    }

    pub fn max_id(&self) -> VertexId {
        self.vertices.iter().map(|v| v.id).max().expect("graph is nonempty")
    }

    pub fn min_label(&self) -> f64 {
        self.vertices.iter().map(|v| v.label).fold(f64::INFINITY, f64::min)
    }

    pub fn max_label(&self) -> f64 {
        self.vertices.iter().map(|v| v.label).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same cycle traversed the other way round.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        LabelledReebGraph { vertices }
    }

    /// Rotates so that position `start` comes first.
    pub fn rotated(&self, start: usize) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.rotate_left(start % self.len());
        LabelledReebGraph { vertices }
    }

    /// Finds a rotation or reflection of `other` whose labels match ours
    /// within `tol`, with matching indices.
    pub fn isomorphism(&self, other: &Self, tol: f64) -> Option<Isomorphism> {
        let n = self.len();
        if n != other.len() {
            return None;
        }
        for reflected in [false, true] {
            for shift in 0..n {
                let image = |k: usize| -> &Vertex {
                    if reflected {
                        &other.vertices[(shift + n - k) % n]
                    } else {
                        &other.vertices[(shift + k) % n]
                    }
                };
                let ok = (0..n).all(|k| {
                    let (a, b) = (&self.vertices[k], image(k));
                    a.index == b.index && (a.label - b.label).abs() <= tol
                });
                if ok {
                    let pairs = (0..n).map(|k| (self.vertices[k].id, image(k).id)).collect();
                    return Some(Isomorphism { pairs, reflected });
                }
            }
        }
        None
    }

    pub fn is_isomorphic(&self, other: &Self, tol: f64) -> bool {
        self.isomorphism(other, tol).is_some()
    }

    /// Lexicographically least label sequence over all rotations and
    /// reflections that start at a Min vertex. Ids travel with their labels.
    pub fn canonical_form(&self) -> Self {
        let n = self.len();
        let mut best: Option<Vec<Vertex>> = None;
        for reflected in [false, true] {
            for start in 0..n {
                let seq: Vec<Vertex> = (0..n)
                    .map(|k| {
                        if reflected {
                            self.vertices[(start + n - k) % n]
                        } else {
                            self.vertices[(start + k) % n]
                        }
                    })
                    .collect();
                if seq[0].index != CriticalIndex::Min {
                    continue;
                }
                let less = match &best {
                    None => true,
                    Some(b) => seq
                        .iter()
                        .zip(b)
                        .map(|(x, y)| x.label.total_cmp(&y.label))
                        .find(|o| o.is_ne())
                        .is_some_and(|o| o.is_lt()),
                };
                if less {
                    best = Some(seq);
                }
            }
        }
        LabelledReebGraph {
            vertices: best.expect("every graph has a Min vertex"),
        }
    }

    /// Canonical label sequence; equal keys mean isomorphic at tol = 0.
    pub fn canonical_labels(&self) -> Vec<f64> {
        self.canonical_form().labels()
    }

    /// Graphviz rendering of the cycle.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph reeb {\n");
        for v in &self.vertices {
            let shape = match v.index {
                CriticalIndex::Min => "invtriangle",
                CriticalIndex::Max => "triangle",
            };
            s.push_str(&format!(
                "  v{} [label=\"{}: {}\", shape={}];\n",
                v.id, v.id, v.label, shape
            ));
        }
        let n = self.len();
        for i in 0..n {
            if n == 2 && i == 1 {
                // a 2-cycle has two parallel edges
                s.push_str(&format!(
                    "  v{} -- v{};\n",
                    self.vertices[1].id, self.vertices[0].id
                ));
                break;
            }
            s.push_str(&format!(
                "  v{} -- v{};\n",
                self.vertices[i].id,
                self.vertices[(i + 1) % n].id
            ));
        }
        s.push_str("}\n");
        s
    }

    /// Crate-internal constructor for data already known to be valid.
    pub(crate) fn from_valid(vertices: Vec<Vertex>) -> Self {
        debug_assert!(Self::new(vertices.clone()).is_ok());
        LabelledReebGraph { vertices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn g(labels: &[f64]) -> LabelledReebGraph {
        LabelledReebGraph::from_labels(labels).unwrap()
    }

    #[test]
    fn extract_sine() {
        let gr = LabelledReebGraph::extract(&CircleFunction::sine(1.0), &Tolerances::default())
            .unwrap();
        assert_eq!(gr.len(), 2);
        let mut ls = gr.labels();
        ls.sort_by(f64::total_cmp);
        assert!((ls[0] + 1.0).abs() < 1e-15 && (ls[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extract_piecewise_linear() {
        let f = CircleFunction::piecewise_linear(vec![
            (0.0, 0.0),
            (FRAC_PI_2, 0.6),
            (PI, 0.2),
            (1.5 * PI, 1.0),
        ])
        .unwrap();
        let gr = LabelledReebGraph::extract(&f, &Tolerances::default()).unwrap();
        assert_eq!(gr.labels(), vec![0.0, 0.6, 0.2, 1.0]);
    }

    #[test]
    fn extract_rejects_non_simple() {
        let f = CircleFunction::trig(0.0, vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            LabelledReebGraph::extract(&f, &Tolerances::default()),
            Err(FunctionError::NotSimpleMorse(_))
        ));
    }

    #[test]
    fn realize_places_labels_uniformly() {
        let gr = g(&[0.0, 1.0]);
        match gr.realize() {
            CircleFunction::PiecewiseLinear(p) => assert_eq!(p.points(), &[(0.0, 0.0), (PI, 1.0)]),
            _ => unreachable!(),
        }
        let gr = g(&[0.0, 0.6, 0.2, 1.0]);
        let back = LabelledReebGraph::extract(&gr.realize(), &Tolerances::default()).unwrap();
        assert!(gr.is_isomorphic(&back, 0.0));
        assert_eq!(back, gr);
    }

    #[test]
    fn invariant_violations_are_named() {
        let err = LabelledReebGraph::from_labels(&[0.0, 0.6, 0.7, 1.0]).unwrap_err();
        assert!(err.to_string().contains("local extremality violated"), "{err}");
        let v = |id, label, index| Vertex {
            id: VertexId(id),
            label,
            index,
        };
        use CriticalIndex::*;
        let e = LabelledReebGraph::new(vec![v(0, 0.0, Min), v(1, 1.0, Max), v(2, 0.5, Min)])
            .unwrap_err();
        assert!(e.to_string().contains("even"));
        let e = LabelledReebGraph::new(vec![v(0, 0.0, Min), v(0, 1.0, Max)]).unwrap_err();
        assert!(e.to_string().contains("duplicate"));
        let e = LabelledReebGraph::new(vec![v(0, 0.0, Min), v(1, 1.0, Min)]).unwrap_err();
        assert!(e.to_string().contains("alternate"));
        let e = LabelledReebGraph::new(vec![
            v(0, 0.0, Min),
            v(1, 1.0, Max),
            v(2, 0.0, Min),
            v(3, 2.0, Max),
        ])
        .unwrap_err();
        assert!(e.to_string().contains("injective"));
        let e = LabelledReebGraph::new(vec![
            v(0, 0.0, Min),
            v(1, 1.0, Max),
            v(2, 0.5, Min),
            v(3, 0.7, Max),
        ]);
        assert!(e.is_ok());
        let e = LabelledReebGraph::new(vec![
            v(0, 0.0, Min),
            v(1, 1.0, Max),
            v(2, 0.8, Min),
            v(3, 0.7, Max),
        ])
        .unwrap_err();
        assert_eq!(e.to_string(), "invalid graph: local extremality violated at id=2");
    }

    #[test]
    fn isomorphism_rotations_and_reflections() {
        let a = g(&[0.0, 0.6, 0.2, 1.0]);
        let rot = g(&[0.2, 1.0, 0.0, 0.6]);
        let iso = a.isomorphism(&a, 0.0).unwrap();
        assert!(iso.pairs.iter().all(|(x, y)| x == y));
        assert!(a.is_isomorphic(&rot, 0.0));
        assert!(a.is_isomorphic(&a.reversed(), 0.0));
        assert!(!a.is_isomorphic(&g(&[0.0, 0.7, 0.2, 1.0]), 1e-9));
        assert!(a.is_isomorphic(&g(&[0.0, 0.6 + 1e-10, 0.2, 1.0]), 1e-9));
        assert!(!a.is_isomorphic(&g(&[0.0, 1.0]), 1.0));
    }

    #[test]
    fn canonical_form_examples() {
        let c = g(&[0.2, 1.0, 0.0, 0.6]).canonical_form();
        assert_eq!(c.labels(), vec![0.0, 0.6, 0.2, 1.0]);
        assert_eq!(c.canonical_form(), c);
        let x = g(&[0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
        assert_eq!(x.canonical_labels(), x.reversed().canonical_labels());
        assert_eq!(x.canonical_labels(), vec![0.0, 0.5, 0.1, 1.0, 0.12, 0.52]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let gr = g(&[0.1, 0.7, 0.30000000000000004, 1.0 / 3.0 + 0.9]);
        let s = serde_json::to_string(&gr).unwrap();
        let back: LabelledReebGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, gr);
        assert!(s.contains("\"index\":\"min\""));
        let bad = r#"{"vertices":[{"id":0,"label":0.0,"index":"min"},{"id":1,"label":0.6,"index":"max"},{"id":2,"label":0.7,"index":"min"},{"id":3,"label":1.0,"index":"max"}]}"#;
        assert!(serde_json::from_str::<LabelledReebGraph>(bad).is_err());
    }

    #[test]
    fn dot_export_lists_cycle() {
        let dot = g(&[0.0, 0.6, 0.2, 1.0]).to_dot();
        assert!(dot.contains("v3 -- v0"));
        assert_eq!(dot.matches("--").count(), 4);
        assert_eq!(g(&[0.0, 1.0]).to_dot().matches("--").count(), 2);
    }
}
