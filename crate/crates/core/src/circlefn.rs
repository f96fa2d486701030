//! Real functions on the circle: trigonometric polynomials and cyclic
//! piecewise-linear functions, their derivatives, Cʳ norms and critical points.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FunctionError;

/// Numerical tolerances shared by root finding and genericity checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bisection stops once the bracket is narrower than this (radians).
    pub root: f64,
    /// Critical values closer than this are considered equal.
    pub value: f64,
    /// A critical point with |f″| at or below this is degenerate.
    pub degenerate: f64,
    /// Number of uniform samples used to bracket roots and suprema.
    pub grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            value: 1e-9,
            degenerate: 1e-8,
            grid: 4096,
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `a0 + Σ_k (cos_k · cos kθ + sin_k · sin kθ)`, k starting at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self, FunctionError> {
        if cos.len() != sin.len() {
            return Err(FunctionError::InvalidFunction(format!(
                "cos and sin coefficient lists differ in length ({} vs {})",
                cos.len(),
                sin.len()
            )));
        }
        if cos.is_empty() {
            return Err(FunctionError::InvalidFunction(
                "trigonometric polynomial needs at least one harmonic".into(),
            ));
        }
        if !a0.is_finite() || cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
            return Err(FunctionError::InvalidFunction("non-finite coefficient".into()));
        }
        Ok(TrigPoly { a0, cos, sin })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Exact derivative of any order.
    pub fn derivative(&self, theta: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.a0 } else { 0.0 };
        for (j, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (j + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            let scale = k.powi(order as i32);
            // d^n/dθ^n of (a cos kθ + b sin kθ) cycles with period 4
            let term = match order % 4 {
                0 => a * c + b * s,
                1 => -a * s + b * c,
                2 => -a * c - b * s,
                _ => a * s - b * c,
            };
            acc += scale * term;
        }
        acc
    }

    fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    fn padded(&self, degree: usize) -> (Vec<f64>, Vec<f64>) {
        let mut c = self.cos.clone();
        let mut s = self.sin.clone();
        c.resize(degree, 0.0);
        s.resize(degree, 0.0);
        (c, s)
    }
}

/// Cyclic piecewise-linear function through `(θ, value)` breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, FunctionError> {
        if points.len() < 2 {
            return Err(FunctionError::InvalidFunction(
                "piecewise-linear function needs at least two breakpoints".into(),
            ));
        }
        for (i, &(t, y)) in points.iter().enumerate() {
            if !t.is_finite() || !y.is_finite() {
                return Err(FunctionError::InvalidFunction(format!(
                    "breakpoint {i} is not finite"
                )));
            }
            if !(0.0..TAU).contains(&t) {
                return Err(FunctionError::InvalidFunction(format!(
                    "breakpoint {i} position {t} outside [0, 2π)"
                )));
            }
            if i > 0 && t <= points[i - 1].0 {
                return Err(FunctionError::InvalidFunction(format!(
                    "breakpoint positions must increase strictly (at index {i})"
                )));
            }
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Index `i` of the segment `[p_i, p_{i+1})` containing θ (cyclically).
    fn segment(&self, theta: f64) -> usize {
        let t = wrap_angle(theta);
        let n = self.points.len();
        match self.points.partition_point(|&(p, _)| p <= t) {
            0 => n - 1,
            k => k - 1,
        }
    }

    fn segment_ends(&self, i: usize) -> ((f64, f64), (f64, f64)) {
        let n = self.points.len();
        let a = self.points[i];
        let mut b = self.points[(i + 1) % n];
        if i + 1 == n {
            b.0 += TAU;
        }
        (a, b)
    }

    fn slope_of(&self, i: usize) -> f64 {
        let ((ta, ya), (tb, yb)) = self.segment_ends(i);
        (yb - ya) / (tb - ta)
    }

    pub fn value(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta);
        let i = self.segment(t);
        let ((ta, ya), (tb, yb)) = self.segment_ends(i);
        let mut x = t;
        if x < ta {
            x += TAU;
        }
        let w = (x - ta) / (tb - ta);
        ya + w * (yb - ya)
    }

    fn at_breakpoint(&self, theta: f64) -> bool {
        let t = wrap_angle(theta);
        self.points.iter().any(|&(p, _)| {
            let d = (t - p).abs();
            d.min(TAU - d) < 1e-12
        })
    }
}

/// A real function on the circle, parameterised by the angle θ ∈ [0, 2π).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionData", into = "FunctionData")]
pub enum CircleFunction {
    Trig(TrigPoly),
    PiecewiseLinear(PiecewiseLinear),
}

/// Unvalidated function data, exactly as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionData {
    Trig {
        a0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Pl {
        points: Vec<[f64; 2]>,
    },
}

impl TryFrom<FunctionData> for CircleFunction {
    type Error = FunctionError;

    fn try_from(r: FunctionData) -> Result<Self, Self::Error> {
        match r {
            FunctionData::Trig { a0, cos, sin } => TrigPoly::new(a0, cos, sin).map(Self::Trig),
            FunctionData::Pl { points } => {
                PiecewiseLinear::new(points.into_iter().map(|[t, y]| (t, y)).collect())
                    .map(Self::PiecewiseLinear)
            }
        }
    }
}

impl From<CircleFunction> for FunctionData {
    fn from(f: CircleFunction) -> Self {
        match f {
            CircleFunction::Trig(p) => FunctionData::Trig {
                a0: p.a0,
                cos: p.cos,
                sin: p.sin,
            },
            CircleFunction::PiecewiseLinear(p) => FunctionData::Pl {
                points: p.points.into_iter().map(|(t, y)| [t, y]).collect(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalIndex {
    Min,
    Max,
}

impl CriticalIndex {
    pub fn opposite(self) -> Self {
        match self {
            CriticalIndex::Min => CriticalIndex::Max,
            CriticalIndex::Max => CriticalIndex::Min,
        }
    }
}

impl fmt::Display for CriticalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalIndex::Min => f.write_str("min"),
            CriticalIndex::Max => f.write_str("max"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub position: f64,
    pub value: f64,
    pub index: CriticalIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub is_morse: bool,
    pub is_simple: bool,
    pub min_value_gap: f64,
    pub violations: Vec<String>,
}

impl CircleFunction {
    pub fn trig(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self, FunctionError> {
        TrigPoly::new(a0, cos, sin).map(Self::Trig)
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self, FunctionError> {
        PiecewiseLinear::new(points).map(Self::PiecewiseLinear)
    }

    /// `amplitude · sin θ`.
    pub fn sine(amplitude: f64) -> Self {
        Self::Trig(TrigPoly {
            a0: 0.0,
            cos: vec![0.0],
            sin: vec![amplitude],
        })
    }

    pub fn is_trig(&self) -> bool {
        matches!(self, Self::Trig(_))
    }

    /// Value (`order = 0`) or derivative of the function at θ.
    ///
    /// Piecewise-linear functions only support `order ≤ 1`, and the slope is
    /// undefined at breakpoints.
    pub fn evaluate(&self, theta: f64, order: u32) -> Result<f64, FunctionError> {
        match self {
            Self::Trig(p) => Ok(p.derivative(theta, order)),
            Self::PiecewiseLinear(p) => match order {
                0 => Ok(p.value(theta)),
                1 if !p.at_breakpoint(theta) => Ok(p.slope_of(p.segment(theta))),
                _ => Err(FunctionError::UnsupportedDerivative { order, theta }),
            },
        }
    }

    /// Plain value; never fails.
    pub fn value(&self, theta: f64) -> f64 {
        match self {
            Self::Trig(p) => p.derivative(theta, 0),
            Self::PiecewiseLinear(p) => p.value(theta),
        }
    }

    /// Pointwise `(1 − λ)·self + λ·other`.
    pub fn linear_combination(&self, other: &Self, lambda: f64) -> Result<Self, FunctionError> {
        self.combine(other, 1.0 - lambda, lambda)
    }

    /// Pointwise `self − other`.
    pub fn difference(&self, other: &Self) -> Result<Self, FunctionError> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        match self {
            Self::Trig(p) => Self::Trig(TrigPoly {
                a0: alpha * p.a0,
                cos: p.cos.iter().map(|c| alpha * c).collect(),
                sin: p.sin.iter().map(|c| alpha * c).collect(),
            }),
            Self::PiecewiseLinear(p) => Self::PiecewiseLinear(PiecewiseLinear {
                points: p.points.iter().map(|&(t, y)| (t, alpha * y)).collect(),
            }),
        }
    }

    fn combine(&self, other: &Self, wa: f64, wb: f64) -> Result<Self, FunctionError> {
        match (self, other) {
            (Self::Trig(a), Self::Trig(b)) => {
                let deg = a.degree().max(b.degree());
                let (ac, as_) = a.padded(deg);
                let (bc, bs) = b.padded(deg);
                let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
                    x.iter().zip(y).map(|(p, q)| wa * p + wb * q).collect()
                };
                Ok(Self::Trig(TrigPoly {
                    a0: wa * a.a0 + wb * b.a0,
                    cos: mix(&ac, &bc),
                    sin: mix(&as_, &bs),
                }))
            }
            (Self::PiecewiseLinear(a), Self::PiecewiseLinear(b)) => {
                let mut pos: Vec<f64> = a
                    .points
                    .iter()
                    .chain(&b.points)
                    .map(|&(t, _)| t)
                    .collect();
                pos.sort_by(f64::total_cmp);
                pos.dedup();
                let points = pos
                    .into_iter()
                    .map(|t| (t, wa * a.value(t) + wb * b.value(t)))
                    .collect();
                Ok(Self::PiecewiseLinear(PiecewiseLinear { points }))
            }
            _ => Err(FunctionError::MixedRepresentation),
        }
    }

    /// `max_{k ≤ r} sup_θ |f^(k)(θ)|` in the angle chart.
    pub fn cr_norm(&self, r: u32, tol: &Tolerances) -> Result<f64, FunctionError> {
        match self {
            Self::Trig(p) => Ok((0..=r)
                .map(|k| sup_abs(|t| p.derivative(t, k), tol.grid))
                .fold(0.0, f64::max)),
            Self::PiecewiseLinear(p) => {
                if r > 1 {
                    return Err(FunctionError::UnsupportedDerivative {
                        order: r,
                        theta: f64::NAN,
                    });
                }
                let mut m = p.points.iter().map(|&(_, y)| y.abs()).fold(0.0, f64::max);
                if r == 1 {
                    for i in 0..p.points.len() {
                        m = m.max(p.slope_of(i).abs());
                    }
                }
                Ok(m)
            }
        }
    }

    /// Global minimum and maximum values.
    pub fn extrema(&self, tol: &Tolerances) -> (f64, f64) {
        match self {
            Self::PiecewiseLinear(p) => p.points.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)),
            ),
            Self::Trig(p) => {
                let n = tol.grid.max(16);
                let h = TAU / n as f64;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for k in 0..n {
                    let y = p.derivative(k as f64 * h, 0);
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
                for c in raw_trig_critical_points(p, tol).points {
                    lo = lo.min(c.value);
                    hi = hi.max(c.value);
                }
                (lo, hi)
            }
        }
    }

    /// Critical points in increasing position, without any genericity
    /// check. Used where near-degenerate functions are expected.
    pub fn critical_points_unchecked(&self, tol: &Tolerances) -> Vec<CriticalPoint> {
        match self {
            Self::Trig(p) => raw_trig_critical_points(p, tol).points,
            Self::PiecewiseLinear(p) => pl_critical_points(p).0,
        }
    }

    pub fn genericity_report(&self, tol: &Tolerances) -> GenericityReport {
        let mut violations = Vec::new();
        let points = match self {
            Self::Trig(p) => {
                if p.is_constant() {
                    violations.push("constant function: every point is critical".to_string());
                    Vec::new()
                } else {
                    let raw = raw_trig_critical_points(p, tol);
                    for t in raw.touching {
                        violations.push(format!(
                            "degenerate critical point (f′ touches zero) at θ={t:.12}"
                        ));
                    }
                    for c in &raw.points {
                        let d2 = p.derivative(c.position, 2);
                        if d2.abs() <= tol.degenerate {
                            violations.push(format!(
                                "degenerate critical point at θ={:.12} (|f″|={:.3e})",
                                c.position,
                                d2.abs()
                            ));
                        }
                    }
                    raw.points
                }
            }
            Self::PiecewiseLinear(p) => {
                let (pts, flats) = pl_critical_points(p);
                for i in flats {
                    violations.push(format!("flat segment starting at breakpoint {i}"));
                }
                pts
            }
        };
        if !points.is_empty() {
            let alternates = (0..points.len())
                .all(|i| points[i].index != points[(i + 1) % points.len()].index);
            if points.len() % 2 == 1 || !alternates {
                violations.push("critical points do not alternate min/max".to_string());
            }
        }
        let is_morse = violations.is_empty() && points.len() >= 2;
        let mut values: Vec<f64> = points.iter().map(|c| c.value).collect();
        values.sort_by(f64::total_cmp);
        let min_value_gap = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let mut is_simple = is_morse;
        if is_morse && min_value_gap <= tol.value {
            is_simple = false;
            violations.push(format!(
                "two critical points share a value (gap {min_value_gap:.3e})"
            ));
        }
        GenericityReport {
            is_morse,
            is_simple,
            min_value_gap,
            violations,
        }
    }

    /// Critical points of a simple Morse function, in cyclic (position) order.
    pub fn critical_points(&self, tol: &Tolerances) -> Result<Vec<CriticalPoint>, FunctionError> {
        let report = self.genericity_report(tol);
        if !report.is_simple {
            return Err(FunctionError::NotSimpleMorse(report.violations.join("; ")));
        }
        Ok(self.critical_points_unchecked(tol))
    }
}

struct RawCritical {
    points: Vec<CriticalPoint>,
    touching: Vec<f64>,
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64, tol: f64) -> f64 {
    let sa = fa.signum();
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
        if m == a && m == b {
            break;
        }
    }
    0.5 * (a + b)
}

fn raw_trig_critical_points(p: &TrigPoly, tol: &Tolerances) -> RawCritical {
    let n = tol.grid.max(16);
    let h = TAU / n as f64;
    let d1 = |t: f64| p.derivative(t, 1);
    let d2 = |t: f64| p.derivative(t, 2);
    let grid: Vec<f64> = (0..=n).map(|k| d1(k as f64 * h)).collect();
    let mut roots: Vec<(f64, CriticalIndex)> = Vec::new();
    let mut touching = Vec::new();
    let index_from = |left: f64| {
        if left > 0.0 {
            CriticalIndex::Max
        } else {
            CriticalIndex::Min
        }
    };
    for k in 0..n {
        let a = k as f64 * h;
        let b = a + h;
        let (fa, fb) = (grid[k], grid[k + 1]);
        if fa == 0.0 {
            let prev = grid[(k + n - 1) % n];
            if prev != 0.0 && fb != 0.0 {
                if prev.signum() != fb.signum() {
                    roots.push((a, index_from(prev)));
                } else {
                    touching.push(a);
                }
            }
            continue;
        }
        if fb == 0.0 {
            continue;
        }
        if fa.signum() != fb.signum() {
            let r = bisect(d1, a, b, fa, tol.root);
            roots.push((r, index_from(fa)));
            continue;
        }
        // f′ keeps its sign at both ends; look for a hidden pair of roots
        // around an interior extremum of f′.
        let (sa, sb) = (d2(a), d2(b));
        if sa != 0.0 && sb != 0.0 && sa.signum() != sb.signum() {
            let t = bisect(d2, a, b, sa, tol.root);
            let ft = d1(t);
            if ft == 0.0 || ft.signum() != fa.signum() {
                if ft.abs() <= tol.degenerate {
                    touching.push(t);
                } else {
                    let r1 = bisect(d1, a, t, fa, tol.root);
                    let r2 = bisect(d1, t, b, ft, tol.root);
                    roots.push((r1, index_from(fa)));
                    roots.push((r2, index_from(ft)));
                }
            } else if ft.abs() <= tol.degenerate {
                touching.push(t);
            }
        }
    }
    let points = roots
        .into_iter()
        .map(|(t, index)| {
            let position = wrap_angle(t);
            CriticalPoint {
                position,
                value: p.derivative(position, 0),
                index,
            }
        })
        .collect();
    RawCritical { points, touching }
}

fn pl_critical_points(p: &PiecewiseLinear) -> (Vec<CriticalPoint>, Vec<usize>) {
    let n = p.points.len();
    let slopes: Vec<f64> = (0..n).map(|i| p.slope_of(i)).collect();
    let flats = (0..n).filter(|&i| slopes[i] == 0.0).collect();
    let mut pts = Vec::new();
    for i in 0..n {
        let before = slopes[(i + n - 1) % n];
        let after = slopes[i];
        let index = if before > 0.0 && after < 0.0 {
            CriticalIndex::Max
        } else if before < 0.0 && after > 0.0 {
            CriticalIndex::Min
        } else {
            continue;
        };
        pts.push(CriticalPoint {
            position: p.points[i].0,
            value: p.points[i].1,
            index,
        });
    }
    (pts, flats)
}

/// Supremum of |g| on a uniform grid, refined around each grid-local maximum
/// by golden-section search.
fn sup_abs(g: impl Fn(f64) -> f64, n: usize) -> f64 {
    let n = n.max(16);
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| g(k as f64 * h).abs()).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for k in 0..n {
        let v = vals[k];
        if v >= vals[(k + n - 1) % n] && v >= vals[(k + 1) % n] {
            let c = k as f64 * h;
            best = best.max(golden_max(|t| g(t).abs(), c - h, c + h));
        }
    }
    best
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..60 {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        }
    }
    g1.max(g2)
}
