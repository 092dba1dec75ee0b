//! The multiplicative group of positive reals acting on the punctured plane
//! by scaling, with its two global slices: the unit circle (compact, hence
//! small, continuous slicing map `p -> |p|`) and the hyperbola slice
//! `{(x, ±1/x)} ∪ {(0, ±1), (±1, 0)}` (not small, discontinuous slicing map).

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Transporters inside `[1/LAMBDA_BOUND, LAMBDA_BOUND]` count as relatively compact.
pub const LAMBDA_BOUND: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoPoint {
    pub x: f64,
    pub y: f64,
}

impl DemoPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || (x == 0.0 && y == 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "({x}, {y}) is not a point of the punctured plane"
            )));
        }
        Ok(DemoPoint { x, y })
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &DemoPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoGroupElem(f64);

impl DemoGroupElem {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "group element must be a positive real, got {lambda}"
            )));
        }
        Ok(DemoGroupElem(lambda))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn compose(&self, other: &DemoGroupElem) -> DemoGroupElem {
        DemoGroupElem(self.0 * other.0)
    }

    pub fn inverse(&self) -> DemoGroupElem {
        DemoGroupElem(1.0 / self.0)
    }
}

/// `lambda * (x, y) = (lambda x, lambda y)`.
pub fn demo_act(lambda: DemoGroupElem, p: DemoPoint) -> DemoPoint {
    DemoPoint {
        x: lambda.0 * p.x,
        y: lambda.0 * p.y,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoSlice {
    Circle,
    Hyperbola,
}

impl DemoSlice {
    pub fn contains(&self, p: &DemoPoint, tol: f64) -> bool {
        match self {
            DemoSlice::Circle => (p.norm() - 1.0).abs() <= tol,
            DemoSlice::Hyperbola => {
                if p.x == 0.0 || p.y == 0.0 {
                    (p.norm() - 1.0).abs() <= tol
                } else {
                    ((p.x * p.y).abs() - 1.0).abs() <= tol
                }
            }
        }
    }

    /// The unique `lambda > 0` with `p / lambda` on the slice.
    pub fn slicing_map(&self, p: &DemoPoint) -> f64 {
        demo_slicing_map(*self, p)
    }

    /// Norms attained on the slice, as closed intervals.
    fn norm_ranges(&self) -> Vec<(f64, f64)> {
        match self {
            DemoSlice::Circle => vec![(1.0, 1.0)],
            DemoSlice::Hyperbola => vec![(1.0, 1.0), (2f64.sqrt(), f64::INFINITY)],
        }
    }

    fn samples(&self, resolution: usize) -> Vec<DemoPoint> {
        match self {
            DemoSlice::Circle => circle_points(1.0, resolution.max(8)),
            DemoSlice::Hyperbola => {
                let mut out = vec![
                    DemoPoint { x: 0.0, y: 1.0 },
                    DemoPoint { x: 0.0, y: -1.0 },
                    DemoPoint { x: 1.0, y: 0.0 },
                    DemoPoint { x: -1.0, y: 0.0 },
                ];
                let m = resolution.max(8);
                let span = 2.0 * HYPERBOLA_DECADES;
                for j in 0..=m {
                    let x = 10f64.powf(-HYPERBOLA_DECADES + span * j as f64 / m as f64);
                    for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        out.push(DemoPoint {
                            x: sx * x,
                            y: sy / x,
                        });
                    }
                }
                out
            }
        }
    }
}

/// The hyperbola branches are sampled for `|x|` in `[1e-8, 1e8]`.
const HYPERBOLA_DECADES: f64 = 8.0;

/// Slicing map `f_S`. For the circle this is `|p|`; for the hyperbola it is
/// `sqrt(|xy|)` off the axes and `|x|` or `|y|` on them.
pub fn demo_slicing_map(slice: DemoSlice, p: &DemoPoint) -> f64 {
    match slice {
        DemoSlice::Circle => p.norm(),
        DemoSlice::Hyperbola => {
            if p.x == 0.0 {
                p.y.abs()
            } else if p.y == 0.0 {
                p.x.abs()
            } else {
                (p.x * p.y).abs().sqrt()
            }
        }
    }
}

/// `(k, f_S(1/k, 1))` for the hyperbola slice, `k = 1..=k_max`. The values are
/// `k^{-1/2}` and tend to zero while `f_S(0, 1) = 1`.
pub fn discontinuity_table(k_max: u64) -> Vec<(u64, f64)> {
    (1..=k_max)
        .map(|k| {
            let p = DemoPoint {
                x: 1.0 / k as f64,
                y: 1.0,
            };
            (k, demo_slicing_map(DemoSlice::Hyperbola, &p))
        })
        .collect()
}

/// A point within `delta` of `(0, 1)` where the hyperbola slicing map is
/// off by more than `1/2` from its value `1` at `(0, 1)`.
pub fn discontinuity_witness(delta: f64) -> DemoPoint {
    let x = 0.5 * delta.min(0.2);
    DemoPoint { x, y: 1.0 }
}

/// Subsets of the punctured plane for which transporters are computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    Ball {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    Annulus {
        r_min: f64,
        r_max: f64,
    },
    Rect {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    Slice {
        slice: DemoSlice,
    },
}

impl SetDescriptor {
    pub fn ball(center: DemoPoint, radius: f64) -> Self {
        SetDescriptor::Ball {
            cx: center.x,
            cy: center.y,
            radius,
        }
    }

    pub fn contains(&self, p: &DemoPoint) -> bool {
        match *self {
            SetDescriptor::Ball { cx, cy, radius } => (p.x - cx).hypot(p.y - cy) <= radius,
            SetDescriptor::Annulus { r_min, r_max } => (r_min..=r_max).contains(&p.norm()),
            SetDescriptor::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (x_min..=x_max).contains(&p.x) && (y_min..=y_max).contains(&p.y),
            SetDescriptor::Slice { slice } => slice.contains(p, 1e-12),
        }
    }

    /// `true` for sets invariant under rotations about the origin.
    fn is_radial(&self) -> bool {
        match self {
            SetDescriptor::Annulus { .. } => true,
            SetDescriptor::Slice { slice } => *slice == DemoSlice::Circle,
            _ => false,
        }
    }

    /// Norms of the points of the set (origin excluded), as closed intervals.
    fn norm_ranges(&self) -> Vec<(f64, f64)> {
        match *self {
            SetDescriptor::Ball { cx, cy, radius } => {
                let c = cx.hypot(cy);
                vec![((c - radius).max(0.0), c + radius)]
            }
            SetDescriptor::Annulus { r_min, r_max } => vec![(r_min, r_max)],
            SetDescriptor::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                let nx = if x_min <= 0.0 && 0.0 <= x_max {
                    0.0
                } else {
                    x_min.abs().min(x_max.abs())
                };
                let ny = if y_min <= 0.0 && 0.0 <= y_max {
                    0.0
                } else {
                    y_min.abs().min(y_max.abs())
                };
                let fx = x_min.abs().max(x_max.abs());
                let fy = y_min.abs().max(y_max.abs());
                vec![(nx.hypot(ny), fx.hypot(fy))]
            }
            SetDescriptor::Slice { slice } => slice.norm_ranges(),
        }
    }

    /// `{lambda > 0 : lambda p in self}` as a closed interval, if nonempty.
    fn scalings_into(&self, p: &DemoPoint) -> Option<(f64, f64)> {
        let positive = |lo: f64, hi: f64| {
            let lo = lo.max(0.0);
            if hi > 0.0 && lo <= hi {
                Some((lo, hi))
            } else {
                None
            }
        };
        match *self {
            SetDescriptor::Ball { cx, cy, radius } => {
                // |lambda p - c|^2 <= r^2
                let a = p.x * p.x + p.y * p.y;
                let b = -2.0 * (p.x * cx + p.y * cy);
                let c = cx * cx + cy * cy - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                positive((-b - s) / (2.0 * a), (-b + s) / (2.0 * a))
            }
            SetDescriptor::Annulus { r_min, r_max } => {
                let r = p.norm();
                Some((r_min / r, r_max / r))
            }
            SetDescriptor::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                let axis = |v: f64, lo: f64, hi: f64| -> Option<(f64, f64)> {
                    if v == 0.0 {
                        (lo <= 0.0 && 0.0 <= hi).then_some((0.0, f64::INFINITY))
                    } else if v > 0.0 {
                        Some((lo / v, hi / v))
                    } else {
                        Some((hi / v, lo / v))
                    }
                };
                let (a0, a1) = axis(p.x, x_min, x_max)?;
                let (b0, b1) = axis(p.y, y_min, y_max)?;
                positive(a0.max(b0), a1.min(b1))
            }
            SetDescriptor::Slice { slice } => {
                let l = 1.0 / demo_slicing_map(slice, p);
                Some((l, l))
            }
        }
    }

    fn samples(&self, resolution: usize) -> Vec<DemoPoint> {
        let m = resolution.max(8);
        match *self {
            SetDescriptor::Ball { cx, cy, radius } => {
                let mut out = vec![];
                for i in 0..=m {
                    let r = radius * i as f64 / m as f64;
                    let count = if i == 0 { 1 } else { 4 * i.max(2) };
                    for j in 0..count {
                        let t = std::f64::consts::TAU * j as f64 / count as f64;
                        let p = DemoPoint {
                            x: cx + r * t.cos(),
                            y: cy + r * t.sin(),
                        };
                        if p.x != 0.0 || p.y != 0.0 {
                            out.push(p);
                        }
                    }
                }
                out
            }
            SetDescriptor::Annulus { r_min, r_max } => (0..=m)
                .flat_map(|i| circle_points(r_min + (r_max - r_min) * i as f64 / m as f64, m))
                .collect(),
            SetDescriptor::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (0..=m)
                .flat_map(|i| {
                    (0..=m).filter_map(move |j| {
                        let x = x_min + (x_max - x_min) * i as f64 / m as f64;
                        let y = y_min + (y_max - y_min) * j as f64 / m as f64;
                        (x != 0.0 || y != 0.0).then_some(DemoPoint { x, y })
                    })
                })
                .collect(),
            SetDescriptor::Slice { slice } => slice.samples(m),
        }
    }
}

fn circle_points(r: f64, m: usize) -> Vec<DemoPoint> {
    (0..m)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / m as f64;
            DemoPoint {
                x: r * t.cos(),
                y: r * t.sin(),
            }
        })
        .collect()
}

/// Envelope `[lambda_min, lambda_max]` of a transporter `<U, V>` in the
/// positive reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransporterEnvelope {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_min` reaches below `1/LAMBDA_BOUND` (closure meets `0`).
    pub unbounded_below: bool,
    /// `lambda_max` exceeds `LAMBDA_BOUND` (closure is not compact at infinity).
    pub unbounded_above: bool,
    pub empty: bool,
    /// Computed in closed form rather than by sampling.
    pub exact: bool,
}

impl TransporterEnvelope {
    fn from_range(lo: f64, hi: f64, exact: bool) -> Self {
        if lo > hi || hi.is_nan() {
            return TransporterEnvelope::empty(exact);
        }
        TransporterEnvelope {
            lambda_min: lo,
            lambda_max: hi,
            unbounded_below: lo < 1.0 / LAMBDA_BOUND,
            unbounded_above: hi > LAMBDA_BOUND,
            empty: false,
            exact,
        }
    }

    fn empty(exact: bool) -> Self {
        TransporterEnvelope {
            lambda_min: f64::NAN,
            lambda_max: f64::NAN,
            unbounded_below: false,
            unbounded_above: false,
            empty: true,
            exact,
        }
    }

    /// Closure compact in the positive reals.
    pub fn is_relatively_compact(&self) -> bool {
        self.empty || !(self.unbounded_below || self.unbounded_above)
    }
}

/// Transporter `<U, V> = {lambda : lambda U ∩ V ≠ ∅}`.
///
/// Exact when `U` or `V` is rotation invariant (circle, annulus): then only
/// the norm ranges matter. Otherwise `U` is sampled at the given resolution
/// and the admissible scalings of every sample into `V` are unioned.
pub fn transporter(u: &SetDescriptor, v: &SetDescriptor, resolution: usize) -> TransporterEnvelope {
    if u.is_radial() || v.is_radial() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in u.norm_ranges() {
            for (c, d) in v.norm_ranges() {
                let (l, h) = if a == 0.0 {
                    (c / b, f64::INFINITY)
                } else {
                    (c / b, d / a)
                };
                if l <= h {
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
            }
        }
        return TransporterEnvelope::from_range(lo, hi, true);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in u.samples(resolution) {
        if let Some((a, b)) = v.scalings_into(&p) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    TransporterEnvelope::from_range(lo, hi, false)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallnessWitness {
    pub probe: DemoPoint,
    pub radius: f64,
    pub envelope: TransporterEnvelope,
    /// Group elements of `<S, U>` escaping to `0` or `infinity`.
    pub lambda_sequence: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub small: bool,
    pub witnesses: Vec<SmallnessWitness>,
}

/// Radii of the shrinking neighbourhoods, relative to `|probe|`.
const NEIGHBOURHOOD_RADII: [f64; 4] = [0.5, 0.25, 0.1, 0.01];

/// Tests smallness of a slice at the given probes: a probe passes when one of
/// its shrinking ball neighbourhoods `U` has `<S, U>` relatively compact.
pub fn is_small(slice: DemoSlice, probes: &[DemoPoint], resolution: usize) -> SmallnessReport {
    let s = SetDescriptor::Slice { slice };
    let mut witnesses = Vec::new();
    for probe in probes {
        let mut last = None;
        let mut thin = false;
        for rel in NEIGHBOURHOOD_RADII {
            let radius = rel * probe.norm();
            let env = transporter(&s, &SetDescriptor::ball(*probe, radius), resolution);
            if env.is_relatively_compact() {
                thin = true;
                break;
            }
            last = Some((radius, env));
        }
        if !thin {
            let (radius, envelope) = last.expect("at least one radius tried");
            witnesses.push(SmallnessWitness {
                probe: *probe,
                radius,
                envelope,
                lambda_sequence: escaping_sequence(slice, probe, &envelope),
            });
        }
    }
    SmallnessReport {
        small: witnesses.is_empty(),
        witnesses,
    }
}

/// `lambda_k = f_S(p_k)` for points `p_k -> probe`, restricted to the
/// direction in which the envelope escapes.
fn escaping_sequence(slice: DemoSlice, probe: &DemoPoint, env: &TransporterEnvelope) -> Vec<f64> {
    let mut seq: Vec<f64> = (1..=8)
        .flat_map(|e| {
            let h = 10f64.powi(-e);
            [
                DemoPoint {
                    x: probe.x + h,
                    y: probe.y,
                },
                DemoPoint {
                    x: probe.x,
                    y: probe.y + h,
                },
            ]
        })
        .map(|p| demo_slicing_map(slice, &p))
        .collect();
    if env.unbounded_below {
        seq.sort_by(|a, b| b.total_cmp(a));
        seq.dedup();
        seq.retain(|&l| l < 1.0);
    } else {
        seq.sort_by(f64::total_cmp);
        seq.dedup();
        seq.retain(|&l| l > 1.0);
    }
    seq
}

/// Openness of the action map on `G x (arc of the circle slice)`: every grid
/// point of the ball of `radius` around `probe` is of the form `lambda s` with
/// `lambda` in `lambda_range` and `s` on the arc with angles in `angle_range`.
pub fn circle_open_image_proxy(
    lambda_range: (f64, f64),
    angle_range: (f64, f64),
    probe: DemoPoint,
    radius: f64,
    resolution: usize,
) -> bool {
    SetDescriptor::ball(probe, radius)
        .samples(resolution)
        .iter()
        .all(|q| {
            let l = demo_slicing_map(DemoSlice::Circle, q);
            let t = q.y.atan2(q.x);
            lambda_range.0 < l && l < lambda_range.1 && angle_range.0 < t && t < angle_range.1
        })
}
