//! Smooth closed curves: arclength tables, resampling, base-tangent
//! rotation and winding vectors.

use super::series::TrigSeries;
use super::{CircleDomain, Vec2};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

// 5-point Gauss-Legendre on [-1, 1]
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

const TABLE_KNOTS: usize = 4096;

/// Cumulative arclength sampled on a uniform parameter grid.
#[derive(Debug, Clone)]
struct ArclengthTable {
    /// s[k] = arclength from 0 to t_k = 2 pi k / K, k = 0..=K
    s: Vec<f64>,
}

impl ArclengthTable {
    fn build(series: &TrigSeries) -> Self {
        let k = TABLE_KNOTS;
        let h = TAU / k as f64;
        let mut s = Vec::with_capacity(k + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for i in 0..k {
            let a = i as f64 * h;
            let mut panel = 0.0;
            for (x, w) in GL5_X.iter().zip(GL5_W.iter()) {
                let t = a + 0.5 * h * (x + 1.0);
                panel += w * series.velocity(t).norm();
            }
            acc += 0.5 * h * panel;
            s.push(acc);
        }
        ArclengthTable { s }
    }

    fn total(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Arclength from parameter 0 to `t` (t reduced mod 2 pi).
    fn tau_of_t(&self, series: &TrigSeries, t: f64) -> f64 {
        let total = self.total();
        let wraps = (t / TAU).floor();
        let t = t - wraps * TAU;
        let k = self.s.len() - 1;
        let h = TAU / k as f64;
        let i = ((t / h).floor() as usize).min(k - 1);
        let a = i as f64 * h;
        let mut panel = 0.0;
        let half = 0.5 * (t - a);
        if half > 0.0 {
            for (x, w) in GL5_X.iter().zip(GL5_W.iter()) {
                let tt = a + half * (x + 1.0);
                panel += w * series.velocity(tt).norm();
            }
        }
        self.s[i] + half * panel + wraps * total
    }

    /// Parameter with prescribed arclength from 0 (Newton refinement on the
    /// knot bracket).
    fn t_of_tau(&self, series: &TrigSeries, tau: f64) -> f64 {
        let total = self.total();
        let wraps = (tau / total).floor();
        let tau = tau - wraps * total;
        let k = self.s.len() - 1;
        let h = TAU / k as f64;
        let i = match self.s.binary_search_by(|v| v.partial_cmp(&tau).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .min(k - 1);
        let mut t = i as f64 * h
            + h * (tau - self.s[i]) / (self.s[i + 1] - self.s[i]).max(f64::MIN_POSITIVE);
        for _ in 0..4 {
            let f = self.tau_of_t(series, t) - tau;
            let d = series.velocity(t).norm();
            t -= f / d;
        }
        t + wraps * TAU
    }
}

/// An arclength-aware smooth closed curve.
#[derive(Debug, Clone)]
pub struct SmoothLoop {
    series: TrigSeries,
    table: ArclengthTable,
    total_length: f64,
    base_t: f64,
}

impl SmoothLoop {
    /// Builds a loop from a series, checking regularity and simplicity at
    /// sampling resolution.
    pub fn new(series: TrigSeries, base_t: f64) -> Result<Self> {
        let lp = Self::from_series_unchecked(series, base_t)?;
        lp.check_simple()?;
        Ok(lp)
    }

    /// Regularity check only. Used for curves that are simple by
    /// construction (offsets of a simple loop inside an admissible strip,
    /// diffeomorphic images).
    pub(crate) fn from_series_unchecked(series: TrigSeries, base_t: f64) -> Result<Self> {
        let n = 2048;
        let mut min_v = f64::INFINITY;
        let mut max_v = 0.0f64;
        let mut arg_min = 0.0;
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let v = series.velocity(t).norm();
            if v < min_v {
                min_v = v;
                arg_min = t;
            }
            max_v = max_v.max(v);
        }
        if !(min_v > 1e-7 * max_v) {
            return Err(Error::NonRegularLoop { t: arg_min });
        }
        let table = ArclengthTable::build(&series);
        let total_length = table.total();
        Ok(SmoothLoop {
            series,
            table,
            total_length,
            base_t,
        })
    }

    pub fn circle(center: Vec2, radius: f64) -> Self {
        SmoothLoop::new(TrigSeries::circle(center, radius), 0.0).unwrap()
    }

    pub fn ellipse(center: Vec2, a: f64, b: f64) -> Result<Self> {
        SmoothLoop::new(TrigSeries::ellipse(center, a, b), 0.0)
    }

    pub fn series(&self) -> &TrigSeries {
        &self.series
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn base_t(&self) -> f64 {
        self.base_t
    }

    pub fn base_point(&self) -> Vec2 {
        self.series.eval(self.base_t)
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.series.eval(t)
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        self.series.velocity(t)
    }

    pub fn unit_tangent(&self, t: f64) -> Vec2 {
        self.series.velocity(t).normalized()
    }

    /// Unit normal: the tangent rotated by +90 degrees. For a
    /// counterclockwise convex loop this points inward.
    pub fn unit_normal(&self, t: f64) -> Vec2 {
        self.unit_tangent(t).rot90()
    }

    pub fn curvature(&self, t: f64) -> f64 {
        self.series.curvature(t)
    }

    pub fn max_abs_curvature(&self) -> f64 {
        let n = 4096;
        (0..n)
            .map(|k| self.series.curvature(TAU * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Arclength from parameter 0 to `t`.
    pub fn tau_of_t(&self, t: f64) -> f64 {
        self.table.tau_of_t(&self.series, t)
    }

    /// Parameter at arclength `tau`.
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        self.table.t_of_tau(&self.series, tau)
    }

    pub fn point_at_arclength(&self, tau: f64) -> Vec2 {
        self.series.eval(self.t_of_tau(tau))
    }

    /// Maximum relative deviation of the parametrization speed from the
    /// constant `L / 2 pi`.
    pub fn speed_deviation(&self) -> f64 {
        let target = self.total_length / TAU;
        let n = 4096;
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                (self.series.velocity(t).norm() - target).abs() / target
            })
            .fold(0.0, f64::max)
    }

    /// Pairwise segment test on the sampled polyline (cyclic, adjacent
    /// segments excluded). A necessary proxy for simplicity at resolution
    /// 1024.
    pub fn check_simple(&self) -> Result<()> {
        let n = 1024;
        let pts: Vec<Vec2> = (0..n)
            .map(|k| self.series.eval(TAU * k as f64 / n as f64))
            .collect();
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            for j in (i + 2)..n {
                // skip the segment adjacent across the seam
                if i == 0 && j == n - 1 {
                    continue;
                }
                let c = pts[j];
                let d = pts[(j + 1) % n];
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersecting);
                }
            }
        }
        Ok(())
    }

    /// Reparametrizes the loop by arclength: the returned loop traverses the
    /// same curve with `|z'|` constant to a relative 1e-6 and the total
    /// length preserved to a relative 1e-9.
    pub fn resample_arclength(&self, n: usize) -> Result<SmoothLoop> {
        let base_tau = self.tau_of_t(self.base_t);
        let base_point = self.base_point();
        let base_tangent = self.unit_tangent(self.base_t);
        let mut n_samples = n
            .max(4 * (self.series.degree() + 1))
            .max(64)
            .next_power_of_two();
        loop {
            let degree = n_samples / 4;
            let samples: Vec<Vec2> = (0..n_samples)
                .map(|k| {
                    let tau = self.total_length * k as f64 / n_samples as f64;
                    self.series.eval(self.t_of_tau(tau))
                })
                .collect();
            let scale: f64 = samples.iter().map(|p| p.norm()).fold(0.0, f64::max);
            let series = TrigSeries::fit(&samples, degree).trimmed(1e-14 * scale.max(1.0));
            let base_t_new = TAU * base_tau / self.total_length;
            // pin the base point and base tangent exactly: refit noise here
            // would otherwise leak into shared-base-point constructions
            let shift = base_point - series.eval(base_t_new);
            let series = series.translated(shift);
            let tv = series.velocity(base_t_new);
            let residual = tv.cross(base_tangent).atan2(tv.dot(base_tangent));
            let series = series.rotated_about(base_point, residual);
            let out = SmoothLoop::from_series_unchecked(series, base_t_new)?;
            let len_ok = (out.total_length - self.total_length).abs() <= 1e-9 * self.total_length;
            if len_ok && out.speed_deviation() <= 1e-6 {
                out.check_simple()?;
                return Ok(out);
            }
            if n_samples >= 16384 {
                return Err(Error::InvalidInput(
                    "arclength resampling did not reach tolerance".into(),
                ));
            }
            n_samples *= 2;
        }
    }

    /// Nearest point of the loop to `p`: returns `(t, distance)`.
    ///
    /// Coarse scan plus Newton refinement of `(z(t) - p) . z'(t) = 0`.
    pub fn nearest_point(&self, p: Vec2) -> (f64, f64) {
        let n = 512;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let d = self.series.eval(t).dist(p);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let mut t = best_t;
        for _ in 0..8 {
            let (z, v, a) = self.series.eval2(t);
            let r = z - p;
            let f = r.dot(v);
            let df = v.norm_sq() + r.dot(a);
            if df.abs() < 1e-300 {
                break;
            }
            let step = f / df;
            // keep Newton within the coarse bracket
            let clamped = step.clamp(-TAU / n as f64, TAU / n as f64);
            t -= clamped;
            if clamped.abs() < 1e-15 {
                break;
            }
        }
        let d = self.series.eval(t).dist(p);
        if d <= best_d {
            (t, d)
        } else {
            (best_t, best_d)
        }
    }

    /// Signed normal coordinate of `p` relative to the loop: the component
    /// of `p - z(t*)` along the unit normal at the nearest point.
    pub fn signed_offset(&self, p: Vec2) -> (f64, f64) {
        let (t, _) = self.nearest_point(p);
        let u = (p - self.series.eval(t)).dot(self.unit_normal(t));
        (t, u)
    }

    /// Replaces the loop by its image under the area-preserving pointwise
    /// rotation that turns the base tangent onto `w` (a unit vector) inside
    /// the `eps`-ball around the base point, leaving everything outside
    /// unchanged.
    pub fn rotate_tangent_at_basepoint(&self, w: Vec2, eps: f64) -> Result<SmoothLoop> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
        let p = self.base_point();
        let t0 = self.unit_tangent(self.base_t);
        let angle = t0.cross(w).atan2(t0.dot(w));
        if angle == 0.0 {
            return Ok(self.clone());
        }
        self.check_single_branch(p, eps)?;
        let map = TangentRotation {
            pivot: p,
            angle,
            eps,
        };

        let mut degree = 128usize.max(2 * self.series.degree());
        loop {
            let n = 4 * degree;
            let samples: Vec<Vec2> = (0..n)
                .map(|k| map.apply(self.series.eval(TAU * k as f64 / n as f64)))
                .collect();
            let scale: f64 = samples.iter().map(|q| q.norm()).fold(1.0, f64::max);
            let series = TrigSeries::fit(&samples, degree);
            // residual probed between the fit samples
            let mut resid = 0.0f64;
            for k in 0..n {
                let t = TAU * (k as f64 + 0.5) / n as f64;
                resid = resid.max(series.eval(t).dist(map.apply(self.series.eval(t))));
            }
            if resid <= 1e-11 * scale || degree >= 4096 {
                // exact base-point and base-tangent correction
                let shift = p - series.eval(self.base_t);
                let series = series.translated(shift);
                let tv = series.velocity(self.base_t);
                let residual_angle = tv.cross(w).atan2(tv.dot(w));
                let series = series
                    .rotated_about(p, residual_angle)
                    .trimmed(1e-14 * scale);
                let out = SmoothLoop::new(series, self.base_t)?;
                return Ok(out);
            }
            degree *= 2;
        }
    }

    fn check_single_branch(&self, p: Vec2, eps: f64) -> Result<()> {
        let n = 8192;
        let inside: Vec<bool> = (0..n)
            .map(|k| self.series.eval(TAU * k as f64 / n as f64).dist(p) < eps)
            .collect();
        let mut components = 0;
        for k in 0..n {
            let prev = inside[(k + n - 1) % n];
            if inside[k] && !prev {
                components += 1;
            }
        }
        if components > 1 {
            return Err(Error::BranchCollision);
        }
        Ok(())
    }
}

/// The plane map of the base-tangent rotation: a pointwise rotation about
/// `pivot` through the angle `angle * chi(|z - pivot|)` with a smooth radial
/// cutoff. The Jacobian determinant is 1 everywhere.
#[derive(Debug, Clone, Copy)]
pub struct TangentRotation {
    pub pivot: Vec2,
    pub angle: f64,
    pub eps: f64,
}

impl TangentRotation {
    pub fn apply(&self, z: Vec2) -> Vec2 {
        let y = z - self.pivot;
        let r = y.norm();
        let c = chi(r, self.eps);
        if c == 0.0 {
            return z;
        }
        self.pivot + y.rotated(self.angle * c)
    }
}

/// Smooth cutoff: 1 on [0, eps/3], 0 on [2 eps/3, inf).
pub fn chi(r: f64, eps: f64) -> f64 {
    let lo = eps / 3.0;
    let hi = 2.0 * eps / 3.0;
    if r <= lo {
        1.0
    } else if r >= hi {
        0.0
    } else {
        let x = (hi - r) / (hi - lo);
        smooth_step(x)
    }
}

/// C-infinity transition from 0 at x=0 to 1 at x=1.
fn smooth_step(x: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = f(x);
    let b = f(1.0 - x);
    a / (a + b)
}

/// Winding numbers of the loop around the inner disk centers, by summed
/// angle increments on the sampled polyline.
pub fn winding_vector(domain: &CircleDomain, lp: &SmoothLoop) -> Result<Vec<i64>> {
    let n = 2048;
    let pts: Vec<Vec2> = (0..n)
        .map(|k| lp.point(TAU * k as f64 / n as f64))
        .collect();
    let tol = 1e-7 * domain.outer().radius;
    let mut winding = Vec::with_capacity(domain.inner().len());
    for disk in domain.inner() {
        let c = disk.center;
        let mut total = 0.0;
        for k in 0..n {
            let v0 = pts[k] - c;
            let v1 = pts[(k + 1) % n] - c;
            if v0.norm() < tol || segment_dist(pts[k], pts[(k + 1) % n], c) < tol {
                return Err(Error::CenterTooClose);
            }
            total += v0.cross(v1).atan2(v0.dot(v1));
        }
        let turns = total / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() >= 0.01 {
            return Err(Error::InvalidInput(format!(
                "winding residual {:.4} exceeds tolerance",
                (turns - rounded).abs()
            )));
        }
        winding.push(rounded as i64);
    }
    Ok(winding)
}

fn segment_dist(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return a.dist(p);
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    (a + ab * t).dist(p)
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}
