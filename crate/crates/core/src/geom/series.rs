//! Truncated trigonometric series for closed plane curves.
//!
//! A curve is stored as one cosine/sine table per coordinate,
//! `z(t) = a0 + sum_m (a_m cos(mt) + b_m sin(mt))`, `t` in `[0, 2pi)`.
//! Closedness and periodicity of all derivatives are automatic.

use super::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigSeries {
    /// cos coefficients, index 0 is the constant term
    ax: Vec<f64>,
    ay: Vec<f64>,
    /// sin coefficients, index 0 unused (kept for alignment)
    bx: Vec<f64>,
    by: Vec<f64>,
}

impl TrigSeries {
    pub fn new(ax: Vec<f64>, bx: Vec<f64>, ay: Vec<f64>, by: Vec<f64>) -> Self {
        let m = ax.len().max(bx.len()).max(ay.len()).max(by.len()).max(1);
        let pad = |mut v: Vec<f64>| {
            v.resize(m, 0.0);
            v
        };
        TrigSeries {
            ax: pad(ax),
            bx: pad(bx),
            ay: pad(ay),
            by: pad(by),
        }
    }

    pub fn circle(center: Vec2, radius: f64) -> Self {
        TrigSeries {
            ax: vec![center.x, radius],
            bx: vec![0.0, 0.0],
            ay: vec![center.y, 0.0],
            by: vec![0.0, radius],
        }
    }

    pub fn ellipse(center: Vec2, a: f64, b: f64) -> Self {
        TrigSeries {
            ax: vec![center.x, a],
            bx: vec![0.0, 0.0],
            ay: vec![center.y, 0.0],
            by: vec![0.0, b],
        }
    }

    /// Highest retained mode.
    pub fn degree(&self) -> usize {
        self.ax.len() - 1
    }

    /// Position, velocity and acceleration at parameter `t`, in one pass.
    pub fn eval2(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (sin_t, cos_t) = t.sin_cos();
        let mut c = 1.0; // cos(m t)
        let mut s = 0.0; // sin(m t)
        let mut p = Vec2::new(self.ax[0], self.ay[0]);
        let mut v = Vec2::ZERO;
        let mut a = Vec2::ZERO;
        for m in 1..self.ax.len() {
            let (cm, sm) = (c * cos_t - s * sin_t, s * cos_t + c * sin_t);
            c = cm;
            s = sm;
            let mf = m as f64;
            let (axm, bxm, aym, bym) = (self.ax[m], self.bx[m], self.ay[m], self.by[m]);
            p.x += axm * c + bxm * s;
            p.y += aym * c + bym * s;
            v.x += mf * (bxm * c - axm * s);
            v.y += mf * (bym * c - aym * s);
            a.x += mf * mf * (-axm * c - bxm * s);
            a.y += mf * mf * (-aym * c - bym * s);
        }
        (p, v, a)
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        self.eval2(t).0
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        self.eval2(t).1
    }

    /// Signed curvature at `t` (positive when turning toward `rot90` of the
    /// tangent).
    pub fn curvature(&self, t: f64) -> f64 {
        let (_, v, a) = self.eval2(t);
        v.cross(a) / v.norm().powi(3)
    }

    /// Discrete Fourier projection of `samples` (taken at the uniform
    /// parameters `t_k = 2 pi k / N`) onto a series of degree `degree`.
    ///
    /// Exact for band-limited input when `N >= 2*degree + 2`.
    pub fn fit(samples: &[Vec2], degree: usize) -> Self {
        let n = samples.len();
        assert!(n >= 2 * degree + 2, "not enough samples for requested degree");
        let mut ax = vec![0.0; degree + 1];
        let mut bx = vec![0.0; degree + 1];
        let mut ay = vec![0.0; degree + 1];
        let mut by = vec![0.0; degree + 1];
        for (k, z) in samples.iter().enumerate() {
            let t = TAU * k as f64 / n as f64;
            let (sin_t, cos_t) = t.sin_cos();
            let mut c = 1.0;
            let mut s = 0.0;
            ax[0] += z.x;
            ay[0] += z.y;
            for m in 1..=degree {
                let (cm, sm) = (c * cos_t - s * sin_t, s * cos_t + c * sin_t);
                c = cm;
                s = sm;
                ax[m] += z.x * c;
                bx[m] += z.x * s;
                ay[m] += z.y * c;
                by[m] += z.y * s;
            }
        }
        let inv = 1.0 / n as f64;
        ax[0] *= inv;
        ay[0] *= inv;
        for m in 1..=degree {
            ax[m] *= 2.0 * inv;
            bx[m] *= 2.0 * inv;
            ay[m] *= 2.0 * inv;
            by[m] *= 2.0 * inv;
        }
        TrigSeries { ax, bx, ay, by }
    }

    /// Drops trailing modes whose coefficients all fall below `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        let mut keep = 1;
        for m in (1..self.ax.len()).rev() {
            if self.ax[m].abs() > tol
                || self.bx[m].abs() > tol
                || self.ay[m].abs() > tol
                || self.by[m].abs() > tol
            {
                keep = m + 1;
                break;
            }
        }
        self.ax.truncate(keep);
        self.bx.truncate(keep);
        self.ay.truncate(keep);
        self.by.truncate(keep);
        self
    }

    /// Translation by `d`, exact on the coefficients.
    pub fn translated(mut self, d: Vec2) -> Self {
        self.ax[0] += d.x;
        self.ay[0] += d.y;
        self
    }

    /// Rotation of the whole curve by `angle` about `pivot`, exact on the
    /// coefficients (each mode rotates as a vector pair).
    pub fn rotated_about(mut self, pivot: Vec2, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let rot = |x: f64, y: f64| (c * x - s * y, s * x + c * y);
        let (x0, y0) = rot(self.ax[0] - pivot.x, self.ay[0] - pivot.y);
        self.ax[0] = pivot.x + x0;
        self.ay[0] = pivot.y + y0;
        for m in 1..self.ax.len() {
            let (xa, ya) = rot(self.ax[m], self.ay[m]);
            self.ax[m] = xa;
            self.ay[m] = ya;
            let (xb, yb) = rot(self.bx[m], self.by[m]);
            self.bx[m] = xb;
            self.by[m] = yb;
        }
        self
    }
}
