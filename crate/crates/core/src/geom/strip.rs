//! Fermi strips: tubular neighborhoods of a loop in normal coordinates.
//!
//! The strip map is `(tau, u) -> gamma(tau) + u * N(tau)` where `tau` is the
//! arclength parameter and `N` the unit normal. In the flat metric the
//! Jacobian is `J = 1 - u * kappa(tau)` and the map is a diffeomorphism as
//! long as `delta * max|kappa| < 1`.

use super::loops::SmoothLoop;
use super::{CircleDomain, Vec2};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// One grid node of the strip lattice.
#[derive(Debug, Clone, Copy)]
pub struct StripNode {
    pub pos: Vec2,
    pub jacobian: f64,
}

#[derive(Debug, Clone)]
struct TauFrame {
    t: f64,
    pos: Vec2,
    normal: Vec2,
}

/// Tubular neighborhood `T_delta(gamma)` with its sample lattice.
#[derive(Debug, Clone)]
pub struct FermiStrip {
    curve: SmoothLoop,
    delta: f64,
    n_tau: usize,
    n_u: usize,
    tau_nodes: Vec<f64>,
    u_nodes: Vec<f64>,
    nodes: Vec<StripNode>,
    kappa0: f64,
    clearance: f64,
    max_abs_curvature: f64,
}

impl FermiStrip {
    pub fn curve(&self) -> &SmoothLoop {
        &self.curve
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    /// Arclength midpoints of the tau cells.
    pub fn tau_nodes(&self) -> &[f64] {
        &self.tau_nodes
    }

    /// Offset midpoints of the u cells.
    pub fn u_nodes(&self) -> &[f64] {
        &self.u_nodes
    }

    pub fn node(&self, i_tau: usize, j_u: usize) -> &StripNode {
        &self.nodes[i_tau * self.n_u + j_u]
    }

    /// Comparability constant between `J` and `sqrt(rho_tautau)` over the
    /// grid; exactly 1 in the flat metric.
    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// Certified lower bound on the distance from the strip to the domain
    /// boundary.
    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.max_abs_curvature
    }

    /// Flat-metric area of the strip. The curvature term integrates to zero
    /// over the symmetric offset interval, so this is exact.
    pub fn area(&self) -> f64 {
        2.0 * self.delta * self.curve.total_length()
    }

    /// Area by midpoint quadrature of the Jacobian over the grid (used to
    /// cross-check the closed form).
    pub fn area_by_grid(&self) -> f64 {
        let cell = (self.curve.total_length() / self.n_tau as f64)
            * (2.0 * self.delta / self.n_u as f64);
        self.nodes.iter().map(|n| n.jacobian).sum::<f64>() * cell
    }

    /// Point of the parallel curve `gamma_u` at curve parameter `t`.
    pub fn offset_point(&self, t: f64, u: f64) -> Vec2 {
        let (z, v, _) = self.curve.series().eval2(t);
        z + v.rot90() * (u / v.norm())
    }

    /// Velocity (d/dt) of the parallel curve at curve parameter `t`.
    pub fn offset_velocity(&self, t: f64, u: f64) -> Vec2 {
        let (_, v, a) = self.curve.series().eval2(t);
        let speed = v.norm();
        // dT/dt = a/|v| - v (v.a)/|v|^3, dN/dt = rot90(dT/dt)
        let dt_dt = a * (1.0 / speed) - v * (v.dot(a) / (speed * speed * speed));
        v + dt_dt.rot90() * u
    }

    /// Plane position of the strip point with Fermi coordinates
    /// `(tau, u)`, `tau` in arclength.
    pub fn point_at(&self, tau: f64, u: f64) -> Vec2 {
        self.offset_point(self.curve.t_of_tau(tau), u)
    }

    /// Membership test with the signed normal coordinate of `p`.
    /// Returns `(t, u)` of the foot point.
    pub fn fermi_coords(&self, p: Vec2) -> (f64, f64) {
        self.curve.signed_offset(p)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (t, u) = self.fermi_coords(p);
        let foot = self.curve.point(t);
        // reject points whose foot distance disagrees with |u| (projection
        // failed far from the strip)
        let d = foot.dist(p);
        u.abs() <= self.delta && (d - u.abs()).abs() <= 1e-9 * (1.0 + d)
    }
}

/// Builds the strip lattice, checking the diffeomorphism condition and the
/// positive clearance to the domain boundary.
pub fn build_fermi_strip(
    domain: &CircleDomain,
    lp: &SmoothLoop,
    delta: f64,
    n_tau: usize,
    n_u: usize,
) -> Result<FermiStrip> {
    if !(delta > 0.0) || n_tau == 0 || n_u == 0 {
        return Err(Error::InvalidInput(
            "delta and grid resolutions must be positive".into(),
        ));
    }
    let curve = if lp.speed_deviation() > 1e-6 {
        lp.resample_arclength(1024)?
    } else {
        lp.clone()
    };
    let max_abs_curvature = curve.max_abs_curvature();

    // min boundary distance along the loop bounds the admissible width
    let probe = 4 * n_tau.max(256);
    let len = curve.total_length();
    let mut min_bd = f64::INFINITY;
    for k in 0..probe {
        let t = TAU * k as f64 / probe as f64;
        min_bd = min_bd.min(domain.dist_to_boundary(curve.point(t)));
    }
    let max_delta = (1.0 / max_abs_curvature).min(min_bd);
    if delta * max_abs_curvature >= 1.0 {
        return Err(Error::DeltaTooLarge { max_delta });
    }

    // certified clearance: exact distance from each normal segment to every
    // boundary circle, minus a Lipschitz margin for the tau sampling
    let h = len / probe as f64;
    let mut clearance = f64::INFINITY;
    for k in 0..probe {
        let t = curve.t_of_tau(len * k as f64 / probe as f64);
        let z = curve.point(t);
        let n = curve.unit_normal(t);
        let a = z + n * delta;
        let b = z - n * delta;
        let outer = domain.outer();
        let d_outer = outer.radius - a.dist(outer.center).max(b.dist(outer.center));
        clearance = clearance.min(d_outer);
        for disk in domain.inner() {
            clearance = clearance.min(point_segment_dist(disk.center, a, b) - disk.radius);
        }
    }
    clearance -= 0.5 * h * (1.0 + delta * max_abs_curvature);
    if clearance <= 0.0 {
        return Err(Error::DeltaTooLarge { max_delta });
    }

    let tau_nodes: Vec<f64> = (0..n_tau)
        .map(|i| len * (i as f64 + 0.5) / n_tau as f64)
        .collect();
    let u_nodes: Vec<f64> = (0..n_u)
        .map(|j| -delta + 2.0 * delta * (j as f64 + 0.5) / n_u as f64)
        .collect();
    let frames: Vec<TauFrame> = tau_nodes
        .iter()
        .map(|&tau| {
            let t = curve.t_of_tau(tau);
            TauFrame {
                t,
                pos: curve.point(t),
                normal: curve.unit_normal(t),
            }
        })
        .collect();

    let mut nodes = Vec::with_capacity(n_tau * n_u);
    let mut kappa0 = 1.0f64;
    let strip_probe = FermiStrip {
        curve: curve.clone(),
        delta,
        n_tau,
        n_u,
        tau_nodes: Vec::new(),
        u_nodes: Vec::new(),
        nodes: Vec::new(),
        kappa0: 1.0,
        clearance,
        max_abs_curvature,
    };
    for frame in &frames {
        for &u in &u_nodes {
            let pos = frame.pos + frame.normal * u;
            // honest Jacobian: cross of the two coordinate velocities
            let speed = curve.velocity(frame.t).norm();
            let d_tau = strip_probe.offset_velocity(frame.t, u) * (1.0 / speed);
            let jacobian = d_tau.cross(frame.normal);
            if !(jacobian > 0.0) {
                return Err(Error::DeltaTooLarge { max_delta });
            }
            let rho_tt_sqrt = d_tau.norm();
            kappa0 = kappa0
                .max(jacobian / rho_tt_sqrt)
                .max(rho_tt_sqrt / jacobian);
            nodes.push(StripNode { pos, jacobian });
        }
    }

    // grid injectivity proxy: distinct nodes map to distinct plane points
    debug_assert!({
        let mut seen: Vec<(u64, u64)> = nodes
            .iter()
            .map(|n| (n.pos.x.to_bits(), n.pos.y.to_bits()))
            .collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    });

    Ok(FermiStrip {
        curve,
        delta,
        n_tau,
        n_u,
        tau_nodes,
        u_nodes,
        nodes,
        kappa0,
        clearance,
        max_abs_curvature,
    })
}

/// Parallel curve `gamma_u` as a standalone loop.
pub fn parallel_curve(strip: &FermiStrip, u: f64) -> Result<SmoothLoop> {
    if u.abs() > strip.delta() {
        return Err(Error::OffsetOutsideStrip {
            u,
            delta: strip.delta(),
        });
    }
    if u == 0.0 {
        return Ok(strip.curve().clone());
    }
    let deg = strip.curve().degree();
    let n = (8 * (deg + 1)).max(256).next_power_of_two();
    let samples: Vec<Vec2> = (0..n)
        .map(|k| strip.offset_point(TAU * k as f64 / n as f64, u))
        .collect();
    let scale = samples.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let mut degree = (2 * (deg + 1)).max(32);
    loop {
        let series = super::series::TrigSeries::fit(&samples, degree);
        let mut resid = 0.0f64;
        for k in (0..n).step_by(3) {
            let t = TAU * (k as f64 + 0.5) / n as f64;
            resid = resid.max(series.eval(t).dist(strip.offset_point(t, u)));
        }
        if resid <= 1e-10 * scale || 4 * degree >= n {
            let series = series.trimmed(1e-14 * scale);
            return SmoothLoop::from_series_unchecked(series, strip.curve().base_t());
        }
        degree *= 2;
    }
}

fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return a.dist(p);
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    (a + ab * t).dist(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{winding_vector, Disk};

    fn big_domain() -> CircleDomain {
        CircleDomain::new(Disk::new(Vec2::ZERO, 10.0), vec![]).unwrap()
    }

    #[test]
    fn circle_strip_flat_constants() {
        let domain = big_domain();
        let lp = SmoothLoop::circle(Vec2::ZERO, 1.0);
        let strip = build_fermi_strip(&domain, &lp, 0.1, 64, 16).unwrap();
        assert!((strip.kappa0() - 1.0).abs() < 1e-12);
        // J(tau, u) = 1 - u for unit curvature
        for i in 0..strip.n_tau() {
            for (j, &u) in strip.u_nodes().iter().enumerate() {
                let node = strip.node(i, j);
                assert!((node.jacobian - (1.0 - u)).abs() < 1e-9);
            }
        }
        // strip spans radii [0.9, 1.1]; boundary at 10
        assert!((strip.clearance() - 8.9).abs() < 0.01);
        assert!((strip.area() - 0.2 * TAU).abs() < 1e-12);
        assert!((strip.area_by_grid() - strip.area()).abs() < 1e-9);
    }

    #[test]
    fn oversized_delta_rejected_with_max() {
        let domain = big_domain();
        let lp = SmoothLoop::circle(Vec2::ZERO, 1.0);
        match build_fermi_strip(&domain, &lp, 1.5, 64, 16) {
            Err(Error::DeltaTooLarge { max_delta }) => {
                assert!((max_delta - 1.0).abs() < 1e-6);
            }
            other => panic!("expected DeltaTooLarge, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn ellipse_strip_min_jacobian() {
        let domain = big_domain();
        let lp = SmoothLoop::ellipse(Vec2::ZERO, 2.0, 1.0).unwrap();
        let max_k = lp.resample_arclength(512).unwrap().max_abs_curvature();
        assert!((max_k - 2.0).abs() < 1e-6, "ellipse max curvature {max_k}");
        let delta = 0.9 / max_k;
        let strip = build_fermi_strip(&domain, &lp, delta, 128, 32).unwrap();
        let min_j = (0..strip.n_tau())
            .flat_map(|i| (0..strip.n_u()).map(move |j| (i, j)))
            .map(|(i, j)| strip.node(i, j).jacobian)
            .fold(f64::INFINITY, f64::min);
        // midpoint grid in both tau and u, so the extremes are offset by one
        // cell from the corners
        assert!((min_j - 0.1).abs() < 0.05, "min J {min_j}");
    }

    #[test]
    fn parallel_curve_inward_circle() {
        let domain = big_domain();
        let lp = SmoothLoop::circle(Vec2::ZERO, 1.0);
        let strip = build_fermi_strip(&domain, &lp, 0.2, 64, 16).unwrap();
        // u = 0 is the loop itself
        let same = parallel_curve(&strip, 0.0).unwrap();
        assert!(same.point(1.0).dist(lp.point(1.0)) < 1e-12);
        // inward normal: radius shrinks to 0.9
        let inner = parallel_curve(&strip, 0.1).unwrap();
        assert!((inner.total_length() - 1.8 * std::f64::consts::PI).abs() < 1e-6);
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            assert!((inner.point(t).norm() - 0.9).abs() < 1e-9);
        }
        assert!(matches!(
            parallel_curve(&strip, 0.3),
            Err(Error::OffsetOutsideStrip { .. })
        ));
    }

    #[test]
    fn parallel_curve_length_matches_offset_formula() {
        let domain = big_domain();
        let lp = SmoothLoop::ellipse(Vec2::ZERO, 2.0, 1.0).unwrap();
        let strip = build_fermi_strip(&domain, &lp, 0.3, 128, 16).unwrap();
        for &u in &[-0.3, -0.1, 0.15, 0.3] {
            let curve = parallel_curve(&strip, u).unwrap();
            // integral of |1 - u kappa| d tau on a fine grid
            let n = 4096;
            let len = strip.curve().total_length();
            let mut expect = 0.0;
            for k in 0..n {
                let t = strip.curve().t_of_tau(len * (k as f64 + 0.5) / n as f64);
                expect += (1.0 - u * strip.curve().curvature(t)).abs() * len / n as f64;
            }
            assert!(
                (curve.total_length() - expect).abs() < 1e-6 * expect,
                "u={u}: {} vs {}",
                curve.total_length(),
                expect
            );
        }
    }

    #[test]
    fn parallel_curves_preserve_winding() {
        let domain = CircleDomain::new(
            Disk::new(Vec2::ZERO, 10.0),
            vec![Disk::new(Vec2::new(2.0, 0.0), 0.5), Disk::new(Vec2::new(-2.0, 0.0), 0.5)],
        )
        .unwrap();
        let lp = SmoothLoop::circle(Vec2::new(2.0, 0.0), 1.2);
        let strip = build_fermi_strip(&domain, &lp, 0.4, 64, 8).unwrap();
        let w0 = winding_vector(&domain, strip.curve()).unwrap();
        for &u in &[-0.4, -0.13, 0.2, 0.4] {
            let curve = parallel_curve(&strip, u).unwrap();
            assert_eq!(winding_vector(&domain, &curve).unwrap(), w0);
        }
    }

    #[test]
    fn strip_membership_and_coords() {
        let domain = big_domain();
        let lp = SmoothLoop::circle(Vec2::ZERO, 2.0);
        let strip = build_fermi_strip(&domain, &lp, 0.25, 64, 8).unwrap();
        assert!(strip.contains(Vec2::new(2.2, 0.0)));
        assert!(strip.contains(Vec2::new(0.0, -1.8)));
        assert!(!strip.contains(Vec2::new(1.5, 0.0)));
        let (_, u) = strip.fermi_coords(Vec2::new(1.9, 0.0));
        assert!((u - 0.1).abs() < 1e-9); // inward is positive
    }
}
