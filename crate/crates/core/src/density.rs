//! Certified brackets for the Kobayashi-Royden density on a punctured
//! circle domain, and closed-form reference densities for test oracles.
//!
//! Normalization: the density of the unit disk at the origin is 2, matching
//! `kappa(x, v) = inf { 2/R : ... }`. All logarithms are natural.

use crate::error::{Error, Result};
use crate::geom::{CircleDomain, PunctureSet, Vec2};

/// Certified lower/upper bounds on the density at one point, per unit
/// Euclidean length.
#[derive(Debug, Clone, Copy)]
pub struct DensityBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Upper bound on the density of `domain \ S` at `z`.
///
/// The Euclidean disk of radius `R = min(d_boundary, d_punctures)` around
/// `z` embeds holomorphically, and its density at the center is `2/R`; the
/// decreasing property gives the bound.
pub fn upper_density(domain: &CircleDomain, s: &PunctureSet, z: Vec2) -> Result<f64> {
    let d_bd = domain.dist_to_boundary(z);
    if d_bd == 0.0 {
        return Err(Error::OutsideDomain);
    }
    let d_punct = s.dist_to_punctures(z)?;
    Ok(2.0 / d_bd.min(d_punct))
}

/// Same bound without the error paths, for quadrature inner loops.
/// Positions on a puncture return infinity.
pub fn upper_density_raw(domain: &CircleDomain, s: &PunctureSet, z: Vec2) -> f64 {
    let d = domain.dist_to_boundary(z).min(s.min_dist(z));
    2.0 / d
}

/// Lower bound on the density of `domain \ S` at `z`.
///
/// Every candidate is the exact density of a hyperbolic domain containing
/// `domain \ S`, so each is a valid lower bound by the decreasing property:
///
/// (a) the outer disk;
/// (b) for each puncture, and for each inner disk reduced to its center,
///     the outer disk punctured at that point, evaluated through the disk
///     automorphism that moves the point to the center.
pub fn lower_density(domain: &CircleDomain, s: &PunctureSet, z: Vec2) -> Result<f64> {
    if domain.dist_to_boundary(z) == 0.0 {
        return Err(Error::OutsideDomain);
    }
    s.dist_to_punctures(z)?;
    let outer = domain.outer();
    let r2 = (z - outer.center).norm_sq();
    let mut best = 2.0 * outer.radius / (outer.radius * outer.radius - r2);
    for p in s
        .points()
        .iter()
        .copied()
        .chain(domain.inner().iter().map(|d| d.center))
    {
        best = best.max(punctured_disk_pullback(outer.center, outer.radius, p, z));
    }
    Ok(best)
}

/// Density at `z` of the disk `Delta(c, R)` punctured at `p`, through the
/// automorphism of the unit disk sending `(p - c)/R` to 0.
fn punctured_disk_pullback(c: Vec2, radius: f64, p: Vec2, z: Vec2) -> f64 {
    // unit-disk coordinates
    let a = (p - c) * (1.0 / radius);
    let zeta = (z - c) * (1.0 / radius);
    // w = (zeta - a) / (1 - conj(a) zeta), |w'| = (1 - |a|^2)/|1 - conj(a) zeta|^2
    let (num_x, num_y) = (zeta.x - a.x, zeta.y - a.y);
    // conj(a) * zeta = (ax*zx + ay*zy) + i (ax*zy - ay*zx)
    let den = Vec2::new(
        1.0 - (a.x * zeta.x + a.y * zeta.y),
        -(a.x * zeta.y - a.y * zeta.x),
    );
    let den_sq = den.norm_sq();
    let w_abs = (Vec2::new(num_x, num_y).norm_sq() / den_sq).sqrt();
    if w_abs <= 0.0 || w_abs >= 1.0 {
        return 0.0;
    }
    let deriv_abs = (1.0 - a.norm_sq()) / den_sq / radius;
    deriv_abs / (w_abs * (1.0 / w_abs).ln())
}

/// Both bounds at once.
pub fn density_bracket(domain: &CircleDomain, s: &PunctureSet, z: Vec2) -> Result<DensityBracket> {
    Ok(DensityBracket {
        lower: lower_density(domain, s, z)?,
        upper: upper_density(domain, s, z)?,
    })
}

/// Reference domains with a known closed-form density.
#[derive(Debug, Clone, Copy)]
pub enum ReferenceModel {
    /// Disk of radius `R` about the origin.
    Disk { radius: f64 },
    /// Punctured disk `0 < |z| < R`.
    PuncturedDisk { radius: f64 },
    /// Annulus `r < |z| < 1`.
    Annulus { inner: f64 },
}

/// Exact density of the reference model at `z` (uniformization formulas).
pub fn reference_density(model: ReferenceModel, z: Vec2) -> Result<f64> {
    match model {
        ReferenceModel::Disk { radius } => {
            let r2 = z.norm_sq();
            if r2 >= radius * radius {
                return Err(Error::OutsideModel);
            }
            Ok(2.0 * radius / (radius * radius - r2))
        }
        ReferenceModel::PuncturedDisk { radius } => {
            let r = z.norm();
            if r <= 0.0 || r >= radius {
                return Err(Error::OutsideModel);
            }
            Ok(1.0 / (r * (radius / r).ln()))
        }
        ReferenceModel::Annulus { inner } => {
            let r = z.norm();
            if r <= inner || r >= 1.0 {
                return Err(Error::OutsideModel);
            }
            let big_l = (1.0 / inner).ln();
            let phase = std::f64::consts::PI * (1.0 / r).ln() / big_l;
            Ok(std::f64::consts::PI / (r * big_l * phase.sin()))
        }
    }
}

/// The reference model expressed as a circle domain plus punctures, so the
/// bracket estimators can be evaluated against the closed form.
pub fn reference_as_domain(model: ReferenceModel) -> (CircleDomain, Vec<Vec2>) {
    use crate::geom::Disk;
    match model {
        ReferenceModel::Disk { radius } => (
            CircleDomain::new(Disk::new(Vec2::ZERO, radius), vec![]).unwrap(),
            vec![],
        ),
        ReferenceModel::PuncturedDisk { radius } => (
            CircleDomain::new(Disk::new(Vec2::ZERO, radius), vec![]).unwrap(),
            vec![Vec2::ZERO],
        ),
        ReferenceModel::Annulus { inner } => (
            CircleDomain::new(
                Disk::new(Vec2::ZERO, 1.0),
                vec![Disk::new(Vec2::ZERO, inner)],
            )
            .unwrap(),
            vec![],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Disk;

    #[test]
    fn upper_density_examples() {
        let disk = CircleDomain::unit_disk();
        let empty = PunctureSet::empty(&disk);
        assert!((upper_density(&disk, &empty, Vec2::ZERO).unwrap() - 2.0).abs() < 1e-15);

        let s = PunctureSet::new(&disk, vec![Vec2::new(0.5, 0.0)]).unwrap();
        let v = upper_density(&disk, &s, Vec2::new(0.4, 0.0)).unwrap();
        assert!((v - 20.0).abs() < 1e-9);

        let big = CircleDomain::new(Disk::new(Vec2::ZERO, 10.0), vec![]).unwrap();
        let empty = PunctureSet::empty(&big);
        let v = upper_density(&big, &empty, Vec2::new(1.0, 0.0)).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn upper_density_error_paths() {
        let disk = CircleDomain::unit_disk();
        let s = PunctureSet::new(&disk, vec![Vec2::new(0.5, 0.0)]).unwrap();
        assert!(upper_density(&disk, &s, Vec2::new(2.0, 0.0)).is_err());
        assert!(upper_density(&disk, &s, Vec2::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn lower_density_disk_center_tight() {
        let disk = CircleDomain::unit_disk();
        let empty = PunctureSet::empty(&disk);
        assert!((lower_density(&disk, &empty, Vec2::ZERO).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lower_density_centered_puncture_exact() {
        // punctured unit disk at |z| = 1/e: density e
        let disk = CircleDomain::unit_disk();
        let s = PunctureSet::new(&disk, vec![Vec2::ZERO]).unwrap();
        let z = Vec2::new((-1.0f64).exp(), 0.0);
        let v = lower_density(&disk, &s, z).unwrap();
        assert!((v - 1.0f64.exp()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn bracket_order() {
        let disk = CircleDomain::unit_disk();
        let s = PunctureSet::new(&disk, vec![Vec2::new(0.3, 0.2), Vec2::new(-0.4, 0.1)]).unwrap();
        for k in 0..200 {
            let ang = 0.37 * k as f64;
            let rad = 0.95 * ((k as f64 + 0.5) / 200.0);
            let z = Vec2::new(rad * ang.cos(), rad * ang.sin());
            if s.min_dist(z) < 1e-6 {
                continue;
            }
            let b = density_bracket(&disk, &s, z).unwrap();
            assert!(b.lower > 0.0 && b.lower <= b.upper);
        }
    }

    #[test]
    fn reference_closed_forms() {
        let v = reference_density(ReferenceModel::Disk { radius: 1.0 }, Vec2::ZERO).unwrap();
        assert!((v - 2.0).abs() < 1e-15);

        let v = reference_density(
            ReferenceModel::PuncturedDisk { radius: 1.0 },
            Vec2::new(0.1, 0.0),
        )
        .unwrap();
        assert!((v - 1.0 / (0.1 * 10.0f64.ln())).abs() < 1e-12);

        // annulus at the core circle |z| = sqrt(r)
        let r = 0.2f64;
        let v = reference_density(ReferenceModel::Annulus { inner: r }, Vec2::new(r.sqrt(), 0.0))
            .unwrap();
        let expect = std::f64::consts::PI / (r.sqrt() * (1.0 / r).ln());
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn reference_rejects_outside() {
        assert!(reference_density(ReferenceModel::Disk { radius: 1.0 }, Vec2::new(1.0, 0.0)).is_err());
        assert!(
            reference_density(ReferenceModel::PuncturedDisk { radius: 1.0 }, Vec2::ZERO).is_err()
        );
        assert!(
            reference_density(ReferenceModel::Annulus { inner: 0.3 }, Vec2::new(0.2, 0.0)).is_err()
        );
    }

    #[test]
    fn estimators_bracket_references() {
        // the density-oracle acceptance check at small scale
        let models = [
            ReferenceModel::Disk { radius: 1.0 },
            ReferenceModel::PuncturedDisk { radius: 1.0 },
            ReferenceModel::Annulus { inner: 0.2 },
        ];
        for model in models {
            let (domain, punctures) = reference_as_domain(model);
            let s = PunctureSet::new(&domain, punctures).unwrap();
            for k in 0..500 {
                let ang = 2.399963 * k as f64; // golden-angle sweep
                let rad = match model {
                    ReferenceModel::Annulus { inner } => {
                        inner + (1.0 - inner) * (k as f64 + 0.5) / 500.0
                    }
                    _ => 0.999 * (k as f64 + 0.5) / 500.0,
                };
                let z = Vec2::new(rad * ang.cos(), rad * ang.sin());
                let reference = match reference_density(model, z) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if s.min_dist(z) == 0.0 || domain.dist_to_boundary(z) == 0.0 {
                    continue;
                }
                let b = density_bracket(&domain, &s, z).unwrap();
                assert!(
                    b.lower <= reference * (1.0 + 1e-12),
                    "lower {} > reference {} at {:?}",
                    b.lower,
                    reference,
                    z
                );
                assert!(
                    reference <= b.upper * (1.0 + 1e-12),
                    "reference {} > upper {} at {:?}",
                    reference,
                    b.upper,
                    z
                );
            }
        }
    }

    #[test]
    fn puncture_monotonicity() {
        let disk = CircleDomain::unit_disk();
        let s1 = PunctureSet::new(&disk, vec![Vec2::new(0.3, 0.0)]).unwrap();
        let s2 =
            PunctureSet::new(&disk, vec![Vec2::new(0.3, 0.0), Vec2::new(-0.2, 0.4)]).unwrap();
        for k in 0..100 {
            let ang = 0.17 * k as f64;
            let rad = 0.95 * ((k as f64 + 0.5) / 100.0);
            let z = Vec2::new(rad * ang.cos(), rad * ang.sin());
            if s2.min_dist(z) < 1e-9 {
                continue;
            }
            let u1 = upper_density(&disk, &s1, z).unwrap();
            let u2 = upper_density(&disk, &s2, z).unwrap();
            assert!(u1 <= u2 * (1.0 + 1e-15));
            let l1 = lower_density(&disk, &s1, z).unwrap();
            let l2 = lower_density(&disk, &s2, z).unwrap();
            assert!(l1 <= l2 * (1.0 + 1e-15));
        }
    }

    #[test]
    fn blowup_rates_near_puncture() {
        let disk = CircleDomain::unit_disk();
        let p = Vec2::new(0.2, -0.1);
        let s = PunctureSet::new(&disk, vec![p]).unwrap();
        let dir = Vec2::new(0.6, 0.8);
        for k in 3..12 {
            let eps = 0.5f64.powi(k);
            let z = p + dir * eps;
            let up = upper_density(&disk, &s, z).unwrap();
            assert!((up * eps - 2.0).abs() < 1e-9);
            let lo = lower_density(&disk, &s, z).unwrap();
            let scaled = lo * eps * (1.0 / eps).ln();
            assert!(scaled > 0.5, "lower blow-up too slow: {scaled}");
        }
    }
}
