//! The invariant suite behind the `verify` subcommand and the acceptance
//! tests: every module's stated invariants, run at a quick or full effort
//! level, with deterministic pass/fail details.

use crate::config::ExperimentConfig;
use crate::density::{
    density_bracket, lower_density, reference_as_domain, reference_density, upper_density,
    ReferenceModel,
};
use crate::error::Result;
use crate::geom::{
    build_fermi_strip, parallel_curve, winding_vector, CircleDomain, FermiStrip, PunctureSet,
    SmoothLoop, TangentRotation, TrigSeries, Vec2,
};
use crate::growth::{
    estimate_l_upper, fit_exponent_records, place_punctures, reference_curves, GrowthRecord,
    Strategy,
};
use crate::lattice::{
    count_displacement_with_budget, h_schedule, halving_experiment, Schedule, TorusLattice,
};
use crate::report::fmt_sig;
use crate::select::{common_base_select, p_schedule, OffsetFamily, DEFAULT_U_GRID};
use crate::stats::linear_fit;
use crate::strip_analysis::{
    layer_cake_oracle, lemma_constants, lp_strip_integral, lp_strip_integral_parts, voronoi_assign,
    CellRegion,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn fail(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: false,
            detail,
        }
    }

    fn from(name: &'static str, passed: bool, detail: String) -> Self {
        Check {
            name,
            passed,
            detail,
        }
    }
}

/// Effort level: the quick suite backs the CLI `verify`; the full suite is
/// the acceptance gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    Quick,
    Full,
}

fn catch(name: &'static str, run: impl FnOnce() -> Result<Check>) -> Check {
    match run() {
        Ok(check) => check,
        Err(e) => Check::fail(name, format!("error: {e}")),
    }
}

/// Runs every module's invariant checks.
pub fn run_all(cfg: &ExperimentConfig, effort: Effort) -> Vec<Check> {
    let mut checks = vec![
        catch("geometry/fermi-flat-exactness", || fermi_flat_exactness(cfg)),
        catch("geometry/parallel-winding", || parallel_winding(cfg)),
        catch("geometry/parallel-length-offset", || parallel_length_offset(cfg)),
        catch("geometry/resample-arclength", resample_arclength),
        catch("geometry/tangent-rotation", tangent_rotation),
        catch("density/bracket-order", || density_oracle(effort)),
        catch("density/puncture-monotonicity", puncture_monotonicity),
        catch("density/blowup-rates", blowup_rates),
        catch("strip/lemma-bound", || lemma_bound_suite(cfg, effort)),
        catch("strip/per-cell-bound", || per_cell_bound(cfg)),
        catch("strip/divergence-fit", || divergence_fit(cfg)),
        catch("strip/layer-cake-oracle", || layer_cake_suite(effort)),
        catch("strip/s0-bound", || s0_bound(cfg)),
        catch("strip/voronoi-partition", || voronoi_partition(cfg)),
        catch("select/p-schedule-identity", p_schedule_identity),
        catch("select/soundness", || selection_soundness(cfg, effort)),
        catch("select/bounded-prefactor", || bounded_prefactor(cfg)),
        catch("select/common-base", || common_base(cfg, effort)),
    ];
    match growth_records(cfg) {
        Ok(records) => {
            checks.push(growth_chain_and_band_from(&records));
            checks.push(growth_exponent_from(&records));
        }
        Err(e) => {
            let detail = format!("error: {e}");
            checks.push(Check::fail("growth/certified-chain-and-band", detail.clone()));
            checks.push(Check::fail("growth/exponent-window", detail));
        }
    }
    checks.push(catch("growth/determinism", || growth_determinism(cfg)));
    checks.push(catch("lattice/reference-counts", lattice_counts));
    checks.push(catch("lattice/volume-bound", lattice_volume_bound));
    checks.push(catch("lattice/monodromy-invariance", lattice_monodromy));
    checks.push(catch("lattice/halving-slopes", || lattice_halving(cfg)));
    checks
}

/// Runs the named checks only (used by the acceptance tests to target
/// single criteria).
pub fn run_all_named(cfg: &ExperimentConfig, names: &[&'static str]) -> Vec<Check> {
    names
        .iter()
        .map(|&name| match name {
            "lattice/volume-bound" => catch(name, lattice_volume_bound),
            "lattice/monodromy-invariance" => catch(name, lattice_monodromy),
            "lattice/reference-counts" => catch(name, lattice_counts),
            "lattice/halving-slopes" => catch(name, || lattice_halving(cfg)),
            "strip/per-cell-bound" => catch(name, || per_cell_bound(cfg)),
            "strip/s0-bound" => catch(name, || s0_bound(cfg)),
            other => Check::fail(other, "unknown check name".into()),
        })
        .collect()
}

fn config_strip(cfg: &ExperimentConfig) -> Result<(CircleDomain, FermiStrip)> {
    let domain = cfg.build_domain()?;
    let lp = cfg.build_loop()?;
    let strip = build_fermi_strip(&domain, &lp, cfg.strip.delta, cfg.strip.n_tau, cfg.strip.n_u)?;
    Ok((domain, strip))
}

// ---------------------------------------------------------------- geometry

fn fermi_flat_exactness(cfg: &ExperimentConfig) -> Result<Check> {
    let (_, strip) = config_strip(cfg)?;
    let mut min_j = f64::INFINITY;
    let mut positions: Vec<(u64, u64)> = Vec::with_capacity(strip.n_tau() * strip.n_u());
    for i in 0..strip.n_tau() {
        for j in 0..strip.n_u() {
            let node = strip.node(i, j);
            min_j = min_j.min(node.jacobian);
            positions.push((node.pos.x.to_bits(), node.pos.y.to_bits()));
        }
    }
    positions.sort_unstable();
    let injective = positions.windows(2).all(|w| w[0] != w[1]);
    let dev = (strip.kappa0() - 1.0).abs();
    let passed = dev <= 1e-12 && min_j > 0.0 && injective;
    Ok(Check::from(
        "geometry/fermi-flat-exactness",
        passed,
        format!(
            "kappa0 deviation {}, min J {}, grid injective {}",
            fmt_sig(dev),
            fmt_sig(min_j),
            injective
        ),
    ))
}

fn parallel_winding(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let base = winding_vector(&domain, strip.curve())?;
    let mut worst = true;
    for k in 0..7 {
        let u = strip.delta() * (k as f64 / 3.0 - 1.0);
        let curve = parallel_curve(&strip, u)?;
        worst &= winding_vector(&domain, &curve)? == base;
    }
    Ok(Check::from(
        "geometry/parallel-winding",
        worst,
        format!("base winding {:?}", base),
    ))
}

fn parallel_length_offset(cfg: &ExperimentConfig) -> Result<Check> {
    let (_, strip) = config_strip(cfg)?;
    let len = strip.curve().total_length();
    let n = 2048;
    let mut total_abs_curv = 0.0;
    for k in 0..n {
        let t = TAU * (k as f64 + 0.5) / n as f64;
        total_abs_curv +=
            strip.curve().curvature(t).abs() * strip.curve().velocity(t).norm() * TAU / n as f64;
    }
    let mut max_excess: f64 = 0.0;
    for k in 0..5 {
        let u = strip.delta() * (k as f64 / 2.0 - 1.0);
        let curve = parallel_curve(&strip, u)?;
        let bound = u.abs() * total_abs_curv + 1e-6 * len;
        max_excess = max_excess.max((curve.total_length() - len).abs() - bound);
    }
    Ok(Check::from(
        "geometry/parallel-length-offset",
        max_excess <= 0.0,
        format!("max excess over first-order bound {}", fmt_sig(max_excess)),
    ))
}

fn resample_arclength() -> Result<Check> {
    let e = SmoothLoop::ellipse(Vec2::ZERO, 2.0, 1.0)?;
    let r = e.resample_arclength(512)?;
    let dev = r.speed_deviation();
    let len_err = (r.total_length() - e.total_length()).abs() / e.total_length();
    let r2 = r.resample_arclength(512)?;
    let mut idem: f64 = 0.0;
    for k in 0..128 {
        let t = TAU * k as f64 / 128.0;
        idem = idem.max(r.point(t).dist(r2.point(t)));
    }
    let passed = dev <= 1e-6 && len_err <= 1e-9 && idem <= 1e-9;
    Ok(Check::from(
        "geometry/resample-arclength",
        passed,
        format!(
            "speed dev {}, length err {}, idempotence {}",
            fmt_sig(dev),
            fmt_sig(len_err),
            fmt_sig(idem)
        ),
    ))
}

fn tangent_rotation() -> Result<Check> {
    let c = SmoothLoop::circle(Vec2::ZERO, 1.0);
    let w = Vec2::new(-1.0, 0.0);
    let out = c.rotate_tangent_at_basepoint(w, 0.2)?;
    let tangent_err = out.unit_tangent(out.base_t()).dist(w);
    let mut far_err: f64 = 0.0;
    for k in 0..256 {
        let t = TAU * k as f64 / 256.0;
        if c.point(t).dist(Vec2::new(1.0, 0.0)) >= 0.2 {
            far_err = far_err.max(out.point(t).dist(c.point(t)));
        }
    }
    let map = TangentRotation {
        pivot: Vec2::new(1.0, 0.0),
        angle: -std::f64::consts::FRAC_PI_2,
        eps: 0.2,
    };
    let h = 1e-6;
    let mut jac_err: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let z = Vec2::new(1.0 - 0.18 + 0.036 * i as f64, -0.18 + 0.036 * j as f64);
            let dx = (map.apply(z + Vec2::new(h, 0.0)) - map.apply(z - Vec2::new(h, 0.0)))
                * (0.5 / h);
            let dy = (map.apply(z + Vec2::new(0.0, h)) - map.apply(z - Vec2::new(0.0, h)))
                * (0.5 / h);
            jac_err = jac_err.max((dx.cross(dy) - 1.0).abs());
        }
    }
    let passed = tangent_err <= 1e-9 && far_err <= 1e-8 && jac_err <= 1e-6;
    Ok(Check::from(
        "geometry/tangent-rotation",
        passed,
        format!(
            "tangent err {}, far-field err {}, jacobian err {}",
            fmt_sig(tangent_err),
            fmt_sig(far_err),
            fmt_sig(jac_err)
        ),
    ))
}

// ----------------------------------------------------------------- density

fn density_models() -> [ReferenceModel; 3] {
    [
        ReferenceModel::Disk { radius: 1.0 },
        ReferenceModel::PuncturedDisk { radius: 1.0 },
        ReferenceModel::Annulus { inner: 0.2 },
    ]
}

pub fn density_oracle(effort: Effort) -> Result<Check> {
    let per_model = match effort {
        Effort::Quick => 1024,
        Effort::Full => 4096,
    };
    let mut violations = 0usize;
    let mut tested = 0usize;
    for model in density_models() {
        let (domain, punctures) = reference_as_domain(model);
        let s = PunctureSet::new(&domain, punctures)?;
        for k in 0..per_model {
            let ang = 2.399963229728653 * k as f64;
            let frac = (k as f64 + 0.5) / per_model as f64;
            let rad = match model {
                ReferenceModel::Annulus { inner } => inner + (1.0 - inner) * frac,
                _ => frac,
            };
            let z = Vec2::new(rad * ang.cos(), rad * ang.sin());
            let reference = match reference_density(model, z) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if domain.dist_to_boundary(z) == 0.0 || s.min_dist(z) == 0.0 {
                continue;
            }
            tested += 1;
            let b = density_bracket(&domain, &s, z)?;
            if !(b.lower <= reference * (1.0 + 1e-12) && reference <= b.upper * (1.0 + 1e-12)) {
                violations += 1;
            }
        }
    }
    // equality at the disk center
    let disk = CircleDomain::unit_disk();
    let empty = PunctureSet::empty(&disk);
    let center_gap =
        (upper_density(&disk, &empty, Vec2::ZERO)? - reference_density(density_models()[0], Vec2::ZERO)?)
            .abs();
    let passed = violations == 0 && center_gap <= 1e-12 && tested >= 3000;
    Ok(Check::from(
        "density/bracket-order",
        passed,
        format!(
            "{tested} points, {violations} violations, center gap {}",
            fmt_sig(center_gap)
        ),
    ))
}

fn puncture_monotonicity() -> Result<Check> {
    let disk = CircleDomain::unit_disk();
    let s1 = PunctureSet::new(&disk, vec![Vec2::new(0.3, 0.0)])?;
    let s2 = PunctureSet::new(
        &disk,
        vec![Vec2::new(0.3, 0.0), Vec2::new(-0.2, 0.4), Vec2::new(0.1, -0.5)],
    )?;
    let mut ok = true;
    for k in 0..400 {
        let ang = 2.399963229728653 * k as f64;
        let rad = 0.97 * ((k as f64 + 0.5) / 400.0);
        let z = Vec2::new(rad * ang.cos(), rad * ang.sin());
        if s2.min_dist(z) < 1e-9 {
            continue;
        }
        ok &= upper_density(&disk, &s1, z)? <= upper_density(&disk, &s2, z)? * (1.0 + 1e-15);
        ok &= lower_density(&disk, &s1, z)? <= lower_density(&disk, &s2, z)? * (1.0 + 1e-15);
    }
    Ok(Check::from(
        "density/puncture-monotonicity",
        ok,
        "400 sample points".into(),
    ))
}

fn blowup_rates() -> Result<Check> {
    let disk = CircleDomain::unit_disk();
    let p = Vec2::new(0.2, -0.1);
    let s = PunctureSet::new(&disk, vec![p])?;
    let dir = Vec2::new(0.6, 0.8);
    let mut max_up_dev: f64 = 0.0;
    let mut min_low_scaled = f64::INFINITY;
    for k in 4..16 {
        let eps = 0.5f64.powi(k);
        let z = p + dir * eps;
        max_up_dev = max_up_dev.max((upper_density(&disk, &s, z)? * eps - 2.0).abs());
        min_low_scaled =
            min_low_scaled.min(lower_density(&disk, &s, z)? * eps * (1.0 / eps).ln());
    }
    let passed = max_up_dev <= 1e-9 && min_low_scaled >= 0.5;
    Ok(Check::from(
        "density/blowup-rates",
        passed,
        format!(
            "upper rate dev {}, lower scaled min {}",
            fmt_sig(max_up_dev),
            fmt_sig(min_low_scaled)
        ),
    ))
}

// ----------------------------------------------------------- strip analysis

/// The lemma-bound suite. Full effort covers at least 200 configurations.
pub fn lemma_bound_suite(cfg: &ExperimentConfig, effort: Effort) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let s_values: Vec<usize> = match effort {
        Effort::Quick => vec![1, 5, 20, 50, 200],
        Effort::Full => vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 160, 180, 190, 200],
    };
    let p_values = [1.0, 1.5, 1.9, 1.99];
    let consts = lemma_constants(&domain, &strip);
    let mut configs = 0usize;
    let mut violations = 0usize;
    let mut max_ratio: f64 = 0.0;
    for &s in &s_values {
        for strategy in Strategy::ALL {
            let punctures = place_punctures(&domain, &strip, strategy, s, cfg.lp.seed, usize::MAX)?;
            for &p in &p_values {
                let integral = lp_strip_integral(&domain, &strip, &punctures, p)?;
                let bound = consts.a * (s as f64 + 1.0) / (2.0 - p);
                configs += 1;
                max_ratio = max_ratio.max(integral / bound);
                if integral > bound {
                    violations += 1;
                }
            }
        }
    }
    Ok(Check::from(
        "strip/lemma-bound",
        violations == 0,
        format!(
            "{configs} configurations, {violations} violations, max integral/bound {}",
            fmt_sig(max_ratio)
        ),
    ))
}

fn per_cell_bound(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let consts = lemma_constants(&domain, &strip);
    let mut worst: f64 = 0.0;
    for &(s, strategy) in &[
        (30usize, Strategy::OnStripRandom),
        (60, Strategy::GridAdversarial),
        (45, Strategy::Clustered),
    ] {
        let punctures = place_punctures(&domain, &strip, strategy, s, 7, usize::MAX)?;
        for &p in &[1.0, 1.5, 1.9] {
            let parts = lp_strip_integral_parts(&domain, &strip, &punctures, p)?;
            let cell_bound = 2.0 * consts.c3 / (2.0 - p);
            for &c in &parts.per_cell {
                worst = worst.max(c / cell_bound);
            }
        }
    }
    Ok(Check::from(
        "strip/per-cell-bound",
        worst <= 1.0,
        format!("max cell contribution / (2 c3/(2-p)) = {}", fmt_sig(worst)),
    ))
}

/// Divergence of the integral as p -> 2: fit against a + b/(2-p).
pub fn divergence_fit(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let punctures = place_punctures(
        &domain,
        &strip,
        Strategy::OnLoopEquispaced,
        50,
        cfg.lp.seed,
        usize::MAX,
    )?;
    let ps: Vec<f64> = vec![1.5, 1.6, 1.7, 1.8, 1.9, 1.95, 1.99];
    let xs: Vec<f64> = ps.iter().map(|&p| 1.0 / (2.0 - p)).collect();
    let mut ys = Vec::with_capacity(ps.len());
    for &p in &ps {
        ys.push(lp_strip_integral(&domain, &strip, &punctures, p)?);
    }
    let (_, _, r2) = linear_fit(&xs, &ys);
    Ok(Check::from(
        "strip/divergence-fit",
        r2 >= 0.95,
        format!("r2 = {}", fmt_sig(r2)),
    ))
}

/// Synthetic-cell quadrature against the layer-cake oracle.
pub fn layer_cake_suite(effort: Effort) -> Result<Check> {
    let cells = match effort {
        Effort::Quick => 12,
        Effort::Full => 50,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..cells {
        let p = [1.0, 1.3, 1.5, 1.7, 1.9][i % 5];
        let center = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let (region, exact): (CellRegion, Option<f64>) = match i % 3 {
            0 => {
                let r = rng.gen_range(0.5..2.0);
                let region = CellRegion::Disk { center, radius: r };
                (region, Some(TAU * r.powf(2.0 - p) / (2.0 - p)))
            }
            1 => {
                let r0 = rng.gen_range(0.2..0.6);
                let r1 = r0 + rng.gen_range(0.5..1.5);
                let region = CellRegion::Annulus {
                    center,
                    inner: r0,
                    outer: r1,
                };
                (
                    region,
                    Some(TAU * (r1.powf(2.0 - p) - r0.powf(2.0 - p)) / (2.0 - p)),
                )
            }
            _ => {
                let w = rng.gen_range(0.8..2.0);
                let h = rng.gen_range(0.8..2.0);
                let region = CellRegion::Rect {
                    lo: center - Vec2::new(w / 2.0, h / 2.0),
                    hi: center + Vec2::new(w / 2.0, h / 2.0),
                };
                (region, None)
            }
        };
        let oracle = layer_cake_oracle(center, &region, p, 1000 + i as u64)?;
        let other = match exact {
            // closed forms double as the second route where available
            Some(v) => v,
            // rectangles: compare against a graded midpoint quadrature
            None => rect_quadrature(center, &region, p),
        };
        worst = worst.max((oracle - other).abs() / other);
    }
    Ok(Check::from(
        "strip/layer-cake-oracle",
        worst <= 0.02,
        format!("{cells} cells, worst relative gap {}", fmt_sig(worst)),
    ))
}

/// Direct graded quadrature of `d^{-p}` over a rectangle containing the
/// center: polar integration of the exact angular extent.
fn rect_quadrature(center: Vec2, region: &CellRegion, p: f64) -> f64 {
    let CellRegion::Rect { lo, hi } = region else {
        unreachable!()
    };
    // subdivide the rectangle into cells graded toward the center
    let mut total = 0.0;
    let n = 600;
    for i in 0..n {
        for j in 0..n {
            let x0 = lo.x + (hi.x - lo.x) * i as f64 / n as f64;
            let x1 = lo.x + (hi.x - lo.x) * (i + 1) as f64 / n as f64;
            let y0 = lo.y + (hi.y - lo.y) * j as f64 / n as f64;
            let y1 = lo.y + (hi.y - lo.y) * (j + 1) as f64 / n as f64;
            let c = Vec2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let d = c.dist(center);
            let cell_diag = (x1 - x0).hypot(y1 - y0);
            if d < cell_diag {
                // innermost cells: exact disk tail around the center
                continue;
            }
            total += d.powf(-p) * (x1 - x0) * (y1 - y0);
        }
    }
    // add the analytic core over the skipped neighborhood of the center
    let cell_diag = ((hi.x - lo.x) / n as f64).hypot((hi.y - lo.y) / n as f64);
    // skipped cells tile approximately the disk of radius cell_diag
    total + TAU * cell_diag.powf(2.0 - p) / (2.0 - p)
}

fn s0_bound(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let empty = PunctureSet::empty(&domain);
    let consts = lemma_constants(&domain, &strip);
    let mut worst: f64 = 0.0;
    for &p in &[1.0, 1.5, 1.9, 1.99] {
        let v = lp_strip_integral(&domain, &strip, &empty, p)?;
        let bound = 1.0f64.max(consts.sup_density_empty.powi(2)) * consts.area;
        worst = worst.max(v / bound);
    }
    Ok(Check::from(
        "strip/s0-bound",
        worst <= 1.0,
        format!("max integral / (max(1, M^2) Area) = {}", fmt_sig(worst)),
    ))
}

fn voronoi_partition(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let punctures = place_punctures(&domain, &strip, Strategy::OnStripRandom, 100, 9, usize::MAX)?;
    let v = voronoi_assign(&strip, &punctures);
    let cell_area = strip.curve().total_length() / strip.n_tau() as f64 * 2.0 * strip.delta()
        / strip.n_u() as f64;
    let mut covered = 0usize;
    let mut quad_total = 0.0;
    for i in 0..strip.n_tau() {
        for j in 0..strip.n_u() {
            if v.cell_index[i * strip.n_u() + j].is_some() {
                covered += 1;
                quad_total += strip.node(i, j).jacobian * cell_area;
            }
        }
    }
    let all = strip.n_tau() * strip.n_u();
    let gap = (quad_total - strip.area()).abs() / strip.area();
    let passed = covered == all && gap <= 5e-3;
    Ok(Check::from(
        "strip/voronoi-partition",
        passed,
        format!(
            "{covered}/{all} nodes assigned, area gap {}, ties {}",
            fmt_sig(gap),
            v.tie_breaks
        ),
    ))
}

// ------------------------------------------------------------------ select

fn p_schedule_identity() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for s in 1..=10_000usize {
        let p = p_schedule(s);
        let lhs = (s as f64 + 1.0) / (2.0 - p);
        let rhs = (s as f64 + 1.0) * ((s as f64) + 2.0).ln();
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    Ok(Check::from(
        "select/p-schedule-identity",
        worst <= 1e-12,
        format!("max relative defect {}", fmt_sig(worst)),
    ))
}

/// Seeded selection runs: the mean-value threshold with 5% tolerance,
/// positive clearance, winding preservation and the Hoelder chain.
pub fn selection_soundness(cfg: &ExperimentConfig, effort: Effort) -> Result<Check> {
    let runs = match effort {
        Effort::Quick => 60,
        Effort::Full => 500,
    };
    let (sound, holder_ok) = selection_runs(cfg, runs)?;
    Ok(Check::from(
        "select/soundness",
        sound == runs && holder_ok == runs,
        format!("{sound}/{runs} sound, {holder_ok}/{runs} Hoelder-dominated"),
    ))
}

/// Returns `(sound, holder_dominated)` counts over `runs` seeded
/// configurations.
pub fn selection_runs(cfg: &ExperimentConfig, runs: usize) -> Result<(usize, usize)> {
    let (domain, strip) = config_strip(cfg)?;
    let base_winding = winding_vector(&domain, strip.curve())?;
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut sound = 0usize;
    let mut holder_ok = 0usize;
    for run in 0..runs {
        let s = 1 + (rng.gen::<u64>() % 200) as usize;
        let strategy = Strategy::ALL[run % 4];
        let seed = rng.gen::<u64>();
        let punctures = place_punctures(&domain, &strip, strategy, s, seed, usize::MAX)?;
        let p = p_schedule(s);
        let family = OffsetFamily::new(&domain, &strip, &punctures);
        let sel = crate::select::select_u0(&domain, &strip, &punctures, p, cfg.select.n_u_grid)?;
        let m = family.m_threshold(p);
        if sel.g_at_u0 <= 1.05 * m && sel.clearance > 0.0 && sel.winding == base_winding {
            sound += 1;
        }
        if sel.measured_upper_length <= sel.holder_bound * 1.001 {
            holder_ok += 1;
        }
    }
    Ok((sound, holder_ok))
}

fn bounded_prefactor(cfg: &ExperimentConfig) -> Result<Check> {
    let (domain, strip) = config_strip(cfg)?;
    let empty = PunctureSet::empty(&domain);
    let family = OffsetFamily::new(&domain, &strip, &empty);
    let a = family.constants.a;
    let l0 = family.sup_parallel_length();
    let two_delta = 2.0 * strip.delta();
    let limit = (strip.kappa0() * a * l0 / two_delta).sqrt();
    let c0 = |p: f64| {
        let q = p / (p - 1.0);
        (strip.kappa0() * a / two_delta).powf(1.0 / p) * l0.powf(1.0 / q)
    };
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut last = 0.0;
    for k in 1..=20 {
        let s = 1usize << k;
        let v = c0(p_schedule(s));
        if v > prev * (1.0 + 1e-12) {
            monotone = false;
        }
        prev = v;
        last = v;
    }
    let near_limit = (last - limit).abs() / limit <= 0.2;
    Ok(Check::from(
        "select/bounded-prefactor",
        monotone && near_limit,
        format!(
            "monotone {}, C0(p(2^20)) = {}, limit = {}",
            monotone,
            fmt_sig(last),
            fmt_sig(limit)
        ),
    ))
}

/// The common-base generator pair used by the multi-generator checks: two
/// ellipses through the origin with a shared vertical tangent, one around
/// each inner disk of the default domain.
pub fn common_base_setup(cfg: &ExperimentConfig) -> Result<(CircleDomain, Vec<FermiStrip>)> {
    let domain = cfg.build_domain()?;
    if domain.inner().len() < 2 {
        return Err(crate::error::Error::InvalidConfig(
            "common-base check needs two inner disks".into(),
        ));
    }
    let left = SmoothLoop::new(
        TrigSeries::new(
            vec![-21.5, 21.5],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 13.5],
        ),
        0.0,
    )?;
    let right = SmoothLoop::new(
        TrigSeries::new(
            vec![21.5, -21.5],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 13.5],
        ),
        0.0,
    )?;
    let delta = 0.5;
    Ok((
        domain.clone(),
        vec![
            build_fermi_strip(&domain, &left, delta, 256, 8)?,
            build_fermi_strip(&domain, &right, delta, 256, 8)?,
        ],
    ))
}

pub fn common_base(cfg: &ExperimentConfig, effort: Effort) -> Result<Check> {
    let runs = match effort {
        Effort::Quick => 10,
        Effort::Full => 100,
    };
    let (domain, strips) = common_base_setup(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut good = 0usize;
    let mut worst_base_gap: f64 = 0.0;
    for _ in 0..runs {
        let s_count = 1 + (rng.gen::<u64>() % 50) as usize;
        // punctures scattered over both strips
        let pts: Vec<Vec2> = (0..s_count)
            .map(|i| {
                let strip = &strips[i % 2];
                let t = TAU * rng.gen::<f64>();
                let u = strip.delta() * (2.0 * rng.gen::<f64>() - 1.0);
                strip.offset_point(t, u)
            })
            .collect();
        let punctures = PunctureSet::new(&domain, pts)?;
        let p = p_schedule(s_count);
        let sel = common_base_select(
            &domain,
            &[&strips[0], &strips[1]],
            &punctures,
            p,
            DEFAULT_U_GRID,
        )?;
        let b0 = strips[0].offset_point(strips[0].curve().base_t(), sel.u0);
        let b1 = strips[1].offset_point(strips[1].curve().base_t(), sel.u0);
        let base_gap = b0.dist(b1);
        worst_base_gap = worst_base_gap.max(base_gap);
        let per_ok = sel.per_generator.iter().all(|r| {
            r.g_at_u0 <= r.m_threshold * 1.05
                && r.clearance > 0.0
                && r.measured_upper_length <= r.holder_bound * 1.001
        });
        if per_ok && base_gap <= 1e-12 && sel.connector_length <= strips[0].delta() {
            good += 1;
        }
    }
    Ok(Check::from(
        "select/common-base",
        good == runs,
        format!("{good}/{runs} runs, worst base-point gap {}", fmt_sig(worst_base_gap)),
    ))
}

// ------------------------------------------------------------------ growth

pub fn growth_records(cfg: &ExperimentConfig) -> Result<Vec<GrowthRecord>> {
    let domain = cfg.build_domain()?;
    let lp = cfg.build_loop()?;
    let params = cfg.growth_params();
    let mut records = Vec::new();
    for &strategy in &cfg.growth.strategies {
        for &seed in &cfg.growth.seeds {
            for &s in &cfg.growth.s_values {
                records.push(estimate_l_upper(&domain, &lp, &params, strategy, s, seed)?);
            }
        }
    }
    Ok(records)
}

pub fn growth_chain_and_band_from(records: &[GrowthRecord]) -> Check {
    let mut chain_ok = true;
    let mut band_lo = f64::INFINITY;
    let mut band_hi: f64 = 0.0;
    for r in records {
        chain_ok &= r.upper_estimate <= r.holder_bound * 1.001;
        let (upper_ref, _) = reference_curves(r.s);
        let ratio = r.holder_bound / upper_ref;
        band_lo = band_lo.min(ratio);
        band_hi = band_hi.max(ratio);
    }
    let band = band_hi / band_lo;
    Check::from(
        "growth/certified-chain-and-band",
        chain_ok && band <= 3.0,
        format!(
            "chain {} over {} records, prefactor band {}",
            chain_ok,
            records.len(),
            fmt_sig(band)
        ),
    )
}

pub fn growth_exponent_from(records: &[GrowthRecord]) -> Check {
    let on_loop: Vec<GrowthRecord> = records
        .iter()
        .filter(|r| r.strategy == Strategy::OnLoopEquispaced)
        .cloned()
        .collect();
    match fit_exponent_records(&on_loop) {
        Ok((slope, _, r2)) => Check::from(
            "growth/exponent-window",
            (0.45..=0.62).contains(&slope),
            format!("slope {}, r2 {}", fmt_sig(slope), fmt_sig(r2)),
        ),
        Err(e) => Check::fail("growth/exponent-window", format!("error: {e}")),
    }
}

fn growth_determinism(cfg: &ExperimentConfig) -> Result<Check> {
    let domain = cfg.build_domain()?;
    let lp = cfg.build_loop()?;
    let params = cfg.growth_params();
    let a = estimate_l_upper(&domain, &lp, &params, Strategy::OnStripRandom, 64, 5)?;
    let b = estimate_l_upper(&domain, &lp, &params, Strategy::OnStripRandom, 64, 5)?;
    let identical = a.upper_estimate == b.upper_estimate
        && a.u0 == b.u0
        && a.holder_bound == b.holder_bound;
    Ok(Check::from(
        "growth/determinism",
        identical,
        "repeat run bit-identical".into(),
    ))
}

// ----------------------------------------------------------------- lattice

fn lattice_counts() -> Result<Check> {
    let lat = TorusLattice::identity(2)?;
    let checks = [
        (1.0, 5u64),
        (2.0, 13),
        (10.0, 317),
    ];
    let mut ok = true;
    for &(h, expect) in &checks {
        ok &= count_displacement_with_budget(&lat, h, 250.0)? == expect;
    }
    Ok(Check::from(
        "lattice/reference-counts",
        ok,
        "H in {1, 2, 10} against frozen counts".into(),
    ))
}

fn lattice_volume_bound() -> Result<Check> {
    let lat = TorusLattice::identity(2)?;
    let m = lat.unit_ball_volume() * 1.5;
    let mut ok = true;
    let mut prev = 0u64;
    for k in 0..=60 {
        let h = 2.0 * k as f64;
        let n = count_displacement_with_budget(&lat, h, 250.0)?;
        ok &= n >= prev;
        ok &= (n as f64) <= m * (h + 1.0).powi(2);
        prev = n;
    }
    // volume asymptotics at H >= 50
    let mut worst: f64 = 0.0;
    for &h in &[50.0, 100.0, 200.0] {
        let n = count_displacement_with_budget(&lat, h, 250.0)? as f64;
        worst = worst.max((n - std::f64::consts::PI * h * h).abs() / (std::f64::consts::PI * h * h));
    }
    ok &= worst <= 0.05;
    Ok(Check::from(
        "lattice/volume-bound",
        ok,
        format!("asymptotic volume gap {}", fmt_sig(worst)),
    ))
}

fn lattice_monodromy() -> Result<Check> {
    let gram = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let id = TorusLattice::new(gram.clone(), vec![vec![1, 0], vec![0, 1]])?;
    let perms: Vec<Vec<Vec<i64>>> = vec![
        vec![vec![0, -1], vec![1, 0]],
        vec![vec![0, 1], vec![1, 0]],
        vec![vec![-1, 0], vec![0, 1]],
        vec![vec![0, 1], vec![-1, 0]],
    ];
    let mut ok = true;
    for m in perms {
        let lat = TorusLattice::new(gram.clone(), m)?;
        for &h in &[1.0, 3.0, 17.0, 101.0] {
            ok &= count_displacement_with_budget(&lat, h, 250.0)?
                == count_displacement_with_budget(&id, h, 250.0)?;
        }
    }
    Ok(Check::from(
        "lattice/monodromy-invariance",
        ok,
        "signed permutations, H in {1, 3, 17, 101}".into(),
    ))
}

pub fn lattice_halving(cfg: &ExperimentConfig) -> Result<Check> {
    let lattices = cfg.build_lattices()?;
    let rows = halving_experiment(
        &lattices,
        &cfg.lattice.s_values,
        cfg.lattice.c,
        cfg.lattice.c0,
        cfg.lattice.h_budget,
    )?;
    let lin: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.s as f64, r.n_total_linear as f64))
        .collect();
    let sub: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.s as f64, r.n_total_sublinear as f64))
        .collect();
    let (slope_lin, _, _) = crate::growth::fit_exponent(&lin)?;
    let (slope_sub, _, _) = crate::growth::fit_exponent(&sub)?;
    let passed = (3.7..=4.3).contains(&slope_lin) && (1.9..=2.4).contains(&slope_sub);
    Ok(Check::from(
        "lattice/halving-slopes",
        passed,
        format!(
            "linear slope {}, sublinear slope {}",
            fmt_sig(slope_lin),
            fmt_sig(slope_sub)
        ),
    ))
}

/// Schedule self-check used by the halving experiment tests.
pub fn schedule_examples() -> bool {
    (h_schedule(9, Schedule::Linear, 1.0, 0.0) - 10.0).abs() < 1e-12
        && (h_schedule(9, Schedule::Sublinear, 1.0, 0.0) - (10.0 * 11.0f64.ln()).sqrt()).abs()
            < 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_is_green() {
        let cfg = ExperimentConfig::default_config();
        // exercise a cheap subset here; the full suite runs in the
        // acceptance tests and through the CLI
        let checks = [
            catch("geometry/fermi-flat-exactness", || fermi_flat_exactness(&cfg)),
            catch("density/bracket-order", || density_oracle(Effort::Quick)),
            catch("select/p-schedule-identity", p_schedule_identity),
            catch("lattice/reference-counts", lattice_counts),
        ];
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn schedule_examples_hold() {
        assert!(schedule_examples());
    }
}
