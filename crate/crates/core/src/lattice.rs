//! Exact displacement-bounded lattice-point counting in Z^{2n} and the
//! exponent-halving experiment comparing the linear and sublinear
//! displacement schedules.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard ceiling on the displacement radius for brute-force enumeration.
pub const DEFAULT_H_BUDGET: f64 = 250.0;

/// Which displacement schedule produced a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Linear,
    Sublinear,
}

impl Schedule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::Sublinear => "sublinear",
        }
    }
}

/// One row of the lattice-count experiment.
#[derive(Debug, Clone, Copy)]
pub struct CountRecord {
    pub h: f64,
    pub n: u64,
    pub s: usize,
    pub schedule: Schedule,
}

/// The fibre lattice of one generator: `Z^{2n}` with a constant Gram form
/// modeling the slice metric, twisted by a unimodular monodromy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusLattice {
    rank: usize,
    gram: Vec<Vec<f64>>,
    monodromy: Vec<Vec<i64>>,
}

impl TorusLattice {
    pub fn new(gram: Vec<Vec<f64>>, monodromy: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 || rank % 2 != 0 {
            return Err(Error::InvalidInput("rank must be even and positive".into()));
        }
        if gram.iter().any(|row| row.len() != rank)
            || monodromy.len() != rank
            || monodromy.iter().any(|row| row.len() != rank)
        {
            return Err(Error::InvalidInput("matrices must be square".into()));
        }
        for i in 0..rank {
            for j in 0..rank {
                if (gram[i][j] - gram[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput("gram matrix must be symmetric".into()));
                }
            }
        }
        if cholesky(&gram).is_none() {
            return Err(Error::InvalidInput(
                "gram matrix must be positive definite".into(),
            ));
        }
        let det = int_det(&monodromy);
        if det.abs() != 1 {
            return Err(Error::InvalidInput(format!(
                "monodromy must be unimodular, |det| = {}",
                det.abs()
            )));
        }
        Ok(TorusLattice {
            rank,
            gram,
            monodromy,
        })
    }

    pub fn identity(rank: usize) -> Result<Self> {
        let gram = (0..rank)
            .map(|i| (0..rank).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let monodromy = (0..rank)
            .map(|i| (0..rank).map(|j| i64::from(i == j)).collect())
            .collect();
        TorusLattice::new(gram, monodromy)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    pub fn monodromy(&self) -> &[Vec<i64>] {
        &self.monodromy
    }

    /// The quadratic form actually counted: `Q = phi^T G phi`.
    pub fn effective_gram(&self) -> Vec<Vec<f64>> {
        let r = self.rank;
        let mut q = vec![vec![0.0; r]; r];
        // G phi
        let mut gphi = vec![vec![0.0; r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut acc = 0.0;
                for (k, row) in self.monodromy.iter().enumerate() {
                    acc += self.gram[i][k] * row[j] as f64;
                }
                gphi[i][j] = acc;
            }
        }
        for i in 0..r {
            for j in 0..r {
                let mut acc = 0.0;
                for k in 0..r {
                    acc += self.monodromy[k][i] as f64 * gphi[k][j];
                }
                q[i][j] = acc;
            }
        }
        q
    }

    /// Volume of the unit ball of the effective Gram norm.
    pub fn unit_ball_volume(&self) -> f64 {
        let q = self.effective_gram();
        let l = cholesky(&q).expect("validated SPD");
        let mut det_sqrt = 1.0;
        for (i, row) in l.iter().enumerate() {
            det_sqrt *= row[i];
        }
        ball_volume(self.rank) / det_sqrt
    }
}

/// Volume of the Euclidean unit ball in dimension `r`.
fn ball_volume(r: usize) -> f64 {
    // pi^{r/2} / Gamma(r/2 + 1); even ranks only in practice
    let half = r as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma_half_integer(r + 2)
}

/// Gamma(k/2) for integer k >= 1.
fn gamma_half_integer(k: usize) -> f64 {
    if k % 2 == 0 {
        // Gamma(m) = (m-1)!
        let m = k / 2;
        (1..m).map(|i| i as f64).product()
    } else {
        // Gamma(1/2 + m) = (2m)! / (4^m m!) sqrt(pi)
        let m = (k - 1) / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for i in 0..m {
            v *= i as f64 + 0.5;
        }
        v
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Integer determinant by fraction-free Gaussian elimination (Bareiss).
fn int_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|row| row.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// Exact count of lattice vectors with `sqrt(beta^T phi^T G phi beta) <= H`
/// by pruned enumeration; parallel over the leading coordinate with exact
/// integer accumulation.
pub fn count_displacement(lattice: &TorusLattice, h: f64) -> Result<u64> {
    count_displacement_with_budget(lattice, h, DEFAULT_H_BUDGET)
}

pub fn count_displacement_with_budget(
    lattice: &TorusLattice,
    h: f64,
    h_budget: f64,
) -> Result<u64> {
    if lattice.rank > 6 {
        return Err(Error::BudgetExceeded {
            what: format!("rank {} exceeds brute-force ceiling 6", lattice.rank),
        });
    }
    if !(h >= 0.0) {
        return Err(Error::InvalidInput("H must be nonnegative".into()));
    }
    if h > h_budget {
        return Err(Error::BudgetExceeded {
            what: format!("H = {h} exceeds budget {h_budget}"),
        });
    }
    let q = lattice.effective_gram();
    let r = lattice.rank;
    let l = cholesky(&q).expect("validated SPD");
    // upper-triangular factor rows: |R beta|^2 = beta^T Q beta, R = L^T
    let rt: Vec<Vec<f64>> = (0..r)
        .map(|i| (0..r).map(|j| l[j][i]).collect())
        .collect();
    let h2 = h * h;
    // outer coordinate range from the last factor row with a safety margin;
    // every candidate is re-checked against the exact form
    let outer_max = (h / rt[r - 1][r - 1]).floor() as i64 + 1;

    let count: u64 = (-outer_max..=outer_max)
        .into_par_iter()
        .map(|b_last| {
            let mut beta = vec![0i64; r];
            beta[r - 1] = b_last;
            count_level(&rt, &q, h2, r - 1, &mut beta)
        })
        .sum();
    Ok(count)
}

/// Recursive pruned enumeration below the fixed coordinates
/// `beta[level..r]`; `level` is the index currently fixed.
fn count_level(rt: &[Vec<f64>], q: &[Vec<f64>], h2: f64, level: usize, beta: &mut [i64]) -> u64 {
    let r = rt.len();
    // residual budget after the rows at and above `level`
    let mut used = 0.0;
    for j in level..r {
        let mut y = 0.0;
        for i in j..r {
            y += rt[j][i] * beta[i] as f64;
        }
        used += y * y;
    }
    let rem = h2 - used;
    if rem < -1e-9 * h2.max(1.0) {
        return 0;
    }
    if level == 0 {
        // all coordinates fixed: exact membership test
        return u64::from(form_value(q, beta) <= h2);
    }
    let j = level - 1;
    let mut c = 0.0;
    for i in level..r {
        c += rt[j][i] * beta[i] as f64;
    }
    let span = rem.max(0.0).sqrt();
    let lo = ((-span - c) / rt[j][j]).floor() as i64 - 1;
    let hi = ((span - c) / rt[j][j]).ceil() as i64 + 1;
    let mut total = 0;
    for b in lo..=hi {
        beta[j] = b;
        if j == 0 {
            if form_value(q, beta) <= h2 {
                total += 1;
            }
        } else {
            total += count_level(rt, q, h2, j, beta);
        }
    }
    beta[j] = 0;
    total
}

fn form_value(q: &[Vec<f64>], beta: &[i64]) -> f64 {
    let r = q.len();
    let mut acc = 0.0;
    for i in 0..r {
        for j in 0..r {
            acc += q[i][j] * beta[i] as f64 * beta[j] as f64;
        }
    }
    acc
}

/// Displacement radius schedules: the linear one models the O(s) length
/// bound, the sublinear one the O(sqrt((s+1) log(s+2))) bound. `c0` models
/// the additive connector constants.
pub fn h_schedule(s: usize, kind: Schedule, c: f64, c0: f64) -> f64 {
    let sf = s as f64;
    match kind {
        Schedule::Linear => c * (sf + 1.0) + c0,
        Schedule::Sublinear => c * ((sf + 1.0) * (sf + 2.0).ln()).sqrt() + c0,
    }
}

/// One row of the halving experiment.
#[derive(Debug, Clone, Copy)]
pub struct HalvingRow {
    pub s: usize,
    pub h_linear: f64,
    pub h_sublinear: f64,
    pub n_total_linear: u64,
    pub n_total_sublinear: u64,
}

/// Counts the splittings under both schedules: the total is the product of
/// the per-generator counts.
pub fn halving_experiment(
    lattices: &[TorusLattice],
    s_values: &[usize],
    c: f64,
    c0: f64,
    h_budget: f64,
) -> Result<Vec<HalvingRow>> {
    if lattices.is_empty() || lattices.len() > 3 {
        return Err(Error::InvalidInput("generator count must be 1..=3".into()));
    }
    for lat in lattices {
        if lat.rank() / 2 > 2 {
            return Err(Error::InvalidInput(
                "fibre dimension n must be 1 or 2".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut row = HalvingRow {
            s,
            h_linear: h_schedule(s, Schedule::Linear, c, c0),
            h_sublinear: h_schedule(s, Schedule::Sublinear, c, c0),
            n_total_linear: 1,
            n_total_sublinear: 1,
        };
        for (kind, h, total) in [
            (
                Schedule::Linear,
                row.h_linear,
                &mut row.n_total_linear,
            ),
            (
                Schedule::Sublinear,
                row.h_sublinear,
                &mut row.n_total_sublinear,
            ),
        ] {
            for lat in lattices {
                let n = count_displacement_with_budget(lat, h, h_budget).map_err(|e| match e {
                    Error::BudgetExceeded { what } => Error::BudgetExceeded {
                        what: format!("(s = {s}, schedule = {}): {what}", kind.as_str()),
                    },
                    other => other,
                })?;
                *total *= n;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
