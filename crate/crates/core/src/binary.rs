//! 0-1 quadratic programs, their canonical dual, and certificates for the
//! corrected pairing between dual critical points and primal minimizers.
//!
//! The primal is `P(x) = ½xᵀQx − fᵀx` over `{0,1}ⁿ`, relaxed over `[0,1]ⁿ`.
//! With `Q_d(σ) = Q + 2·Diag(σ)` the total complementary function and the
//! dual are
//!
//! ```text
//! Ξ(x,σ)  = ½xᵀQ_d(σ)x − xᵀ(f+σ),
//! Pᵈ(σ)   = −½(f+σ)ᵀ Q_d(σ)⁻¹ (f+σ).
//! ```
//!
//! Stationarity of Ξ in x gives `x = Q_d(σ)⁻¹(f+σ)`; stationarity in σ
//! forces x binary. Inverting that observation enumerates *all* dual
//! critical points in closed form: for each binary target x* the unique
//! multiplier is `σ_i = (2x*_i − 1)(f_i − (Qx*)_i)`. Each candidate lands in
//! the positive branch (σ > 0, Q_d positive definite — dual value pairs with
//! the global binary minimum), the negative branch (σ > 0, Q_d negative
//! definite — pairs with a local minimizer on the relaxed box), or is
//! rejected. The certificates check those pairings against independent
//! oracles: exhaustive enumeration, grid and ball sampling, and the dual
//! Hessian's sign.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{DefinitenessClass, SymMatrix};
use crate::oracle::{brute_force_binary_min, grid_min, index_to_bits, uniform_in_ball, OracleConfig, MAX_BINARY_N, MAX_GRID_DIM};
use crate::report::{ClaimStatus, Witness};
use crate::{Error, Result};

/// Components within this band of zero make a multiplier degenerate; strict
/// positivity for branch membership means exceeding it.
pub const SIGMA_STRICTNESS_TOL: f64 = 1e-12;
/// Closed-form consistency bound: `‖Q_d(σ)x* − (f+σ)‖∞` per critical pair.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Problem data: symmetric Q and linear term f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryProblem {
    q: SymMatrix,
    f: Vec<f64>,
}

/// Which dual branch a critical multiplier lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// σ > 0 componentwise and Q_d(σ) positive definite.
    SharpPlus,
    /// σ > 0 componentwise and Q_d(σ) negative definite.
    SharpMinus,
    /// Everything else (non-positive components or indefinite/singular Q_d).
    Rejected,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::SharpPlus => "SharpPlus",
            Branch::SharpMinus => "SharpMinus",
            Branch::Rejected => "Rejected",
        };
        f.write_str(s)
    }
}

/// One enumerated dual critical point and its paired binary target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    /// The binary target as a 0/1 vector.
    pub x_star: Vec<f64>,
    /// The same target as a bitstring, e.g. `"101"`.
    pub bits: String,
    /// The closed-form multiplier `σ_i = (2x*_i − 1)(f_i − (Qx*)_i)`.
    pub sigma: Vec<f64>,
    pub branch: Branch,
    /// True when some |σ_i| ≤ 1e-12: the strict branch inequalities are
    /// undecidable at floating precision, so the pair is Rejected.
    pub degenerate: bool,
    /// `Pᵈ(σ) = −½(f+σ)ᵀx*`; the contraction is exact at critical pairs and
    /// stays defined even when Q_d(σ) is singular.
    pub dual_value: f64,
    pub primal_value: f64,
    /// `‖Q_d(σ)x* − (f+σ)‖∞` (zero up to rounding, by construction).
    pub residual: f64,
}

/// The ∞-norm neighborhood certified by the local-minimality argument:
/// the proof inequality `min_k σ̄_k ≥ (n/2)·ε·max|q_ij|` taken at equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBall {
    pub epsilon: f64,
    pub center: Vec<f64>,
}

/// One PASS/FAIL clause of a certificate, with a witness on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateClause {
    pub name: String,
    pub status: ClaimStatus,
    pub detail: String,
    pub witness: Option<Witness>,
}

/// Outcome of certifying one critical pair's claimed extremal property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub branch: Branch,
    pub clauses: Vec<CertificateClause>,
    pub pass: bool,
    /// The certified neighborhood radius (negative-branch certificates only).
    pub epsilon: Option<f64>,
    /// Exact binary minimum from the exhaustive oracle.
    pub binary_minimum: f64,
    /// Every binary argmin, as bitstrings.
    pub binary_argmins: Vec<String>,
    pub notes: Vec<String>,
}

impl BinaryProblem {
    pub fn new(q: SymMatrix, f: Vec<f64>) -> Result<Self> {
        if f.len() != q.dim() {
            return Err(Error::InvalidProblem(format!(
                "Q is {0}x{0} but f has {1} entries",
                q.dim(),
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("f must be finite".into()));
        }
        Ok(BinaryProblem { q, f })
    }

    pub fn q(&self) -> &SymMatrix {
        &self.q
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.q.dim()
    }

    /// `P(x) = ½xᵀQx − fᵀx`; x need not be binary.
    pub fn primal_value(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x) - dot(&self.f, x)
    }

    /// `Q_d(σ) = Q + 2·Diag(σ)`.
    pub fn q_d(&self, sigma: &[f64]) -> SymMatrix {
        self.q.add_scaled(&SymMatrix::from_diag(sigma), 2.0)
    }

    /// `Ξ(x,σ) = ½xᵀQ_d(σ)x − xᵀ(f+σ)`. Coincides with the primal on binary
    /// x and is affine in σ at fixed x.
    pub fn xi_value(&self, x: &[f64], sigma: &[f64]) -> f64 {
        let fs: Vec<f64> = self.f.iter().zip(sigma).map(|(a, b)| a + b).collect();
        0.5 * self.q_d(sigma).quad_form(x) - dot(x, &fs)
    }

    fn solve_qd(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        let fs: Vec<f64> = self.f.iter().zip(sigma).map(|(a, b)| a + b).collect();
        self.q_d(sigma).solve(&fs).map_err(|_| Error::SingularQd)
    }

    /// `Pᵈ(σ) = −½(f+σ)ᵀ Q_d(σ)⁻¹ (f+σ)`.
    pub fn dual_value(&self, sigma: &[f64]) -> Result<f64> {
        let x = self.solve_qd(sigma)?;
        let fs: Vec<f64> = self.f.iter().zip(sigma).map(|(a, b)| a + b).collect();
        Ok(-0.5 * dot(&fs, &x))
    }

    /// Gradient of the dual: component i is `x_i² − x_i` with
    /// `x = Q_d(σ)⁻¹(f+σ)` — the algebraic reduction of the directional
    /// form checked by [`BinaryProblem::dual_directional_literal`].
    pub fn dual_gradient(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        let x = self.solve_qd(sigma)?;
        Ok(x.iter().map(|xi| xi * xi - xi).collect())
    }

    /// The directional derivative in its literal bilinear form,
    /// `−vᵀQ_d⁻¹(f+σ) + (f+σ)ᵀQ_d⁻¹ Diag(v) Q_d⁻¹(f+σ)`, kept verbatim so
    /// the reduced gradient can be tested against it.
    pub fn dual_directional_literal(&self, sigma: &[f64], v: &[f64]) -> Result<f64> {
        let x = self.solve_qd(sigma)?;
        let diag_vx: f64 = v.iter().zip(&x).map(|(vi, xi)| vi * xi * xi).sum();
        Ok(-dot(v, &x) + diag_vx)
    }

    /// Dual Hessian, assembled from the three terms of the second
    /// differential: with `M = Q_d(σ)⁻¹`, `x = M(f+σ)`, `D = Diag(x)`,
    ///
    /// ```text
    /// H = −M + 2(MD + DM) − 4·D M D,
    /// ```
    ///
    /// which contracts to `H_ij = −M_ij(2x_i−1)(2x_j−1)`.
    pub fn dual_hessian(&self, sigma: &[f64]) -> Result<SymMatrix> {
        let m = self.q_d(sigma).inverse().map_err(|_| Error::SingularQd)?;
        let x = self.solve_qd(sigma)?;
        let n = self.n();
        let mut h = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mij = m.get(i, j);
                let term1 = -mij;
                let term2 = 2.0 * (mij * x[j] + x[i] * mij);
                let term3 = -4.0 * x[i] * mij * x[j];
                h.set(i, j, term1 + term2 + term3);
            }
        }
        Ok(h)
    }

    /// Enumerates every dual critical point in closed form, in lexicographic
    /// bitstring order of the binary target. Errors with
    /// [`Error::InstanceTooLarge`] beyond n = 24.
    pub fn enumerate_criticals(&self) -> Result<Vec<CriticalPair>> {
        let n = self.n();
        if n > MAX_BINARY_N {
            return Err(Error::InstanceTooLarge {
                what: "binary dimension n",
                got: n,
                limit: MAX_BINARY_N,
            });
        }
        let mut pairs = Vec::with_capacity(1usize << n);
        let mut x = vec![0.0f64; n];
        for k in 0u64..(1u64 << n) {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = ((k >> (n - 1 - i)) & 1) as f64;
            }
            let qx = self.q.matvec(&x);
            let sigma: Vec<f64> = (0..n)
                .map(|i| (2.0 * x[i] - 1.0) * (self.f[i] - qx[i]))
                .collect();
            let fs: Vec<f64> = self.f.iter().zip(&sigma).map(|(a, b)| a + b).collect();
            // Residual of Q_d(σ)x* = f + σ: zero by construction, recomputed
            // as a guard against arithmetic slips.
            let qdx = self.q_d(&sigma).matvec(&x);
            let residual = qdx
                .iter()
                .zip(&fs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let degenerate = sigma.iter().any(|s| s.abs() <= SIGMA_STRICTNESS_TOL);
            let strictly_positive = sigma.iter().all(|s| *s > SIGMA_STRICTNESS_TOL);
            let branch = if degenerate || !strictly_positive {
                Branch::Rejected
            } else {
                match self.q_d(&sigma).classify(None).class {
                    DefinitenessClass::PositiveDefinite => Branch::SharpPlus,
                    DefinitenessClass::NegativeDefinite => Branch::SharpMinus,
                    _ => Branch::Rejected,
                }
            };
            let dual_value = -0.5 * dot(&fs, &x);
            pairs.push(CriticalPair {
                x_star: x.clone(),
                bits: index_to_bits(k, n),
                sigma,
                branch,
                degenerate,
                dual_value,
                primal_value: self.primal_value(&x),
                residual,
            });
        }
        Ok(pairs)
    }

    /// The largest ∞-norm neighborhood radius the local-minimality argument
    /// certifies at this pair: `ε = 2·min_k σ_k / (n·max|q_ij|)`, or ε = 1
    /// (the whole box) when Q = 0. Requires strictly positive multipliers.
    pub fn epsilon_ball(&self, pair: &CriticalPair) -> Result<EpsilonBall> {
        let min_sigma = pair.sigma.iter().copied().fold(f64::INFINITY, f64::min);
        let max_q = self.q.max_abs();
        let epsilon = if max_q == 0.0 {
            1.0
        } else {
            2.0 * min_sigma / (self.n() as f64 * max_q)
        };
        if !(epsilon > 0.0) {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: epsilon,
                range: "(0, inf)",
            });
        }
        Ok(EpsilonBall {
            epsilon,
            center: pair.x_star.clone(),
        })
    }

    /// Certifies the positive-branch pairing: the binary target is the exact
    /// global minimizer over `{0,1}ⁿ`, nothing on the relaxed box `[0,1]ⁿ`
    /// scores below it beyond tolerance, and the multiplier maximizes the
    /// dual among sampled positive-branch points.
    pub fn certify_global_min(
        &self,
        pair: &CriticalPair,
        cfg: &OracleConfig,
    ) -> Result<Certificate> {
        cfg.validate()?;
        if pair.branch != Branch::SharpPlus {
            return Err(Error::WrongBranch {
                expected: "SharpPlus",
                got: pair.branch.to_string(),
            });
        }
        let bf = brute_force_binary_min(self)?;
        let mut clauses = Vec::new();

        let min_matches = (bf.minimum - pair.primal_value).abs()
            <= 1e-12 * pair.primal_value.abs().max(1.0)
            && bf.argmins.contains(&pair.bits);
        clauses.push(CertificateClause {
            name: "binary-global-min".into(),
            status: if min_matches { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail: format!(
                "exhaustive minimum {} at {{{}}}, pair value {} at {}",
                bf.minimum,
                bf.argmins.join(", "),
                pair.primal_value,
                pair.bits
            ),
            witness: (!min_matches).then(|| Witness {
                point: crate::oracle::bits_to_point(&bf.argmins[0]),
                value: bf.minimum,
            }),
        });

        clauses.push(self.box_no_lower_clause(pair, cfg)?);
        clauses.push(self.dual_branch_extremality_clause(pair, cfg, Branch::SharpPlus));

        let pass = clauses.iter().all(|c| c.status == ClaimStatus::Pass);
        Ok(Certificate {
            branch: pair.branch,
            clauses,
            pass,
            epsilon: None,
            binary_minimum: bf.minimum,
            binary_argmins: bf.argmins,
            notes: Vec::new(),
        })
    }

    /// Certifies the negative-branch pairing: the binary target is a local
    /// minimizer of the relaxed problem on the certified ε-neighborhood, the
    /// multiplier is minimal among sampled negative-branch points, and the
    /// dual Hessian is positive semidefinite there (convexity on the
    /// branch). Local is not global: the certificate notes when the
    /// exhaustive binary minimum is strictly lower.
    pub fn certify_local_min(
        &self,
        pair: &CriticalPair,
        cfg: &OracleConfig,
    ) -> Result<Certificate> {
        cfg.validate()?;
        if pair.branch != Branch::SharpMinus {
            return Err(Error::WrongBranch {
                expected: "SharpMinus",
                got: pair.branch.to_string(),
            });
        }
        let ball = self.epsilon_ball(pair)?;
        let bf = brute_force_binary_min(self)?;
        let mut clauses = Vec::new();
        let mut notes = Vec::new();

        clauses.push(self.epsilon_ball_clause(pair, &ball, cfg));
        clauses.push(self.dual_branch_extremality_clause(pair, cfg, Branch::SharpMinus));

        let hess_clause = match self.dual_hessian(&pair.sigma) {
            Ok(h) => {
                let min_eig = h.eigenvalues()[0];
                CertificateClause {
                    name: "dual-hessian-convex".into(),
                    status: if min_eig >= -1e-8 { ClaimStatus::Pass } else { ClaimStatus::Fail },
                    detail: format!("smallest Hessian eigenvalue {min_eig:.3e} (bound -1e-8)"),
                    witness: None,
                }
            }
            Err(_) => CertificateClause {
                name: "dual-hessian-convex".into(),
                status: ClaimStatus::Fail,
                detail: "Q_d(σ) singular: Hessian undefined".into(),
                witness: None,
            },
        };
        clauses.push(hess_clause);

        if bf.minimum < pair.primal_value - 1e-12 {
            notes.push(format!(
                "local, not global: exhaustive binary minimum {} at {{{}}} sits below this pair's value {}",
                bf.minimum,
                bf.argmins.join(", "),
                pair.primal_value
            ));
        }
        let pass = clauses.iter().all(|c| c.status == ClaimStatus::Pass);
        Ok(Certificate {
            branch: pair.branch,
            clauses,
            pass,
            epsilon: Some(ball.epsilon),
            binary_minimum: bf.minimum,
            binary_argmins: bf.argmins,
            notes,
        })
    }

    /// Clause: no point of the relaxed box scores below the pair's value —
    /// seeded uniform sampling, reinforced by a dense grid when the node
    /// count stays small.
    fn box_no_lower_clause(
        &self,
        pair: &CriticalPair,
        cfg: &OracleConfig,
    ) -> Result<CertificateClause> {
        let threshold = pair.primal_value - 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best = Witness {
            point: pair.x_star.clone(),
            value: pair.primal_value,
        };
        for _ in 0..cfg.samples {
            let x: Vec<f64> = (0..self.n()).map(|_| rng.random::<f64>()).collect();
            let v = self.primal_value(&x);
            if v < best.value {
                best = Witness { point: x, value: v };
            }
        }
        let mut method = format!("{} uniform samples", cfg.samples);
        let grid_nodes = (cfg.grid_resolution as u128).checked_pow(self.n() as u32);
        if self.n() <= MAX_GRID_DIM && grid_nodes.is_some_and(|g| g <= 1_100_000) {
            let bounds = vec![(0.0, 1.0); self.n()];
            let w = grid_min(|x| self.primal_value(x), &bounds, cfg.grid_resolution)?;
            if w.value < best.value {
                best = w;
            }
            method.push_str(&format!(" + grid {} per axis", cfg.grid_resolution));
        }
        let ok = best.value >= threshold;
        Ok(CertificateClause {
            name: "box-no-lower-value".into(),
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail: format!(
                "best relaxed value {} vs pair value {} ({method})",
                best.value, pair.primal_value
            ),
            witness: (!ok).then_some(best),
        })
    }

    /// Clause: every sampled x in the ε-neighborhood (∞-norm, clipped to the
    /// box) scores at least `P(x̄) − 1e-12` — seeded uniform samples plus
    /// deterministic probes along ±e_i and, for n ≤ 12, corner diagonals.
    fn epsilon_ball_clause(
        &self,
        pair: &CriticalPair,
        ball: &EpsilonBall,
        cfg: &OracleConfig,
    ) -> CertificateClause {
        let center = &ball.center;
        let eps = ball.epsilon;
        let n = self.n();
        let clip = |v: f64| v.clamp(0.0, 1.0);
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let mut x = center.clone();
                x[i] = clip(x[i] + sign * eps);
                probes.push(x);
            }
        }
        if n <= 12 {
            for corner in 0u64..(1u64 << n) {
                let x: Vec<f64> = (0..n)
                    .map(|i| {
                        let sign = if (corner >> (n - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 };
                        clip(center[i] + sign * eps)
                    })
                    .collect();
                probes.push(x);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        for _ in 0..cfg.samples {
            let x: Vec<f64> = center
                .iter()
                .map(|c| clip(c + rng.random_range(-eps..=eps)))
                .collect();
            probes.push(x);
        }
        let threshold = pair.primal_value - 1e-12;
        let mut worst: Option<Witness> = None;
        for x in probes {
            let v = self.primal_value(&x);
            if worst.as_ref().is_none_or(|w| v < w.value) {
                worst = Some(Witness { point: x, value: v });
            }
        }
        let worst = worst.expect("probe set is never empty");
        let ok = worst.value >= threshold;
        CertificateClause {
            name: "epsilon-ball-local-min".into(),
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail: format!(
                "worst neighborhood value {} vs pair value {} (epsilon {})",
                worst.value, pair.primal_value, eps
            ),
            witness: (!ok).then_some(worst),
        }
    }

    /// Clause: the pair's multiplier is extremal for the dual among points
    /// sampled in its branch — maximal on the positive branch, minimal on
    /// the negative one. Rejection sampling around σ̄ at radii 0.1, 1, 10.
    fn dual_branch_extremality_clause(
        &self,
        pair: &CriticalPair,
        cfg: &OracleConfig,
        branch: Branch,
    ) -> CertificateClause {
        let reference = pair.dual_value;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
        let per_radius = cfg.samples.div_ceil(3);
        let mut kept = 0usize;
        let mut violation: Option<Witness> = None;
        for radius in [0.1, 1.0, 10.0] {
            for _ in 0..per_radius {
                let step = uniform_in_ball(&mut rng, self.n(), radius);
                let sigma: Vec<f64> = pair.sigma.iter().zip(&step).map(|(s, d)| s + d).collect();
                if !self.in_branch(&sigma, branch) {
                    continue;
                }
                let Ok(v) = self.dual_value(&sigma) else { continue };
                kept += 1;
                let bad = match branch {
                    Branch::SharpPlus => v > reference + 1e-9,
                    Branch::SharpMinus => v < reference - 1e-9,
                    Branch::Rejected => unreachable!("extremality is only probed on sharp branches"),
                };
                if bad && violation.as_ref().is_none_or(|w| match branch {
                    Branch::SharpPlus => v > w.value,
                    _ => v < w.value,
                }) {
                    violation = Some(Witness { point: sigma, value: v });
                }
            }
        }
        let (name, direction) = match branch {
            Branch::SharpPlus => ("dual-max-on-branch", "above"),
            _ => ("dual-min-on-branch", "below"),
        };
        let ok = violation.is_none();
        CertificateClause {
            name: name.into(),
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail: format!(
                "{kept} in-branch samples; none {direction} reference {reference} beyond 1e-9"
            ),
            witness: violation,
        }
    }

    /// Branch membership test used by samplers: strict positivity plus the
    /// branch's definiteness class.
    pub fn in_branch(&self, sigma: &[f64], branch: Branch) -> bool {
        if !sigma.iter().all(|s| *s > SIGMA_STRICTNESS_TOL) {
            return false;
        }
        let class = self.q_d(sigma).classify(None).class;
        match branch {
            Branch::SharpPlus => class == DefinitenessClass::PositiveDefinite,
            Branch::SharpMinus => class == DefinitenessClass::NegativeDefinite,
            Branch::Rejected => false,
        }
    }

    /// Draws a multiplier guaranteed to lie in the positive branch: every
    /// component exceeds `max(0, −λ_min(Q)/2)` by a positive shift, which
    /// forces Q_d positive definite by eigenvalue perturbation.
    pub fn sample_sigma_sharp_plus(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let lam_min = self.q.eigenvalues()[0];
        let shift = (-lam_min / 2.0).max(0.0) + 1e-2;
        (0..self.n()).map(|_| shift + rng.random_range(0.0..2.0)).collect()
    }

    /// Draws a multiplier in the negative branch when one exists (Q must be
    /// negative definite with room below `−λ_max(Q)/2`); `None` otherwise.
    pub fn sample_sigma_sharp_minus(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        let lam_max = *self.q.eigenvalues().last().unwrap();
        let cap = -lam_max / 2.0;
        if cap <= 2e-2 {
            return None;
        }
        Some((0..self.n()).map(|_| rng.random_range(1e-2..cap - 1e-2)).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(q_rows: &[&[f64]], f: &[f64]) -> BinaryProblem {
        let rows: Vec<Vec<f64>> = q_rows.iter().map(|r| r.to_vec()).collect();
        BinaryProblem::new(SymMatrix::from_rows(&rows).unwrap(), f.to_vec()).unwrap()
    }

    fn plus_instance() -> BinaryProblem {
        prob(&[&[2.0]], &[3.0])
    }

    fn minus_instance() -> BinaryProblem {
        prob(&[&[-6.0]], &[-1.0])
    }

    #[test]
    fn primal_and_xi_at_named_points() {
        let p = plus_instance();
        assert_eq!(p.primal_value(&[1.0]), -2.0);
        assert_eq!(p.primal_value(&[0.0]), 0.0);
        assert_eq!(p.xi_value(&[0.5], &[1.0]), -1.5);
        assert_eq!(p.xi_value(&[0.0], &[1.0]), 0.0);
    }

    #[test]
    fn xi_equals_primal_on_binary_points() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let sigmas = [vec![0.7, -0.3], vec![2.0, 5.0], vec![-1.0, 0.0]];
        for bits in 0..4u64 {
            let x = vec![((bits >> 1) & 1) as f64, (bits & 1) as f64];
            for s in &sigmas {
                assert!(
                    (p.xi_value(&x, s) - p.primal_value(&x)).abs() < 1e-12,
                    "x {x:?}, sigma {s:?}"
                );
            }
        }
    }

    #[test]
    fn xi_is_affine_in_sigma() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let x = [0.3, 0.8];
        let sigma = [0.4, 1.1];
        let v = [-0.6, 0.9];
        let at = |t: f64| {
            let s: Vec<f64> = sigma.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            p.xi_value(&x, &s)
        };
        let second_diff = at(2.0) - 2.0 * at(1.0) + at(0.0);
        assert!(second_diff.abs() < 1e-12, "second difference {second_diff}");
    }

    #[test]
    fn primal_recovered_from_xi_by_the_penalty_identity() {
        let p = prob(&[&[1.0, 0.5], &[0.5, -2.0]], &[1.0, -1.0]);
        let x = [0.25, 0.75];
        let sigma = [1.5, -0.5];
        let penalty: f64 = sigma
            .iter()
            .zip(&x)
            .map(|(s, xi)| s * (xi * xi - xi))
            .sum();
        assert!((p.xi_value(&x, &sigma) - (p.primal_value(&x) + penalty)).abs() < 1e-12);
    }

    #[test]
    fn dual_value_at_named_points() {
        let p = plus_instance();
        assert!((p.dual_value(&[1.0]).unwrap() - (-2.0)).abs() < 1e-12);
        // f + σ = 0 makes the dual vanish.
        assert!(p.dual_value(&[-3.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dual_value_errors_on_singular_qd() {
        let p = plus_instance();
        // Q_d = 2 + 2σ = 0 at σ = −1.
        assert!(matches!(p.dual_value(&[-1.0]), Err(Error::SingularQd)));
    }

    #[test]
    fn gradient_reduces_to_the_literal_directional_form() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 50 {
            let sigma = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if p.q_d(&sigma).smallest_singular_value() < 1e-2 {
                continue;
            }
            let grad = p.dual_gradient(&sigma).unwrap();
            for _ in 0..4 {
                let v = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let literal = p.dual_directional_literal(&sigma, &v).unwrap();
                let reduced = dot(&grad, &v);
                assert!(
                    (literal - reduced).abs() <= 1e-10 * literal.abs().max(1.0),
                    "sigma {sigma:?}, v {v:?}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = crate::fd::FdConfig::gradient_default();
        let mut checked = 0;
        while checked < 100 {
            let sigma = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if p.q_d(&sigma).smallest_singular_value() < 5e-2 {
                continue;
            }
            let exact = p.dual_gradient(&sigma).unwrap();
            let fd = crate::fd::fd_gradient(
                |s| p.dual_value(s).unwrap_or(f64::NAN),
                &sigma,
                &cfg,
            )
            .unwrap();
            let rel = crate::fd::rel_err_vec(&fd, &exact);
            assert!(rel <= 1e-5, "sigma {sigma:?}: rel err {rel}");
            checked += 1;
        }
    }

    #[test]
    fn hessian_univariate_frozen_value() {
        let h = plus_instance().dual_hessian(&[1.0]).unwrap();
        assert!((h.get(0, 0) - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn hessian_contracts_to_the_factored_form() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0;
        while checked < 50 {
            let sigma = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if p.q_d(&sigma).smallest_singular_value() < 1e-2 {
                continue;
            }
            let h = p.dual_hessian(&sigma).unwrap();
            let m = p.q_d(&sigma).inverse().unwrap();
            let fs: Vec<f64> = p.f().iter().zip(&sigma).map(|(a, b)| a + b).collect();
            let x = p.q_d(&sigma).solve(&fs).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = -m.get(i, j) * (2.0 * x[i] - 1.0) * (2.0 * x[j] - 1.0);
                    assert!(
                        (h.get(i, j) - want).abs() <= 1e-12 * want.abs().max(1.0),
                        "sigma {sigma:?}, entry ({i},{j})"
                    );
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = crate::fd::FdConfig::hessian_default();
        let mut checked = 0;
        while checked < 50 {
            let sigma = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if p.q_d(&sigma).smallest_singular_value() < 0.2 {
                continue;
            }
            let exact = p.dual_hessian(&sigma).unwrap();
            let fd = crate::fd::fd_hessian(
                |s| p.dual_value(s).unwrap_or(f64::NAN),
                &sigma,
                &cfg,
            )
            .unwrap();
            let rel = crate::fd::rel_err_mat(&fd, &exact);
            assert!(rel <= 1e-4, "sigma {sigma:?}: rel err {rel}");
            checked += 1;
        }
    }

    #[test]
    fn proof_identity_for_the_hessian_quadratic_form() {
        // vᵀHv = −(v−2w)ᵀ Q_d⁻¹ (v−2w) with w = Diag(v)·x, exactly.
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut checked = 0;
        while checked < 200 {
            let sigma = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if p.q_d(&sigma).smallest_singular_value() < 1e-2 {
                continue;
            }
            let h = p.dual_hessian(&sigma).unwrap();
            let fs: Vec<f64> = p.f().iter().zip(&sigma).map(|(a, b)| a + b).collect();
            let x = p.q_d(&sigma).solve(&fs).unwrap();
            let m = p.q_d(&sigma).inverse().unwrap();
            let v = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let u: Vec<f64> = v
                .iter()
                .zip(&x)
                .map(|(vi, xi)| vi - 2.0 * vi * xi)
                .collect();
            let rhs = -m.quad_form(&u);
            let lhs = h.quad_form(&v);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0),
                "sigma {sigma:?}, v {v:?}: {lhs} vs {rhs}"
            );
            checked += 1;
        }
    }

    #[test]
    fn enumeration_on_the_positive_instance() {
        let pairs = plus_instance().enumerate_criticals().unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].bits, "0");
        assert_eq!(pairs[0].sigma, vec![-3.0]);
        assert_eq!(pairs[0].branch, Branch::Rejected);
        assert_eq!(pairs[1].bits, "1");
        assert_eq!(pairs[1].sigma, vec![1.0]);
        assert_eq!(pairs[1].branch, Branch::SharpPlus);
        assert_eq!(pairs[1].dual_value, -2.0);
        assert_eq!(pairs[1].primal_value, -2.0);
        assert!(pairs[1].residual <= 1e-10);
    }

    #[test]
    fn enumeration_on_the_negative_instance() {
        let pairs = minus_instance().enumerate_criticals().unwrap();
        assert_eq!(pairs.len(), 2);
        // x* = 0: σ = (−1)·(−1 − 0) = 1, Q_d = −4 → negative branch.
        assert_eq!(pairs[0].bits, "0");
        assert_eq!(pairs[0].sigma, vec![1.0]);
        assert_eq!(pairs[0].branch, Branch::SharpMinus);
        assert_eq!(pairs[0].dual_value, 0.0);
        // x* = 1: σ = 1·(−1 − (−6)) = 5, Q_d = 4 → positive branch.
        assert_eq!(pairs[1].bits, "1");
        assert_eq!(pairs[1].sigma, vec![5.0]);
        assert_eq!(pairs[1].branch, Branch::SharpPlus);
        assert_eq!(pairs[1].dual_value, -2.0);
    }

    #[test]
    fn zero_instance_degenerates_every_pair() {
        let p = prob(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.0, 0.0]);
        let pairs = p.enumerate_criticals().unwrap();
        assert_eq!(pairs.len(), 4);
        for pair in &pairs {
            assert_eq!(pair.branch, Branch::Rejected);
            assert!(pair.degenerate);
            assert_eq!(pair.sigma, vec![0.0, 0.0]);
        }
        assert_eq!(pairs[0].bits, "00");
        assert_eq!(pairs[3].bits, "11");
    }

    #[test]
    fn enumeration_guards_large_instances() {
        let p = BinaryProblem::new(SymMatrix::zeros(25), vec![0.0; 25]).unwrap();
        assert!(matches!(
            p.enumerate_criticals(),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn every_enumerated_pair_satisfies_the_critical_identities() {
        let p = crate::oracle::random_instance(99, 4, 5.0);
        for pair in p.enumerate_criticals().unwrap() {
            assert!(pair.residual <= RESIDUAL_TOL, "bits {}", pair.bits);
            assert!(
                (pair.dual_value - pair.primal_value).abs()
                    <= 1e-10 * pair.dual_value.abs().max(1.0),
                "bits {}",
                pair.bits
            );
            if p.q_d(&pair.sigma).smallest_singular_value() > 1e-6 {
                let grad = p.dual_gradient(&pair.sigma).unwrap();
                assert!(grad.iter().all(|g| g.abs() <= 1e-10), "bits {}", pair.bits);
                let x = p.q_d(&pair.sigma).solve(
                    &p.f().iter().zip(&pair.sigma).map(|(a, b)| a + b).collect::<Vec<_>>(),
                ).unwrap();
                for (xi, want) in x.iter().zip(&pair.x_star) {
                    assert!((xi - want).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn epsilon_ball_values() {
        let p = minus_instance();
        let pairs = p.enumerate_criticals().unwrap();
        let ball = p.epsilon_ball(&pairs[0]).unwrap();
        assert!((ball.epsilon - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ball.center, vec![0.0]);
        // Zero Q defaults to the whole box.
        let z = prob(&[&[0.0]], &[-2.0]);
        let zp = z.enumerate_criticals().unwrap();
        // x* = 0: σ = (−1)(−2) = 2 > 0, Q_d = 4 posdef → SharpPlus.
        assert_eq!(zp[0].branch, Branch::SharpPlus);
        assert_eq!(z.epsilon_ball(&zp[0]).unwrap().epsilon, 1.0);
    }

    #[test]
    fn certify_global_min_passes_on_the_positive_instance() {
        let p = plus_instance();
        let pairs = p.enumerate_criticals().unwrap();
        let cert = p.certify_global_min(&pairs[1], &OracleConfig::default()).unwrap();
        assert!(cert.pass, "clauses: {:#?}", cert.clauses);
        assert_eq!(cert.binary_minimum, -2.0);
        assert_eq!(cert.binary_argmins, vec!["1".to_string()]);
        assert_eq!(cert.clauses.len(), 3);
        assert!(cert.epsilon.is_none());
    }

    #[test]
    fn certify_local_min_passes_on_the_negative_instance() {
        let p = minus_instance();
        let pairs = p.enumerate_criticals().unwrap();
        let cert = p.certify_local_min(&pairs[0], &OracleConfig::default()).unwrap();
        assert!(cert.pass, "clauses: {:#?}", cert.clauses);
        assert_eq!(cert.epsilon, Some(1.0 / 3.0));
        // The pair at 0 has value 0; the binary minimum −2 at x = 1 makes it
        // local-not-global, which the certificate records.
        assert_eq!(cert.binary_minimum, -2.0);
        assert_eq!(cert.notes.len(), 1);
        assert!(cert.notes[0].contains("local, not global"));
    }

    #[test]
    fn certificates_reject_the_wrong_branch() {
        let p = minus_instance();
        let pairs = p.enumerate_criticals().unwrap();
        assert!(matches!(
            p.certify_global_min(&pairs[0], &OracleConfig::default()),
            Err(Error::WrongBranch { expected: "SharpPlus", .. })
        ));
        assert!(matches!(
            p.certify_local_min(&pairs[1], &OracleConfig::default()),
            Err(Error::WrongBranch { expected: "SharpMinus", .. })
        ));
    }

    #[test]
    fn weak_duality_chain_on_random_pairs() {
        let p = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let sigma = p.sample_sigma_sharp_plus(&mut rng);
            let x: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            let dual = p.dual_value(&sigma).unwrap();
            let xi = p.xi_value(&x, &sigma);
            let primal = p.primal_value(&x);
            assert!(dual <= xi + 1e-10, "sigma {sigma:?}, x {x:?}");
            assert!(xi <= primal + 1e-10, "sigma {sigma:?}, x {x:?}");
        }
    }

    #[test]
    fn dual_is_the_xi_extremum_over_x_on_definite_branches() {
        let plus = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let minus = prob(&[&[-5.0, 1.0], &[1.0, -6.0]], &[1.0, -1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let sigma = plus.sample_sigma_sharp_plus(&mut rng);
            let x_sigma = plus.solve_qd(&sigma).unwrap();
            let dual = plus.dual_value(&sigma).unwrap();
            assert!((plus.xi_value(&x_sigma, &sigma) - dual).abs() <= 1e-9 * dual.abs().max(1.0));
            let x = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            assert!(plus.xi_value(&x, &sigma) >= dual - 1e-10);
        }
        for _ in 0..200 {
            let Some(sigma) = minus.sample_sigma_sharp_minus(&mut rng) else {
                panic!("negative-definite Q admits negative-branch multipliers");
            };
            let dual = minus.dual_value(&sigma).unwrap();
            let x = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            assert!(minus.xi_value(&x, &sigma) <= dual + 1e-10);
        }
    }

    #[test]
    fn hessian_sign_on_sampled_branches() {
        let plus = prob(&[&[1.0, -2.0], &[-2.0, 3.0]], &[0.5, -1.5]);
        let minus = prob(&[&[-5.0, 1.0], &[1.0, -6.0]], &[1.0, -1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let sigma = plus.sample_sigma_sharp_plus(&mut rng);
            assert!(plus.in_branch(&sigma, Branch::SharpPlus));
            let eigs = plus.dual_hessian(&sigma).unwrap().eigenvalues();
            assert!(*eigs.last().unwrap() <= 1e-8, "sigma {sigma:?}");
        }
        for _ in 0..100 {
            let sigma = minus.sample_sigma_sharp_minus(&mut rng).unwrap();
            assert!(minus.in_branch(&sigma, Branch::SharpMinus));
            let eigs = minus.dual_hessian(&sigma).unwrap().eigenvalues();
            assert!(eigs[0] >= -1e-8, "sigma {sigma:?}");
        }
    }

    #[test]
    fn sharp_minus_sampling_is_empty_without_a_negative_definite_q() {
        let p = plus_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        assert!(p.sample_sigma_sharp_minus(&mut rng).is_none());
    }
}
