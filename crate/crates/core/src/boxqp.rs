//! Box-constrained quartic-quadratic programs and their canonical dual.
//!
//! The primal objective combines a quartic "double-well" term with a
//! quadratic:
//!
//! ```text
//! P(x) = ½(½‖Bx‖² − α)² + ½xᵀAx − cᵀx,      x_i² ≤ ℓ_i,
//! ```
//!
//! treated as extended-real: infeasible points score +∞. The dual variables
//! pair a scalar ς against the quartic and a vector σ ≥ 0 against the box.
//! With `G(ς,σ) = A + ςBᵀB + 2·Diag(σ)`, the dual function on the feasible
//! set `S_a = {ς ≥ −α, σ ≥ 0, det G ≠ 0}` is
//!
//! ```text
//! Pᵈ(ς,σ) = −½ cᵀG⁻¹c − ½ς² − ας − ℓᵀσ.
//! ```
//!
//! On the negative-definite branch of S_a the textbook story claims the
//! paired point x̄ = G⁻¹c maximizes the primal locally while (ς,σ) minimizes
//! the dual locally. [`BoxProblem::counterexample`] carries the instance on
//! which both claims fail; [`perturbation_primal`] and [`perturbation_dual`]
//! are the closed-form perturbation paths along which the failure is
//! explicit, and [`BoxProblem::verify_extremum_claims`] reproduces it with
//! deterministic witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{DefinitenessClass, SymMatrix};
use crate::oracle::{grid_min, uniform_in_ball, OracleConfig, MAX_GRID_DIM};
use crate::report::{ClaimStatus, ClaimVerdict, Witness};
use crate::{Error, Result};

/// Gradient-norm bound under which a dual point counts as critical.
pub const CRITICAL_RESIDUAL_TOL: f64 = 1e-8;
/// Absolute slack allowed by the box feasibility test `x_i² ≤ ℓ_i + tol`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Problem data: A (n×n symmetric), B (m×n), c, α > 0, box radii² ℓ ≥ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxProblem {
    a: SymMatrix,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    alpha: f64,
    ell: Vec<f64>,
}

/// One dual point `y* = (ς, σ) ∈ ℝ^(1+n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDualPoint {
    /// The scalar multiplier ς paired with the quartic term.
    pub sigma0: f64,
    /// The vector multiplier σ paired with the box constraints.
    pub sigma: Vec<f64>,
}

impl BoxDualPoint {
    pub fn new(sigma0: f64, sigma: Vec<f64>) -> Self {
        BoxDualPoint { sigma0, sigma }
    }

    /// Flattens to `(ς, σ_1, …, σ_n)`.
    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.sigma.len());
        v.push(self.sigma0);
        v.extend_from_slice(&self.sigma);
        v
    }

    pub fn from_vec(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidProblem(
                "dual point needs at least the scalar component".into(),
            ));
        }
        Ok(BoxDualPoint {
            sigma0: v[0],
            sigma: v[1..].to_vec(),
        })
    }

    fn distance(&self, other: &BoxDualPoint) -> f64 {
        let d0 = self.sigma0 - other.sigma0;
        (d0 * d0
            + self
                .sigma
                .iter()
                .zip(&other.sigma)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>())
        .sqrt()
    }
}

/// Where a dual point sits relative to `S_a` and its definite branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetMembership {
    /// Violates ς ≥ −α, σ ≥ 0, or det G ≠ 0.
    NotInSa,
    /// In S_a with G nonsingular but neither definite branch.
    SaOnly,
    /// In S_a with G positive definite.
    SaPlus,
    /// In S_a with G negative definite.
    SaMinus,
}

impl std::fmt::Display for SetMembership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SetMembership::NotInSa => "NotInSa",
            SetMembership::SaOnly => "SaOnly",
            SetMembership::SaPlus => "SaPlus",
            SetMembership::SaMinus => "SaMinus",
        };
        f.write_str(s)
    }
}

/// Outcome of checking the paired extremum claims at one critical dual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRefutationReport {
    pub membership: SetMembership,
    pub gradient_residual: f64,
    pub x_bar: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|P(x̄) − Pᵈ(ς,σ)|`; the duality identity at a critical point.
    pub identity_gap: f64,
    /// One verdict per applicable claim: on the negative definite branch the
    /// dual-side local-min claim and the primal-side local-max claim, on the
    /// positive definite branch the global-min claim.
    pub claims: Vec<ClaimVerdict>,
}

impl BoxProblem {
    pub fn new(
        a: SymMatrix,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
        alpha: f64,
        ell: Vec<f64>,
    ) -> Result<Self> {
        let n = a.dim();
        if c.len() != n || ell.len() != n {
            return Err(Error::InvalidProblem(format!(
                "inconsistent dimensions: A is {n}x{n}, c has {}, ell has {}",
                c.len(),
                ell.len()
            )));
        }
        if b.is_empty() || b.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidProblem(format!(
                "B must be a nonempty m x {n} matrix"
            )));
        }
        let finite = b.iter().flatten().all(|v| v.is_finite())
            && c.iter().all(|v| v.is_finite())
            && ell.iter().all(|v| v.is_finite())
            && alpha.is_finite();
        if !finite {
            return Err(Error::InvalidProblem(
                "B, c, alpha, and ell must be finite".into(),
            ));
        }
        if !(alpha > 0.0) {
            return Err(Error::OutOfRange {
                what: "alpha",
                value: alpha,
                range: "(0, inf)",
            });
        }
        if let Some(bad) = ell.iter().find(|v| **v < 0.0) {
            return Err(Error::OutOfRange {
                what: "ell component",
                value: *bad,
                range: "[0, inf)",
            });
        }
        Ok(BoxProblem { a, b, c, alpha, ell })
    }

    /// The two-dimensional instance refuting the negative-branch pairing:
    /// A = −4I, B = I, c = (−2,−2), α = 3, ℓ = (4,4).
    pub fn counterexample() -> Self {
        BoxProblem::new(
            SymMatrix::from_diag(&[-4.0, -4.0]),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![-2.0, -2.0],
            3.0,
            vec![4.0, 4.0],
        )
        .expect("static data is well-formed")
    }

    /// The critical dual point `(1, (1,1))` at which the counterexample's
    /// negative-branch claims are refuted.
    pub fn counterexample_critical_point() -> BoxDualPoint {
        BoxDualPoint::new(1.0, vec![1.0, 1.0])
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ell(&self) -> &[f64] {
        self.ell.as_slice()
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    /// `‖Bx‖²`.
    fn b_norm_sq(&self, x: &[f64]) -> f64 {
        self.b
            .iter()
            .map(|row| {
                let r: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                r * r
            })
            .sum()
    }

    /// `BᵀB` as a symmetric matrix.
    fn btb(&self) -> SymMatrix {
        let n = self.n();
        let mut m = SymMatrix::zeros(n);
        for j in 0..n {
            for k in j..n {
                let v: f64 = self.b.iter().map(|row| row[j] * row[k]).sum();
                m.set(j, k, v);
            }
        }
        m
    }

    /// True when every `x_i² ≤ ℓ_i + 1e-12`.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.ell)
            .all(|(xi, li)| xi * xi <= li + FEASIBILITY_TOL)
    }

    /// Extended-real primal value: +∞ outside the box, otherwise
    /// `½(½‖Bx‖² − α)² + ½xᵀAx − cᵀx`.
    pub fn primal_value(&self, x: &[f64]) -> f64 {
        if !self.is_feasible(x) {
            return f64::INFINITY;
        }
        let xi = 0.5 * self.b_norm_sq(x) - self.alpha;
        0.5 * xi * xi + 0.5 * self.a.quad_form(x) - dot(&self.c, x)
    }

    /// `G(ς,σ) = A + ςBᵀB + 2·Diag(σ)`.
    pub fn g_matrix(&self, d: &BoxDualPoint) -> SymMatrix {
        self.a
            .add_scaled(&self.btb(), d.sigma0)
            .add_scaled(&SymMatrix::from_diag(&d.sigma), 2.0)
    }

    /// `x̄ = G(ς,σ)⁻¹ c`.
    pub fn recover_primal(&self, d: &BoxDualPoint) -> Result<Vec<f64>> {
        self.g_matrix(d).solve(&self.c).map_err(|_| Error::SingularG)
    }

    /// `Pᵈ(ς,σ) = −½cᵀG⁻¹c − ½ς² − ας − ℓᵀσ`.
    pub fn dual_value(&self, d: &BoxDualPoint) -> Result<f64> {
        let x = self.recover_primal(d)?;
        Ok(-0.5 * dot(&self.c, &x)
            - 0.5 * d.sigma0 * d.sigma0
            - self.alpha * d.sigma0
            - dot(&self.ell, &d.sigma))
    }

    /// Gradient of the dual at `(ς, σ)`, with `x = G⁻¹c`:
    /// ς-component `½‖Bx‖² − ς − α`, σ-components `x_i² − ℓ_i`.
    pub fn dual_gradient(&self, d: &BoxDualPoint) -> Result<Vec<f64>> {
        let x = self.recover_primal(d)?;
        let mut grad = Vec::with_capacity(1 + self.n());
        grad.push(0.5 * self.b_norm_sq(&x) - d.sigma0 - self.alpha);
        for (xi, li) in x.iter().zip(&self.ell) {
            grad.push(xi * xi - li);
        }
        Ok(grad)
    }

    /// Classifies a dual point against `S_a` and its definite branches.
    /// The inequalities are exact (σ = 0 sits on the boundary, inside S_a);
    /// singularity of G uses the default spectral tolerance.
    pub fn set_membership(&self, d: &BoxDualPoint) -> SetMembership {
        if d.sigma0 < -self.alpha || d.sigma.iter().any(|s| *s < 0.0) {
            return SetMembership::NotInSa;
        }
        let g = self.g_matrix(d);
        if !g.is_invertible(None) {
            return SetMembership::NotInSa;
        }
        match g.classify(None).class {
            DefinitenessClass::PositiveDefinite => SetMembership::SaPlus,
            DefinitenessClass::NegativeDefinite => SetMembership::SaMinus,
            _ => SetMembership::SaOnly,
        }
    }

    /// Checks the extremum claims paired with a critical interior dual point.
    ///
    /// Preconditions (else [`Error::NotCritical`]): ς > −α, σ > 0
    /// componentwise, G nonsingular, and `‖dual_gradient‖ ≤ 1e-8`.
    ///
    /// On the negative definite branch two claims are probed independently:
    ///
    /// * `dual-local-min` — (ς,σ) is claimed a local minimizer of Pᵈ on S_a;
    ///   refuted by a point of S_a within the search radius whose dual value
    ///   sits below `Pᵈ(ς,σ) − margin`;
    /// * `primal-local-max` — x̄ is claimed a local maximizer of P on the
    ///   box; refuted by a feasible point within the radius whose primal
    ///   value exceeds `P(x̄) + margin`.
    ///
    /// Both searches probe the closed perturbation paths first (when the
    /// instance is the bundled counterexample) at γ = 2⁻¹, …, 2⁻¹⁰, then
    /// fall back to seeded random rays. On the positive definite branch the
    /// `box-global-min` claim is checked with a dense grid over the box.
    /// REFUTED is a successful outcome: it means a claim failed on real data.
    pub fn verify_extremum_claims(
        &self,
        d: &BoxDualPoint,
        cfg: &OracleConfig,
    ) -> Result<BoxRefutationReport> {
        cfg.validate()?;
        if d.sigma.len() != self.n() {
            return Err(Error::InvalidProblem(format!(
                "dual point has {} sigma components, expected {}",
                d.sigma.len(),
                self.n()
            )));
        }
        let interior = d.sigma0 > -self.alpha && d.sigma.iter().all(|s| *s > 0.0);
        if !interior {
            return Err(Error::NotCritical {
                residual: f64::INFINITY,
                tol: CRITICAL_RESIDUAL_TOL,
            });
        }
        let grad = self.dual_gradient(d)?;
        let residual = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > CRITICAL_RESIDUAL_TOL {
            return Err(Error::NotCritical {
                residual,
                tol: CRITICAL_RESIDUAL_TOL,
            });
        }

        let membership = self.set_membership(d);
        let x_bar = self.recover_primal(d)?;
        let primal_value = self.primal_value(&x_bar);
        let dual_value = self.dual_value(d)?;
        let identity_gap = (primal_value - dual_value).abs();
        let margin = cfg.margin * dual_value.abs().max(1.0);

        let mut claims = Vec::new();
        match membership {
            SetMembership::SaMinus => {
                claims.push(self.check_dual_local_min(d, dual_value, margin, cfg));
                claims.push(self.check_primal_local_max(&x_bar, primal_value, margin, cfg));
            }
            SetMembership::SaPlus => {
                claims.push(self.check_global_min(primal_value, dual_value, cfg)?);
            }
            _ => {}
        }
        Ok(BoxRefutationReport {
            membership,
            gradient_residual: residual,
            x_bar,
            primal_value,
            dual_value,
            identity_gap,
            claims,
        })
    }

    /// True when this instance is data-identical to the bundled
    /// counterexample, which is when the closed perturbation paths apply.
    fn is_counterexample_instance(&self) -> bool {
        *self == BoxProblem::counterexample()
    }

    fn check_dual_local_min(
        &self,
        d: &BoxDualPoint,
        dual_value: f64,
        margin: f64,
        cfg: &OracleConfig,
    ) -> ClaimVerdict {
        let mut witness: Option<Witness> = None;
        if self.is_counterexample_instance() {
            for k in 1..=10 {
                let gamma = 2.0f64.powi(-k);
                let y = perturbation_dual_point(gamma);
                if y.distance(d) > cfg.radius {
                    continue;
                }
                if self.set_membership(&y) == SetMembership::NotInSa {
                    continue;
                }
                if let Ok(v) = self.dual_value(&y) {
                    if v < dual_value - margin {
                        witness = Some(Witness {
                            point: y.as_vec(),
                            value: v,
                        });
                        break;
                    }
                }
            }
        }
        if witness.is_none() {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut best: Option<Witness> = None;
            for _ in 0..cfg.samples {
                let step = uniform_in_ball(&mut rng, 1 + self.n(), cfg.radius);
                let mut y = d.clone();
                y.sigma0 += step[0];
                for (s, ds) in y.sigma.iter_mut().zip(&step[1..]) {
                    *s += ds;
                }
                if self.set_membership(&y) == SetMembership::NotInSa {
                    continue;
                }
                let Ok(v) = self.dual_value(&y) else { continue };
                if v < dual_value - margin && best.as_ref().is_none_or(|w| v < w.value) {
                    best = Some(Witness {
                        point: y.as_vec(),
                        value: v,
                    });
                }
            }
            witness = best;
        }
        let status = if witness.is_some() {
            ClaimStatus::Refuted
        } else {
            ClaimStatus::Confirmed
        };
        let mut verdict = ClaimVerdict::new("dual-local-min", status, margin)
            .with_value("reference_value", dual_value);
        if let Some(w) = witness {
            verdict = verdict.with_witness(w);
        }
        verdict
    }

    fn check_primal_local_max(
        &self,
        x_bar: &[f64],
        primal_value: f64,
        margin: f64,
        cfg: &OracleConfig,
    ) -> ClaimVerdict {
        let mut witness: Option<Witness> = None;
        if self.is_counterexample_instance() {
            for k in 1..=10 {
                let gamma = 2.0f64.powi(-k);
                let x = perturbation_primal_point(gamma);
                let dist = x
                    .iter()
                    .zip(x_bar)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist > cfg.radius || !self.is_feasible(&x) {
                    continue;
                }
                let v = self.primal_value(&x);
                if v.is_finite() && v > primal_value + margin {
                    witness = Some(Witness { point: x, value: v });
                    break;
                }
            }
        }
        if witness.is_none() {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
            let mut best: Option<Witness> = None;
            for _ in 0..cfg.samples {
                let step = uniform_in_ball(&mut rng, self.n(), cfg.radius);
                let x: Vec<f64> = x_bar.iter().zip(&step).map(|(a, b)| a + b).collect();
                let v = self.primal_value(&x);
                if !v.is_finite() {
                    continue;
                }
                if v > primal_value + margin && best.as_ref().is_none_or(|w| v > w.value) {
                    best = Some(Witness { point: x, value: v });
                }
            }
            witness = best;
        }
        let status = if witness.is_some() {
            ClaimStatus::Refuted
        } else {
            ClaimStatus::Confirmed
        };
        let mut verdict = ClaimVerdict::new("primal-local-max", status, margin)
            .with_value("reference_value", primal_value);
        if let Some(w) = witness {
            verdict = verdict.with_witness(w);
        }
        verdict
    }

    fn check_global_min(
        &self,
        primal_value: f64,
        dual_value: f64,
        cfg: &OracleConfig,
    ) -> Result<ClaimVerdict> {
        let mut status = ClaimStatus::Confirmed;
        let mut witness: Option<Witness> = None;
        if self.n() <= MAX_GRID_DIM {
            let bounds: Vec<(f64, f64)> = self
                .ell
                .iter()
                .map(|l| {
                    let r = l.max(0.0).sqrt();
                    (-r, r)
                })
                .collect();
            let w = grid_min(|x| self.primal_value(x), &bounds, cfg.grid_resolution)?;
            if w.value < primal_value - 1e-9 {
                status = ClaimStatus::Refuted;
                witness = Some(w);
            }
        }
        let mut verdict = ClaimVerdict::new("box-global-min", status, 1e-9)
            .with_value("reference_value", primal_value)
            .with_value("dual_value", dual_value);
        if let Some(w) = witness {
            verdict = verdict.with_witness(w);
        }
        Ok(verdict)
    }
}

/// Primal value along the counterexample's explicit path `(2−γ, 2−γ)`:
/// `−15/2 + ½γ⁴ − 4γ³ + 5γ² + 8γ`, valid for γ ∈ (0,1). Every value is
/// strictly above −15/2, which is what sinks the local-max claim.
pub fn perturbation_primal(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-7.5 + 0.5 * gamma.powi(4) - 4.0 * gamma.powi(3) + 5.0 * gamma * gamma + 8.0 * gamma)
}

/// Dual value along the counterexample's explicit path
/// `(1−16γ, 1+7γ, 1+7γ)`: `−15/2 − 16·γ²(16γ+7)/(2γ+1)`, valid for
/// γ ∈ (0,1). Every value is strictly below −15/2, which is what sinks the
/// dual local-min claim.
pub fn perturbation_dual(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-7.5 - 16.0 * gamma * gamma * (16.0 * gamma + 7.0) / (2.0 * gamma + 1.0))
}

/// The primal-path point `(2−γ, 2−γ)`.
pub fn perturbation_primal_point(gamma: f64) -> Vec<f64> {
    vec![2.0 - gamma, 2.0 - gamma]
}

/// The dual-path point `(1−16γ, 1+7γ, 1+7γ)`.
pub fn perturbation_dual_point(gamma: f64) -> BoxDualPoint {
    BoxDualPoint::new(1.0 - 16.0 * gamma, vec![1.0 + 7.0 * gamma, 1.0 + 7.0 * gamma])
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma,
            range: "(0, 1)",
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
