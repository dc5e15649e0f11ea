//! End-to-end pipelines behind the command-line entry points: the two
//! bundled counterexample reproductions, binary-family verification (single
//! instance and randomized sweep), and the finite-difference check.
//!
//! Each pipeline returns a [`RunReport`] whose verdicts encode golden
//! expectations: a claim that is *expected* to come out REFUTED stays
//! REFUTED on success and is downgraded to FAIL when the expectation breaks,
//! so `RunReport::all_ok` is exactly the exit-code-0 condition.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::binary::{BinaryProblem, Branch, Certificate, CriticalPair};
use crate::boxqp::{
    perturbation_dual, perturbation_dual_point, perturbation_primal, perturbation_primal_point,
    BoxDualPoint, BoxProblem, BoxRefutationReport, SetMembership,
};
use crate::fd::{fd_gradient, fd_hessian, rel_err_mat, rel_err_vec, FdConfig};
use crate::oracle::{random_instance, OracleConfig};
use crate::problem_file::ProblemFile;
use crate::qc::QcProblem;
use crate::report::{format_f64, sha256_hex, ClaimStatus, ClaimVerdict, RunReport};
use crate::{Error, Result};

/// SHA-256 of the canonical problem-file serialization — platform-stable.
pub fn problem_digest(file: &ProblemFile) -> String {
    sha256_hex(file.to_canonical_json().as_bytes())
}

/// Downgrades a claim verdict to FAIL when its status is not the golden
/// expectation; expected statuses (including REFUTED) pass through.
fn expecting(mut v: ClaimVerdict, want: ClaimStatus) -> ClaimVerdict {
    if v.status != want {
        v.status = ClaimStatus::Fail;
    }
    v
}

pub struct Example1Options {
    /// Replaces the bundled λ = ½; golden assertions are skipped.
    pub lambda_override: Option<f64>,
    /// Tolerance for the critical-set assertion.
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    /// When set, evaluate the constraint-boundary profile on this many rows.
    pub curve_samples: Option<usize>,
    pub command: String,
}

impl Default for Example1Options {
    fn default() -> Self {
        Example1Options {
            lambda_override: None,
            tol: 1e-8,
            seed: 42,
            samples: 10_000,
            curve_samples: None,
            command: "reproduce-example1".into(),
        }
    }
}

pub struct Example1Run {
    pub report: RunReport,
    pub curve: Option<Vec<(f64, f64)>>,
    pub non_golden: bool,
}

/// Golden run on the bundled two-variable constrained counterexample:
/// critical multipliers {1, 2, 5}, candidate (1, 0) with a vanishing duality
/// gap, the negative-definite local-minimizer claim REFUTED by a feasible
/// witness, and the positive-definite global-minimizer claim CONFIRMED.
pub fn run_example1(opts: &Example1Options) -> Result<Example1Run> {
    let start = Instant::now();
    let base = QcProblem::counterexample();
    let problem = match opts.lambda_override {
        Some(lambda) => {
            QcProblem::new(base.a().clone(), base.c().clone(), base.f().to_vec(), lambda)?
        }
        None => base,
    };
    let non_golden = opts.lambda_override.is_some();
    let mut report = RunReport::new(&opts.command, problem_digest(&ProblemFile::from(&problem)));
    let cfg = OracleConfig {
        seed: opts.seed,
        samples: opts.samples.max(100),
        radius: 0.15,
        margin: 1e-6,
        grid_resolution: 101,
    };
    let criticals = problem.find_critical_points(problem.default_interval(), opts.tol)?;

    if non_golden {
        let mut v = ClaimVerdict::new("non-golden-override", ClaimStatus::Pass, 0.0)
            .with_value("lambda", problem.lambda())
            .with_value("critical_count", criticals.len() as f64);
        for (i, s) in criticals.iter().enumerate() {
            v = v.with_value(&format!("sigma_{i}"), *s);
        }
        report.verdicts.push(v);
        for &sigma in &criticals {
            if let Ok(r) = problem.verify_minimizer_claim(sigma, &cfg) {
                if let Some(claim) = r.claim {
                    report.verdicts.push(claim);
                }
            }
        }
    } else {
        let expected = [1.0, 2.0, 5.0];
        let set_ok = criticals.len() == expected.len()
            && criticals
                .iter()
                .zip(expected)
                .all(|(got, want)| (got - want).abs() <= opts.tol);
        let mut v = ClaimVerdict::new(
            "critical-set",
            if set_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            opts.tol,
        )
        .with_value("count", criticals.len() as f64);
        for (i, s) in criticals.iter().enumerate() {
            v = v.with_value(&format!("sigma_{i}"), *s);
        }
        report.verdicts.push(v);

        if set_ok {
            let info = problem.critical_info(criticals[0])?;
            let recovery_ok =
                (info.x_bar[0] - 1.0).abs() <= 1e-12 && info.x_bar[1].abs() <= 1e-12;
            report.verdicts.push(
                ClaimVerdict::new(
                    "candidate-recovery",
                    if recovery_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
                    1e-12,
                )
                .with_value("x_bar_0", info.x_bar[0])
                .with_value("x_bar_1", info.x_bar[1]),
            );
            let identity_ok = info.primal_value.abs() <= 1e-12
                && info.dual_value.abs() <= 1e-12
                && (info.primal_value - info.dual_value).abs() <= 1e-12;
            report.verdicts.push(
                ClaimVerdict::new(
                    "duality-identity",
                    if identity_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
                    1e-12,
                )
                .with_value("primal_value", info.primal_value)
                .with_value("dual_value", info.dual_value)
                .with_value("gap", (info.primal_value - info.dual_value).abs()),
            );

            // The negative-definite branch must be REFUTED by a feasible
            // witness improving on P(x̄) by at least 1e-3.
            let negdef = problem.verify_minimizer_claim(criticals[0], &cfg)?;
            let mut claim = negdef.claim.ok_or_else(|| {
                Error::InvalidProblem("first critical multiplier carries no claim".into())
            })?;
            let improvement = claim
                .witness
                .as_ref()
                .map(|w| negdef.critical.primal_value - w.value);
            claim = claim.with_value("improvement", improvement.unwrap_or(0.0));
            let mut claim = expecting(claim, ClaimStatus::Refuted);
            if improvement.is_none_or(|imp| imp < 1e-3) {
                claim.status = ClaimStatus::Fail;
            }
            report.verdicts.push(claim);

            // The positive-definite branch is the corrected statement and
            // must be CONFIRMED.
            let posdef = problem.verify_minimizer_claim(criticals[2], &cfg)?;
            let claim = posdef.claim.ok_or_else(|| {
                Error::InvalidProblem("last critical multiplier carries no claim".into())
            })?;
            report.verdicts.push(expecting(claim, ClaimStatus::Confirmed));
        }
    }

    let curve = match opts.curve_samples {
        Some(samples) => Some(problem.boundary_profile(samples)?),
        None => None,
    };
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(Example1Run {
        report,
        curve,
        non_golden,
    })
}

pub struct Example2Options {
    /// Path parameter at which the closed perturbation forms are reported.
    pub gamma: f64,
    pub seed: u64,
    pub samples: usize,
    pub command: String,
}

impl Default for Example2Options {
    fn default() -> Self {
        Example2Options {
            gamma: 0.25,
            seed: 42,
            samples: 10_000,
            command: "reproduce-example2".into(),
        }
    }
}

pub struct Example2Run {
    pub report: RunReport,
    pub refutation: BoxRefutationReport,
}

/// Golden run on the bundled box-constrained counterexample: the interior
/// dual critical point (1, (1, 1)) on the negative-definite branch, the
/// vanishing duality gap at −15/2, REFUTED verdicts for both the dual-side
/// local-min and primal-side local-max claims, closed-form perturbation
/// paths cross-checked against direct evaluation, and the positive-branch
/// global-min claim CONFIRMED at (1, (2, 2)).
pub fn run_example2(opts: &Example2Options) -> Result<Example2Run> {
    let start = Instant::now();
    let problem = BoxProblem::counterexample();
    let critical = BoxProblem::counterexample_critical_point();
    let mut report = RunReport::new(&opts.command, problem_digest(&ProblemFile::from(&problem)));
    let cfg = OracleConfig {
        seed: opts.seed,
        samples: opts.samples.max(100),
        radius: 0.5,
        margin: 1e-6,
        grid_resolution: 101,
    };
    let refutation = problem.verify_extremum_claims(&critical, &cfg)?;

    let critical_ok = refutation.membership == SetMembership::SaMinus
        && refutation.gradient_residual <= 1e-10;
    report.verdicts.push(
        ClaimVerdict::new(
            "critical-point",
            if critical_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            1e-10,
        )
        .with_value("gradient_residual", refutation.gradient_residual)
        .with_value("x_bar_0", refutation.x_bar[0])
        .with_value("x_bar_1", refutation.x_bar[1]),
    );

    let identity_ok = (refutation.primal_value + 7.5).abs() <= 1e-12
        && (refutation.dual_value + 7.5).abs() <= 1e-12
        && refutation.identity_gap <= 1e-12;
    report.verdicts.push(
        ClaimVerdict::new(
            "duality-identity",
            if identity_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            1e-12,
        )
        .with_value("primal_value", refutation.primal_value)
        .with_value("dual_value", refutation.dual_value)
        .with_value("gap", refutation.identity_gap),
    );

    for claim in refutation.claims.clone() {
        report.verdicts.push(expecting(claim, ClaimStatus::Refuted));
    }

    // Closed perturbation forms versus direct evaluation at γ.
    let gamma = opts.gamma;
    let primal_closed = perturbation_primal(gamma)?;
    let primal_direct = problem.primal_value(&perturbation_primal_point(gamma));
    let mut primal_ok = (primal_closed - primal_direct).abs() <= 1e-10;
    if gamma == 0.25 {
        primal_ok &= (primal_closed + 7.5 - 2.251953125).abs() <= 1e-10;
    }
    report.verdicts.push(
        ClaimVerdict::new(
            "perturbation-primal",
            if primal_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            1e-10,
        )
        .with_value("gamma", gamma)
        .with_value("closed_form", primal_closed)
        .with_value("direct", primal_direct)
        .with_value("excess_over_critical", primal_closed + 7.5),
    );

    let dual_closed = perturbation_dual(gamma)?;
    let dual_direct = problem.dual_value(&perturbation_dual_point(gamma))?;
    let mut dual_ok = (dual_closed - dual_direct).abs() <= 1e-10;
    if gamma == 0.25 {
        dual_ok &= (-7.5 - dual_closed - 22.0 / 3.0).abs() <= 1e-10;
    }
    report.verdicts.push(
        ClaimVerdict::new(
            "perturbation-dual",
            if dual_ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            1e-10,
        )
        .with_value("gamma", gamma)
        .with_value("closed_form", dual_closed)
        .with_value("direct", dual_direct)
        .with_value("deficit_below_critical", -7.5 - dual_closed),
    );

    // The positive-definite branch on the same instance: (1, (2, 2)) maps to
    // the box corner (−2, −2) and must be CONFIRMED as the global minimum.
    let plus = problem.verify_extremum_claims(&BoxDualPoint::new(1.0, vec![2.0, 2.0]), &cfg)?;
    for claim in plus.claims {
        report.verdicts.push(expecting(claim, ClaimStatus::Confirmed));
    }

    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(Example2Run { report, refutation })
}

/// One certificate keyed by the pair's bitstring, for report emission.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateEntry {
    pub bits: String,
    pub certificate: Certificate,
}

pub struct BinaryVerifyRun {
    pub report: RunReport,
    pub pairs: Vec<CriticalPair>,
    pub certificates: Vec<CertificateEntry>,
}

/// Combined report + pair table + certificates, the `--json` document shape.
#[derive(Serialize)]
pub struct BinaryVerifyDoc<'a> {
    pub report: &'a RunReport,
    pub pairs: &'a [CriticalPair],
    pub certificates: &'a [CertificateEntry],
}

/// Enumerates all dual critical pairs of a binary instance and certifies the
/// extremal pairing on every sharp-branch pair.
pub fn run_binary_verify(
    problem: &BinaryProblem,
    cfg: &OracleConfig,
    command: &str,
) -> Result<BinaryVerifyRun> {
    let start = Instant::now();
    let digest = problem_digest(&ProblemFile::from(problem));
    let mut report = RunReport::new(command, digest);
    let pairs = problem.enumerate_criticals()?;

    let count = |b: Branch| pairs.iter().filter(|p| p.branch == b).count() as f64;
    report.verdicts.push(
        ClaimVerdict::new("pair-table", ClaimStatus::Pass, 0.0)
            .with_value("pairs", pairs.len() as f64)
            .with_value("sharp_plus", count(Branch::SharpPlus))
            .with_value("sharp_minus", count(Branch::SharpMinus))
            .with_value("rejected", count(Branch::Rejected))
            .with_value(
                "degenerate",
                pairs.iter().filter(|p| p.degenerate).count() as f64,
            ),
    );

    let mut certificates = Vec::new();
    for pair in &pairs {
        let (label, cert) = match pair.branch {
            Branch::SharpPlus => ("global-min", problem.certify_global_min(pair, cfg)?),
            Branch::SharpMinus => ("local-min", problem.certify_local_min(pair, cfg)?),
            Branch::Rejected => continue,
        };
        let mut verdict = ClaimVerdict::new(
            format!("{label}-{}", pair.bits),
            if cert.pass { ClaimStatus::Pass } else { ClaimStatus::Fail },
            1e-9,
        )
        .with_value("dual_value", pair.dual_value)
        .with_value("primal_value", pair.primal_value)
        .with_value("residual", pair.residual)
        .with_value("binary_minimum", cert.binary_minimum);
        if let Some(eps) = cert.epsilon {
            verdict = verdict.with_value("epsilon", eps);
        }
        if let Some(w) = cert
            .clauses
            .iter()
            .find(|c| c.status == ClaimStatus::Fail)
            .and_then(|c| c.witness.clone())
        {
            verdict = verdict.with_witness(w);
        }
        report.verdicts.push(verdict);
        certificates.push(CertificateEntry {
            bits: pair.bits.clone(),
            certificate: cert,
        });
    }
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(BinaryVerifyRun {
        report,
        pairs,
        certificates,
    })
}

pub struct SweepOptions {
    pub seeds: u64,
    /// Instance dimensions cycle through 1..=n_max.
    pub n_max: usize,
    pub scale: f64,
    pub cfg: OracleConfig,
    pub command: String,
}

/// Randomized sweep over seeded instances; every sharp-branch pair must
/// certify. The summary verdict fails on the first broken certificate.
pub fn run_binary_sweep(opts: &SweepOptions) -> Result<RunReport> {
    let start = Instant::now();
    opts.cfg.validate()?;
    if opts.n_max < 1 {
        return Err(Error::OutOfRange {
            what: "sweep dimension bound",
            value: opts.n_max as f64,
            range: "[1, 24]",
        });
    }
    let digest = sha256_hex(
        format!(
            "sweep seeds={} n_max={} scale={} samples={} seed={}",
            opts.seeds, opts.n_max, opts.scale, opts.cfg.samples, opts.cfg.seed
        )
        .as_bytes(),
    );
    let mut report = RunReport::new(&opts.command, digest);
    let mut sharp_plus = 0usize;
    let mut sharp_minus = 0usize;
    let mut failures = 0usize;
    let mut first_failure: Option<(u64, String)> = None;
    for seed in 0..opts.seeds {
        let n = 1 + (seed as usize % opts.n_max);
        let problem = random_instance(seed, n, opts.scale);
        for pair in problem.enumerate_criticals()? {
            let cert = match pair.branch {
                Branch::SharpPlus => {
                    sharp_plus += 1;
                    problem.certify_global_min(&pair, &opts.cfg)?
                }
                Branch::SharpMinus => {
                    sharp_minus += 1;
                    problem.certify_local_min(&pair, &opts.cfg)?
                }
                Branch::Rejected => continue,
            };
            if !cert.pass {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = Some((seed, pair.bits.clone()));
                }
            }
        }
    }
    let mut verdict = ClaimVerdict::new(
        "corrected-pairing-sweep",
        if failures == 0 { ClaimStatus::Pass } else { ClaimStatus::Fail },
        1e-9,
    )
    .with_value("instances", opts.seeds as f64)
    .with_value("sharp_plus_pairs", sharp_plus as f64)
    .with_value("sharp_minus_pairs", sharp_minus as f64)
    .with_value("failures", failures as f64);
    if let Some((seed, _bits)) = &first_failure {
        verdict = verdict.with_value("first_failure_seed", *seed as f64);
    }
    report.verdicts.push(verdict);
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Finite-difference validation of the analytic dual derivatives, sampled at
/// seeded points bounded away from singularities.
pub fn run_fd_check(
    file: ProblemFile,
    samples: usize,
    seed: u64,
    command: &str,
) -> Result<RunReport> {
    let start = Instant::now();
    let digest = problem_digest(&file);
    let mut report = RunReport::new(command, digest);
    let samples = samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grad_cfg = FdConfig::gradient_default();
    let hess_cfg = FdConfig::hessian_default();

    match file {
        ProblemFile::Binary(_) => {
            let p = file.into_binary()?;
            let n = p.n();
            let mut max_grad = 0.0f64;
            let mut max_hess = 0.0f64;
            let mut done = 0usize;
            let mut attempts = 0usize;
            while done < samples {
                attempts += 1;
                if attempts > 1000 * samples {
                    return Err(Error::InvalidProblem(
                        "could not sample well-conditioned dual points".into(),
                    ));
                }
                let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let qd = p.q_d(&sigma);
                if qd.smallest_singular_value() < 0.1 * qd.max_abs().max(1.0) {
                    continue;
                }
                let exact_g = p.dual_gradient(&sigma)?;
                let fd_g =
                    fd_gradient(|s| p.dual_value(s).unwrap_or(f64::NAN), &sigma, &grad_cfg)?;
                max_grad = max_grad.max(rel_err_vec(&fd_g, &exact_g));
                let exact_h = p.dual_hessian(&sigma)?;
                let fd_h =
                    fd_hessian(|s| p.dual_value(s).unwrap_or(f64::NAN), &sigma, &hess_cfg)?;
                max_hess = max_hess.max(rel_err_mat(&fd_h, &exact_h));
                done += 1;
            }
            report.verdicts.push(fd_verdict("dual-gradient-fd", max_grad, 1e-5, done));
            report.verdicts.push(fd_verdict("dual-hessian-fd", max_hess, 1e-4, done));
        }
        ProblemFile::Qc(_) => {
            let p = file.into_qc()?;
            let poles = p.poles();
            let (lo, hi) = p.default_interval();
            let mut max_err = 0.0f64;
            let mut done = 0usize;
            let mut attempts = 0usize;
            while done < samples {
                attempts += 1;
                if attempts > 1000 * samples {
                    return Err(Error::InvalidProblem(
                        "could not sample off-pole multipliers".into(),
                    ));
                }
                let sigma = rng.random_range(lo..hi);
                if poles
                    .iter()
                    .any(|pole| (sigma - pole).abs() < 0.15 * (1.0 + pole.abs()))
                {
                    continue;
                }
                let exact = p.dual_derivative(sigma)?;
                let fd = fd_gradient(
                    |s| p.dual_value(s[0]).unwrap_or(f64::NAN),
                    &[sigma],
                    &grad_cfg,
                )?;
                max_err = max_err.max((fd[0] - exact).abs() / exact.abs().max(1.0));
                done += 1;
            }
            report.verdicts.push(fd_verdict("dual-derivative-fd", max_err, 1e-6, done));
        }
        ProblemFile::Box(_) => {
            let p = file.into_box()?;
            let n = p.n();
            let mut max_grad = 0.0f64;
            let mut done = 0usize;
            let mut attempts = 0usize;
            while done < samples {
                attempts += 1;
                if attempts > 1000 * samples {
                    return Err(Error::InvalidProblem(
                        "could not sample well-conditioned dual points".into(),
                    ));
                }
                let y: Vec<f64> = (0..=n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let d = BoxDualPoint::from_vec(&y)?;
                let g = p.g_matrix(&d);
                if g.smallest_singular_value() < 0.1 * g.max_abs().max(1.0) {
                    continue;
                }
                let exact = p.dual_gradient(&d)?;
                let fd = fd_gradient(
                    |v| {
                        BoxDualPoint::from_vec(v)
                            .and_then(|dp| p.dual_value(&dp))
                            .unwrap_or(f64::NAN)
                    },
                    &y,
                    &grad_cfg,
                )?;
                max_grad = max_grad.max(rel_err_vec(&fd, &exact));
                done += 1;
            }
            report.verdicts.push(fd_verdict("dual-gradient-fd", max_grad, 1e-5, done));
            if p == BoxProblem::counterexample() {
                let grad = p.dual_gradient(&BoxProblem::counterexample_critical_point())?;
                let norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
                report.verdicts.push(
                    ClaimVerdict::new(
                        "critical-gradient-norm",
                        if norm <= 1e-6 { ClaimStatus::Pass } else { ClaimStatus::Fail },
                        1e-6,
                    )
                    .with_value("gradient_norm", norm),
                );
            }
        }
    }
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn fd_verdict(claim_id: &str, max_rel_err: f64, tol: f64, samples: usize) -> ClaimVerdict {
    ClaimVerdict::new(
        claim_id,
        if max_rel_err <= tol { ClaimStatus::Pass } else { ClaimStatus::Fail },
        tol,
    )
    .with_value("max_rel_err", max_rel_err)
    .with_value("samples", samples as f64)
}

/// Curve rows as CSV: header `t,value`, LF endings, 17-digit decimals.
pub fn curve_to_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in rows {
        out.push_str(&format_f64(*t));
        out.push(',');
        out.push_str(&format_f64(*v));
        out.push('\n');
    }
    out
}

/// Critical-pair table as CSV: bitstring, multiplier components, branch,
/// dual value, primal value, residual.
pub fn pairs_to_csv(pairs: &[CriticalPair]) -> String {
    let n = pairs.first().map_or(0, |p| p.sigma.len());
    let mut out = String::from("x_star");
    for i in 1..=n {
        out.push_str(&format!(",sigma_{i}"));
    }
    out.push_str(",branch,dual_value,primal_value,residual\n");
    for pair in pairs {
        out.push_str(&pair.bits);
        for s in &pair.sigma {
            out.push(',');
            out.push_str(&format_f64(*s));
        }
        out.push(',');
        out.push_str(&pair.branch.to_string());
        out.push(',');
        out.push_str(&format_f64(pair.dual_value));
        out.push(',');
        out.push_str(&format_f64(pair.primal_value));
        out.push(',');
        out.push_str(&format_f64(pair.residual));
        out.push('\n');
    }
    out
}
