//! Independent verification oracles: exhaustive binary enumeration, grid
//! minimization, sampling-based local-extremum classification, and seeded
//! instance generation.
//!
//! Nothing in this module knows how the dual functions were derived; the
//! oracles only evaluate scalar objectives. All randomness flows from
//! explicit seeds, so every oracle output is bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binary::BinaryProblem;
use crate::linalg::SymMatrix;
use crate::report::Witness;
use crate::{Error, Result};

/// Guard on exhaustive binary enumeration.
pub const MAX_BINARY_N: usize = 24;
/// Guard on dense grid search.
pub const MAX_GRID_DIM: usize = 6;

/// Sampling budget and acceptance thresholds for the sampling oracles.
///
/// `margin` is relative: a witness must beat the center value by more than
/// `margin * max(1, |center value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub samples: usize,
    pub radius: f64,
    pub margin: f64,
    pub grid_resolution: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 42,
            samples: 10_000,
            radius: 0.5,
            margin: 1e-6,
            grid_resolution: 101,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::InvalidProblem(format!(
                "oracle sample budget {} below minimum 100",
                self.samples
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::OutOfRange {
                what: "radius",
                value: self.radius,
                range: "(0, inf)",
            });
        }
        if !(self.margin >= 0.0) {
            return Err(Error::OutOfRange {
                what: "margin",
                value: self.margin,
                range: "[0, inf)",
            });
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidProblem(format!(
                "grid resolution {} below minimum 2",
                self.grid_resolution
            )));
        }
        Ok(())
    }
}

/// What sampling around a candidate established about its extremality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    /// No feasible neighbor beat the center downward: consistent with a
    /// local minimum (also reported for flat neighborhoods).
    LocalMin,
    /// A lower neighbor exists but no higher one: consistent with a local
    /// maximum and refutes local minimality.
    LocalMax,
    /// Strictly lower *and* strictly higher feasible neighbors were found.
    NeitherWitnessed,
}

/// Verdict of [`classify_local_extremum`]: witnesses are feasible neighbors
/// beating the center value by more than the (absolute) margin recorded here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExtremumVerdict {
    pub verdict: ExtremumKind,
    pub center_value: f64,
    pub witness_low: Option<Witness>,
    pub witness_high: Option<Witness>,
    pub samples_used: usize,
    pub radius: f64,
    pub margin: f64,
}

/// Samples the objective at feasible neighbors of `center` and records the
/// strongest strict-improvement witnesses in both directions.
///
/// The sampler is called once per index `0..cfg.samples` with a seeded RNG;
/// deterministic samplers key off the index, randomized ones off the RNG.
/// Returned points are defensively filtered to the Euclidean ball of
/// `cfg.radius` around `center`; non-finite objective values are skipped.
pub fn classify_local_extremum<F, S>(
    objective: F,
    mut sampler: S,
    center: &[f64],
    cfg: &OracleConfig,
) -> Result<LocalExtremumVerdict>
where
    F: Fn(&[f64]) -> f64,
    S: FnMut(usize, &mut ChaCha8Rng) -> Option<Vec<f64>>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let center_value = objective(center);
    if !center_value.is_finite() {
        return Err(Error::NonFiniteSample);
    }
    let margin = cfg.margin * center_value.abs().max(1.0);

    let mut used = 0usize;
    let mut low: Option<Witness> = None;
    let mut high: Option<Witness> = None;
    for i in 0..cfg.samples {
        let Some(point) = sampler(i, &mut rng) else {
            continue;
        };
        let dist2: f64 = point
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if dist2 > cfg.radius * cfg.radius * (1.0 + 1e-12) {
            continue;
        }
        let value = objective(&point);
        if !value.is_finite() {
            continue;
        }
        used += 1;
        if value < center_value - margin && low.as_ref().is_none_or(|w| value < w.value) {
            low = Some(Witness { point: point.clone(), value });
        }
        if value > center_value + margin && high.as_ref().is_none_or(|w| value > w.value) {
            high = Some(Witness { point, value });
        }
    }
    if used == 0 {
        return Err(Error::EmptySampler);
    }
    let verdict = match (&low, &high) {
        (Some(_), Some(_)) => ExtremumKind::NeitherWitnessed,
        (Some(_), None) => ExtremumKind::LocalMax,
        _ => ExtremumKind::LocalMin,
    };
    Ok(LocalExtremumVerdict {
        verdict,
        center_value,
        witness_low: low,
        witness_high: high,
        samples_used: used,
        radius: cfg.radius,
        margin,
    })
}

/// Result of exhaustive 0-1 minimization: the exact minimum and every
/// argmin, as bitstrings in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub minimum: f64,
    pub argmins: Vec<String>,
}

impl BruteForceResult {
    pub fn argmin_points(&self) -> Vec<Vec<f64>> {
        self.argmins.iter().map(|b| bits_to_point(b)).collect()
    }
}

/// Decodes a bitstring like `"101"` into the 0/1 vector it names.
pub fn bits_to_point(bits: &str) -> Vec<f64> {
    bits.chars()
        .map(|c| if c == '1' { 1.0 } else { 0.0 })
        .collect()
}

/// Encodes index `k` as the lexicographic bitstring of length `n`
/// (bit 1 is the leftmost character).
pub fn index_to_bits(k: u64, n: usize) -> String {
    (0..n)
        .map(|i| {
            if (k >> (n - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Exhaustive minimization of the 0-1 objective over all 2ⁿ points.
/// Ties are exact: every point whose value equals the minimum is returned.
pub fn brute_force_binary_min(p: &BinaryProblem) -> Result<BruteForceResult> {
    let n = p.n();
    if n > MAX_BINARY_N {
        return Err(Error::InstanceTooLarge {
            what: "binary dimension n",
            got: n,
            limit: MAX_BINARY_N,
        });
    }
    let mut minimum = f64::INFINITY;
    let mut argmins: Vec<String> = Vec::new();
    let mut x = vec![0.0f64; n];
    for k in 0u64..(1u64 << n) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ((k >> (n - 1 - i)) & 1) as f64;
        }
        let v = p.primal_value(&x);
        if v < minimum {
            minimum = v;
            argmins.clear();
            argmins.push(index_to_bits(k, n));
        } else if v == minimum {
            argmins.push(index_to_bits(k, n));
        }
    }
    Ok(BruteForceResult { minimum, argmins })
}

/// Exhaustive evaluation on a uniform grid over an axis-aligned box,
/// returning the lexicographically first argmin.
pub fn grid_min<F: Fn(&[f64]) -> f64>(
    objective: F,
    box_bounds: &[(f64, f64)],
    resolution: usize,
) -> Result<Witness> {
    let dim = box_bounds.len();
    if dim > MAX_GRID_DIM {
        return Err(Error::InstanceTooLarge {
            what: "grid dimension",
            got: dim,
            limit: MAX_GRID_DIM,
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidProblem(format!(
            "grid resolution {resolution} below minimum 2"
        )));
    }
    for (i, (lo, hi)) in box_bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidProblem(format!(
                "bad interval [{lo}, {hi}] in coordinate {i}"
            )));
        }
    }
    let mut idx = vec![0usize; dim];
    let mut best: Option<Witness> = None;
    loop {
        let point: Vec<f64> = idx
            .iter()
            .zip(box_bounds)
            .map(|(&k, (lo, hi))| lo + (hi - lo) * (k as f64) / ((resolution - 1) as f64))
            .collect();
        let value = objective(&point);
        // Strictly-smaller update in lexicographic visit order gives the
        // lexicographically first argmin on ties.
        if !value.is_nan() && best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(Witness { point, value });
        }
        let mut carry = dim;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < resolution {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    best.ok_or(Error::EmptySampler)
}

/// Uniform draw from the n-ball of the given radius: normalized Gaussian
/// direction (Box-Muller) times a `U^(1/n)`-distributed radius.
pub(crate) fn uniform_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..n)
            .map(|_| {
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
        return dir.iter().map(|v| v * r / norm).collect();
    }
}

/// Seeded random 0-1 instance: symmetric Q and f with entries uniform in
/// `[-scale, scale]`. Identical seeds yield bit-identical instances.
pub fn random_instance(seed: u64, n: usize, scale: f64) -> BinaryProblem {
    assert!(n >= 1, "n must be at least 1");
    assert!(scale > 0.0, "scale must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            q.set(i, j, rng.random_range(-scale..=scale));
        }
    }
    let f: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..=scale)).collect();
    BinaryProblem::new(q, f).expect("generated instance is always well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(q: f64, f: f64) -> BinaryProblem {
        BinaryProblem::new(SymMatrix::from_diag(&[q]), vec![f]).unwrap()
    }

    #[test]
    fn brute_force_univariate() {
        // ½·2·x² − 3x on {0,1}: P(0) = 0, P(1) = −2.
        let r = brute_force_binary_min(&tiny(2.0, 3.0)).unwrap();
        assert_eq!(r.minimum, -2.0);
        assert_eq!(r.argmins, vec!["1".to_string()]);
        assert_eq!(r.argmin_points(), vec![vec![1.0]]);
    }

    #[test]
    fn brute_force_constant_objective_ties_everywhere() {
        let p = BinaryProblem::new(SymMatrix::zeros(3), vec![0.0; 3]).unwrap();
        let r = brute_force_binary_min(&p).unwrap();
        assert_eq!(r.minimum, 0.0);
        assert_eq!(r.argmins.len(), 8);
        assert_eq!(r.argmins[0], "000");
        assert_eq!(r.argmins[7], "111");
    }

    #[test]
    fn brute_force_guards_large_n() {
        let p = BinaryProblem::new(SymMatrix::zeros(25), vec![0.0; 25]).unwrap();
        match brute_force_binary_min(&p) {
            Err(Error::InstanceTooLarge { got: 25, limit: 24, .. }) => {}
            other => panic!("expected InstanceTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn grid_min_finds_origin() {
        let w = grid_min(
            |x| x.iter().map(|v| v * v).sum(),
            &[(-1.0, 1.0), (-1.0, 1.0)],
            21,
        )
        .unwrap();
        assert_eq!(w.point, vec![0.0, 0.0]);
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn grid_min_breaks_ties_lexicographically() {
        // Constant objective: the first visited grid point wins.
        let w = grid_min(|_| 1.0, &[(-1.0, 1.0), (2.0, 3.0)], 3).unwrap();
        assert_eq!(w.point, vec![-1.0, 2.0]);
    }

    #[test]
    fn grid_min_guards_dimension() {
        let bounds = vec![(0.0, 1.0); 7];
        match grid_min(|_| 0.0, &bounds, 3) {
            Err(Error::InstanceTooLarge { got: 7, limit: 6, .. }) => {}
            other => panic!("expected InstanceTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_agrees_with_grid_on_corners() {
        // A {0,1}ⁿ grid is resolution 2 on [0,1]ⁿ.
        for seed in 0..5u64 {
            let p = random_instance(seed, 3, 5.0);
            let bf = brute_force_binary_min(&p).unwrap();
            let g = grid_min(|x| p.primal_value(x), &[(0.0, 1.0); 3], 2).unwrap();
            assert!(
                (bf.minimum - g.value).abs() < 1e-12,
                "seed {seed}: {} vs {}",
                bf.minimum,
                g.value
            );
        }
    }

    #[test]
    fn classify_reports_local_min_at_convex_vertex() {
        let objective = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        for seed in [1u64, 7, 42] {
            let cfg = OracleConfig {
                seed,
                samples: 500,
                radius: 1.0,
                ..OracleConfig::default()
            };
            let verdict = classify_local_extremum(
                objective,
                |_, rng: &mut ChaCha8Rng| {
                    Some(vec![
                        rng.random_range(-1.0..=1.0_f64),
                        rng.random_range(-1.0..=1.0_f64),
                    ])
                },
                &[0.0, 0.0],
                &cfg,
            )
            .unwrap();
            assert_eq!(verdict.verdict, ExtremumKind::LocalMin, "seed {seed}");
            assert!(verdict.witness_low.is_none());
            assert!(verdict.witness_high.is_some());
            assert!(verdict.samples_used >= 100);
        }
    }

    #[test]
    fn classify_requires_usable_samples() {
        let cfg = OracleConfig {
            samples: 200,
            ..OracleConfig::default()
        };
        let r = classify_local_extremum(
            |x: &[f64]| x[0],
            |_, _: &mut ChaCha8Rng| None,
            &[0.0],
            &cfg,
        );
        assert!(matches!(r, Err(Error::EmptySampler)));
    }

    #[test]
    fn classify_is_deterministic() {
        let objective = |x: &[f64]| (x[0] - 0.2).sin() + x[1] * x[1];
        let cfg = OracleConfig {
            seed: 9,
            samples: 300,
            radius: 0.7,
            ..OracleConfig::default()
        };
        let run = || {
            classify_local_extremum(
                objective,
                |_, rng: &mut ChaCha8Rng| {
                    Some(vec![
                        rng.random_range(-0.5..=0.5_f64),
                        rng.random_range(-0.5..=0.5_f64),
                    ])
                },
                &[0.0, 0.0],
                &cfg,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn ball_sampler_stays_inside_the_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v = uniform_in_ball(&mut rng, 4, 0.3);
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(norm <= 0.3 + 1e-12);
        }
    }

    #[test]
    fn random_instance_is_seed_deterministic() {
        let a = random_instance(1, 3, 5.0);
        let b = random_instance(1, 3, 5.0);
        assert_eq!(a.q().rows(), b.q().rows());
        assert_eq!(a.f(), b.f());
        let c = random_instance(2, 3, 5.0);
        assert_ne!(a.q().rows(), c.q().rows());
        for row in a.q().rows() {
            for v in row {
                assert!(v.abs() <= 5.0);
            }
        }
    }
}
