//! Ensemble covariance estimates with jackknife errors, and z-tests for
//! stationarity and `Θ`-self-similarity.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fields::{FieldEnsemble, ThetaVector};

/// Replications needed before a covariance estimate and its error are
/// reported.
pub const MIN_REPLICATIONS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStatistic {
    pub probe: String,
    pub observed: f64,
    pub expected: f64,
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistics: Vec<ProbeStatistic>,
    pub pass: bool,
    pub alpha: f64,
    /// Two-sided Bonferroni critical value for `alpha` over all probes.
    pub threshold: f64,
}

impl TestReport {
    pub fn new(name: impl Into<String>, alpha: f64, statistics: Vec<ProbeStatistic>) -> Result<Self> {
        let threshold = bonferroni_threshold(alpha, statistics.len().max(1))?;
        let pass = statistics.iter().all(|s| s.z.abs() < threshold);
        Ok(Self {
            name: name.into(),
            statistics,
            pass,
            alpha,
            threshold,
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = &ProbeStatistic> {
        self.statistics.iter().filter(move |s| s.z.abs() >= self.threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} (alpha {}, |z| < {:.3})",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.alpha,
            self.threshold
        )?;
        writeln!(
            f,
            "  {:<40} {:>13} {:>13} {:>11} {:>8}",
            "probe", "observed", "expected", "se", "z"
        )?;
        for s in &self.statistics {
            let mark = if s.z.abs() >= self.threshold { " *" } else { "" };
            writeln!(
                f,
                "  {:<40} {:>13.6e} {:>13.6e} {:>11.3e} {:>8.3}{mark}",
                s.probe, s.observed, s.expected, s.standard_error, s.z
            )?;
        }
        Ok(())
    }
}

/// Critical value `z` with `P(|Z| ≥ z) = alpha / probes` for standard normal `Z`.
pub fn bonferroni_threshold(alpha: f64, probes: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must lie in (0, 1)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - alpha / (2.0 * probes.max(1) as f64)))
}

/// `diff / se`, with `0/0 = 0` and `d/0 = ±∞`.
pub fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Sample covariance (divisor `M − 1`) and its delete-one values.
fn cov_with_leave_one_out(x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let co: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let full = co / (m - 1.0);
    let loo = x
        .iter()
        .zip(y)
        .map(|(a, b)| (co - m / (m - 1.0) * (a - mx) * (b - my)) / (m - 2.0))
        .collect();
    (full, loo)
}

fn jackknife_se(loo: &[f64]) -> f64 {
    let m = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / m;
    let ss: f64 = loo.iter().map(|v| (v - mean).powi(2)).sum();
    ((m - 1.0) / m * ss).sqrt()
}

fn require_replications(m: usize) -> Result<()> {
    if m < MIN_REPLICATIONS {
        return Err(Error::TooFewReplications {
            needed: MIN_REPLICATIONS,
            have: m,
        });
    }
    Ok(())
}

/// Covariance of two equally long samples and its jackknife standard error.
pub fn sample_cov(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    require_replications(x.len())?;
    let (c, loo) = cov_with_leave_one_out(x, y);
    Ok((c, jackknife_se(&loo)))
}

/// Covariance of `X(s)` and `X(t)` across the ensemble, with jackknife
/// standard error.
pub fn empirical_cov(e: &FieldEnsemble, s: &[f64], t: &[f64]) -> Result<(f64, f64)> {
    let xs = e.node_samples(s)?;
    let ys = e.node_samples(t)?;
    sample_cov(&xs, &ys)
}

/// Jackknife z-test of `scale · Cov(a) − Cov(b)` with the two covariances
/// computed on the same replications, so their correlation is accounted for.
pub(crate) fn paired_scaled_cov_difference(
    a: (&[f64], &[f64]),
    b: (&[f64], &[f64]),
    scale: f64,
    probe: String,
) -> ProbeStatistic {
    let (ca, la) = cov_with_leave_one_out(a.0, a.1);
    let (cb, lb) = cov_with_leave_one_out(b.0, b.1);
    let diffs: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| scale * x - y).collect();
    let se = jackknife_se(&diffs);
    let observed = scale * ca;
    ProbeStatistic {
        probe,
        observed,
        expected: cb,
        standard_error: se,
        z: z_score(observed - cb, se),
    }
}

/// Paired z-test of `mean(a) = mean(b)`.
pub(crate) fn paired_mean_difference(a: &[f64], b: &[f64], probe: String) -> ProbeStatistic {
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let d = ma - mb;
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y - d).powi(2)).sum();
    let se = (ss / (m - 1.0) / m).sqrt();
    ProbeStatistic {
        probe,
        observed: ma,
        expected: mb,
        standard_error: se,
        z: z_score(d, se),
    }
}

fn paired_difference(
    e: &FieldEnsemble,
    a: (&[f64], &[f64]),
    b: (&[f64], &[f64]),
    scale: f64,
    probe: String,
) -> Result<ProbeStatistic> {
    let (a0, a1) = (e.node_samples(a.0)?, e.node_samples(a.1)?);
    let (b0, b1) = (e.node_samples(b.0)?, e.node_samples(b.1)?);
    Ok(paired_scaled_cov_difference((&a0, &a1), (&b0, &b1), scale, probe))
}

fn shifted(p: &[f64], h: &[f64]) -> Vec<f64> {
    p.iter().zip(h).map(|(a, b)| a + b).collect()
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(","))
}

/// Compares `Cov(X(s+h), X(t+h))` with `Cov(X(s), X(t))` for every shift
/// `h` and node pair.
pub fn stationarity_test(
    e: &FieldEnsemble,
    shifts: &[Vec<f64>],
    node_pairs: &[(Vec<f64>, Vec<f64>)],
    alpha: f64,
) -> Result<TestReport> {
    require_replications(e.len())?;
    let mut stats = Vec::with_capacity(shifts.len() * node_pairs.len());
    for h in shifts {
        for (s, t) in node_pairs {
            let (sh, th) = (shifted(s, h), shifted(t, h));
            let probe = format!("{}~{} +{}", fmt_point(s), fmt_point(t), fmt_point(h));
            stats.push(paired_difference(e, (&sh, &th), (s, t), 1.0, probe)?);
        }
    }
    TestReport::new("stationarity", alpha, stats)
}

/// Compares `e^{-2Θ·h} Cov(Y(s+h), Y(t+h))` with `Cov(Y(s), Y(t))`, where the
/// ensemble holds `Y(e^t)` indexed by `t`.
pub fn self_similarity_test(
    e: &FieldEnsemble,
    theta: &ThetaVector,
    shifts: &[Vec<f64>],
    node_pairs: &[(Vec<f64>, Vec<f64>)],
    alpha: f64,
) -> Result<TestReport> {
    require_replications(e.len())?;
    let mut stats = Vec::with_capacity(shifts.len() * node_pairs.len());
    for h in shifts {
        let scale = (-2.0 * theta.dot(h)?).exp();
        for (s, t) in node_pairs {
            let (sh, th) = (shifted(s, h), shifted(t, h));
            let probe = format!("{}~{} +{}", fmt_point(s), fmt_point(t), fmt_point(h));
            stats.push(paired_difference(e, (&sh, &th), (s, t), scale, probe)?);
        }
    }
    TestReport::new("self-similarity", alpha, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn threshold_values() {
        assert!((bonferroni_threshold(0.05, 1).unwrap() - 1.959964).abs() < 1e-5);
        assert!((bonferroni_threshold(0.01, 1).unwrap() - 2.575829).abs() < 1e-5);
        assert!(bonferroni_threshold(0.01, 10).unwrap() > 3.2);
        assert!(bonferroni_threshold(0.0, 1).is_err());
    }

    #[test]
    fn z_conventions() {
        assert_eq!(z_score(0.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(-1.0, 0.0), f64::NEG_INFINITY);
        assert_eq!(z_score(1.0, 0.5), 2.0);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let x: Vec<f64> = (0..40).map(|_| normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v + 0.3 * normal()).collect();
        let (c, loo) = cov_with_leave_one_out(&x, &y);
        let direct = |xs: &[f64], ys: &[f64]| {
            let m = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / m;
            let my = ys.iter().sum::<f64>() / m;
            xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (m - 1.0)
        };
        assert!((c - direct(&x, &y)).abs() < 1e-14);
        for i in 0..x.len() {
            let xr: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let yr: Vec<f64> = y.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            assert!((loo[i] - direct(&xr, &yr)).abs() < 1e-13);
        }
    }

    #[test]
    fn too_few_replications() {
        assert!(matches!(
            sample_cov(&[0.0; 10], &[0.0; 10]),
            Err(Error::TooFewReplications { needed: 30, have: 10 })
        ));
    }

    #[test]
    fn zero_samples_have_zero_covariance() {
        assert_eq!(sample_cov(&[0.0; 50], &[0.0; 50]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn jackknife_error_shrinks_like_root_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut se = Vec::new();
        for m in [500usize, 2000, 8000] {
            // Average over a few draws to tame the error's own noise.
            let mut acc = 0.0;
            for _ in 0..8 {
                let x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                acc += sample_cov(&x, &x).unwrap().1;
            }
            se.push(acc / 8.0);
        }
        for (k, w) in se.windows(2).enumerate() {
            let ratio = w[0] / w[1];
            assert!((ratio / 2.0 - 1.0).abs() < 0.2, "step {k}: ratio {ratio}");
        }
    }
}
