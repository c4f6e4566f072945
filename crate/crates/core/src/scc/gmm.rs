//! Two-component 1-D Gaussian mixture fitted by expectation-maximization.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::{GaussianComponent, GmmFit, SccConfig};

pub const VARIANCE_FLOOR: f64 = 1e-8;
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { max_iters: 100, tol: 1e-6 }
    }
}

impl From<&SccConfig> for EmConfig {
    fn from(cfg: &SccConfig) -> Self {
        Self { max_iters: cfg.em_max_iters, tol: cfg.em_tol }
    }
}

pub fn fit_gmm2(samples: &[f64], cfg: EmConfig) -> Result<GmmFit> {
    fit_gmm2_traced(samples, cfg).map(|(fit, _)| fit)
}

/// Like [`fit_gmm2`], also returning the log-likelihood at the initial
/// parameters and after every iteration.
pub fn fit_gmm2_traced(samples: &[f64], cfg: EmConfig) -> Result<(GmmFit, Vec<f64>)> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: samples.len() });
    }
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).max(VARIANCE_FLOOR);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut comps = [
        GaussianComponent { weight: 0.5, mean: percentile(&sorted, 0.25), variance: var },
        GaussianComponent { weight: 0.5, mean: percentile(&sorted, 0.75), variance: var },
    ];

    let mut resp = vec![[0.0f64; 2]; samples.len()];
    let mut ll = e_step(samples, &comps, &mut resp);
    let mut trace = vec![ll];
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        m_step(samples, &resp, &mut comps);
        let next = e_step(samples, &comps, &mut resp);
        iterations += 1;
        trace.push(next);
        let converged = (next - ll).abs() < cfg.tol;
        ll = next;
        if converged {
            break;
        }
    }

    if comps[0].mean > comps[1].mean {
        comps.swap(0, 1);
    }
    Ok((GmmFit { low: comps[0], high: comps[1], log_likelihood: ll, iterations }, trace))
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn log_weighted_density(c: &GaussianComponent, x: f64) -> f64 {
    c.weight.ln() - 0.5 * (2.0 * PI * c.variance).ln() - (x - c.mean).powi(2) / (2.0 * c.variance)
}

/// Fills responsibilities and returns the total log-likelihood.
fn e_step(samples: &[f64], comps: &[GaussianComponent; 2], resp: &mut [[f64; 2]]) -> f64 {
    let mut ll = 0.0;
    for (x, r) in samples.iter().zip(resp.iter_mut()) {
        let a = log_weighted_density(&comps[0], *x);
        let b = log_weighted_density(&comps[1], *x);
        let m = a.max(b);
        let lse = m + ((a - m).exp() + (b - m).exp()).ln();
        *r = [(a - lse).exp(), (b - lse).exp()];
        ll += lse;
    }
    ll
}

fn m_step(samples: &[f64], resp: &[[f64; 2]], comps: &mut [GaussianComponent; 2]) {
    let n = samples.len() as f64;
    for (k, c) in comps.iter_mut().enumerate() {
        let nk: f64 = resp.iter().map(|r| r[k]).sum();
        if nk <= f64::MIN_POSITIVE {
            // collapsed component: keep its shape, leave it a vanishing weight
            c.weight = f64::MIN_POSITIVE;
            continue;
        }
        let mean = samples.iter().zip(resp).map(|(x, r)| r[k] * x).sum::<f64>() / nk;
        let var = samples.iter().zip(resp).map(|(x, r)| r[k] * (x - mean).powi(2)).sum::<f64>() / nk;
        *c = GaussianComponent { weight: nk / n, mean, variance: var.max(VARIANCE_FLOOR) };
    }
    let total = comps[0].weight + comps[1].weight;
    comps.iter_mut().for_each(|c| c.weight /= total);
}

/// Posterior probability that `loss` came from the higher-mean component.
pub fn noise_posterior(fit: &GmmFit, loss: f64) -> f64 {
    let hi = log_weighted_density(&fit.high, loss);
    let lo = log_weighted_density(&fit.low, loss);
    (1.0 / (1.0 + (lo - hi).exp())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{Continuous, Normal};

    fn mixture(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = rand_distr::Normal::new(0.0, 0.01).unwrap();
        let hi = rand_distr::Normal::new(1.0, 0.01).unwrap();
        (0..n).map(|_| if rng.random_bool(0.5) { rng.sample(lo) } else { rng.sample(hi) }).collect()
    }

    #[test]
    fn recovers_well_separated_mixture() {
        let data = mixture(5000, 1);
        let (fit, trace) = fit_gmm2_traced(&data, EmConfig::default()).unwrap();
        assert!(fit.low.mean.abs() < 0.05);
        assert!((fit.high.mean - 1.0).abs() < 0.05);
        assert!((fit.low.weight - 0.5).abs() < 0.05);
        assert!((fit.high.weight - 0.5).abs() < 0.05);
        assert!((fit.low.weight + fit.high.weight - 1.0).abs() < 1e-9);
        assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)));
        assert_eq!(trace.len(), fit.iterations + 1);
    }

    #[test]
    fn constant_samples_collapse_to_floor() {
        let fit = fit_gmm2(&[0.7; 20], EmConfig::default()).unwrap();
        assert!((fit.low.mean - 0.7).abs() < 1e-12);
        assert!((fit.high.mean - 0.7).abs() < 1e-12);
        assert_eq!(fit.low.variance, VARIANCE_FLOOR);
        assert_eq!(fit.high.variance, VARIANCE_FLOOR);
        assert!((fit.low.weight + fit.high.weight - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(fit_gmm2(&[1.0; 7], EmConfig::default()), Err(Error::TooFewSamples { needed: 8, got: 7 })));
    }

    #[test]
    fn log_likelihood_never_decreases() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.random_range(8..300);
            let shape = rng.random_range(0..3);
            let data: Vec<f64> = (0..n)
                .map(|_| match shape {
                    0 => rng.random_range(0.0..5.0),
                    1 => -rng.random::<f64>().ln(),
                    _ => {
                        if rng.random_bool(0.3) {
                            3.0 + rng.random::<f64>()
                        } else {
                            rng.random::<f64>() * 0.2
                        }
                    }
                })
                .collect();
            let (fit, trace) = fit_gmm2_traced(&data, EmConfig { max_iters: 200, tol: 1e-10 }).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
            }
            assert!(fit.low.mean <= fit.high.mean);
            assert!(fit.low.variance >= VARIANCE_FLOOR && fit.high.variance >= VARIANCE_FLOOR);
        }
    }

    fn fit_of(w_hi: f64, m: (f64, f64), v: (f64, f64)) -> GmmFit {
        GmmFit {
            low: GaussianComponent { weight: 1.0 - w_hi, mean: m.0, variance: v.0 },
            high: GaussianComponent { weight: w_hi, mean: m.1, variance: v.1 },
            log_likelihood: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn posterior_symmetry_and_limits() {
        let fit = fit_of(0.5, (1.0, 3.0), (0.4, 0.4));
        assert!((noise_posterior(&fit, 2.0) - 0.5).abs() < 1e-12);
        assert!(noise_posterior(&fit, -1e6) < 1e-12);
        assert!(noise_posterior(&fit, 1e6) > 1.0 - 1e-12);
    }

    #[test]
    fn posterior_matches_bayes_rule() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let m0 = rng.random_range(-1.0..1.0);
            let fit = fit_of(
                rng.random_range(0.05..0.95),
                (m0, m0 + rng.random_range(0.1..3.0)),
                (rng.random_range(0.05..2.0), rng.random_range(0.05..2.0)),
            );
            let x = rng.random_range(-2.0..4.0);
            let plo = Normal::new(fit.low.mean, fit.low.variance.sqrt()).unwrap().pdf(x) * fit.low.weight;
            let phi = Normal::new(fit.high.mean, fit.high.variance.sqrt()).unwrap().pdf(x) * fit.high.weight;
            assert!((noise_posterior(&fit, x) - phi / (plo + phi)).abs() < 1e-9);
        }
    }

    #[test]
    fn posterior_monotone_on_fitted_model() {
        let data = mixture(2000, 5);
        let fit = fit_gmm2(&data, EmConfig::default()).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = fit.low.mean + (fit.high.mean - fit.low.mean) * i as f64 / 1000.0;
            let eta = noise_posterior(&fit, x);
            assert!(eta >= prev - 1e-12);
            prev = eta;
        }
    }
}
