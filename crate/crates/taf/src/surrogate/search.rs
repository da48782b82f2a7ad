//! Specification-driven parameter search: projected gradient descent on a
//! one-sided hinge loss (penalty only when a spec is violated), restarted
//! from many seeded random initial points in parallel. Restarts whose loss
//! reaches exactly zero are spec-satisfying candidates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::synth::{CircuitMetrics, CircuitParams, ParamRanges, NUM_PARAMS};
use crate::surrogate::mlp::MlpModel;
use crate::surrogate::transfer::TransferModel;

/// Metric goals: power is a ceiling, SFDR a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub max_power_mw: f64,
    pub min_sfdr_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: TargetSpec,
    #[serde(default = "default_restarts")]
    pub num_restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_search_lr")]
    pub learning_rate: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub param_ranges: ParamRanges,
}

fn default_restarts() -> usize {
    64
}
fn default_max_iters() -> usize {
    200
}
fn default_search_lr() -> f64 {
    1.0
}

/// One search result; `loss == 0` means both specs are met by the model's
/// prediction at `params`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub params: CircuitParams,
    pub predicted: CircuitMetrics,
    pub loss: f64,
    pub restart: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// All restart results sorted by (loss, restart index).
    pub candidates: Vec<Candidate>,
    /// True when at least one candidate satisfies the specs.
    pub feasible: bool,
}

/// Differentiable parameter-to-metric predictor usable by the search.
pub trait Regressor: Sync {
    /// Predicted (power_mw, sfdr_db) in raw units.
    fn predict_metrics(&self, params: &[f64]) -> [f64; 2];
    /// Gradient of `dy · metrics(params)` with respect to the parameters.
    fn metrics_gradient(&self, params: &[f64], dy: &[f64; 2]) -> Vec<f64>;
    /// Natural per-metric scales used to balance the hinge terms.
    fn metric_scales(&self) -> [f64; 2];
}

impl Regressor for MlpModel {
    fn predict_metrics(&self, params: &[f64]) -> [f64; 2] {
        let y = self.predict(params);
        [y[0], y[1]]
    }

    fn metrics_gradient(&self, params: &[f64], dy: &[f64; 2]) -> Vec<f64> {
        self.input_gradient(params, dy)
    }

    fn metric_scales(&self) -> [f64; 2] {
        [self.y_scale[0].max(1e-9), self.y_scale[1].max(1e-9)]
    }
}

impl Regressor for TransferModel {
    fn predict_metrics(&self, params: &[f64]) -> [f64; 2] {
        let y = self.predict(params);
        [y[0], y[1]]
    }

    fn metrics_gradient(&self, params: &[f64], dy: &[f64; 2]) -> Vec<f64> {
        self.input_gradient(params, dy)
    }

    fn metric_scales(&self) -> [f64; 2] {
        [self.core.y_scale[0].max(1e-9), self.core.y_scale[1].max(1e-9)]
    }
}

/// Hinge spec loss and its output-space gradient at a prediction.
fn spec_loss(pred: &[f64; 2], target: &TargetSpec, scales: &[f64; 2]) -> (f64, [f64; 2]) {
    let mut loss = 0.0;
    let mut dy = [0.0, 0.0];
    let power_excess = (pred[0] - target.max_power_mw) / scales[0];
    if power_excess > 0.0 {
        loss += power_excess;
        dy[0] = 1.0 / scales[0];
    }
    let sfdr_deficit = (target.min_sfdr_db - pred[1]) / scales[1];
    if sfdr_deficit > 0.0 {
        loss += sfdr_deficit;
        dy[1] = -1.0 / scales[1];
    }
    (loss, dy)
}

/// Runs `num_restarts` independent projected-gradient descents with
/// backtracking line search, merged deterministically by (loss, restart).
pub fn search_params(model: &dyn Regressor, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if cfg.num_restarts < 1 {
        return Err(Error::InvalidSpec("num_restarts must be >= 1".into()));
    }
    if cfg.max_iters < 1 {
        return Err(Error::InvalidSpec("max_iters must be >= 1".into()));
    }
    let scales = model.metric_scales();

    let mut candidates: Vec<Candidate> = (0..cfg.num_restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.rng_seed
                    .wrapping_add((restart as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15)),
            );
            let mut x = [0.0f64; NUM_PARAMS];
            for (i, v) in x.iter_mut().enumerate() {
                let (lo, hi) = cfg.param_ranges.0[i];
                *v = rng.random_range(lo..=hi);
            }

            let mut pred = model.predict_metrics(&x);
            let (mut loss, mut dy) = spec_loss(&pred, &cfg.target, &scales);

            for _ in 0..cfg.max_iters {
                if loss == 0.0 {
                    break;
                }
                let grad = model.metrics_gradient(&x, &dy);
                let mut accepted = false;
                let mut step = cfg.learning_rate;
                for _ in 0..30 {
                    let mut trial = CircuitParams(x);
                    for (v, g) in trial.0.iter_mut().zip(&grad) {
                        *v -= step * g;
                    }
                    cfg.param_ranges.clamp(&mut trial);
                    let trial_pred = model.predict_metrics(&trial.0);
                    let (trial_loss, trial_dy) = spec_loss(&trial_pred, &cfg.target, &scales);
                    if trial_loss < loss {
                        x = trial.0;
                        pred = trial_pred;
                        loss = trial_loss;
                        dy = trial_dy;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break; // projected coordinate-wise stationary point
                }
            }

            Candidate {
                params: CircuitParams(x),
                predicted: CircuitMetrics {
                    power_mw: pred[0],
                    sfdr_db: pred[1],
                },
                loss,
                restart,
            }
        })
        .collect();

    candidates.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.restart.cmp(&b.restart)));
    let feasible = candidates.first().map(|c| c.loss == 0.0).unwrap_or(false);
    Ok(SearchOutcome {
        candidates,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear analytic model: power = sum(z)/2, sfdr = 40 + 20*z0, where z is
    /// range-normalized. Simple enough to reason about feasibility exactly.
    struct LinearModel {
        ranges: ParamRanges,
    }

    impl Regressor for LinearModel {
        fn predict_metrics(&self, params: &[f64]) -> [f64; 2] {
            let z = self
                .ranges
                .normalize(&CircuitParams(params.try_into().unwrap()));
            [z.iter().sum::<f64>() / 2.0, 40.0 + 20.0 * z[0]]
        }

        fn metrics_gradient(&self, params: &[f64], dy: &[f64; 2]) -> Vec<f64> {
            let _ = params;
            (0..NUM_PARAMS)
                .map(|i| {
                    let (lo, hi) = self.ranges.0[i];
                    let dz = 1.0 / (hi - lo);
                    let mut g = dy[0] * 0.5 * dz;
                    if i == 0 {
                        g += dy[1] * 20.0 * dz;
                    }
                    g
                })
                .collect()
        }

        fn metric_scales(&self) -> [f64; 2] {
            [1.0, 10.0]
        }
    }

    fn base_cfg(target: TargetSpec) -> SearchConfig {
        SearchConfig {
            target,
            num_restarts: 16,
            max_iters: 200,
            learning_rate: 1.0,
            rng_seed: 42,
            param_ranges: ParamRanges::default(),
        }
    }

    #[test]
    fn feasible_spec_is_satisfied_with_zero_loss() {
        let model = LinearModel {
            ranges: ParamRanges::default(),
        };
        // Achievable: power <= 2.0 (min 0) and sfdr >= 50 (needs z0 >= 0.5,
        // which costs only 0.25 power).
        let cfg = base_cfg(TargetSpec {
            max_power_mw: 2.0,
            min_sfdr_db: 50.0,
        });
        let outcome = search_params(&model, &cfg).unwrap();
        assert!(outcome.feasible);
        let best = &outcome.candidates[0];
        assert_eq!(best.loss, 0.0);
        assert!(best.predicted.power_mw <= 2.0 + 1e-9);
        assert!(best.predicted.sfdr_db >= 50.0 - 1e-9);
    }

    #[test]
    fn impossible_spec_is_flagged_infeasible() {
        let model = LinearModel {
            ranges: ParamRanges::default(),
        };
        let cfg = base_cfg(TargetSpec {
            max_power_mw: f64::NEG_INFINITY,
            min_sfdr_db: 0.0,
        });
        let outcome = search_params(&model, &cfg).unwrap();
        assert!(!outcome.feasible);
        assert_eq!(outcome.candidates.len(), 16);
        assert!(outcome.candidates.iter().all(|c| c.loss > 0.0));
    }

    #[test]
    fn results_are_sorted_and_deterministic() {
        let model = LinearModel {
            ranges: ParamRanges::default(),
        };
        let cfg = base_cfg(TargetSpec {
            max_power_mw: 0.4,
            min_sfdr_db: 55.0,
        });
        let a = search_params(&model, &cfg).unwrap();
        let b = search_params(&model, &cfg).unwrap();
        assert_eq!(a.candidates.len(), b.candidates.len());
        for (x, y) in a.candidates.iter().zip(&b.candidates) {
            assert_eq!(x.params, y.params);
            assert_eq!(x.loss, y.loss);
            assert_eq!(x.restart, y.restart);
        }
        for w in a.candidates.windows(2) {
            assert!(w[0].loss <= w[1].loss);
        }
    }

    #[test]
    fn candidates_respect_parameter_ranges() {
        let model = LinearModel {
            ranges: ParamRanges::default(),
        };
        let cfg = base_cfg(TargetSpec {
            max_power_mw: 0.1,
            min_sfdr_db: 58.0,
        });
        let outcome = search_params(&model, &cfg).unwrap();
        for c in &outcome.candidates {
            for (i, &(lo, hi)) in cfg.param_ranges.0.iter().enumerate() {
                assert!(c.params.0[i] >= lo - 1e-12 && c.params.0[i] <= hi + 1e-12);
            }
        }
    }
}
