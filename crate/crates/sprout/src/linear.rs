//! L2-regularized logistic regression on sparse features.
//!
//! The objective is `0.5 * ||w||^2 + C * sum_i log(1 + exp(-y_i (x_i.w + b)))`
//! with the intercept unregularized, so an inverse regularization strength
//! like `C = 0.05` carries over literally from the usual toolkit convention.
//! It is minimized with a deterministic limited-memory BFGS descent and a
//! backtracking line search, which keeps the objective strictly decreasing;
//! multiclass problems decompose one-vs-rest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::forest::argmax_lowest;
use crate::sparse::SparseMatrix;

/// How to decompose multiclass problems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogisticMode {
    /// Binary for two classes, one-vs-rest otherwise.
    #[default]
    Auto,
    /// Single binary problem; errors on more than two classes.
    Binary,
    /// One binary problem per class, even with two classes.
    OneVsRest,
}

/// Solver and regularization settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Inverse regularization strength; larger = weaker penalty.
    pub c: f64,
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub fit_intercept: bool,
    pub mode: LogisticMode,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
            fit_intercept: true,
            mode: LogisticMode::Auto,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fitted model: one weight row per binary subproblem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    /// Class ids seen at fit time, ascending.
    pub classes: Vec<usize>,
    pub one_vs_rest: bool,
    /// False when any subproblem hit `max_iter` before reaching `tol`.
    pub converged: bool,
    pub params: LogisticParams,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, |w| w.len())
    }
}

/// `log(1 + exp(t))` without overflow.
fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `sigmoid(-t) = 1 / (1 + exp(t))`, stable for large |t|.
fn sigmoid_neg(t: f64) -> f64 {
    1.0 / (1.0 + t.exp())
}

/// Loss and exact gradient of the regularized negative log-likelihood.
///
/// `y` entries must be +1 or -1. Returns `(loss, grad_w, grad_b)`; the
/// intercept gradient is reported even when the caller keeps `b` fixed.
pub fn nll_loss_grad(
    weights: &[f64],
    intercept: f64,
    x: &SparseMatrix,
    y: &[f64],
    c: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    if x.n_cols() != weights.len() {
        return Err(Error::Shape(format!(
            "{} weights for {} features",
            weights.len(),
            x.n_cols()
        )));
    }
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if !intercept.is_finite()
        || !c.is_finite()
        || weights.iter().any(|w| !w.is_finite())
        || y.iter().any(|t| !t.is_finite())
    {
        return Err(Error::Numeric(
            "non-finite input to the logistic objective".into(),
        ));
    }

    let mut loss = 0.5 * weights.iter().map(|w| w * w).sum::<f64>();
    let mut grad_w = weights.to_vec();
    let mut grad_b = 0.0;
    for (i, &target) in y.iter().enumerate() {
        let score = x.dot_row(i, weights) + intercept;
        let margin = target * score;
        loss += c * log1p_exp(-margin);
        // d/ds of the loss term: -y * sigmoid(-y s).
        let slope = c * -target * sigmoid_neg(margin);
        let (cols, vals) = x.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            grad_w[j] += slope * v;
        }
        grad_b += slope;
    }
    Ok((loss, grad_w, grad_b))
}

struct Solve {
    point: Vec<f64>,
    grad_norm: f64,
    converged: bool,
    loss_history: Vec<f64>,
}

/// Limited-memory BFGS with backtracking Armijo line search.
///
/// Accepted steps strictly decrease the objective; the history records every
/// accepted iterate's loss.
fn minimize<F>(
    objective: F,
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    deadline: Deadline,
) -> Result<Solve>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    const MEMORY: usize = 10;
    const ARMIJO: f64 = 1e-4;

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let norm = |a: &[f64]| dot(a, a).sqrt();

    let mut point = x0;
    let (mut loss, mut grad) = objective(&point)?;
    let mut history = vec![loss];
    let mut pairs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new(); // (s, y, rho)

    for _ in 0..max_iter {
        deadline.check()?;
        if norm(&grad) <= tol {
            return Ok(Solve {
                grad_norm: norm(&grad),
                point,
                converged: true,
                loss_history: history,
            });
        }

        // Two-loop recursion for the quasi-Newton direction.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, yv, rho) in pairs.iter().rev() {
            let alpha = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(yv) {
                *qi -= alpha * yi;
            }
            alphas.push(alpha);
        }
        let gamma = pairs.last().map_or(1.0, |(s, yv, _)| {
            let den = dot(yv, yv);
            if den > 0.0 {
                dot(s, yv) / den
            } else {
                1.0
            }
        });
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, yv, rho), alpha) in pairs.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * dot(yv, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (alpha - beta) * si;
            }
        }
        let mut direction: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            // Curvature went bad; fall back to steepest descent.
            direction = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
            pairs.clear();
        }

        // Backtracking Armijo line search; a step is accepted only if it
        // strictly decreases the objective, so history stays monotone.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate: Vec<f64> = point
                .iter()
                .zip(&direction)
                .map(|(p, d)| p + step * d)
                .collect();
            let (cand_loss, cand_grad) = objective(&candidate)?;
            if cand_loss.is_finite()
                && cand_loss < loss
                && cand_loss <= loss + ARMIJO * step * slope
            {
                accepted = Some((candidate, cand_loss, cand_grad));
                break;
            }
            step *= 0.5;
        }
        let Some((new_point, new_loss, new_grad)) = accepted else {
            break; // no strict decrease possible at machine precision
        };

        let s: Vec<f64> = new_point.iter().zip(&point).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 {
            if pairs.len() == MEMORY {
                pairs.remove(0);
            }
            pairs.push((s, yv, 1.0 / sy));
        }
        point = new_point;
        loss = new_loss;
        grad = new_grad;
        history.push(loss);
    }

    let grad_norm = norm(&grad);
    Ok(Solve {
        converged: grad_norm <= tol,
        grad_norm,
        point,
        loss_history: history,
    })
}

/// Result of one binary subproblem.
struct BinaryFit {
    weights: Vec<f64>,
    intercept: f64,
    converged: bool,
}

fn fit_binary(
    x: &SparseMatrix,
    targets: &[f64],
    params: &LogisticParams,
    deadline: Deadline,
) -> Result<BinaryFit> {
    let d = x.n_cols();
    let with_b = params.fit_intercept;
    let objective = |theta: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (w, b) = if with_b {
            (&theta[..d], theta[d])
        } else {
            (&theta[..d], 0.0)
        };
        let (loss, grad_w, grad_b) = nll_loss_grad(w, b, x, targets, params.c)?;
        let mut grad = grad_w;
        if with_b {
            grad.push(grad_b);
        }
        Ok((loss, grad))
    };
    let x0 = vec![0.0; if with_b { d + 1 } else { d }];
    let solve = minimize(objective, x0, params.tol, params.max_iter, deadline)?;
    debug_assert!(
        !solve.converged || solve.grad_norm <= params.tol,
        "convergent fits must satisfy the gradient tolerance"
    );
    debug_assert!(
        solve.loss_history.windows(2).all(|w| w[1] < w[0]),
        "the objective must decrease at every accepted step"
    );
    let mut theta = solve.point;
    let intercept = if with_b { theta.pop().unwrap() } else { 0.0 };
    Ok(BinaryFit {
        weights: theta,
        intercept,
        converged: solve.converged,
    })
}

/// Fit a binary or one-vs-rest logistic regression.
///
/// The solver is deterministic (no randomness anywhere), so identical inputs
/// give identical models. A fit that stops on `max_iter` is returned with
/// `converged = false` rather than an error.
pub fn fit_logistic(
    x: &SparseMatrix,
    y: &[usize],
    params: &LogisticParams,
    deadline: Deadline,
) -> Result<LogisticModel> {
    params.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Domain(
            "logistic regression needs at least two classes".into(),
        ));
    }
    let one_vs_rest = match params.mode {
        LogisticMode::Auto => classes.len() > 2,
        LogisticMode::OneVsRest => true,
        LogisticMode::Binary => {
            if classes.len() > 2 {
                return Err(Error::Config(format!(
                    "binary mode requested but {} classes present",
                    classes.len()
                )));
            }
            false
        }
    };

    let fits: Vec<BinaryFit> = if one_vs_rest {
        classes
            .par_iter()
            .map(|&positive| {
                let targets: Vec<f64> = y
                    .iter()
                    .map(|&l| if l == positive { 1.0 } else { -1.0 })
                    .collect();
                fit_binary(x, &targets, params, deadline)
            })
            .collect::<Result<_>>()?
    } else {
        let positive = classes[1];
        let targets: Vec<f64> = y
            .iter()
            .map(|&l| if l == positive { 1.0 } else { -1.0 })
            .collect();
        vec![fit_binary(x, &targets, params, deadline)?]
    };

    Ok(LogisticModel {
        converged: fits.iter().all(|f| f.converged),
        weights: fits.iter().map(|f| f.weights.clone()).collect(),
        intercepts: fits.iter().map(|f| f.intercept).collect(),
        classes,
        one_vs_rest,
        params: params.clone(),
    })
}

/// Per-row class probabilities over `model.classes`, rows summing to 1.
pub fn predict_proba(model: &LogisticModel, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
    if x.n_cols() != model.n_features() {
        return Err(Error::Shape(format!(
            "model expects {} features, input has {}",
            model.n_features(),
            x.n_cols()
        )));
    }
    let mut out = Vec::with_capacity(x.n_rows());
    for i in 0..x.n_rows() {
        let row = if model.one_vs_rest {
            let mut probs: Vec<f64> = model
                .weights
                .iter()
                .zip(&model.intercepts)
                .map(|(w, &b)| {
                    let s = x.dot_row(i, w) + b;
                    sigmoid_neg(-s)
                })
                .collect();
            let total: f64 = probs.iter().sum();
            if total > 0.0 {
                for p in &mut probs {
                    *p /= total;
                }
            }
            probs
        } else {
            let s = x.dot_row(i, &model.weights[0]) + model.intercepts[0];
            let p = sigmoid_neg(-s);
            vec![1.0 - p, p]
        };
        out.push(row);
    }
    Ok(out)
}

/// Predict class ids (from `model.classes`), ties to the lowest class id.
pub fn predict_logistic(model: &LogisticModel, x: &SparseMatrix) -> Result<Vec<usize>> {
    Ok(predict_proba(model, x)?
        .iter()
        .map(|row| model.classes[argmax_lowest(row)])
        .collect())
}

/// Binary decision at threshold `t`: label 1 iff `p >= t`.
pub fn apply_threshold(positive_probs: &[f64], t: f64) -> Result<Vec<usize>> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Config(format!(
            "threshold must lie strictly inside (0, 1), got {t}"
        )));
    }
    if positive_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
    }
    Ok(positive_probs
        .iter()
        .map(|&p| usize::from(p >= t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_feature_data(n: usize) -> (SparseMatrix, Vec<usize>) {
        // Class 1 at +1.0, class 0 at -1.0 on the single feature.
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| vec![(0, if i % 2 == 1 { 1.0 } else { -1.0 })])
            .collect();
        let y = (0..n).map(|i| i % 2).collect();
        (SparseMatrix::from_rows(1, &rows).unwrap(), y)
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        n: usize,
        d: usize,
    ) -> (SparseMatrix, Vec<f64>, Vec<f64>, f64) {
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|_| {
                (0..d)
                    .filter_map(|j| {
                        if rng.gen_bool(0.7) {
                            Some((j, rng.gen_range(0.5..2.0)))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let x = SparseMatrix::from_rows(d, &rows).unwrap();
        let y: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-0.5..0.5);
        (x, y, w, b)
    }

    #[test]
    fn zero_weights_loss_is_n_log_two() {
        let (x, _) = one_feature_data(6);
        let y = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let c = 2.5;
        let (loss, _, _) = nll_loss_grad(&[0.0], 0.0, &x, &y, c).unwrap();
        assert!((loss - c * 6.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn single_point_hand_gradient() {
        let x = SparseMatrix::from_rows(1, &[vec![(0, 1.0)]]).unwrap();
        let (_, grad_w, grad_b) = nll_loss_grad(&[0.0], 0.0, &x, &[1.0], 1.0).unwrap();
        assert!((grad_w[0] - -0.5).abs() < 1e-15);
        assert!((grad_b - -0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (x, y, w, b) = random_instance(&mut rng, 5, 4);
        let (_, grad_w, grad_b) = nll_loss_grad(&w, b, &x, &y, 1.0).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for j in 0..w.len() {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let (lp, _, _) = nll_loss_grad(&wp, b, &x, &y, 1.0).unwrap();
            let (lm, _, _) = nll_loss_grad(&wm, b, &x, &y, 1.0).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (numeric - grad_w[j]).abs() / (numeric.abs() + grad_w[j].abs()).max(1e-8);
            worst = worst.max(rel);
        }
        let (lp, _, _) = nll_loss_grad(&w, b + h, &x, &y, 1.0).unwrap();
        let (lm, _, _) = nll_loss_grad(&w, b - h, &x, &y, 1.0).unwrap();
        let numeric_b = (lp - lm) / (2.0 * h);
        worst = worst.max((numeric_b - grad_b).abs() / (numeric_b.abs() + grad_b.abs()).max(1e-8));
        assert!(worst <= 1e-4, "max relative error {worst}");
    }

    #[test]
    fn non_finite_inputs_are_numeric_errors() {
        let (x, _) = one_feature_data(2);
        assert!(matches!(
            nll_loss_grad(&[f64::NAN], 0.0, &x, &[1.0, -1.0], 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            nll_loss_grad(&[0.0], f64::INFINITY, &x, &[1.0, -1.0], 1.0),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn separable_fit_beats_grid_search_oracle() {
        let (x, y) = one_feature_data(20);
        let params = LogisticParams {
            c: 1000.0,
            fit_intercept: false,
            ..LogisticParams::default()
        };
        let model = fit_logistic(&x, &y, &params, Deadline::NONE).unwrap();
        assert!(model.weights[0][0] > 0.0, "separating weight must be positive");
        assert_eq!(predict_logistic(&model, &x).unwrap(), y);

        // Grid-search oracle over w in [-10, 10].
        let targets: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let mut best = f64::INFINITY;
        for k in -1000..=1000 {
            let w = k as f64 / 100.0;
            let (loss, _, _) = nll_loss_grad(&[w], 0.0, &x, &targets, params.c).unwrap();
            best = best.min(loss);
        }
        let (fit_loss, _, _) =
            nll_loss_grad(&model.weights[0], 0.0, &x, &targets, params.c).unwrap();
        assert!(fit_loss <= best + 1e-6, "fit {fit_loss} vs grid best {best}");
    }

    #[test]
    fn label_flip_negates_weights() {
        let (x, y) = one_feature_data(12);
        let flipped: Vec<usize> = y.iter().map(|&l| 1 - l).collect();
        let params = LogisticParams::default();
        let a = fit_logistic(&x, &y, &params, Deadline::NONE).unwrap();
        let b = fit_logistic(&x, &flipped, &params, Deadline::NONE).unwrap();
        assert!((a.weights[0][0] + b.weights[0][0]).abs() <= 1e-6);
        assert!((a.intercepts[0] + b.intercepts[0]).abs() <= 1e-6);
    }

    #[test]
    fn objective_decreases_monotonically() {
        let (x, y) = one_feature_data(16);
        let targets: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let objective = |theta: &[f64]| {
            let (loss, grad_w, grad_b) = nll_loss_grad(&theta[..1], theta[1], &x, &targets, 1.0)?;
            Ok((loss, vec![grad_w[0], grad_b]))
        };
        let solve = minimize(objective, vec![0.0, 0.0], 1e-6, 200, Deadline::NONE).unwrap();
        assert!(solve.converged);
        assert!(solve.grad_norm <= 1e-6);
        for pair in solve.loss_history.windows(2) {
            assert!(pair[1] < pair[0], "history must strictly decrease");
        }
    }

    #[test]
    fn single_class_is_domain_error() {
        let (x, _) = one_feature_data(4);
        let err = fit_logistic(&x, &[1, 1, 1, 1], &LogisticParams::default(), Deadline::NONE);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        let (x, y) = one_feature_data(10);
        let params = LogisticParams {
            max_iter: 1,
            tol: 1e-14,
            ..LogisticParams::default()
        };
        let model = fit_logistic(&x, &y, &params, Deadline::NONE).unwrap();
        assert!(!model.converged);
    }

    #[test]
    fn zero_weight_model_is_uniform() {
        let model = LogisticModel {
            weights: vec![vec![0.0, 0.0]],
            intercepts: vec![0.0],
            classes: vec![0, 1],
            one_vs_rest: false,
            converged: true,
            params: LogisticParams::default(),
        };
        let x = SparseMatrix::zeros(3, 2);
        for row in predict_proba(&model, &x).unwrap() {
            assert_eq!(row, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn proba_rows_sum_to_one() {
        let (x, y3) = {
            let rows: Vec<Vec<(usize, f64)>> = (0..30)
                .map(|i| vec![(i % 3, 1.0 + (i % 4) as f64)])
                .collect();
            let y = (0..30).map(|i| i % 3).collect::<Vec<_>>();
            (SparseMatrix::from_rows(3, &rows).unwrap(), y)
        };
        let model = fit_logistic(&x, &y3, &LogisticParams::default(), Deadline::NONE).unwrap();
        assert!(model.one_vs_rest);
        for row in predict_proba(&model, &x).unwrap() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn increasing_positive_feature_raises_positive_probability() {
        let (x, y) = one_feature_data(20);
        let model = fit_logistic(&x, &y, &LogisticParams::default(), Deadline::NONE).unwrap();
        let probe = SparseMatrix::from_rows(1, &[vec![(0, 0.2)], vec![(0, 1.5)]]).unwrap();
        let probs = predict_proba(&model, &probe).unwrap();
        assert!(probs[1][1] > probs[0][1]);
    }

    #[test]
    fn ovr_with_two_classes_agrees_with_binary() {
        let (x, y) = one_feature_data(24);
        let binary = fit_logistic(&x, &y, &LogisticParams::default(), Deadline::NONE).unwrap();
        let ovr_params = LogisticParams {
            mode: LogisticMode::OneVsRest,
            ..LogisticParams::default()
        };
        let ovr = fit_logistic(&x, &y, &ovr_params, Deadline::NONE).unwrap();
        assert!(!binary.one_vs_rest);
        assert!(ovr.one_vs_rest);
        let probe = SparseMatrix::from_rows(
            1,
            &[vec![(0, -2.0)], vec![(0, -0.3)], vec![(0, 0.4)], vec![(0, 3.0)]],
        )
        .unwrap();
        assert_eq!(
            predict_logistic(&binary, &probe).unwrap(),
            predict_logistic(&ovr, &probe).unwrap()
        );
    }

    #[test]
    fn binary_mode_rejects_three_classes() {
        let rows: Vec<Vec<(usize, f64)>> = (0..9).map(|i| vec![(0, i as f64 + 1.0)]).collect();
        let x = SparseMatrix::from_rows(1, &rows).unwrap();
        let y: Vec<usize> = (0..9).map(|i| i % 3).collect();
        let params = LogisticParams {
            mode: LogisticMode::Binary,
            ..LogisticParams::default()
        };
        assert!(matches!(
            fit_logistic(&x, &y, &params, Deadline::NONE),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn threshold_low_cutoff_flags_small_probabilities() {
        let labels = apply_threshold(&[0.01, 0.001], 0.007).unwrap();
        assert_eq!(labels, vec![1, 0]);
    }

    #[test]
    fn threshold_boundary_is_positive() {
        let labels = apply_threshold(&[0.3], 0.3).unwrap();
        assert_eq!(labels, vec![1]);
    }

    #[test]
    fn threshold_half_matches_argmax() {
        let (x, y) = one_feature_data(20);
        let model = fit_logistic(&x, &y, &LogisticParams::default(), Deadline::NONE).unwrap();
        let probe = SparseMatrix::from_rows(
            1,
            &[vec![(0, -1.7)], vec![(0, -0.1)], vec![(0, 0.9)], vec![(0, 2.0)]],
        )
        .unwrap();
        let probs = predict_proba(&model, &probe).unwrap();
        let positives: Vec<f64> = probs.iter().map(|r| r[1]).collect();
        let via_threshold = apply_threshold(&positives, 0.5).unwrap();
        let via_argmax = predict_logistic(&model, &probe).unwrap();
        assert_eq!(via_threshold, via_argmax);
    }

    #[test]
    fn threshold_out_of_range_is_config_error() {
        assert!(matches!(apply_threshold(&[0.5], 0.0), Err(Error::Config(_))));
        assert!(matches!(apply_threshold(&[0.5], 1.0), Err(Error::Config(_))));
    }
}
