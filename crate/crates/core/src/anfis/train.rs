//! Hybrid learning: consequents by batch least squares with premises
//! frozen, premises (Gaussian centers and widths) by gradient descent on the
//! sum of squared errors.

use nalgebra::{DMatrix, DVector};

use super::AnfisModel;
use crate::error::{Error, Result};

/// Widths never shrink below this during training.
pub const SIGMA_FLOOR: f64 = 1e-4;

fn check_data(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty("no training samples".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    for x in xs {
        m.check_input(x)?;
    }
    Ok(())
}

pub fn sum_squared_error(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
    check_data(m, xs, ys)?;
    Ok(xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - m.output(x).expect("dimension checked");
            e * e
        })
        .sum())
}

pub fn mean_squared_error(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
    Ok(sum_squared_error(m, xs, ys)? / xs.len() as f64)
}

/// Minimum-norm least-squares solution of `a z = b` via SVD, discarding
/// singular values below `max(rows, cols) * eps * s_max`.
pub(crate) fn min_norm_lstsq(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = rows.max(cols) as f64 * f64::EPSILON * s_max;
    if !(s_max > 0.0) {
        return DVector::zeros(cols);
    }
    svd.solve(b, tol).expect("U and V were computed")
}

/// Regressor row of one sample: `[w_r x, w_r]` for every rule r.
fn regressor(m: &AnfisModel, x: &[f64], row: &mut [f64]) {
    let d = m.input_dim();
    for (r, w) in m.normalized_strengths(x).into_iter().enumerate() {
        let block = &mut row[r * (d + 1)..(r + 1) * (d + 1)];
        for (slot, xi) in block.iter_mut().zip(x) {
            *slot = w * xi;
        }
        block[d] = w;
    }
}

/// Jointly optimal consequents for the current premises.
pub fn lse_consequents(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<AnfisModel> {
    check_data(m, xs, ys)?;
    let d = m.input_dim();
    let cols = m.num_rules() * (d + 1);
    let mut a = DMatrix::zeros(xs.len(), cols);
    let mut row = vec![0.0; cols];
    for (i, x) in xs.iter().enumerate() {
        regressor(m, x, &mut row);
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let z = min_norm_lstsq(a, &DVector::from_column_slice(ys));
    let mut out = m.clone();
    for (r, rule) in out.rules_mut().iter_mut().enumerate() {
        let block = &z.as_slice()[r * (d + 1)..(r + 1) * (d + 1)];
        rule.coefficients.copy_from_slice(&block[..d]);
        rule.bias = block[d];
    }
    Ok(out)
}

/// Derivatives of the sum of squared errors, indexed `[rule][dimension]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiseGradient {
    pub centers: Vec<Vec<f64>>,
    pub sigmas: Vec<Vec<f64>>,
}

impl PremiseGradient {
    pub fn norm(&self) -> f64 {
        self.centers
            .iter()
            .chain(&self.sigmas)
            .flatten()
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn premise_gradient(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<PremiseGradient> {
    check_data(m, xs, ys)?;
    let (r_count, d) = (m.num_rules(), m.input_dim());
    let mut g = PremiseGradient {
        centers: vec![vec![0.0; d]; r_count],
        sigmas: vec![vec![0.0; d]; r_count],
    };
    let mut w = vec![0.0; r_count];
    let mut f = vec![0.0; r_count];
    for (x, &y) in xs.iter().zip(ys) {
        for (r, rule) in m.rules().iter().enumerate() {
            w[r] = rule.firing_strength(x);
            f[r] = rule.consequent(x);
        }
        let total: f64 = w.iter().sum();
        // Under the uniform fallback the output does not depend on premises.
        if !(total > 0.0) {
            continue;
        }
        let y_hat: f64 = w.iter().zip(&f).map(|(w, f)| w * f).sum::<f64>() / total;
        let e = y - y_hat;
        for (r, rule) in m.rules().iter().enumerate() {
            // dL/dlog(w_r) for L = sum e^2.
            let k = -2.0 * e * (w[r] / total) * (f[r] - y_hat);
            if k == 0.0 {
                continue;
            }
            for (dim, mf) in rule.antecedents.iter().enumerate() {
                let diff = x[dim] - mf.center;
                let s2 = mf.sigma * mf.sigma;
                g.centers[r][dim] += k * diff / s2;
                g.sigmas[r][dim] += k * diff * diff / (s2 * mf.sigma);
            }
        }
    }
    Ok(g)
}

/// One descent step on every center and width; widths are clamped to
/// [`SIGMA_FLOOR`].
pub fn premise_gradient_step(m: &AnfisModel, xs: &[Vec<f64>], ys: &[f64], lr: f64) -> Result<AnfisModel> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::config(format!("learning rate must be positive, got {lr}")));
    }
    let g = premise_gradient(m, xs, ys)?;
    let mut out = m.clone();
    for (r, rule) in out.rules_mut().iter_mut().enumerate() {
        for (dim, mf) in rule.antecedents.iter_mut().enumerate() {
            mf.center -= lr * g.centers[r][dim];
            mf.sigma = (mf.sigma - lr * g.sigmas[r][dim]).max(SIGMA_FLOOR);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrainConfig {
    pub epochs: usize,
    /// Initial premise step; halved after every rejected step.
    pub learning_rate: f64,
}

impl Default for HybridTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 0.01,
        }
    }
}

impl HybridTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// Mean squared error before training.
    pub initial_loss: f64,
    /// Mean squared error after each epoch.
    pub losses: Vec<f64>,
    pub rollbacks: usize,
    pub final_learning_rate: f64,
}

impl TrainHistory {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap_or(&self.initial_loss)
    }
}

/// Each epoch solves the consequents, then takes one premise step. A step
/// that does not lower the loss is undone and the rate halved, so the
/// recorded loss never increases.
pub fn train_hybrid(
    m: &AnfisModel,
    xs: &[Vec<f64>],
    ys: &[f64],
    cfg: &HybridTrainConfig,
) -> Result<(AnfisModel, TrainHistory)> {
    cfg.validate()?;
    let initial_loss = mean_squared_error(m, xs, ys)?;
    let mut model = m.clone();
    let mut loss = initial_loss;
    let mut lr = cfg.learning_rate;
    let mut history = TrainHistory {
        initial_loss,
        losses: Vec::with_capacity(cfg.epochs),
        rollbacks: 0,
        final_learning_rate: lr,
    };
    for _ in 0..cfg.epochs {
        let solved = lse_consequents(&model, xs, ys)?;
        let solved_loss = mean_squared_error(&solved, xs, ys)?;
        if solved_loss <= loss {
            model = solved;
            loss = solved_loss;
        }
        let stepped = premise_gradient_step(&model, xs, ys, lr)?;
        let stepped_loss = mean_squared_error(&stepped, xs, ys)?;
        if stepped_loss < loss {
            model = stepped;
            loss = stepped_loss;
        } else {
            lr *= 0.5;
            history.rollbacks += 1;
        }
        history.losses.push(loss);
    }
    history.final_learning_rate = lr;
    Ok((model, history))
}
