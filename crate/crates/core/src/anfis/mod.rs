//! First-order Sugeno ANFIS: Gaussian memberships, product firing
//! strengths, normalized weighting of linear rule consequents.
//!
//! Rules come from subtractive clustering ([`cluster`]), parameters from
//! hybrid least-squares / gradient training ([`train`]); multiclass
//! decisions use one model per class ([`ensemble`]).

pub mod cluster;
pub mod ensemble;
pub mod train;

pub use cluster::{init_from_centers, subtractive_clustering, ClusteringConfig};
pub use ensemble::{train_ensemble, AnfisEnsemble, EnsembleTraining};
pub use train::{
    lse_consequents, premise_gradient, premise_gradient_step, train_hybrid, HybridTrainConfig,
    PremiseGradient, TrainHistory, SIGMA_FLOOR,
};

use crate::error::{Error, Result};

/// `mu(x) = exp(-(x - c)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMf {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianMf {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !center.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::config(format!(
                "gaussian membership needs finite center and sigma > 0 (got c={center}, sigma={sigma})"
            )));
        }
        Ok(Self { center, sigma })
    }

    pub fn membership(&self, x: f64) -> f64 {
        (-self.exponent(x)).exp()
    }

    #[inline]
    fn exponent(&self, x: f64) -> f64 {
        let d = x - self.center;
        d * d / (2.0 * self.sigma * self.sigma)
    }
}

/// One antecedent per input dimension; consequent `f(x) = p.x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedents: Vec<GaussianMf>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl Rule {
    pub fn consequent(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(p, x)| p * x).sum::<f64>() + self.bias
    }

    /// Raw (unnormalized) firing strength: product of memberships.
    pub fn firing_strength(&self, x: &[f64]) -> f64 {
        let e: f64 = self.antecedents.iter().zip(x).map(|(mf, &x)| mf.exponent(x)).sum();
        (-e).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnfisModel {
    rules: Vec<Rule>,
    input_dim: usize,
}

/// Result of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisOutput {
    pub output: f64,
    /// Normalized firing strengths; uniform when every raw strength
    /// underflowed to zero.
    pub strengths: Vec<f64>,
}

impl AnfisModel {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        let first = rules
            .first()
            .ok_or_else(|| Error::Empty("ANFIS model needs at least one rule".into()))?;
        let input_dim = first.antecedents.len();
        if input_dim == 0 {
            return Err(Error::Empty("ANFIS rules need at least one input".into()));
        }
        for r in &rules {
            for len in [r.antecedents.len(), r.coefficients.len()] {
                if len != input_dim {
                    return Err(Error::Dimension {
                        expected: input_dim,
                        got: len,
                    });
                }
            }
            for mf in &r.antecedents {
                GaussianMf::new(mf.center, mf.sigma)?;
            }
        }
        Ok(Self { rules, input_dim })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub(crate) fn rules_mut(&mut self) -> &mut [Rule] {
        &mut self.rules
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Normalized firing strengths, with the uniform fallback.
    pub(crate) fn normalized_strengths(&self, x: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = self.rules.iter().map(|r| r.firing_strength(x)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|v| *v /= total);
        } else {
            let u = 1.0 / w.len() as f64;
            w.iter_mut().for_each(|v| *v = u);
        }
        w
    }

    pub fn forward(&self, x: &[f64]) -> Result<AnfisOutput> {
        self.check_input(x)?;
        let strengths = self.normalized_strengths(x);
        let output = strengths
            .iter()
            .zip(&self.rules)
            .map(|(w, r)| w * r.consequent(x))
            .sum();
        Ok(AnfisOutput { output, strengths })
    }

    pub fn output(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.output)
    }
}

pub fn anfis_forward(m: &AnfisModel, x: &[f64]) -> Result<AnfisOutput> {
    m.forward(x)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_model(seed: u64, rules: usize, dim: usize) -> AnfisModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rules = (0..rules)
            .map(|_| Rule {
                antecedents: (0..dim)
                    .map(|_| GaussianMf {
                        center: rng.random_range(-1.0..1.0),
                        sigma: rng.random_range(0.5..2.0),
                    })
                    .collect(),
                coefficients: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                bias: rng.random_range(-1.0..1.0),
            })
            .collect();
        AnfisModel::new(rules).unwrap()
    }

    /// Layer-by-layer evaluation: memberships, product, normalization,
    /// consequents, weighted sum.
    pub fn oracle_forward(m: &AnfisModel, x: &[f64]) -> f64 {
        let mut w = Vec::new();
        for r in m.rules() {
            let mut prod = 1.0;
            for (d, mf) in r.antecedents.iter().enumerate() {
                prod *= (-(x[d] - mf.center).powi(2) / (2.0 * mf.sigma.powi(2))).exp();
            }
            w.push(prod);
        }
        let s: f64 = w.iter().sum();
        let mut out = 0.0;
        for (r, wr) in m.rules().iter().zip(&w) {
            let mut f = r.bias;
            for d in 0..x.len() {
                f += r.coefficients[d] * x[d];
            }
            out += wr / s * f;
        }
        out
    }
}
