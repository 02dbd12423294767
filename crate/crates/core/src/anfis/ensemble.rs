//! One-vs-rest ensemble: one single-output model per class, all sharing
//! the rule premises found by clustering the pooled training inputs.

use rayon::prelude::*;

use super::{
    cluster::cluster_indices, init_from_centers, train_hybrid, AnfisModel, ClusteringConfig,
    GaussianMf, HybridTrainConfig, Rule, TrainHistory,
};
use crate::error::{Error, Result};
use crate::model_file::{self, ModelKind};
use crate::vocab::{argmax, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct AnfisEnsemble {
    vocabulary: Vocabulary,
    models: Vec<AnfisModel>,
}

/// Trained ensemble plus the per-class loss histories.
#[derive(Debug, Clone)]
pub struct EnsembleTraining {
    pub ensemble: AnfisEnsemble,
    pub histories: Vec<TrainHistory>,
}

impl AnfisEnsemble {
    pub fn new(vocabulary: Vocabulary, models: Vec<AnfisModel>) -> Result<Self> {
        if models.len() != vocabulary.len() {
            return Err(Error::Dimension {
                expected: vocabulary.len(),
                got: models.len(),
            });
        }
        let dim = models[0].input_dim();
        if let Some(m) = models.iter().find(|m| m.input_dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: m.input_dim(),
            });
        }
        Ok(Self { vocabulary, models })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn models(&self) -> &[AnfisModel] {
        &self.models
    }

    pub fn input_dim(&self) -> usize {
        self.models[0].input_dim()
    }

    /// Per-class outputs in vocabulary order.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.models.iter().map(|m| m.output(x)).collect()
    }

    /// Argmax class index (first wins ties) and the per-class scores.
    pub fn classify(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        let scores = self.scores(x)?;
        Ok((argmax(&scores), scores))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        model_file::write_header(&mut out, ModelKind::Anfis, &self.vocabulary);
        out.push_str(&format!("input_dim {}\n", self.input_dim()));
        for (label, m) in self.vocabulary.labels().iter().zip(&self.models) {
            out.push_str(&format!("class {label}\n"));
            out.push_str(&format!("rules {}\n", m.num_rules()));
            for r in m.rules() {
                let mf: Vec<f64> = r.antecedents.iter().flat_map(|g| [g.center, g.sigma]).collect();
                model_file::write_reals(&mut out, "mf", &mf);
                let mut out_coef = r.coefficients.clone();
                out_coef.push(r.bias);
                model_file::write_reals(&mut out, "out", &out_coef);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (kind, vocabulary, mut lines) = model_file::read_header(text)?;
        if kind != ModelKind::Anfis {
            return Err(Error::Model(format!("expected an anfis model, found {}", kind.as_str())));
        }
        let dim = lines.expect_usize("input_dim")?;
        if dim == 0 {
            return Err(lines.error("input_dim must be positive"));
        }
        let mut models = Vec::with_capacity(vocabulary.len());
        for label in vocabulary.labels() {
            let found = lines.expect("class")?;
            if found != label {
                return Err(lines.error(format!("expected class '{label}', found '{found}'")));
            }
            let count = lines.expect_usize("rules")?;
            let mut rules = Vec::with_capacity(count);
            for _ in 0..count {
                let mf = lines.expect_reals("mf", 2 * dim)?;
                let antecedents = mf
                    .chunks(2)
                    .map(|p| GaussianMf::new(p[0], p[1]))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| lines.error(e.to_string()))?;
                let mut coefficients = lines.expect_reals("out", dim + 1)?;
                let bias = coefficients.pop().expect("dim + 1 values");
                rules.push(Rule {
                    antecedents,
                    coefficients,
                    bias,
                });
            }
            models.push(AnfisModel::new(rules).map_err(|e| lines.error(e.to_string()))?);
        }
        lines.finish()?;
        Self::new(vocabulary, models)
    }
}

/// Clusters the pooled training inputs once, then trains one model per class
/// on 1/0 targets (classes in parallel).
pub fn train_ensemble(
    xs: &[Vec<f64>],
    labels: &[usize],
    vocabulary: &Vocabulary,
    clustering: &ClusteringConfig,
    training: &HybridTrainConfig,
) -> Result<EnsembleTraining> {
    if xs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: labels.len(),
        });
    }
    for (class, name) in vocabulary.labels().iter().enumerate() {
        if !labels.contains(&class) {
            return Err(Error::MissingClass(name.clone()));
        }
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= vocabulary.len()) {
        return Err(Error::config(format!("class index {bad} outside vocabulary")));
    }
    training.validate()?;
    let centers: Vec<Vec<f64>> = cluster_indices(xs, clustering)?
        .into_iter()
        .map(|i| xs[i].clone())
        .collect();
    let init = init_from_centers(&centers, xs, clustering.radius)?;
    let trained = (0..vocabulary.len())
        .into_par_iter()
        .map(|class| {
            let ys: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { 0.0 }).collect();
            train_hybrid(&init, xs, &ys, training)
        })
        .collect::<Result<Vec<_>>>()?;
    let (models, histories) = trained.into_iter().unzip();
    Ok(EnsembleTraining {
        ensemble: AnfisEnsemble::new(vocabulary.clone(), models)?,
        histories,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_model;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_model(value: f64) -> AnfisModel {
        AnfisModel::new(vec![Rule {
            antecedents: vec![GaussianMf { center: 0.0, sigma: 1.0 }; 13],
            coefficients: vec![0.0; 13],
            bias: value,
        }])
        .unwrap()
    }

    fn fixed_scores(s: [f64; 4]) -> AnfisEnsemble {
        AnfisEnsemble::new(Vocabulary::commands(), s.iter().map(|&v| constant_model(v)).collect()).unwrap()
    }

    #[test]
    fn argmax_decision_and_ties() {
        let x = [0.0; 13];
        assert_eq!(fixed_scores([0.9, 0.1, 0.0, 0.2]).classify(&x).unwrap().0, 0);
        assert_eq!(fixed_scores([0.1, 0.7, 0.7, 0.2]).classify(&x).unwrap().0, 1);
        assert_eq!(fixed_scores([0.5, 0.5, 0.0, 0.0]).classify(&x).unwrap().0, 0);
        let scaled = fixed_scores([0.9 * 3.0, 0.1 * 3.0, 0.0, 0.2 * 3.0]);
        assert_eq!(scaled.classify(&x).unwrap().0, 0);
        assert!(matches!(
            fixed_scores([0.0; 4]).classify(&[0.0; 12]),
            Err(Error::Dimension { expected: 13, got: 12 })
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let vocab = Vocabulary::commands();
        let models = (0..4).map(|s| random_model(s, 1 + s as usize, 13)).collect();
        let e = AnfisEnsemble::new(vocab, models).unwrap();
        let text = e.to_text();
        let back = AnfisEnsemble::from_text(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_text(), text);
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(AnfisEnsemble::from_text(&truncated).is_err());
    }

    #[test]
    fn model_count_must_match_vocabulary() {
        let vocab = Vocabulary::commands();
        assert!(AnfisEnsemble::new(vocab, vec![constant_model(0.0)]).is_err());
    }

    #[test]
    fn separable_blobs_are_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let vocab = Vocabulary::new(["a", "b", "c"]).unwrap();
        let mut xs = Vec::new();
        let mut labels = Vec::new();
        for class in 0..3 {
            for _ in 0..10 {
                xs.push((0..4).map(|d| if d == class { 3.0 } else { 0.0 } + rng.random_range(-0.5..0.5)).collect());
                labels.push(class);
            }
        }
        let t = train_ensemble(&xs, &labels, &vocab, &ClusteringConfig::default(), &HybridTrainConfig::default())
            .unwrap();
        for (x, &l) in xs.iter().zip(&labels) {
            assert_eq!(t.ensemble.classify(x).unwrap().0, l);
        }
        assert_eq!(t.histories.len(), 3);
        let missing = train_ensemble(&xs[..20], &labels[..20], &vocab, &ClusteringConfig::default(), &HybridTrainConfig::default());
        assert!(matches!(missing, Err(Error::MissingClass(c)) if c == "c"));
    }
}
