//! Feed-forward MLP baseline: tanh hidden layers, softmax output,
//! full-batch gradient descent on mean cross-entropy. The classifier drops
//! the dc channel and z-scores the rest before the network sees them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{drop_dc_channel, fit_normalizer, FeatureVector, NormalizationStats};
use crate::model_file::{self, ModelKind};
use crate::vocab::{argmax, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    sizes: Vec<usize>,
    /// `weights[l]` is row-major `sizes[l+1] x sizes[l]`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::config("an MLP needs at least input and output layers"));
    }
    if sizes.contains(&0) {
        return Err(Error::config(format!("layer sizes must be positive: {sizes:?}")));
    }
    Ok(())
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
pub fn mlp_init(sizes: &[usize], seed: u64) -> Result<MlpModel> {
    check_sizes(sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in sizes.windows(2) {
        let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
        weights.push((0..w[0] * w[1]).map(|_| rng.random_range(-bound..=bound)).collect());
        biases.push(vec![0.0; w[1]]);
    }
    Ok(MlpModel {
        sizes: sizes.to_vec(),
        weights,
        biases,
    })
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    b.iter()
        .zip(w.chunks_exact(x.len()))
        .map(|(b, row)| b + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
        .collect()
}

/// Parameter gradients in the model's own layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn from_parts(sizes: Vec<usize>, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        check_sizes(&sizes)?;
        let layers = sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::Dimension {
                expected: layers,
                got: weights.len().min(biases.len()),
            });
        }
        for (l, w) in sizes.windows(2).enumerate() {
            for (got, expected) in [(weights[l].len(), w[0] * w[1]), (biases[l].len(), w[1])] {
                if got != expected {
                    return Err(Error::Dimension { expected, got });
                }
            }
        }
        if weights.iter().chain(&biases).flatten().any(|v| !v.is_finite()) {
            return Err(Error::config("MLP parameters must be finite"));
        }
        Ok(Self { sizes, weights, biases })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer; the last entry holds the raw logits.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.to_vec()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = affine(w, b, &acts[l]);
            if l < last {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.activations(x).pop().expect("output layer"))
    }

    /// Class probabilities.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    fn zero_gradient(&self) -> MlpGradient {
        MlpGradient {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

pub fn mlp_forward(m: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    m.forward(x)
}

fn check_dataset(m: &MlpModel, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty("no training samples".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    for (x, y) in xs.iter().zip(ys) {
        m.check_input(x)?;
        if y.len() != m.output_dim() {
            return Err(Error::Dimension {
                expected: m.output_dim(),
                got: y.len(),
            });
        }
    }
    Ok(())
}

/// Mean cross-entropy of the targets under the model.
pub fn cross_entropy(m: &MlpModel, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64> {
    check_dataset(m, xs, ys)?;
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let p = m.forward(x).expect("checked");
            -y.iter().zip(&p).map(|(t, p)| t * p.ln()).sum::<f64>()
        })
        .sum();
    Ok(total / xs.len() as f64)
}

/// Mean cross-entropy and its gradient by backpropagation.
pub fn loss_and_gradient(m: &MlpModel, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<(f64, MlpGradient)> {
    check_dataset(m, xs, ys)?;
    let n = xs.len() as f64;
    let mut g = m.zero_gradient();
    let mut loss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let acts = m.activations(x);
        let p = softmax(acts.last().expect("output"));
        loss -= y.iter().zip(&p).map(|(t, p)| t * p.ln()).sum::<f64>();
        // Softmax + cross-entropy: dL/dz = p - y.
        let mut delta: Vec<f64> = p.iter().zip(y).map(|(p, t)| (p - t) / n).collect();
        for l in (0..m.weights.len()).rev() {
            let input = &acts[l];
            let fan_in = input.len();
            for (o, d) in delta.iter().enumerate() {
                g.biases[l][o] += d;
                for (i, a) in input.iter().enumerate() {
                    g.weights[l][o * fan_in + i] += d * a;
                }
            }
            if l > 0 {
                delta = (0..fan_in)
                    .map(|i| {
                        let back: f64 = delta.iter().enumerate().map(|(o, d)| d * m.weights[l][o * fan_in + i]).sum();
                        back * (1.0 - input[i] * input[i])
                    })
                    .collect();
            }
        }
    }
    Ok((loss / n, g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpTrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            epochs: 500,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

impl MlpTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.hidden == 0 {
            return Err(Error::config("hidden layer size must be positive"));
        }
        Ok(())
    }
}

/// Full-batch gradient descent; the history holds the loss at the start of
/// each epoch.
pub fn mlp_train(m: &MlpModel, xs: &[Vec<f64>], ys: &[Vec<f64>], cfg: &MlpTrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    cfg.validate()?;
    let mut model = m.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let (loss, g) = loss_and_gradient(&model, xs, ys)?;
        history.push(loss);
        for (p, d) in model.weights.iter_mut().chain(model.biases.iter_mut()).zip(g.weights.iter().chain(&g.biases)) {
            p.iter_mut().zip(d).for_each(|(p, d)| *p -= cfg.learning_rate * d);
        }
    }
    Ok((model, history))
}

pub fn one_hot(label: usize, classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    v[label] = 1.0;
    v
}

/// Network plus the input normalization it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    pub model: MlpModel,
    pub normalizer: NormalizationStats,
    pub vocabulary: Vocabulary,
}

impl MlpClassifier {
    /// Drops the dc channel, fits the normalizer on the training set and
    /// trains a `[12, hidden, classes]` network.
    pub fn train(
        features: &[FeatureVector],
        labels: &[usize],
        vocabulary: &Vocabulary,
        cfg: &MlpTrainConfig,
    ) -> Result<(Self, Vec<f64>)> {
        cfg.validate()?;
        if features.len() != labels.len() {
            return Err(Error::Dimension {
                expected: features.len(),
                got: labels.len(),
            });
        }
        for (class, name) in vocabulary.labels().iter().enumerate() {
            if !labels.contains(&class) {
                return Err(Error::MissingClass(name.clone()));
            }
        }
        let raw = features.iter().map(drop_dc_channel).collect::<Result<Vec<_>>>()?;
        let normalizer = fit_normalizer(&raw)?;
        let xs = raw.iter().map(|v| normalizer.apply(v)).collect::<Result<Vec<_>>>()?;
        let ys: Vec<Vec<f64>> = labels.iter().map(|&l| one_hot(l, vocabulary.len())).collect();
        let init = mlp_init(&[normalizer.dim(), cfg.hidden, vocabulary.len()], cfg.seed)?;
        let (model, history) = mlp_train(&init, &xs, &ys, cfg)?;
        Ok((
            Self {
                model,
                normalizer,
                vocabulary: vocabulary.clone(),
            },
            history,
        ))
    }

    /// Argmax class index (first wins ties) and class probabilities.
    pub fn classify(&self, f: &FeatureVector) -> Result<(usize, Vec<f64>)> {
        let x = self.normalizer.apply(&drop_dc_channel(f)?)?;
        let p = self.model.forward(&x)?;
        Ok((argmax(&p), p))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        model_file::write_header(&mut out, ModelKind::Mlp, &self.vocabulary);
        let sizes: Vec<String> = self.model.sizes.iter().map(usize::to_string).collect();
        out.push_str(&format!("layers {}\n", sizes.join(" ")));
        model_file::write_reals(&mut out, "norm_mean", &self.normalizer.mean);
        model_file::write_reals(&mut out, "norm_std", &self.normalizer.std);
        for (w, b) in self.model.weights.iter().zip(&self.model.biases) {
            model_file::write_reals(&mut out, "w", w);
            model_file::write_reals(&mut out, "b", b);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (kind, vocabulary, mut lines) = model_file::read_header(text)?;
        if kind != ModelKind::Mlp {
            return Err(Error::Model(format!("expected an mlp model, found {}", kind.as_str())));
        }
        let layer_text = lines.expect("layers")?;
        let sizes = layer_text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| lines.error(format!("bad layer size '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        check_sizes(&sizes).map_err(|e| lines.error(e.to_string()))?;
        if sizes[sizes.len() - 1] != vocabulary.len() {
            return Err(lines.error("output layer size differs from vocabulary size"));
        }
        let mean = lines.expect_reals("norm_mean", sizes[0])?;
        let std = lines.expect_reals("norm_std", sizes[0])?;
        if std.iter().any(|s| !(*s > 0.0)) {
            return Err(lines.error("normalizer std must be positive"));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            weights.push(lines.expect_reals("w", w[0] * w[1])?);
            biases.push(lines.expect_reals("b", w[1])?);
        }
        lines.finish()?;
        Ok(Self {
            model: MlpModel::from_parts(sizes, weights, biases)?,
            normalizer: NormalizationStats { mean, std },
            vocabulary,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Plain nested-loop evaluation.
    pub fn oracle_forward(m: &MlpModel, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        let layers = m.weights().len();
        for l in 0..layers {
            let (fan_in, fan_out) = (m.sizes()[l], m.sizes()[l + 1]);
            let mut z = vec![0.0; fan_out];
            for o in 0..fan_out {
                let mut s = m.biases()[l][o];
                for i in 0..fan_in {
                    s += m.weights()[l][o * fan_in + i] * a[i];
                }
                z[o] = if l + 1 < layers { s.tanh() } else { s };
            }
            a = z;
        }
        let total: f64 = a.iter().map(|v| v.exp()).sum();
        a.iter().map(|v| v.exp() / total).collect()
    }

    fn random_input(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    pub fn gradient_check_error(seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = [rng.random_range(1..5), rng.random_range(1..6), rng.random_range(2..5)];
        let m = mlp_init(&sizes, seed).unwrap();
        let m = MlpModel {
            biases: m.biases.iter().map(|b| b.iter().map(|_| rng.random_range(-0.5..0.5)).collect()).collect(),
            ..m
        };
        let xs: Vec<Vec<f64>> = (0..6).map(|_| random_input(&mut rng, sizes[0])).collect();
        let ys: Vec<Vec<f64>> = (0..6).map(|_| one_hot(rng.random_range(0..sizes[2]), sizes[2])).collect();
        let (_, g) = loss_and_gradient(&m, &xs, &ys).unwrap();
        let h = 1e-6;
        let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
        let mut visit = |analytic: f64, plus: MlpModel, minus: MlpModel| {
            let num = (cross_entropy(&plus, &xs, &ys).unwrap() - cross_entropy(&minus, &xs, &ys).unwrap()) / (2.0 * h);
            diff += (analytic - num).powi(2);
            na += analytic * analytic;
            nn += num * num;
        };
        for l in 0..m.weights.len() {
            for i in 0..m.weights[l].len() {
                let (mut p, mut q) = (m.clone(), m.clone());
                p.weights[l][i] += h;
                q.weights[l][i] -= h;
                visit(g.weights[l][i], p, q);
            }
            for i in 0..m.biases[l].len() {
                let (mut p, mut q) = (m.clone(), m.clone());
                p.biases[l][i] += h;
                q.biases[l][i] -= h;
                visit(g.biases[l][i], p, q);
            }
        }
        diff.sqrt() / (na.sqrt() + nn.sqrt())
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = mlp_init(&[12, 16, 4], 7).unwrap();
        assert_eq!(a, mlp_init(&[12, 16, 4], 7).unwrap());
        assert_ne!(a, mlp_init(&[12, 16, 4], 8).unwrap());
        assert_eq!(a.parameter_count(), 12 * 16 + 16 + 16 * 4 + 4);
        let b1 = (6.0f64 / 28.0).sqrt();
        assert!(a.weights()[0].iter().all(|w| w.abs() <= b1));
        assert!(a.biases().iter().flatten().all(|&b| b == 0.0));
        assert!(mlp_init(&[12, 0, 4], 0).is_err());
        assert!(mlp_init(&[12], 0).is_err());
    }

    #[test]
    fn zero_network_is_uniform() {
        let m = MlpModel::from_parts(vec![12, 16, 4], vec![vec![0.0; 192], vec![0.0; 64]], vec![vec![0.0; 16], vec![0.0; 4]])
            .unwrap();
        assert_eq!(m.forward(&[0.3; 12]).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn forward_matches_oracle_and_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..100 {
            let m = mlp_init(&[12, 16, 4], seed).unwrap();
            let x = random_input(&mut rng, 12);
            let p = m.forward(&x).unwrap();
            let want = oracle_forward(&m, &x);
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(p.iter().all(|&v| v > 0.0));
            for (a, b) in p.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12 * b.abs());
            }
        }
        let m = mlp_init(&[12, 16, 4], 0).unwrap();
        assert!(matches!(m.forward(&[0.0; 13]), Err(Error::Dimension { expected: 12, got: 13 })));
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let z = [0.3, -1.2, 2.5, 0.0];
        let shifted: Vec<f64> = z.iter().map(|v| v + 1000.0).collect();
        let (a, b) = (softmax(&z), softmax(&shifted));
        assert_eq!(argmax(&a), argmax(&b));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..100 {
            let err = gradient_check_error(seed);
            assert!(err <= 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..40 {
            let x = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let class = usize::from(x[0] + 0.5 * x[1] > 0.1);
            xs.push(x);
            ys.push(one_hot(class, 2));
        }
        let cfg = MlpTrainConfig::default();
        let (m, hist) = mlp_train(&mlp_init(&[2, 16, 2], 5).unwrap(), &xs, &ys, &cfg).unwrap();
        assert_eq!(hist.len(), 500);
        assert!(hist[499] < hist[0]);
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(argmax(&m.forward(x).unwrap()), argmax(y));
        }
        let zero = MlpTrainConfig { learning_rate: 0.0, ..cfg };
        assert!(mlp_train(&m, &xs, &ys, &zero).unwrap_err().is_config());
    }

    fn toy_features() -> (Vec<FeatureVector>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut f = Vec::new();
        let mut l = Vec::new();
        for class in 0..4 {
            for _ in 0..8 {
                let v = (0..13)
                    .map(|d| if d == class + 1 { 5.0 } else { 0.0 } + rng.random_range(-1.0..1.0) + if d == 0 { 100.0 } else { 0.0 })
                    .collect();
                f.push(FeatureVector::new(v).unwrap());
                l.push(class);
            }
        }
        (f, l)
    }

    #[test]
    fn classifier_trains_and_round_trips() {
        let (f, l) = toy_features();
        let vocab = Vocabulary::commands();
        let cfg = MlpTrainConfig::default();
        let (c, _) = MlpClassifier::train(&f, &l, &vocab, &cfg).unwrap();
        assert_eq!(c.model.sizes(), &[12, 16, 4]);
        for (x, &y) in f.iter().zip(&l) {
            assert_eq!(c.classify(x).unwrap().0, y);
        }
        let (again, _) = MlpClassifier::train(&f, &l, &vocab, &cfg).unwrap();
        assert_eq!(again.to_text(), c.to_text());
        let back = MlpClassifier::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        let short = FeatureVector::new(vec![0.0; 12]).unwrap();
        assert!(c.classify(&short).is_err());
        assert!(matches!(
            MlpClassifier::train(&f[..8], &l[..8], &vocab, &cfg),
            Err(Error::MissingClass(name)) if name == "right"
        ));
    }
}
