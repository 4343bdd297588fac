//! Loss, initialization, Adam, and the masked full-batch training loop for
//! node classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{add_self_loops, normalize_adjacency, Graph, NormalizeMode};
use crate::net::{
    ganet_backward, ganet_forward, init_params, GanetConfig, Mode, ParamStore, ParamValue,
};
use crate::tensor::{DenseMatrix, SeededRng};

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Stop after this many epochs without a validation-accuracy
    /// improvement; None trains the full budget.
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            l2_lambda: 1e-4,
            epochs: 200,
            seed: 0,
            early_stop_patience: Some(50),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Parameter("learning_rate must be > 0".into()));
        }
        if self.l2_lambda < 0.0 {
            return Err(Error::Parameter("l2_lambda must be >= 0".into()));
        }
        Ok(())
    }
}

/// Uniform Glorot initialization on [-a, a], a = sqrt(6 / (rows + cols)).
pub fn glorot_init(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    crate::net::glorot(rng, rows, cols)
}

/// Mean negative log-likelihood over the masked nodes, with the gradient
/// w.r.t. the logits: (softmax - onehot) / |mask| inside the mask, zero
/// outside.
pub fn softmax_cross_entropy(
    logits: &DenseMatrix,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if mask.is_empty() {
        return Err(Error::Parameter("empty mask in cross entropy".into()));
    }
    if labels.len() != logits.cols() {
        return Err(Error::LengthMismatch {
            op: "softmax_cross_entropy",
            expected: logits.cols(),
            got: labels.len(),
        });
    }
    let classes = logits.rows();
    let m = mask.len() as f64;
    let mut loss = 0.0;
    let mut grad = DenseMatrix::zeros(classes, logits.cols());
    for &node in mask {
        let label = labels[node];
        if label >= classes {
            return Err(Error::Parameter(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        let col = logits.col(node);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = col.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
        loss += log_sum - col[label];
        let g = grad.col_mut(node);
        for (c, &v) in col.iter().enumerate() {
            g[c] = ((v - log_sum).exp() - if c == label { 1.0 } else { 0.0 }) / m;
        }
    }
    Ok((loss / m, grad))
}

/// Fraction of masked nodes whose argmax logit matches the label.
pub fn masked_accuracy(logits: &DenseMatrix, labels: &[usize], mask: &[usize]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for &node in mask {
        let col = logits.col(node);
        let mut best = 0usize;
        for (c, &v) in col.iter().enumerate() {
            if v > col[best] {
                best = c;
            }
        }
        if best == labels[node] {
            correct += 1;
        }
    }
    correct as f64 / mask.len() as f64
}

/// Adam moment accumulators, one pair per parameter, in store order.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<ParamValue>,
    v: Vec<ParamValue>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ParamStore) -> Self {
        let m = params.entries().iter().map(|e| e.grad.zeros_like()).collect();
        let v = params.entries().iter().map(|e| e.grad.zeros_like()).collect();
        Self {
            m,
            v,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update from the gradients currently stored in
/// `params`.
pub fn adam_step(params: &mut ParamStore, state: &mut AdamState, lr: f64) -> Result<()> {
    if state.m.len() != params.len() {
        return Err(Error::Config(
            "Adam state does not match the parameter store".into(),
        ));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for (i, entry) in params.entries_mut().iter_mut().enumerate() {
        let g = entry.grad.as_slice().to_vec();
        let m = state.m[i].as_mut_slice();
        let v = state.v[i].as_mut_slice();
        let p = entry.value.as_mut_slice();
        for j in 0..g.len() {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// One epoch's record; serialized as a JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub val_acc: f64,
    pub test_acc: f64,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochStats>,
    pub params: ParamStore,
    /// Accuracy of the retained (best-validation) parameters on the test
    /// mask.
    pub test_accuracy: f64,
    pub best_val_accuracy: f64,
}

/// Full-batch training of a GANet node classifier. The graph must carry
/// labels and masks. Self-loops are applied here, once; the adjacency is
/// symmetrically normalized. L2 regularization applies to matrix-valued
/// parameters (transform and GCN weights), not to projection vectors,
/// whose scale provably does not affect the network output.
pub fn train_node_classifier(
    graph: &Graph,
    model_cfg: &GanetConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_cfg.validate()?;
    model_cfg.validate()?;
    let labels = graph
        .labels()
        .ok_or_else(|| Error::Parameter("training requires node labels".into()))?
        .to_vec();
    let masks = graph
        .masks()
        .ok_or_else(|| Error::Parameter("training requires train/val/test masks".into()))?
        .clone();
    if masks.train.is_empty() {
        return Err(Error::Parameter("empty train mask".into()));
    }

    let g = add_self_loops(graph);
    let a_hat = normalize_adjacency(&g, NormalizeMode::Symmetric)?;
    let mut rng = SeededRng::new(train_cfg.seed);
    let mut params = init_params(model_cfg, g.channels(), &mut rng)?;
    let mut adam = AdamState::new(&params);

    let mut history = Vec::with_capacity(train_cfg.epochs);
    let mut best_val = f64::NEG_INFINITY;
    let mut best_snapshot = params.snapshot();
    let mut epochs_since_best = 0usize;

    for epoch in 0..train_cfg.epochs {
        let (logits, cache) = ganet_forward(&g, &a_hat, model_cfg, &params, Mode::Train, &mut rng)?;
        let (data_loss, dlogits) = softmax_cross_entropy(&logits, &labels, &masks.train)?;

        // L2 penalty over weight matrices; reported loss includes it.
        let mut penalty = 0.0;
        if train_cfg.l2_lambda > 0.0 {
            for e in params.entries() {
                if let ParamValue::Matrix(m) = &e.value {
                    penalty += m.sum_squares();
                }
            }
        }
        let loss = data_loss + train_cfg.l2_lambda * penalty;

        params.zero_grads();
        ganet_backward(&cache, &dlogits, &mut params)?;
        if train_cfg.l2_lambda > 0.0 {
            for e in params.entries_mut() {
                if let ParamValue::Matrix(_) = &e.value {
                    let value = e.value.as_slice().to_vec();
                    let grad = e.grad.as_mut_slice();
                    for (gr, w) in grad.iter_mut().zip(value) {
                        *gr += 2.0 * train_cfg.l2_lambda * w;
                    }
                }
            }
        }
        adam_step(&mut params, &mut adam, train_cfg.learning_rate)?;

        let (eval_logits, _) =
            ganet_forward(&g, &a_hat, model_cfg, &params, Mode::Eval, &mut rng)?;
        let val_acc = masked_accuracy(&eval_logits, &labels, &masks.val);
        let test_acc = masked_accuracy(&eval_logits, &labels, &masks.test);
        history.push(EpochStats {
            epoch,
            loss,
            val_acc,
            test_acc,
        });

        if val_acc > best_val {
            best_val = val_acc;
            best_snapshot = params.snapshot();
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if let Some(patience) = train_cfg.early_stop_patience {
                if epochs_since_best >= patience {
                    break;
                }
            }
        }
    }

    params.restore(&best_snapshot);
    let (final_logits, _) = ganet_forward(
        &g,
        &a_hat,
        model_cfg,
        &params,
        Mode::Eval,
        &mut SeededRng::new(train_cfg.seed),
    )?;
    let test_accuracy = masked_accuracy(&final_logits, &labels, &masks.test);
    Ok(TrainOutcome {
        history,
        params,
        test_accuracy,
        best_val_accuracy: best_val.max(0.0),
    })
}
