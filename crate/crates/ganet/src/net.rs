//! GAM and GANet assembly.
//!
//! A GAM is one attention operator followed by a GCN layer, with the block
//! input concatenated onto the GCN output as a skip connection, so channel
//! counts grow densely: each GAM adds its `gcn_out_channels` on top of
//! whatever came in. A GANet is an embedding GCN, a stack of GAMs, and an
//! output GCN, with an optional mean-pool readout for graph-level logits.
//!
//! Dropout is applied to the input feature matrix of every GCN layer, in
//! train mode only, with inverted scaling so eval needs no rescaling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NormalizedAdjacency};
use crate::ops::{
    cgao_backward, cgao_forward, gao_backward, gao_forward, gcn_backward, gcn_forward,
    hgao_backward, hgao_forward, Activation, CgaoCache, GaoCache, GcnCache, GcnWeights,
    HgaoCache, HgaoParams, LinearWeights, NondiffFlags,
};
use crate::tensor::{concat_rows, DenseMatrix, SeededRng};

/// Which attention operator a GAM uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionKind {
    Gao,
    Hgao,
    Cgao,
}

impl std::fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttentionKind::Gao => "gao",
            AttentionKind::Hgao => "hgao",
            AttentionKind::Cgao => "cgao",
        })
    }
}

/// One graph attention module: attention operator + GCN + skip concat.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GamConfig {
    pub attention_kind: AttentionKind,
    pub attn_out_channels: usize,
    pub gcn_out_channels: usize,
    /// Neighbor budget; required (and only meaningful) for hgao.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "default_keep")]
    pub dropout_keep: f64,
}

fn default_keep() -> f64 {
    1.0
}

/// Whole-network configuration. Serializes to/from JSON with these field
/// names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GanetConfig {
    /// Width of the embedding GCN output.
    pub embed_channels: usize,
    pub gam_configs: Vec<GamConfig>,
    /// Number of classes produced by the output GCN.
    pub out_channels: usize,
    pub readout: Readout,
    /// Keep rate for the embedding and output GCN inputs; GAM keeps come
    /// from each GamConfig.
    #[serde(default = "default_keep")]
    pub dropout_keep: f64,
    #[serde(default)]
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    None,
    MeanPool,
}

impl GanetConfig {
    /// Channel widths entering each GAM, derivable from the config alone:
    /// embed_channels, then +gcn_out_channels per GAM.
    pub fn stack_widths(&self) -> Vec<usize> {
        let mut widths = vec![self.embed_channels];
        for gam in &self.gam_configs {
            widths.push(widths.last().unwrap() + gam.gcn_out_channels);
        }
        widths
    }

    /// Width of the GAM stack output (the output GCN's input).
    pub fn output_width(&self) -> usize {
        *self.stack_widths().last().unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_channels == 0 || self.out_channels == 0 {
            return Err(Error::Config("channel counts must be >= 1".into()));
        }
        if self.gam_configs.is_empty() {
            return Err(Error::Config("at least one GAM is required".into()));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::Config("dropout_keep must be in (0, 1]".into()));
        }
        let widths = self.stack_widths();
        for (i, gam) in self.gam_configs.iter().enumerate() {
            if gam.attn_out_channels == 0 || gam.gcn_out_channels == 0 {
                return Err(Error::Config(format!("gam {i}: channel counts must be >= 1")));
            }
            if !(gam.dropout_keep > 0.0 && gam.dropout_keep <= 1.0) {
                return Err(Error::Config(format!(
                    "gam {i}: dropout_keep must be in (0, 1]"
                )));
            }
            match gam.attention_kind {
                AttentionKind::Hgao => {
                    if gam.k.unwrap_or(0) == 0 {
                        return Err(Error::Config(format!("gam {i}: hgao requires k >= 1")));
                    }
                }
                AttentionKind::Cgao => {
                    // cGAO preserves width; the config must agree with the
                    // dense-growth chain at this position.
                    if gam.attn_out_channels != widths[i] {
                        return Err(Error::Config(format!(
                            "gam {i}: cgao preserves its input width {} but attn_out_channels is {}",
                            widths[i], gam.attn_out_channels
                        )));
                    }
                }
                AttentionKind::Gao => {}
            }
        }
        Ok(())
    }
}

/// Train/eval switch; train mode draws dropout noise from the rng.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A named parameter value: a matrix or a vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Matrix(DenseMatrix),
    Vector(Vec<f64>),
}

impl ParamValue {
    pub fn zeros_like(&self) -> ParamValue {
        match self {
            ParamValue::Matrix(m) => ParamValue::Matrix(DenseMatrix::zeros(m.rows(), m.cols())),
            ParamValue::Vector(v) => ParamValue::Vector(vec![0.0; v.len()]),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ParamValue::Matrix(m) => m.data().len(),
            ParamValue::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            ParamValue::Matrix(m) => m.data(),
            ParamValue::Vector(v) => v,
        }
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        match self {
            ParamValue::Matrix(m) => m.data_mut(),
            ParamValue::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamEntry {
    pub name: String,
    pub value: ParamValue,
    pub grad: ParamValue,
}

/// Ordered collection of named trainable parameters with matching gradient
/// slots. Iteration order is insertion order and never changes.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
    index: BTreeMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_matrix(&mut self, name: &str, value: DenseMatrix) {
        self.insert(name, ParamValue::Matrix(value));
    }

    pub fn insert_vector(&mut self, name: &str, value: Vec<f64>) {
        self.insert(name, ParamValue::Vector(value));
    }

    fn insert(&mut self, name: &str, value: ParamValue) {
        assert!(
            !self.index.contains_key(name),
            "duplicate parameter {name}"
        );
        let grad = value.zeros_like();
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(ParamEntry {
            name: name.to_string(),
            value,
            grad,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [ParamEntry] {
        &mut self.entries
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown parameter {name}")))
    }

    pub fn matrix(&self, name: &str) -> Result<&DenseMatrix> {
        match &self.entries[self.lookup(name)?].value {
            ParamValue::Matrix(m) => Ok(m),
            ParamValue::Vector(_) => Err(Error::Config(format!("{name} is not a matrix"))),
        }
    }

    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        match &self.entries[self.lookup(name)?].value {
            ParamValue::Vector(v) => Ok(v),
            ParamValue::Matrix(_) => Err(Error::Config(format!("{name} is not a vector"))),
        }
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut ParamValue> {
        let i = self.lookup(name)?;
        Ok(&mut self.entries[i].value)
    }

    pub fn add_grad_matrix(&mut self, name: &str, g: &DenseMatrix) -> Result<()> {
        let i = self.lookup(name)?;
        match &mut self.entries[i].grad {
            ParamValue::Matrix(m) => m.add_scaled(g, 1.0),
            ParamValue::Vector(_) => Err(Error::Config(format!("{name} is not a matrix"))),
        }
    }

    pub fn add_grad_vector(&mut self, name: &str, g: &[f64]) -> Result<()> {
        let i = self.lookup(name)?;
        match &mut self.entries[i].grad {
            ParamValue::Vector(v) => {
                if v.len() != g.len() {
                    return Err(Error::LengthMismatch {
                        op: "add_grad_vector",
                        expected: v.len(),
                        got: g.len(),
                    });
                }
                for (a, b) in v.iter_mut().zip(g) {
                    *a += b;
                }
                Ok(())
            }
            ParamValue::Matrix(_) => Err(Error::Config(format!("{name} is not a vector"))),
        }
    }

    pub fn zero_grads(&mut self) {
        for e in &mut self.entries {
            for v in e.grad.as_mut_slice() {
                *v = 0.0;
            }
        }
    }

    /// Snapshot of all values (used to retain best-validation parameters).
    pub fn snapshot(&self) -> Vec<ParamValue> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[ParamValue]) {
        assert_eq!(snapshot.len(), self.entries.len());
        for (e, v) in self.entries.iter_mut().zip(snapshot) {
            e.value = v.clone();
        }
    }
}

/// Uniform Glorot init on [-a, a] with a = sqrt(6 / (rows + cols)).
/// Lives here so parameter creation and the train module share one code
/// path; re-exported by the train module.
pub(crate) fn glorot(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform(-a, a))
}

/// Create every parameter of a GANet, Glorot-initialized, in a fixed
/// order: embedding GCN, then each GAM (projection, key/value transforms,
/// GCN), then the output GCN.
pub fn init_params(
    cfg: &GanetConfig,
    in_channels: usize,
    rng: &mut SeededRng,
) -> Result<ParamStore> {
    cfg.validate()?;
    let mut params = ParamStore::new();
    params.insert_matrix("embed.w", glorot(rng, cfg.embed_channels, in_channels));
    let widths = cfg.stack_widths();
    for (i, gam) in cfg.gam_configs.iter().enumerate() {
        let d_in = widths[i];
        match gam.attention_kind {
            AttentionKind::Gao => {
                // Keys keep the input width so their inner products with the
                // untransformed queries are defined; values set the output
                // width.
                params.insert_matrix(&format!("gam{i}.attn.wk"), glorot(rng, d_in, d_in));
                params.insert_matrix(
                    &format!("gam{i}.attn.wv"),
                    glorot(rng, gam.attn_out_channels, d_in),
                );
            }
            AttentionKind::Hgao => {
                // Projection initialized as a d x 1 Glorot matrix.
                params.insert_vector(
                    &format!("gam{i}.attn.p"),
                    glorot(rng, d_in, 1).data().to_vec(),
                );
                params.insert_matrix(&format!("gam{i}.attn.wk"), glorot(rng, d_in, d_in));
                params.insert_matrix(
                    &format!("gam{i}.attn.wv"),
                    glorot(rng, gam.attn_out_channels, d_in),
                );
            }
            AttentionKind::Cgao => {}
        }
        let gcn_in = match gam.attention_kind {
            AttentionKind::Cgao => d_in,
            _ => gam.attn_out_channels,
        };
        params.insert_matrix(
            &format!("gam{i}.gcn.w"),
            glorot(rng, gam.gcn_out_channels, gcn_in),
        );
    }
    params.insert_matrix(
        "out.w",
        glorot(rng, cfg.out_channels, cfg.output_width()),
    );
    Ok(params)
}

/// Inverted dropout on the columns-of-features matrix. Returns the kept
/// matrix and the per-entry scale mask (None in eval mode or keep = 1, in
/// which case no rng draws happen).
fn dropout(
    x: &DenseMatrix,
    keep: f64,
    mode: Mode,
    rng: &mut SeededRng,
) -> (DenseMatrix, Option<Vec<f64>>) {
    if mode == Mode::Eval || keep >= 1.0 {
        return (x.clone(), None);
    }
    let mut mask = Vec::with_capacity(x.data().len());
    let mut out = x.clone();
    for v in out.data_mut() {
        let scale = if rng.bernoulli(keep) { 1.0 / keep } else { 0.0 };
        mask.push(scale);
        *v *= scale;
    }
    (out, Some(mask))
}

fn dropout_backward(upstream: &DenseMatrix, mask: &Option<Vec<f64>>) -> DenseMatrix {
    match mask {
        None => upstream.clone(),
        Some(mask) => {
            let mut out = upstream.clone();
            for (v, &s) in out.data_mut().iter_mut().zip(mask) {
                *v *= s;
            }
            out
        }
    }
}

#[derive(Debug, Clone)]
enum AttentionCacheKind {
    Gao(GaoCache),
    Hgao(HgaoCache),
    Cgao(CgaoCache),
}

#[derive(Debug, Clone)]
pub struct GamCache {
    input_width: usize,
    attention: AttentionCacheKind,
    dropout_mask: Option<Vec<f64>>,
    gcn: GcnCache,
}

impl GamCache {
    pub fn nondiff_flags(&self) -> NondiffFlags {
        match &self.attention {
            AttentionCacheKind::Hgao(c) => c.flags(),
            _ => NondiffFlags::default(),
        }
    }
}

/// One GAM step: o = concat_rows(x, gcn(dropout(attention(x)))).
/// Output channels = input channels + gcn_out_channels. Parameters are
/// looked up under `prefix` (gao/hgao transform key/value only; queries
/// are the raw block input).
#[allow(clippy::too_many_arguments)]
pub fn gam_forward(
    x: &DenseMatrix,
    g: &Graph,
    a_hat: &NormalizedAdjacency,
    cfg: &GamConfig,
    prefix: &str,
    params: &ParamStore,
    activation: Activation,
    mode: Mode,
    rng: &mut SeededRng,
) -> Result<(DenseMatrix, GamCache)> {
    let (attn_out, attention) = match cfg.attention_kind {
        AttentionKind::Gao => {
            let t = LinearWeights {
                w_q: None,
                w_k: Some(params.matrix(&format!("{prefix}.attn.wk"))?.clone()),
                w_v: Some(params.matrix(&format!("{prefix}.attn.wv"))?.clone()),
            };
            let (o, c) = gao_forward(x, g, Some(&t))?;
            (o, AttentionCacheKind::Gao(c))
        }
        AttentionKind::Hgao => {
            let hp = HgaoParams {
                p: params.vector(&format!("{prefix}.attn.p"))?.to_vec(),
                k: cfg.k.unwrap_or(0),
                transforms: Some(LinearWeights {
                    w_q: None,
                    w_k: Some(params.matrix(&format!("{prefix}.attn.wk"))?.clone()),
                    w_v: Some(params.matrix(&format!("{prefix}.attn.wv"))?.clone()),
                }),
            };
            let (o, c) = hgao_forward(x, g, &hp)?;
            (o, AttentionCacheKind::Hgao(c))
        }
        AttentionKind::Cgao => {
            let (o, c) = cgao_forward(x)?;
            (o, AttentionCacheKind::Cgao(c))
        }
    };
    let (dropped, dropout_mask) = dropout(&attn_out, cfg.dropout_keep, mode, rng);
    let w = GcnWeights::new(params.matrix(&format!("{prefix}.gcn.w"))?.clone(), activation);
    let (gcn_out, gcn_cache) = gcn_forward(&dropped, a_hat, &w)?;
    let o = concat_rows(x, &gcn_out)?;
    Ok((
        o,
        GamCache {
            input_width: x.rows(),
            attention,
            dropout_mask,
            gcn: gcn_cache,
        },
    ))
}

/// Backward through one GAM. Splits the upstream rows between the skip path
/// (top `input_width` rows) and the GCN path, accumulates parameter
/// gradients under `prefix`, and returns the gradient w.r.t. the block
/// input.
pub fn gam_backward(
    cache: &GamCache,
    upstream: &DenseMatrix,
    prefix: &str,
    params: &mut ParamStore,
) -> Result<DenseMatrix> {
    let n = upstream.cols();
    let d_in = cache.input_width;
    let d_gcn = upstream.rows() - d_in;
    let mut d_skip = DenseMatrix::zeros(d_in, n);
    let mut d_gcn_out = DenseMatrix::zeros(d_gcn, n);
    for c in 0..n {
        let col = upstream.col(c);
        d_skip.col_mut(c).copy_from_slice(&col[..d_in]);
        d_gcn_out.col_mut(c).copy_from_slice(&col[d_in..]);
    }

    let gcn_grads = gcn_backward(&cache.gcn, &d_gcn_out)?;
    params.add_grad_matrix(&format!("{prefix}.gcn.w"), &gcn_grads.dw)?;
    let d_attn_out = dropout_backward(&gcn_grads.dx, &cache.dropout_mask);

    let dx_attn = match &cache.attention {
        AttentionCacheKind::Gao(c) => {
            let g = gao_backward(c, &d_attn_out)?;
            if let Some(dwk) = &g.dwk {
                params.add_grad_matrix(&format!("{prefix}.attn.wk"), dwk)?;
            }
            if let Some(dwv) = &g.dwv {
                params.add_grad_matrix(&format!("{prefix}.attn.wv"), dwv)?;
            }
            g.dx
        }
        AttentionCacheKind::Hgao(c) => {
            let g = hgao_backward(c, &d_attn_out)?;
            params.add_grad_vector(&format!("{prefix}.attn.p"), &g.dp)?;
            if let Some(dwk) = &g.dwk {
                params.add_grad_matrix(&format!("{prefix}.attn.wk"), dwk)?;
            }
            if let Some(dwv) = &g.dwv {
                params.add_grad_matrix(&format!("{prefix}.attn.wv"), dwv)?;
            }
            g.dx
        }
        AttentionCacheKind::Cgao(c) => cgao_backward(c, &d_attn_out)?.dx,
    };

    d_skip.add_scaled(&dx_attn, 1.0)?;
    Ok(d_skip)
}

#[derive(Debug, Clone)]
pub struct GanetCache {
    embed_mask: Option<Vec<f64>>,
    embed: GcnCache,
    gams: Vec<GamCache>,
    out_mask: Option<Vec<f64>>,
    out: GcnCache,
    readout: Readout,
    num_nodes: usize,
}

impl GanetCache {
    /// Any hGAO nondifferentiable point hit anywhere in the stack.
    pub fn nondiff_flags(&self) -> NondiffFlags {
        let mut flags = NondiffFlags::default();
        for gam in &self.gams {
            let f = gam.nondiff_flags();
            flags.abs_kink |= f.abs_kink;
            flags.selection_tie |= f.selection_tie;
        }
        flags
    }
}

/// Full network forward: embedding GCN, GAM stack, output GCN, optional
/// mean-pool readout. Returns per-node logits (classes x N) or pooled
/// graph logits (classes x 1).
pub fn ganet_forward(
    g: &Graph,
    a_hat: &NormalizedAdjacency,
    cfg: &GanetConfig,
    params: &ParamStore,
    mode: Mode,
    rng: &mut SeededRng,
) -> Result<(DenseMatrix, GanetCache)> {
    cfg.validate()?;
    let x = g.features();
    let (x_dropped, embed_mask) = dropout(x, cfg.dropout_keep, mode, rng);
    let embed_w = GcnWeights::new(params.matrix("embed.w")?.clone(), cfg.activation);
    let (mut h, embed_cache) = gcn_forward(&x_dropped, a_hat, &embed_w)?;

    let mut gam_caches = Vec::with_capacity(cfg.gam_configs.len());
    for (i, gam_cfg) in cfg.gam_configs.iter().enumerate() {
        let (next, cache) = gam_forward(
            &h,
            g,
            a_hat,
            gam_cfg,
            &format!("gam{i}"),
            params,
            cfg.activation,
            mode,
            rng,
        )?;
        h = next;
        gam_caches.push(cache);
    }

    let (h_dropped, out_mask) = dropout(&h, cfg.dropout_keep, mode, rng);
    // The output GCN emits raw logits; no activation.
    let out_w = GcnWeights::new(params.matrix("out.w")?.clone(), Activation::Identity);
    let (logits, out_cache) = gcn_forward(&h_dropped, a_hat, &out_w)?;

    let num_nodes = g.num_nodes();
    let result = match cfg.readout {
        Readout::None => logits,
        Readout::MeanPool => {
            let mut pooled = DenseMatrix::zeros(logits.rows(), 1);
            for c in 0..logits.cols() {
                for r in 0..logits.rows() {
                    pooled.set(r, 0, pooled.get(r, 0) + logits.get(r, c));
                }
            }
            pooled.map(|v| v / num_nodes as f64)
        }
    };
    Ok((
        result,
        GanetCache {
            embed_mask,
            embed: embed_cache,
            gams: gam_caches,
            out_mask,
            out: out_cache,
            readout: cfg.readout,
            num_nodes,
        },
    ))
}

/// Backward through the whole assembly; parameter gradients accumulate
/// into `params` (call `zero_grads` first for fresh gradients).
pub fn ganet_backward(
    cache: &GanetCache,
    upstream: &DenseMatrix,
    params: &mut ParamStore,
) -> Result<()> {
    let d_logits = match cache.readout {
        Readout::None => upstream.clone(),
        Readout::MeanPool => {
            let n = cache.num_nodes;
            let mut d = DenseMatrix::zeros(upstream.rows(), n);
            for c in 0..n {
                for r in 0..upstream.rows() {
                    d.set(r, c, upstream.get(r, 0) / n as f64);
                }
            }
            d
        }
    };

    let out_grads = gcn_backward(&cache.out, &d_logits)?;
    params.add_grad_matrix("out.w", &out_grads.dw)?;
    let mut dh = dropout_backward(&out_grads.dx, &cache.out_mask);

    for (i, gam) in cache.gams.iter().enumerate().rev() {
        dh = gam_backward(gam, &dh, &format!("gam{i}"), params)?;
    }

    let embed_grads = gcn_backward(&cache.embed, &dh)?;
    params.add_grad_matrix("embed.w", &embed_grads.dw)?;
    // Gradient w.r.t. raw input features stops here; features are data.
    let _ = dropout_backward(&embed_grads.dx, &cache.embed_mask);
    Ok(())
}
