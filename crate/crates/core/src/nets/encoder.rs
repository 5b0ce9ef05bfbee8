use super::{Arch, ClassifierModel, Example, Params};
use crate::error::{Error, Result};
use crate::math::{axpy, dot, log_sum_exp, sigmoid, softmax};

/// Intermediates kept by [`forward`] for [`backward`].
#[derive(Clone, Debug)]
pub struct Cache {
    ids: Vec<usize>,
    encoded: Vec<f64>,
    inner: EncoderCache,
}

impl Cache {
    /// The sentence vector fed to the output layer.
    pub fn encoded(&self) -> &[f64] {
        &self.encoded
    }
}

#[derive(Clone, Debug)]
enum EncoderCache {
    Nbow,
    Cnn {
        padded: Vec<usize>,
        /// Pre-activation of each filter at its max-pooled position.
        best_pre: Vec<f64>,
        best_pos: Vec<usize>,
    },
    Lstm {
        steps: Vec<LstmStep>,
    },
}

#[derive(Clone, Debug)]
struct LstmStep {
    /// `[x_t; h_{t-1}]`
    input: Vec<f64>,
    /// Activated gates `[i; f; o; g]`.
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Gradients with the same layout as the model parameters. Only embedding
/// rows listed in `touched_rows` can be non-zero.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub params: Params,
    pub touched_rows: Vec<usize>,
}

impl Gradients {
    pub fn zeros_for(model: &ClassifierModel) -> Self {
        Gradients {
            params: Params::zeros_like(&model.params),
            touched_rows: Vec::new(),
        }
    }

    fn touch(&mut self, row: usize) {
        if let Err(pos) = self.touched_rows.binary_search(&row) {
            self.touched_rows.insert(pos, row);
        }
    }
}

/// Logits for one (non-empty) id sequence, truncated to `max_len`.
pub fn forward(model: &ClassifierModel, ids: &[usize]) -> Result<(Vec<f64>, Cache)> {
    let cfg = &model.config;
    let ids = &ids[..ids.len().min(cfg.max_len)];
    if ids.is_empty() {
        return Err(Error::Empty("token sequence"));
    }
    let p = &model.params;
    let dim = cfg.dim;
    let (encoded, inner) = match cfg.arch {
        Arch::Nbow => {
            let mut mean = vec![0.0; dim];
            let w = 1.0 / ids.len() as f64;
            for &id in ids {
                axpy(w, p.embedding.row(id), &mut mean);
            }
            (mean, EncoderCache::Nbow)
        }
        Arch::Cnn => {
            let width = cfg.filter_width;
            let mut padded = ids.to_vec();
            padded.resize(ids.len().max(width), model.pad_index());
            let positions = padded.len() - width + 1;
            let f = cfg.num_filters;
            let mut best_pre = vec![f64::NEG_INFINITY; f];
            let mut best_pos = vec![0; f];
            let mut window = vec![0.0; width * dim];
            for pos in 0..positions {
                for j in 0..width {
                    window[j * dim..(j + 1) * dim]
                        .copy_from_slice(p.embedding.row(padded[pos + j]));
                }
                for filter in 0..f {
                    let z = p.conv_b.row(0)[filter] + dot(p.conv_w.row(filter), &window);
                    if z > best_pre[filter] {
                        best_pre[filter] = z;
                        best_pos[filter] = pos;
                    }
                }
            }
            let pooled = best_pre.iter().map(|&z| z.max(0.0)).collect();
            (
                pooled,
                EncoderCache::Cnn {
                    padded,
                    best_pre,
                    best_pos,
                },
            )
        }
        Arch::Lstm => {
            let hsize = cfg.hidden;
            let mut h = vec![0.0; hsize];
            let mut c = vec![0.0; hsize];
            let mut steps = Vec::with_capacity(ids.len());
            let mut z = vec![0.0; 4 * hsize];
            for &id in ids {
                let mut input = Vec::with_capacity(dim + hsize);
                input.extend_from_slice(p.embedding.row(id));
                input.extend_from_slice(&h);
                p.lstm_w.mul_vec(&input, &mut z);
                let bias = p.lstm_b.row(0);
                let mut gates = vec![0.0; 4 * hsize];
                for k in 0..4 * hsize {
                    let pre = z[k] + bias[k];
                    gates[k] = if k < 3 * hsize {
                        sigmoid(pre)
                    } else {
                        pre.tanh()
                    };
                }
                let c_prev = c.clone();
                let mut tanh_c = vec![0.0; hsize];
                for k in 0..hsize {
                    let (i, f, o, g) = (
                        gates[k],
                        gates[hsize + k],
                        gates[2 * hsize + k],
                        gates[3 * hsize + k],
                    );
                    c[k] = f * c_prev[k] + i * g;
                    tanh_c[k] = c[k].tanh();
                    h[k] = o * tanh_c[k];
                }
                steps.push(LstmStep {
                    input,
                    gates,
                    c_prev,
                    tanh_c,
                });
            }
            (h, EncoderCache::Lstm { steps })
        }
    };
    let k = cfg.num_classes;
    let mut logits = vec![0.0; k];
    p.out_w.mul_vec(&encoded, &mut logits);
    for (l, b) in logits.iter_mut().zip(p.out_b.row(0)) {
        *l += b;
    }
    Ok((
        logits,
        Cache {
            ids: ids.to_vec(),
            encoded,
            inner,
        },
    ))
}

/// Accumulates parameter gradients given `d loss / d logits`.
pub fn backward(model: &ClassifierModel, cache: &Cache, dlogits: &[f64], grads: &mut Gradients) {
    let cfg = &model.config;
    let p = &model.params;
    let g = &mut grads.params;
    let enc_width = cache.encoded.len();
    let mut d_enc = vec![0.0; enc_width];
    for (k, &dl) in dlogits.iter().enumerate() {
        axpy(dl, &cache.encoded, g.out_w.row_mut(k));
        g.out_b.row_mut(0)[k] += dl;
        axpy(dl, p.out_w.row(k), &mut d_enc);
    }
    let fine_tune = cfg.fine_tune_embeddings;
    let pad = model.pad_index();
    let dim = cfg.dim;
    let mut emb_updates: Vec<(usize, Vec<f64>)> = Vec::new();
    match &cache.inner {
        EncoderCache::Nbow => {
            if fine_tune {
                let w = 1.0 / cache.ids.len() as f64;
                for &id in &cache.ids {
                    emb_updates.push((id, d_enc.iter().map(|d| d * w).collect()));
                }
            }
        }
        EncoderCache::Cnn {
            padded,
            best_pre,
            best_pos,
        } => {
            let width = cfg.filter_width;
            let mut window = vec![0.0; width * dim];
            let mut d_window = vec![0.0; width * dim];
            for filter in 0..cfg.num_filters {
                if best_pre[filter] <= 0.0 {
                    continue;
                }
                let dz = d_enc[filter];
                let pos = best_pos[filter];
                for j in 0..width {
                    window[j * dim..(j + 1) * dim]
                        .copy_from_slice(p.embedding.row(padded[pos + j]));
                }
                g.conv_b.row_mut(0)[filter] += dz;
                axpy(dz, &window, g.conv_w.row_mut(filter));
                if fine_tune {
                    d_window.fill(0.0);
                    axpy(dz, p.conv_w.row(filter), &mut d_window);
                    for j in 0..width {
                        emb_updates
                            .push((padded[pos + j], d_window[j * dim..(j + 1) * dim].to_vec()));
                    }
                }
            }
        }
        EncoderCache::Lstm { steps } => {
            let hsize = cfg.hidden;
            let mut dh = d_enc;
            let mut dc = vec![0.0; hsize];
            let mut dz = vec![0.0; 4 * hsize];
            for (t, step) in steps.iter().enumerate().rev() {
                let gates = &step.gates;
                for k in 0..hsize {
                    let (i, f, o, gg) = (
                        gates[k],
                        gates[hsize + k],
                        gates[2 * hsize + k],
                        gates[3 * hsize + k],
                    );
                    let tc = step.tanh_c[k];
                    let d_o = dh[k] * tc;
                    dc[k] += dh[k] * o * (1.0 - tc * tc);
                    let d_i = dc[k] * gg;
                    let d_g = dc[k] * i;
                    let d_f = dc[k] * step.c_prev[k];
                    dz[k] = d_i * i * (1.0 - i);
                    dz[hsize + k] = d_f * f * (1.0 - f);
                    dz[2 * hsize + k] = d_o * o * (1.0 - o);
                    dz[3 * hsize + k] = d_g * (1.0 - gg * gg);
                    dc[k] *= f;
                }
                let mut d_input = vec![0.0; dim + hsize];
                for (r, &d) in dz.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    axpy(d, &step.input, g.lstm_w.row_mut(r));
                    g.lstm_b.row_mut(0)[r] += d;
                    axpy(d, p.lstm_w.row(r), &mut d_input);
                }
                dh.copy_from_slice(&d_input[dim..]);
                if fine_tune {
                    emb_updates.push((cache.ids[t], d_input[..dim].to_vec()));
                }
            }
        }
    }
    for (row, d) in emb_updates {
        if row == pad {
            continue;
        }
        axpy(1.0, &d, grads.params.embedding.row_mut(row));
        grads.touch(row);
    }
}

/// `−ln softmax(logits)[label]` and its gradient `softmax − onehot`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let mut d = softmax(logits);
    d[label] -= 1.0;
    (log_sum_exp(logits) - logits[label], d)
}

/// Mean cross-entropy over `batch` and its gradients.
pub fn loss_and_grad(model: &ClassifierModel, batch: &[Example]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let mut grads = Gradients::zeros_for(model);
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for ex in batch {
        let (logits, cache) = forward(model, &ex.ids)?;
        let (l, mut d) = softmax_cross_entropy(&logits, ex.label);
        loss += l;
        d.iter_mut().for_each(|v| *v *= scale);
        backward(model, &cache, &d, &mut grads);
    }
    Ok((loss * scale, grads))
}
