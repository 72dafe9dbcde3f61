use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{add_outer, axis_term, AmsGrad, ModelError, NegativeSampler, P2GTModel, TrainConfig};
use crate::corpus::{DatasetSplit, TypedProcess};
use crate::encoder::{render_process, render_senses, TextEncoder, ToyEncoder};
use crate::evaluation::evaluate;
use crate::glosses::{GlossResolver, Sense};
use crate::inference::{axis_vocabulary, IndexedModel, LabelIndex};
use crate::seed::{rng_for, NEGATIVES, SHUFFLE};
use crate::Axis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev_recall_at_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev_mrr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: P2GTModel,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

/// Pooled encoder inputs, cached by rendered text. The toy encoder is
/// linear, so `W . pooled` with the current `W` is exactly the in-batch
/// encoding.
struct PooledCache<'a> {
    encoder: &'a ToyEncoder,
    by_text: HashMap<String, Array1<f64>>,
}

impl PooledCache<'_> {
    fn gloss(&mut self, sense: &Sense) -> Result<Array1<f64>, ModelError> {
        let seq = render_senses(std::slice::from_ref(sense));
        let key = seq.to_string();
        if let Some(v) = self.by_text.get(&key) {
            return Ok(v.clone());
        }
        let (v, _) = self.encoder.pooled_input(&seq)?;
        self.by_text.insert(key, v.clone());
        Ok(v)
    }
}

struct AxisData {
    axis: Axis,
    margin: f64,
    sampler: NegativeSampler,
    /// pooled process input per training case
    inputs: Vec<Array1<f64>>,
    /// pooled positive gloss per training case
    positives: Vec<Array1<f64>>,
    /// pooled gloss per sampler entry
    pool: Vec<Array1<f64>>,
}

fn prepare_axis(
    axis: Axis,
    cases: &[TypedProcess],
    resolver: &GlossResolver,
    positives: &[Sense],
    config: &TrainConfig,
    cache: &mut PooledCache<'_>,
) -> Result<AxisData, ModelError> {
    let labels = axis_vocabulary(cases, axis);
    let candidates = resolver.resolve_all(labels.iter().map(String::as_str), axis)?;
    let sampler = NegativeSampler::new(axis, &candidates, config.gloss_strategy);
    let mode = config.rendering.mode(axis);
    let inputs = cases
        .iter()
        .map(|c| Ok(cache.encoder.pooled_input(&render_process(&c.process, mode))?.0))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let positives = positives.iter().map(|s| cache.gloss(s)).collect::<Result<Vec<_>, _>>()?;
    let pool = sampler
        .entries()
        .iter()
        .map(|e| cache.gloss(&e.sense))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AxisData {
        axis,
        margin: config.margin(axis),
        sampler,
        inputs,
        positives,
        pool,
    })
}

/// Gradient accumulators for one mini-batch.
struct Grads {
    w: Array2<f64>,
    action: Array2<f64>,
    object: Array2<f64>,
}

impl Grads {
    fn zeros(d: usize) -> Self {
        Grads {
            w: Array2::zeros((d, d)),
            action: Array2::zeros((d, d)),
            object: Array2::zeros((d, d)),
        }
    }

    fn projection(&mut self, axis: Axis) -> &mut Array2<f64> {
        match axis {
            Axis::Action => &mut self.action,
            Axis::Object => &mut self.object,
        }
    }
}

/// Loss of one case on one axis, accumulating gradients into `grads`.
///
/// With `h = W x`, `q = M h` and gloss encodings `b = W g`:
/// `dM += dq h^T`, `dW += (M^T dq) x^T + sum_b db g^T`.
fn accumulate_case(
    model: &P2GTModel,
    data: &AxisData,
    case: usize,
    negatives: &[usize],
    grads: &mut Grads,
) -> Result<f64, ModelError> {
    let w = model.encoder.weight();
    let m = &model.projection(data.axis).matrix;
    let x = &data.inputs[case];
    let h = w.dot(x);
    let q = m.dot(&h);
    let g_pos = &data.positives[case];
    let b_pos = w.dot(g_pos);
    let b_negs: Vec<Array1<f64>> = negatives.iter().map(|&j| w.dot(&data.pool[j])).collect();
    let t = axis_term(&q, &b_pos, &b_negs, data.margin)?;
    if t.loss == 0.0 {
        return Ok(0.0);
    }
    add_outer(grads.projection(data.axis), &t.d_query, &h);
    let dh = m.t().dot(&t.d_query);
    add_outer(&mut grads.w, &dh, x);
    add_outer(&mut grads.w, &t.d_positive, g_pos);
    for (&j, db) in negatives.iter().zip(&t.d_negatives) {
        add_outer(&mut grads.w, db, &data.pool[j]);
    }
    Ok(t.loss)
}

fn dev_selection(
    model: &P2GTModel,
    dev: &[TypedProcess],
    candidates: &[BTreeMap<String, Vec<Sense>>; 2],
    axis: Axis,
) -> Result<(f64, f64), ModelError> {
    let action = LabelIndex::from_candidates(Axis::Action, &candidates[0], model)?;
    let object = LabelIndex::from_candidates(Axis::Object, &candidates[1], model)?;
    let typer = IndexedModel::new(model, &action, &object)?;
    let report = evaluate(&typer, "dev", dev, &[1])
        .map_err(|e| ModelError::Checkpoint(format!("dev evaluation failed: {e}")))?
        .report;
    let m = report.axis(axis);
    Ok((m.recall_at(1).unwrap_or(0.0), m.mrr))
}

/// Mini-batch training of the encoder layer and the active projections.
///
/// Negatives are redrawn for every step. When the split has a dev part and
/// `select_on_dev` is set, the parameters of the epoch with the best dev
/// recall@1 on the selection axis are returned (MRR breaks ties, then the
/// later epoch wins); otherwise the final parameters.
pub fn train(
    split: &DatasetSplit,
    resolver: &GlossResolver,
    encoder: ToyEncoder,
    config: TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(ModelError::EmptyTrainSplit);
    }
    if resolver.strategy != config.gloss_strategy {
        return Err(ModelError::Config(format!(
            "resolver strategy {} differs from config strategy {}",
            resolver.strategy, config.gloss_strategy
        )));
    }
    let cases = &split.train;
    let d = encoder.dim();
    let mut model = P2GTModel::new(encoder, config.clone());

    let glosses = cases
        .iter()
        .map(|c| resolver.training_glosses(c))
        .collect::<Result<Vec<_>, _>>()?;
    let (pos_a, pos_o): (Vec<Sense>, Vec<Sense>) = glosses.into_iter().unzip();

    let axes = config.active_axes();
    let data: Vec<AxisData> = {
        let enc = model.encoder.clone();
        let mut cache = PooledCache {
            encoder: &enc,
            by_text: HashMap::new(),
        };
        axes.iter()
            .map(|&axis| {
                let pos = if axis == Axis::Action { &pos_a } else { &pos_o };
                prepare_axis(axis, cases, resolver, pos, &config, &mut cache)
            })
            .collect::<Result<_, _>>()?
    };
    for a in &data {
        log::info!(
            "{} axis: {} training labels, {} pooled negative glosses",
            a.axis,
            axis_vocabulary(cases, a.axis).len(),
            a.pool.len()
        );
    }

    let selecting = config.select_on_dev && !split.dev.is_empty();
    let full_candidates = if selecting {
        let all: Vec<&TypedProcess> = split.all().collect();
        let mut out = [BTreeMap::new(), BTreeMap::new()];
        for (i, axis) in Axis::BOTH.into_iter().enumerate() {
            let vocab = axis_vocabulary(all.iter().copied(), axis);
            out[i] = resolver.resolve_all(vocab.iter().map(String::as_str), axis)?;
        }
        Some(out)
    } else {
        None
    };

    let mut opt_w = AmsGrad::new((d, d), config.learning_rate);
    let mut opt_a = AmsGrad::new((d, d), config.learning_rate);
    let mut opt_o = AmsGrad::new((d, d), config.learning_rate);
    let mut shuffle_rng = rng_for(config.seed, SHUFFLE);
    let mut neg_rng = rng_for(config.seed, NEGATIVES);

    let mut order: Vec<usize> = (0..cases.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<((f64, f64), usize, P2GTModel)> = None;
    let mut step = 0usize;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            step += 1;
            let mut grads = Grads::zeros(d);
            let mut batch_loss = 0.0;
            for &i in batch {
                for a in &data {
                    let label = cases[i].label(a.axis);
                    let negs = (0..config.negatives_per_axis)
                        .map(|_| a.sampler.sample_index(label, &mut neg_rng))
                        .collect::<Result<Vec<_>, _>>()?;
                    batch_loss += accumulate_case(&model, a, i, &negs, &mut grads)?;
                }
            }
            if !batch_loss.is_finite() {
                return Err(ModelError::NonFiniteLoss {
                    epoch,
                    step,
                    detail: format!("batch of {} cases, loss {batch_loss}", batch.len()),
                });
            }
            epoch_loss += batch_loss;
            let scale = 1.0 / batch.len() as f64;
            grads.w *= scale;
            opt_w.update(model.encoder.weight_mut(), &grads.w);
            for a in &data {
                let (opt, g) = match a.axis {
                    Axis::Action => (&mut opt_a, &mut grads.action),
                    Axis::Object => (&mut opt_o, &mut grads.object),
                };
                *g *= scale;
                opt.update(&mut model.projection_mut(a.axis).matrix, g);
            }
            if model.flat_params().iter().any(|x| !x.is_finite()) {
                return Err(ModelError::NonFiniteLoss {
                    epoch,
                    step,
                    detail: "parameters became non-finite".into(),
                });
            }
        }
        let mean_loss = epoch_loss / cases.len() as f64;
        let mut record = EpochRecord {
            epoch,
            mean_loss,
            dev_recall_at_1: None,
            dev_mrr: None,
        };
        if let Some(cands) = &full_candidates {
            let score = dev_selection(&model, &split.dev, cands, config.selection_axis())?;
            record.dev_recall_at_1 = Some(score.0);
            record.dev_mrr = Some(score.1);
            let better = match &best {
                None => true,
                Some((b, _, _)) => score.0 > b.0 || (score.0 == b.0 && score.1 >= b.1),
            };
            if better {
                best = Some((score, epoch, model.clone()));
            }
        }
        log::debug!("epoch {epoch}: loss {mean_loss:.6}");
        history.push(record);
    }

    let (model, best_epoch) = match best {
        Some((_, epoch, m)) => (m, epoch),
        None => (model, config.epochs),
    };
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
    })
}
