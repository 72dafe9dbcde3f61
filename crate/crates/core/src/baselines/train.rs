use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::rnn::BiRnnGrads;
use super::{BaselineError, BiRnn, EncodedInput, EncoderKind, LabelTable, S2LConfig, S2LModel, SequenceEncoder};
use crate::corpus::{DatasetSplit, TypedProcess};
use crate::encoder::{StaticVectors, ToyEncoder};
use crate::evaluation::evaluate;
use crate::inference::axis_vocabulary;
use crate::model::{add_outer, cosine_with_grads, AmsGrad, EpochRecord, ModelError};
use crate::seed::{rng_for, sub_seed, BASELINE_INIT, ENCODER, SHUFFLE, STATIC_VECTORS};
use crate::Axis;

fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let s = 1.0 / (cols as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal) * s)
}

/// Identity when the shapes allow it, otherwise scaled Gaussian.
fn init_head<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    if rows == cols {
        Array2::eye(rows)
    } else {
        random_matrix(rows, cols, rng)
    }
}

struct Optimisers {
    encoder: Vec<AmsGrad>,
    action: AmsGrad,
    object: AmsGrad,
}

struct Grads {
    rnn: Option<BiRnnGrads>,
    ctx: Option<Array2<f64>>,
    action: Array2<f64>,
    object: Array2<f64>,
}

impl Grads {
    fn zeros(model: &S2LModel) -> Self {
        Grads {
            rnn: match &model.encoder {
                SequenceEncoder::Rnn(r) => Some(r.zero_grads()),
                _ => None,
            },
            ctx: match &model.encoder {
                SequenceEncoder::Ctx(e) => Some(Array2::zeros(e.weight().raw_dim())),
                _ => None,
            },
            action: Array2::zeros(model.head_action.raw_dim()),
            object: Array2::zeros(model.head_object.raw_dim()),
        }
    }
}

/// Cosine distance of one case on one axis, accumulating gradients.
fn accumulate(
    model: &S2LModel,
    input: &EncodedInput,
    targets: [&Array1<f64>; 2],
    grads: &mut Grads,
) -> Result<f64, ModelError> {
    let (z, trace) = match (&model.encoder, input) {
        (SequenceEncoder::Rnn(r), EncodedInput::Sequence(xs)) => {
            let (z, t) = r.forward_trace(xs);
            (z, Some(t))
        }
        _ => (model.encode_input(input), None),
    };
    let mut dz = Array1::zeros(z.len());
    let mut loss = 0.0;
    for (axis, y) in Axis::BOTH.into_iter().zip(targets) {
        let head = model.head(axis);
        let p = head.dot(&z);
        let (c, dp, _) = cosine_with_grads(&p, y)?;
        loss += 1.0 - c;
        let dp = -dp;
        let g = match axis {
            Axis::Action => &mut grads.action,
            Axis::Object => &mut grads.object,
        };
        add_outer(g, &dp, &z);
        dz += &head.t().dot(&dp);
    }
    match (&model.encoder, input) {
        (SequenceEncoder::Rnn(r), EncodedInput::Sequence(xs)) => {
            r.backprop(xs, trace.as_ref().expect("trace"), &dz, grads.rnn.as_mut().expect("rnn grads"));
        }
        (SequenceEncoder::Ctx(_), EncodedInput::Pooled(x)) => {
            add_outer(grads.ctx.as_mut().expect("ctx grads"), &dz, x);
        }
        _ => {}
    }
    Ok(loss)
}

fn apply(model: &mut S2LModel, opt: &mut Optimisers, mut g: Grads, scale: f64) {
    g.action *= scale;
    g.object *= scale;
    opt.action.update(&mut model.head_action, &g.action);
    opt.object.update(&mut model.head_object, &g.object);
    match &mut model.encoder {
        SequenceEncoder::Mean => {}
        SequenceEncoder::Ctx(e) => {
            let mut gw = g.ctx.expect("ctx grads");
            gw *= scale;
            opt.encoder[0].update(e.weight_mut(), &gw);
        }
        SequenceEncoder::Rnn(r) => {
            let mut rg = g.rnn.expect("rnn grads");
            let blocks: [(&mut Array2<f64>, &mut Array2<f64>); 6] = [
                (&mut r.forward.wx, &mut rg.forward.wx),
                (&mut r.forward.wh, &mut rg.forward.wh),
                (&mut r.forward.b, &mut rg.forward.b),
                (&mut r.backward.wx, &mut rg.backward.wx),
                (&mut r.backward.wh, &mut rg.backward.wh),
                (&mut r.backward.b, &mut rg.backward.b),
            ];
            for (o, (p, gr)) in opt.encoder.iter_mut().zip(blocks) {
                *gr *= scale;
                o.update(p, gr);
            }
        }
    }
}

fn initial_model(
    split: &DatasetSplit,
    config: &S2LConfig,
    vectors: StaticVectors,
) -> Result<S2LModel, BaselineError> {
    if vectors.is_empty() {
        return Err(BaselineError::Config("static vector table is empty".into()));
    }
    let vseed = sub_seed(config.seed, STATIC_VECTORS);
    let all: Vec<&TypedProcess> = split.all().collect();
    let va = axis_vocabulary(all.iter().copied(), Axis::Action);
    let vo = axis_vocabulary(all.iter().copied(), Axis::Object);
    let table_action = LabelTable::build(va.iter().map(String::as_str), Axis::Action, &vectors, vseed)?;
    let table_object = LabelTable::build(vo.iter().map(String::as_str), Axis::Object, &vectors, vseed)?;
    let ds = vectors.dim();
    let mut rng = rng_for(config.seed, BASELINE_INIT);
    let (encoder, dz) = match config.kind {
        EncoderKind::Mean => (SequenceEncoder::Mean, ds),
        EncoderKind::Rnn => {
            let r = BiRnn::init(ds, config.hidden, &mut rng);
            let d = r.output_dim();
            (SequenceEncoder::Rnn(Box::new(r)), d)
        }
        EncoderKind::Ctx => (
            SequenceEncoder::Ctx(ToyEncoder::new(
                sub_seed(config.seed, ENCODER),
                config.ctx_dim,
                config.max_len,
                true,
            )),
            config.ctx_dim,
        ),
    };
    Ok(S2LModel {
        config: config.clone(),
        encoder,
        word_vectors: vectors,
        head_action: init_head(ds, dz, &mut rng),
        head_object: init_head(ds, dz, &mut rng),
        table_action,
        table_object,
    })
}

/// Train a baseline on `split.train`. Label tables cover the vocabulary of
/// every split so the candidate space matches the main model.
pub fn s2l_train(
    split: &DatasetSplit,
    config: &S2LConfig,
    vectors: StaticVectors,
) -> Result<(S2LModel, Vec<EpochRecord>, usize), BaselineError> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(ModelError::EmptyTrainSplit.into());
    }
    let mut model = initial_model(split, config, vectors)?;
    let cases = &split.train;
    let inputs = cases.iter().map(|c| model.input(&c.process)).collect::<Result<Vec<_>, _>>()?;
    let targets: Vec<[Array1<f64>; 2]> = cases
        .iter()
        .map(|c| {
            [
                model.table_action.get(&c.action_label).expect("label in table").clone(),
                model.table_object.get(&c.object_label).expect("label in table").clone(),
            ]
        })
        .collect();
    let lr = config.learning_rate;
    let mut opt = Optimisers {
        encoder: model.param_blocks()[..model.param_blocks().len() - 2]
            .iter()
            .map(|(_, m)| AmsGrad::new(m.dim(), lr))
            .collect(),
        action: AmsGrad::new(model.head_action.dim(), lr),
        object: AmsGrad::new(model.head_object.dim(), lr),
    };
    let mut rng = rng_for(config.seed, SHUFFLE);
    let mut order: Vec<usize> = (0..cases.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<((f64, f64), usize, S2LModel)> = None;
    let mut step = 0;
    let selecting = config.select_on_dev && !split.dev.is_empty();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            step += 1;
            let mut g = Grads::zeros(&model);
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += accumulate(&model, &inputs[i], [&targets[i][0], &targets[i][1]], &mut g)?;
            }
            if !batch_loss.is_finite() {
                return Err(ModelError::NonFiniteLoss {
                    epoch,
                    step,
                    detail: format!("baseline {} batch loss {batch_loss}", config.kind),
                }
                .into());
            }
            epoch_loss += batch_loss;
            apply(&mut model, &mut opt, g, 1.0 / batch.len() as f64);
        }
        let mut record = EpochRecord {
            epoch,
            mean_loss: epoch_loss / cases.len() as f64,
            dev_recall_at_1: None,
            dev_mrr: None,
        };
        if selecting {
            let rep = evaluate(&model, "dev", &split.dev, &[1])
                .map_err(|e| BaselineError::Checkpoint(format!("dev evaluation failed: {e}")))?
                .report;
            let score = (rep.action.recall_at(1).unwrap_or(0.0), rep.action.mrr);
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
        history.push(record);
    }
    Ok(match best {
        Some((_, epoch, m)) => (m, history, epoch),
        None => (model, history, config.epochs),
    })
}
