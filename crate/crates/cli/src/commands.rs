use std::path::Path;

use anyhow::{bail, Context, Result};
use p2gt_core::baselines::{corpus_words, load_baseline, s2l_train, save_baseline, EncoderKind};
use p2gt_core::config::{parse_ks, BaselineVectors, RunConfig};
use p2gt_core::corpus::{
    build_corpus, compute_stats, load_articles, split_dataset, Annotators, EventProcess, FrameTable, RuleHeadAnnotator,
    SplitRatios, SuffixLemmatizer, TypedProcess,
};
use p2gt_core::encoder::StaticVectors;
use p2gt_core::evaluation::{evaluate, BucketKind};
use p2gt_core::inference::{axis_vocabulary, build_label_index, type_process, IndexedModel, LabelIndex, RankedPrediction};
use p2gt_core::model::{load_checkpoint, save_checkpoint, train, P2GTModel};
use p2gt_core::{read_jsonl, write_jsonl, Axis};

use crate::cli::{
    AnnotatorChoice, BaselineCommand, BucketChoice, Cli, Command, CorpusCommand, EvalOptions, IndexCommand, KindChoice,
    TypeArgs,
};
use crate::pipeline::{self as p, index_file};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Corpus(c) => corpus(c),
        Command::Train(run) => {
            let cfg = p::load_config(run.config.as_deref(), run.out.as_deref())?;
            train_model(&cfg)
        }
        Command::Index(IndexCommand::Build { run, checkpoint }) => {
            let cfg = p::load_config(run.config.as_deref(), run.out.as_deref())?;
            let (model, split) = load_model(&cfg, checkpoint.as_deref())?;
            let dir = p::index_dir(&cfg, None);
            build_indexes(&cfg, &model, &split, &dir)?;
            Ok(())
        }
        Command::Eval(a) => {
            let cfg = p::load_config(a.run.config.as_deref(), a.run.out.as_deref())?;
            eval_model(&cfg, a.checkpoint.as_deref(), a.index.as_deref(), &a.eval)
        }
        Command::Type(a) => type_cmd(a),
        Command::Baseline(b) => baseline(b),
    }
}

fn corpus(c: CorpusCommand) -> Result<()> {
    match c {
        CorpusCommand::Build {
            input,
            out,
            annotator,
            frames,
        } => {
            let annotators = match annotator {
                AnnotatorChoice::Rules => Annotators::rules(),
                AnnotatorChoice::External => {
                    let path = frames.context("--frames is required with --annotator external")?;
                    let table = FrameTable::load(&path).with_context(|| format!("loading {}", path.display()))?;
                    Annotators::with_frames(Box::new(table))
                }
            };
            let articles = load_articles(&input)?;
            let dataset = build_corpus(&articles, &annotators)?;
            write_jsonl(&out, &dataset)?;
            eprintln!("{} processes from {} articles -> {}", dataset.len(), articles.len(), out.display());
            Ok(())
        }
        CorpusCommand::Stats { input, out } => {
            let dataset: Vec<TypedProcess> = read_jsonl(&input)?;
            let stats = compute_stats(&dataset, &RuleHeadAnnotator, &SuffixLemmatizer)?;
            let summary = stats.summary();
            match out {
                Some(path) => p::write_json(&path, &summary),
                None => {
                    println!("{}", serde_json::to_string_pretty(&summary)?);
                    Ok(())
                }
            }
        }
        CorpusCommand::Split {
            input,
            ratios,
            seed,
            out_prefix,
        } => {
            let ratios: SplitRatios = ratios.parse()?;
            let dataset: Vec<TypedProcess> = read_jsonl(&input)?;
            let split = split_dataset(&dataset, ratios, seed)?;
            split.write(&out_prefix)?;
            let [a, b, c] = split.manifest().sizes;
            eprintln!("train {a}, dev {b}, test {c} -> {}.*", out_prefix.display());
            Ok(())
        }
    }
}

fn train_model(cfg: &RunConfig) -> Result<()> {
    let split = p::load_split(cfg)?;
    let resolver = p::resolver(cfg, &split)?;
    let encoder = cfg.encoder.build(cfg.seed)?;
    let outcome = train(&split, &resolver, encoder, cfg.train.clone())?;
    let dir = p::checkpoint_dir(cfg, None);
    let manifest = save_checkpoint(&dir, &outcome, Some(&split.manifest().digest))?;
    p::snapshot_config(cfg, &dir)?;
    let last = outcome.history.last().map_or(f64::NAN, |r| r.mean_loss);
    eprintln!(
        "trained {} epochs (kept epoch {}), final loss {last:.6}, fingerprint {} -> {}",
        outcome.history.len(),
        outcome.best_epoch,
        manifest.fingerprint,
        dir.display()
    );
    Ok(())
}

fn load_model(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<(P2GTModel, p2gt_core::corpus::DatasetSplit)> {
    let dir = p::checkpoint_dir(cfg, checkpoint);
    let (model, manifest) =
        load_checkpoint(&dir).with_context(|| format!("loading checkpoint {}", dir.display()))?;
    let split = p::load_split(cfg)?;
    p::check_split_digest(manifest.split_digest.as_deref(), &split)?;
    Ok((model, split))
}

fn build_indexes(
    cfg: &RunConfig,
    model: &P2GTModel,
    split: &p2gt_core::corpus::DatasetSplit,
    dir: &Path,
) -> Result<[LabelIndex; 2]> {
    let resolver = p::resolver(cfg, split)?;
    p::create_dir(dir)?;
    let mut out = Vec::new();
    for axis in Axis::BOTH {
        let vocab = axis_vocabulary(split.all(), axis);
        let idx = build_label_index(vocab.iter().map(String::as_str), axis, model, &resolver)?;
        let path = index_file(dir, axis);
        idx.save(&path)?;
        eprintln!("{axis}: {} labels, {} glosses -> {}", idx.n_labels(), idx.entries().len(), path.display());
        out.push(idx);
    }
    p::snapshot_config(cfg, dir)?;
    let [a, o]: [LabelIndex; 2] = out.try_into().expect("two axes");
    Ok([a, o])
}

/// Saved indexes when present, otherwise built (and saved) from the model.
fn indexes(
    cfg: &RunConfig,
    model: &P2GTModel,
    split: &p2gt_core::corpus::DatasetSplit,
    explicit: Option<&Path>,
) -> Result<[LabelIndex; 2]> {
    let dir = p::index_dir(cfg, explicit);
    if index_file(&dir, Axis::Action).exists() || explicit.is_some() {
        let load = |axis| {
            let f = index_file(&dir, axis);
            LabelIndex::load(&f).with_context(|| format!("loading index {}", f.display()))
        };
        Ok([load(Axis::Action)?, load(Axis::Object)?])
    } else {
        log::info!("no index under {}, building one", dir.display());
        build_indexes(cfg, model, split, &dir)
    }
}

struct Resolved {
    split: String,
    buckets: BucketKind,
    ks: Vec<usize>,
}

fn resolve_eval(cfg: &RunConfig, opts: &EvalOptions) -> Result<Resolved> {
    Ok(Resolved {
        split: opts.split.map_or_else(|| cfg.eval_split.clone(), |s| s.name().to_string()),
        buckets: match opts.buckets {
            Some(BucketChoice::Freq) => BucketKind::Freq,
            Some(BucketChoice::Length) => BucketKind::Length,
            Some(BucketChoice::None) => BucketKind::None,
            None => cfg.eval_buckets,
        },
        ks: match &opts.k {
            Some(k) => parse_ks(k).map_err(|m| anyhow::anyhow!("--k: {m}"))?,
            None => cfg.eval_k.clone(),
        },
    })
}

fn eval_model(cfg: &RunConfig, checkpoint: Option<&Path>, index: Option<&Path>, opts: &EvalOptions) -> Result<()> {
    let r = resolve_eval(cfg, opts)?;
    let (model, split) = load_model(cfg, checkpoint)?;
    let [ia, io] = indexes(cfg, &model, &split, index)?;
    let typer = IndexedModel::new(&model, &ia, &io)?;
    let cases = p::split_cases(&split, &r.split);
    let evaluation = evaluate(&typer, &r.split, cases, &r.ks)?;
    let report = p::finish_report(cfg, &split, evaluation, r.buckets, &cfg.output_dir.join("eval"))?;
    p::snapshot_config(cfg, &cfg.output_dir.join("eval"))?;
    print!("{report}");
    Ok(())
}

fn print_ranking(axis: Axis, ranking: &[RankedPrediction]) {
    println!("# {axis}");
    for (i, r) in ranking.iter().enumerate() {
        println!("{}\t{}\t{:.6}", i + 1, r.label, r.score);
    }
}

fn type_cmd(a: TypeArgs) -> Result<()> {
    let cfg = p::load_config(a.run.config.as_deref(), a.run.out.as_deref())?;
    let (model, split) = load_model(&cfg, a.checkpoint.as_deref())?;
    let [ia, io] = indexes(&cfg, &model, &split, a.index.as_deref())?;
    let lines: Vec<String> = match (&a.process, &a.file) {
        (Some(pr), _) => vec![pr.clone()],
        (None, Some(f)) => std::fs::read_to_string(f)
            .with_context(|| format!("reading {}", f.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect(),
        (None, None) => bail!("one of --process or --file is required"),
    };
    let many = lines.len() > 1;
    for (n, line) in lines.iter().enumerate() {
        let process = EventProcess::parse(line).with_context(|| format!("parsing process `{line}`"))?;
        let (ra, ro) = type_process(&process, &model, &ia, &io, a.k)?;
        if many {
            if n > 0 {
                println!();
            }
            println!("## {process}");
        }
        print_ranking(Axis::Action, &ra);
        print_ranking(Axis::Object, &ro);
    }
    Ok(())
}

fn kind_of(cfg: &RunConfig, k: Option<KindChoice>) -> EncoderKind {
    match k {
        Some(KindChoice::Mean) => EncoderKind::Mean,
        Some(KindChoice::Rnn) => EncoderKind::Rnn,
        Some(KindChoice::Ctx) => EncoderKind::Ctx,
        None => cfg.baseline_kind,
    }
}

fn baseline(b: BaselineCommand) -> Result<()> {
    match b {
        BaselineCommand::Train { run, kind } => {
            let mut cfg = p::load_config(run.config.as_deref(), run.out.as_deref())?;
            cfg.baseline_kind = kind_of(&cfg, kind);
            let split = p::load_split(&cfg)?;
            let vectors = match &cfg.baseline_vectors {
                BaselineVectors::Random { dim } => {
                    let words = corpus_words(split.all());
                    StaticVectors::random(words.keys().map(String::as_str), *dim, cfg.seed)
                }
                BaselineVectors::File(f) => {
                    StaticVectors::load_text(f).with_context(|| format!("loading {}", f.display()))?
                }
            };
            let (model, history, best) = s2l_train(&split, &cfg.s2l(), vectors)?;
            let dir = cfg.output_dir.join(format!("baseline-{}", cfg.baseline_kind));
            let m = save_baseline(&dir, &model, &history, best, Some(&split.manifest().digest))?;
            p::snapshot_config(&cfg, &dir)?;
            eprintln!(
                "trained {} baseline (kept epoch {best}), fingerprint {} -> {}",
                cfg.baseline_kind,
                m.fingerprint,
                dir.display()
            );
            Ok(())
        }
        BaselineCommand::Eval {
            run,
            kind,
            checkpoint,
            eval,
        } => {
            let mut cfg = p::load_config(run.config.as_deref(), run.out.as_deref())?;
            cfg.baseline_kind = kind_of(&cfg, kind);
            let r = resolve_eval(&cfg, &eval)?;
            let dir = checkpoint.unwrap_or_else(|| cfg.output_dir.join(format!("baseline-{}", cfg.baseline_kind)));
            let (model, manifest) =
                load_baseline(&dir).with_context(|| format!("loading baseline {}", dir.display()))?;
            let split = p::load_split(&cfg)?;
            p::check_split_digest(manifest.split_digest.as_deref(), &split)?;
            let cases = p::split_cases(&split, &r.split);
            let evaluation = evaluate(&model, &r.split, cases, &r.ks)?;
            let report = p::finish_report(&cfg, &split, evaluation, r.buckets, &dir.join("eval"))?;
            p::snapshot_config(&cfg, &dir.join("eval"))?;
            print!("{report}");
            Ok(())
        }
    }
}
