//! Command-line front end for the `contralign` toolkit.
//!
//! Each subcommand reads plain-text artifacts (parallel corpora, lexical
//! translation tables, weight files), performs one pipeline stage, and
//! writes its results back as text or CSV. Every file a command emits is
//! readable by the matching loader, and all randomness descends from the
//! command's `--seed`, so a rerun with identical flags reproduces its
//! outputs byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use contralign::corpus::{
    load_alignments, load_gold, load_parallel, load_ttable, load_weights, save_parallel,
    save_ttable, save_weights,
};
use contralign::exact::{within_cap, ExactTable};
use contralign::lexicon::train_ttable;
use contralign::metrics::{avg_approx_error, corpus_aer, Estimator};
use contralign::noise::{make_noisy_corpus, NoiseSpec, NoiseStrategy};
use contralign::rng::substream;
use contralign::search::viterbi;
use contralign::trainer::{train, TrainConfig};
use contralign::{Alignment, Corpus, TTable, WeightVector};

/// Corruption rate used when a diagnostic builds its own noisy twin corpus.
const DIAGNOSTIC_NOISE_RATE: f64 = 0.25;

#[derive(Parser, Debug)]
#[command(
    name = "contralign",
    version,
    about = "Contrastively trained log-linear word alignment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Estimate a bidirectional lexical translation table with EM
    TrainLexicon(TrainLexiconArgs),
    /// Train alignment weights contrastively against generated noise
    Train(TrainArgs),
    /// Decode the best alignment for every pair of a parallel corpus
    Align(AlignArgs),
    /// Score predicted alignments against a gold standard
    EvalAer(EvalAerArgs),
    /// Measure estimator gradient error against exact enumeration
    ApproxError(ApproxErrorArgs),
    /// Measure how much posterior mass the best k alignments carry
    Concentration(ConcentrationArgs),
    /// Write a corrupted copy of a parallel corpus
    MakeNoise(MakeNoiseArgs),
}

#[derive(Args, Debug)]
pub struct TrainLexiconArgs {
    /// Source-side sentence file, one tokenized sentence per line
    #[arg(long)]
    pub source: PathBuf,
    /// Target-side sentence file, line-parallel with --source
    #[arg(long)]
    pub target: PathBuf,
    /// EM iterations over the corpus
    #[arg(long, default_value = "5")]
    pub iters: NonZeroUsize,
    /// Output path for the translation table
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Source-side sentence file
    #[arg(long)]
    pub source: PathBuf,
    /// Target-side sentence file
    #[arg(long)]
    pub target: PathBuf,
    /// Lexical translation table (from train-lexicon)
    #[arg(long)]
    pub ttable: PathBuf,
    /// How noisy counterparts are generated
    #[arg(long, default_value = "shuffle", value_parser = parse_strategy)]
    pub noise: NoiseStrategy,
    /// Fraction of tokens each corruption touches, in (0, 1]
    #[arg(long, default_value = "0.25", value_parser = parse_rate)]
    pub rate: f64,
    /// Expectations renormalize over the best n alignments found
    #[arg(long, default_value = "1")]
    pub n: NonZeroUsize,
    /// Beam width of the underlying search
    #[arg(long, default_value = "8")]
    pub beam: NonZeroUsize,
    /// Base learning rate; epoch e uses lr / (1 + e)
    #[arg(long, default_value = "0.05", value_parser = parse_lr)]
    pub lr: f64,
    #[arg(long, default_value = "5")]
    pub epochs: NonZeroUsize,
    /// L2 shrinkage strength
    #[arg(long, default_value = "0", value_parser = parse_l2)]
    pub l2: f64,
    /// Seeds noise generation and the pair-visiting order
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Redraw the noisy corpus every epoch instead of freezing it up front
    #[arg(long)]
    pub resample_noise: bool,
    /// Gold alignments for the training corpus; enables the error column of
    /// the log
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Output path for the learned weights
    #[arg(long)]
    pub weights_out: PathBuf,
    /// Output path for the per-epoch CSV log
    #[arg(long)]
    pub log_out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub ttable: PathBuf,
    /// Weights file (from train)
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value = "8")]
    pub beam: NonZeroUsize,
    /// Output path; one line per pair of 1-based "src-tgt" links
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalAerArgs {
    /// Predicted alignments, one line per pair
    #[arg(long)]
    pub pred: PathBuf,
    /// Gold alignments; "s-t" links are sure, "s?t" links possible only
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
}

#[derive(Args, Debug)]
pub struct ApproxErrorArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub ttable: PathBuf,
    /// Estimator family whose gradient error is measured
    #[arg(long, value_enum)]
    pub estimator: EstimatorKind,
    /// Harvest sizes to sweep (with --estimator topn)
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,15")]
    pub n: Vec<NonZeroUsize>,
    /// Sample counts to sweep (with --estimator gibbs)
    #[arg(long, value_delimiter = ',', default_value = "1,100,500")]
    pub samples: Vec<NonZeroUsize>,
    /// Number of random weight vectors averaged over
    #[arg(long, default_value = "10")]
    pub trials: NonZeroUsize,
    /// Beam width behind the topn estimator
    #[arg(long, default_value = "8")]
    pub beam: NonZeroUsize,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Keep only pairs with at most this many words per side
    #[arg(long, default_value = "4")]
    pub max_words: usize,
    /// Output path for the error CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub ttable: PathBuf,
    /// Number of random weight vectors, cycled over the kept pairs
    #[arg(long, default_value = "200")]
    pub trials: NonZeroUsize,
    /// Longest mass curve prefix to report
    #[arg(long, default_value = "16")]
    pub k_max: NonZeroUsize,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Keep only pairs with at most this many words per side
    #[arg(long, default_value = "4")]
    pub max_words: usize,
    /// Output path for the mass-curve CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MakeNoiseArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: NoiseStrategy,
    #[arg(long, default_value = "0.25", value_parser = parse_rate)]
    pub rate: f64,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    #[arg(long)]
    pub out_source: PathBuf,
    #[arg(long)]
    pub out_target: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EstimatorKind {
    Topn,
    Gibbs,
}

fn parse_strategy(s: &str) -> std::result::Result<NoiseStrategy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r > 0.0 && r <= 1.0 {
        Ok(r)
    } else {
        Err("rate must lie in (0, 1]".into())
    }
}

fn parse_lr(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r.is_finite() && r > 0.0 {
        Ok(r)
    } else {
        Err("learning rate must be positive".into())
    }
}

fn parse_l2(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r.is_finite() && r >= 0.0 {
        Ok(r)
    } else {
        Err("l2 strength must be nonnegative".into())
    }
}

/// Executes one parsed command, writing console output to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    match cli.cmd {
        Cmd::TrainLexicon(a) => cmd_train_lexicon(a, out),
        Cmd::Train(a) => cmd_train(a, out),
        Cmd::Align(a) => cmd_align(a, out),
        Cmd::EvalAer(a) => cmd_eval_aer(a, out),
        Cmd::ApproxError(a) => cmd_approx_error(a, out),
        Cmd::Concentration(a) => cmd_concentration(a, out),
        Cmd::MakeNoise(a) => cmd_make_noise(a, out),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn cmd_train_lexicon<W: Write>(a: TrainLexiconArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let table: TTable<f64> = train_ttable(&corpus, a.iters.get());
    save_ttable(&table, &a.out)?;
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

fn cmd_train<W: Write>(a: TrainArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let ttable: TTable<f64> = load_ttable(&a.ttable)?;
    let mut config = TrainConfig::new(NoiseSpec::new(a.noise, a.rate, a.seed)?);
    config.n = a.n.get();
    config.beam = a.beam.get();
    config.lr = a.lr;
    config.epochs = a.epochs.get();
    config.l2 = a.l2;
    config.seed = a.seed;
    config.resample_noise = a.resample_noise;
    // The training corpus doubles as the probe so the log always carries
    // the objective column; gold annotations add the error column.
    let probe = match &a.gold {
        Some(path) => load_gold(path, corpus.clone())?,
        None => corpus.clone(),
    };
    let (weights, log) = train(&corpus, &ttable, &config, Some(&probe))?;
    save_weights(&weights, &a.weights_out)?;
    let mut csv = Vec::new();
    log.write_csv(&mut csv)?;
    write_file(&a.log_out, &csv)?;
    writeln!(out, "wrote {}", a.weights_out.display())?;
    writeln!(out, "wrote {}", a.log_out.display())?;
    Ok(())
}

fn cmd_align<W: Write>(a: AlignArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let ttable: TTable<f64> = load_ttable(&a.ttable)?;
    let weights: WeightVector<f64> = load_weights(&a.weights)?;
    let mut text = String::new();
    for pair in &corpus.pairs {
        let best = viterbi(pair, &weights, &ttable, a.beam.get());
        let line: Vec<String> = best
            .alignment
            .iter()
            .map(|link| format!("{}-{}", link.src + 1, link.tgt + 1))
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    write_file(&a.out, text.as_bytes())?;
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

fn cmd_eval_aer<W: Write>(a: EvalAerArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let golds = load_alignments(&a.gold, &corpus)?;
    // Predictions reuse the gold reader; every parsed link counts,
    // whichever marker it carries.
    let preds: Vec<Alignment> = load_alignments(&a.pred, &corpus)?
        .iter()
        .map(|g| g.possible().iter().copied().collect())
        .collect();
    let aer = corpus_aer(&preds, &golds)?;
    writeln!(out, "AER {aer:.4}")?;
    Ok(())
}

fn cmd_approx_error<W: Write>(a: ApproxErrorArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let ttable: TTable<f64> = load_ttable(&a.ttable)?;
    let spec = NoiseSpec::new(NoiseStrategy::Mixed, DIAGNOSTIC_NOISE_RATE, a.seed)?;
    let noisy_all = make_noisy_corpus(&corpus, &spec)?;

    // Exact enumeration must cover both the pair and its corrupted twin
    // (insertions can grow a side past the budget).
    let mut observed = Corpus::default();
    let mut noisy = Corpus::default();
    for (obs, noi) in corpus.pairs.iter().zip(&noisy_all.pairs) {
        let short = obs.l() <= a.max_words && obs.m() <= a.max_words;
        if short && within_cap(obs) && within_cap(noi) {
            observed.pairs.push(obs.clone());
            noisy.pairs.push(noi.clone());
        }
    }
    if observed.is_empty() {
        bail!(
            "no pair fits within {} words per side and the enumeration budget",
            a.max_words
        );
    }

    let params = match a.estimator {
        EstimatorKind::Topn => &a.n,
        EstimatorKind::Gibbs => &a.samples,
    };
    let mut csv = String::from("estimator,param,t,error\n");
    for p in params {
        let estimator = match a.estimator {
            EstimatorKind::Topn => Estimator::TopN {
                n: p.get(),
                b: a.beam.get(),
            },
            EstimatorKind::Gibbs => Estimator::Gibbs {
                samples: p.get(),
                burn_in: 0,
                seed: a.seed,
            },
        };
        let report = avg_approx_error(
            &observed,
            &noisy,
            &ttable,
            a.trials.get(),
            &estimator,
            a.seed,
        )?;
        for (t, err) in report.per_trial.iter().enumerate() {
            writeln!(
                csv,
                "{},{},{},{:.12e}",
                report.estimator, report.param, t, err
            )?;
        }
        writeln!(
            csv,
            "{},{},avg,{:.12e}",
            report.estimator, report.param, report.avg
        )?;
    }
    write_file(&a.out, csv.as_bytes())?;
    writeln!(
        out,
        "wrote {} ({} pairs kept)",
        a.out.display(),
        observed.len()
    )?;
    Ok(())
}

fn cmd_concentration<W: Write>(a: ConcentrationArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let ttable: TTable<f64> = load_ttable(&a.ttable)?;
    let kept: Vec<_> = corpus
        .pairs
        .iter()
        .filter(|p| p.l() <= a.max_words && p.m() <= a.max_words && within_cap(p))
        .collect();
    if kept.is_empty() {
        bail!(
            "no pair fits within {} words per side and the enumeration budget",
            a.max_words
        );
    }
    let tables: Vec<ExactTable<f64>> = kept
        .iter()
        .map(|p| ExactTable::build(p, &ttable))
        .collect::<contralign::Result<_>>()?;

    let k_max = a.k_max.get();
    let trials = a.trials.get();
    let zeros = WeightVector::zeros();
    let mut rng = substream(a.seed, "theta");
    let mut sampled: Vec<Vec<f64>> = Vec::with_capacity(trials);
    let mut uniform: Vec<Vec<f64>> = Vec::with_capacity(trials);
    for t in 0..trials {
        let theta = WeightVector::standard_normal(&mut rng);
        let table = &tables[t % tables.len()];
        sampled.push(table.mass_curve(&theta, k_max));
        // Flat weights make every alignment equally likely; this row is the
        // no-concentration baseline for the same pair.
        uniform.push(table.mass_curve(&zeros, k_max));
    }

    let mut csv = String::from("trial,weights");
    for k in 1..=k_max {
        write!(csv, ",mass_{k}")?;
    }
    csv.push('\n');
    for t in 0..trials {
        push_curve_row(&mut csv, &t.to_string(), "sampled", &sampled[t])?;
        push_curve_row(&mut csv, &t.to_string(), "uniform", &uniform[t])?;
    }
    push_curve_row(&mut csv, "median", "sampled", &median_curve(&sampled))?;
    push_curve_row(&mut csv, "median", "uniform", &median_curve(&uniform))?;
    write_file(&a.out, csv.as_bytes())?;
    writeln!(out, "wrote {} ({} pairs kept)", a.out.display(), kept.len())?;
    Ok(())
}

fn push_curve_row(csv: &mut String, trial: &str, kind: &str, curve: &[f64]) -> Result<()> {
    write!(csv, "{trial},{kind}")?;
    for mass in curve {
        write!(csv, ",{mass:.12e}")?;
    }
    csv.push('\n');
    Ok(())
}

/// Per-position median across curves; even counts average the two middles.
fn median_curve(rows: &[Vec<f64>]) -> Vec<f64> {
    let len = rows.first().map_or(0, Vec::len);
    (0..len)
        .map(|k| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            col.sort_by(f64::total_cmp);
            let mid = col.len() / 2;
            if col.len() % 2 == 1 {
                col[mid]
            } else {
                0.5 * (col[mid - 1] + col[mid])
            }
        })
        .collect()
}

fn cmd_make_noise<W: Write>(a: MakeNoiseArgs, out: &mut W) -> Result<()> {
    let corpus = load_parallel(&a.source, &a.target)?;
    let spec = NoiseSpec::new(a.strategy, a.rate, a.seed)?;
    let noisy = make_noisy_corpus(&corpus, &spec)?;
    save_parallel(&noisy, &a.out_source, &a.out_target)?;
    writeln!(out, "wrote {}", a.out_source.display())?;
    writeln!(out, "wrote {}", a.out_target.display())?;
    Ok(())
}
