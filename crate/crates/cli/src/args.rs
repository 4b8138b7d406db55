use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use simulmt::agents::{parse_range, Policy};
use simulmt::transforms::SynthTask;

#[derive(Parser, Debug)]
#[command(name = "simulmt", version, about = "Simultaneous translation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model, or fine-tune one with --init.
    Train(TrainArgs),
    /// Translate full sentences offline.
    Decode(DecodeArgs),
    /// Translate sentences token by token with a commit agent.
    StreamDecode(StreamDecodeArgs),
    /// Pick STATIC-RW parameters under an AP budget.
    Tune(TuneArgs),
    /// Score an agent: corpus BLEU and average proportion.
    Evaluate(EvaluateArgs),
    /// Split an aligned corpus into chunk training pairs.
    GenChunks(GenChunksArgs),
    /// Expand an aligned corpus into growing-prefix training pairs.
    GenAddm(GenAddmArgs),
    /// Write a synthetic parallel corpus with alignments.
    GenSynth(GenSynthArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 500-dimensional states, batch 64.
    Paper,
    /// 64-dimensional states, batch 16, vocabulary up to 200.
    Desk,
}

/// Records a policy in manifests as `{"kind": ..., parameters}`.
fn flat_policy<S: serde::Serializer>(p: &Policy, ser: S) -> Result<S::Ok, S::Error> {
    match p {
        Policy::Agent(k) => k.serialize(ser),
        Policy::Chunk(n) => serde_json::json!({"kind": "chunk", "n": n}).serialize(ser),
    }
}

fn policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: simulmt::Error| e.to_string())
}

/// A list of positive integers given as `A..B`, `A,B,C` or `N`.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct Range(pub Vec<usize>);

fn range(s: &str) -> Result<Range, String> {
    parse_range(s).map(Range).map_err(|e| e.to_string())
}

fn task(s: &str) -> Result<String, String> {
    s.parse::<SynthTask>().map(|t| t.to_string()).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Serialize)]
pub struct Output {
    /// Where to write the run manifest [default: next to the main output]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Starting configuration; with --init the default is the fine-tuning
    /// schedule of the initial checkpoint.
    #[arg(long, value_enum)]
    pub config: Option<Preset>,
    /// Fine-tune this checkpoint instead of training from scratch.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub decay_rate: Option<f64>,
    #[arg(long)]
    pub start_decay_after: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub embed_size: Option<usize>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Translations, one line per input line.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct StreamDecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// wue, wiw, wid, static:S,RW or chunk:N
    #[arg(long, value_parser = policy)]
    #[serde(serialize_with = "flat_policy")]
    pub agent: Policy,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam: u64,
    /// READ/WRITE event log.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct TuneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dev_src: PathBuf,
    #[arg(long)]
    pub dev_ref: PathBuf,
    /// `A..B` (inclusive), `A,B,C` or `N`
    #[arg(long, default_value = "1..6", value_parser = range)]
    pub s_range: Range,
    #[arg(long, default_value = "1..4", value_parser = range)]
    pub rw_range: Range,
    #[arg(long, default_value_t = 0.75)]
    pub ap_max: f64,
    /// Grid report (TSV); a JSON copy goes next to it.
    #[arg(long)]
    pub grid_out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam: u64,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = policy)]
    #[serde(serialize_with = "flat_policy")]
    pub agent: Policy,
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Result JSON; also printed to standard output.
    #[arg(long)]
    pub output: PathBuf,
    /// Per-sentence TSV (smoothed sentence BLEU, AP).
    #[arg(long)]
    pub sentences_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct PairOut {
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct AlignedIn {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    /// Pharaoh `i-j` alignments, one line per sentence pair.
    #[arg(long)]
    pub align: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GenChunksArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: AlignedIn,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairOut,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct GenAddmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: AlignedIn,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairOut,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct GenSynthArgs {
    /// copy, reverse or shift
    #[arg(long, value_parser = task)]
    pub task: String,
    /// Number of sentence pairs.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub vocab: usize,
    #[arg(long, default_value_t = 4)]
    pub len_min: usize,
    #[arg(long, default_value_t = 8)]
    pub len_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairOut,
    #[arg(long)]
    pub out_align: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: Output,
}
