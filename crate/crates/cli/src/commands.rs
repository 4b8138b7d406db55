use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use simulmt::agents::{grid_json, grid_tsv, tune_static_rw};
use simulmt::metrics::evaluate_agent;
use simulmt::model::load_checkpoint;
use simulmt::stream::{decode_offline, render_events, run_policy};
use simulmt::transforms::{addm_corpus, chunk_corpus, gen_synthetic, parse_pharaoh_file, Alignment, SynthTask};
use simulmt::{Checkpoint, Error, Search, TrainConfig};

use crate::args::*;
use crate::io::{corpus_text, read_corpus, read_text, write_atomic, CliError, CliResult, Manifest};

fn search(beam: u64) -> Search {
    Search::with_width(beam as usize)
}

fn load(path: &Path, m: &mut Manifest) -> CliResult<Checkpoint> {
    m.input(path);
    load_checkpoint(path).map_err(|e| match e {
        Error::Io(io) => CliError::Io(path.to_path_buf(), io),
        other => other.into(),
    })
}

fn corpus(path: &Path, m: &mut Manifest) -> CliResult<Vec<Vec<String>>> {
    m.input(path);
    read_corpus(path)
}

type Corpus = Vec<Vec<String>>;

fn parallel(src: &Path, tgt: &Path, m: &mut Manifest) -> CliResult<(Corpus, Corpus)> {
    let (s, t) = (corpus(src, m)?, corpus(tgt, m)?);
    if s.len() != t.len() {
        return Err(Error::InvalidInput(format!(
            "{} has {} lines but {} has {}",
            src.display(),
            s.len(),
            tgt.display(),
            t.len()
        ))
        .into());
    }
    Ok((s, t))
}

fn aligned(a: &AlignedIn, m: &mut Manifest) -> CliResult<(Corpus, Corpus, Vec<Alignment>)> {
    let (s, t) = parallel(&a.src, &a.tgt, m)?;
    m.input(&a.align);
    let al = parse_pharaoh_file(&read_text(&a.align)?)?;
    Ok((s, t, al))
}

fn write_pairs(out: &PairOut, src: &[Vec<String>], tgt: &[Vec<String>], m: &mut Manifest) -> CliResult<()> {
    write_atomic(&out.out_src, corpus_text(src).as_bytes())?;
    write_atomic(&out.out_tgt, corpus_text(tgt).as_bytes())?;
    m.output(&out.out_src);
    m.output(&out.out_tgt);
    Ok(())
}

fn resolve_config(a: &TrainArgs, init: Option<&Checkpoint>) -> CliResult<TrainConfig> {
    let mut cfg = match (a.config, init) {
        (Some(Preset::Paper), _) => TrainConfig::paper(),
        (Some(Preset::Desk), _) | (None, None) => TrainConfig::desk(),
        (None, Some(c)) => c.config.fine_tuning(),
    };
    if let Some(c) = init {
        if a.hidden_size.is_some() || a.embed_size.is_some() || a.max_vocab.is_some() {
            return Err(CliError::Usage(
                "--hidden-size, --embed-size and --max-vocab come from the --init checkpoint".into(),
            ));
        }
        cfg.hidden_size = c.config.hidden_size;
        cfg.embed_size = c.config.embed_size;
        cfg.max_vocab = c.config.max_vocab;
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { cfg.$f = v; })* };
    }
    set!(
        epochs,
        learning_rate,
        decay_rate,
        start_decay_after,
        dropout,
        batch_size,
        clip_norm,
        hidden_size,
        embed_size,
        max_vocab,
        seed
    );
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn train(a: &TrainArgs) -> CliResult<()> {
    let mut m = Manifest::new("train", a);
    let init = a.init.as_deref().map(|p| load(p, &mut m)).transpose()?;
    let cfg = resolve_config(a, init.as_ref())?;
    let (src, tgt) = parallel(&a.src, &a.tgt, &mut m)?;
    let start = Instant::now();
    let report = |r: &simulmt::model::EpochReport| {
        println!(
            "epoch {:3}  lr {:.6}  loss {:.6}  {:.1}s",
            r.epoch,
            r.learning_rate,
            r.mean_loss,
            start.elapsed().as_secs_f64()
        );
    };
    let (ckpt, reports) = match &init {
        Some(base) => base.fine_tune(&src, &tgt, &cfg, report)?,
        None => Checkpoint::train(&src, &tgt, &cfg, report)?,
    };
    write_atomic(&a.out, &ckpt.to_bytes()?)?;
    m.output(&a.out);
    m.seed("train", cfg.seed);
    m.result("config", &cfg);
    m.result("epoch_loss", reports.iter().map(|r| r.mean_loss).collect::<Vec<_>>());
    m.write(a.output.manifest.as_deref(), &a.out)
}

pub fn decode(a: &DecodeArgs) -> CliResult<()> {
    let mut m = Manifest::new("decode", a);
    let ckpt = load(&a.model, &mut m)?;
    let src = corpus(&a.input, &mut m)?;
    let s = search(a.beam);
    let out = src
        .par_iter()
        .map(|line| {
            let ids = ckpt.vocab_src.encode(line);
            Ok(ckpt.vocab_tgt.decode(&decode_offline(&ckpt.params, &ids, s)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    write_atomic(&a.output, corpus_text(&out).as_bytes())?;
    m.output(&a.output);
    m.result("sentences", out.len());
    m.write(a.out.manifest.as_deref(), &a.output)
}

pub fn stream_decode(a: &StreamDecodeArgs) -> CliResult<()> {
    let mut m = Manifest::new("stream-decode", a);
    let ckpt = load(&a.model, &mut m)?;
    let src = corpus(&a.input, &mut m)?;
    let s = search(a.beam);
    let runs = src
        .par_iter()
        .map(|line| run_policy(&ckpt.params, a.agent, &ckpt.vocab_src.encode(line), s))
        .collect::<Result<Vec<_>, Error>>()?;
    let out: Vec<Vec<String>> = runs.iter().map(|r| ckpt.vocab_tgt.decode(&r.translation)).collect();
    write_atomic(&a.output, corpus_text(&out).as_bytes())?;
    m.output(&a.output);
    if let Some(path) = &a.trace_out {
        let log: Vec<String> = runs.iter().map(|r| render_events(&r.events, &ckpt.vocab_tgt)).collect();
        write_atomic(path, log.join("\n").as_bytes())?;
        m.output(path);
    }
    m.result("agent", a.agent.to_string());
    m.result("sentences", out.len());
    m.write(a.out.manifest.as_deref(), &a.output)
}

fn json_sibling(path: &Path) -> PathBuf {
    let j = path.with_extension("json");
    if j == path {
        let mut p = path.as_os_str().to_owned();
        p.push(".json");
        PathBuf::from(p)
    } else {
        j
    }
}

pub fn tune(a: &TuneArgs) -> CliResult<()> {
    if let Some(jobs) = a.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if !(a.ap_max > 0.0 && a.ap_max.is_finite()) {
        return Err(CliError::Usage("--ap-max must be a positive number".into()));
    }
    let mut m = Manifest::new("tune", a);
    let ckpt = load(&a.model, &mut m)?;
    let (src, refs) = parallel(&a.dev_src, &a.dev_ref, &mut m)?;
    let ids: Vec<Vec<u32>> = src.iter().map(|s| ckpt.vocab_src.encode(s)).collect();
    let result = tune_static_rw(
        &ckpt.params,
        &ids,
        &refs,
        &a.s_range.0,
        &a.rw_range.0,
        a.ap_max,
        search(a.beam),
        |t| ckpt.vocab_tgt.decode(t),
    );
    let (grid, best) = match &result {
        Ok(r) => (&r.grid, Some(r.best)),
        Err(Error::NoFeasibleAgent { grid, .. }) => (grid, None),
        Err(_) => return result.map(|_| ()).map_err(Into::into),
    };
    let json_path = json_sibling(&a.grid_out);
    write_atomic(&a.grid_out, grid_tsv(grid).as_bytes())?;
    write_atomic(&json_path, grid_json(grid)?.as_bytes())?;
    m.output(&a.grid_out);
    m.output(&json_path);
    m.result("best", best);
    m.write(a.out.manifest.as_deref(), &a.grid_out)?;
    match best {
        Some(b) => {
            println!("{}", json!({"S": b.s, "RW": b.rw, "BLEU": b.bleu, "AP": b.ap}));
            Ok(())
        }
        None => result.map(|_| ()).map_err(Into::into),
    }
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let mut m = Manifest::new("evaluate", a);
    let ckpt = load(&a.model, &mut m)?;
    let (src, refs) = parallel(&a.src, &a.reference, &mut m)?;
    let r = evaluate_agent(&ckpt, a.agent, &src, &refs, search(a.beam))?;
    let text = serde_json::to_string_pretty(&r).map_err(Error::from)? + "\n";
    write_atomic(&a.output, text.as_bytes())?;
    m.output(&a.output);
    if let Some(p) = &a.sentences_out {
        write_atomic(p, r.sentences_tsv().as_bytes())?;
        m.output(p);
    }
    print!("{text}");
    m.result("bleu", r.bleu);
    m.result("ap", r.ap);
    m.write(a.out.manifest.as_deref(), &a.output)
}

pub fn gen_chunks(a: &GenChunksArgs) -> CliResult<()> {
    let mut m = Manifest::new("gen-chunks", a);
    let (s, t, al) = aligned(&a.input, &mut m)?;
    let pairs = chunk_corpus(&s, &t, &al, a.n as usize)?;
    let (src, tgt): (Vec<_>, Vec<_>) = pairs.into_iter().map(|p| (p.src, p.tgt)).unzip();
    write_pairs(&a.pair, &src, &tgt, &mut m)?;
    println!("{} chunk pairs from {} sentences", src.len(), s.len());
    m.result("pairs", src.len());
    m.write(a.out.manifest.as_deref(), &a.pair.out_src)
}

pub fn gen_addm(a: &GenAddmArgs) -> CliResult<()> {
    let mut m = Manifest::new("gen-addm", a);
    let (s, t, al) = aligned(&a.input, &mut m)?;
    let pairs = addm_corpus(&s, &t, &al, a.n as usize, a.m as usize)?;
    let (src, tgt): (Vec<_>, Vec<_>) = pairs.into_iter().map(|p| (p.src, p.tgt)).unzip();
    write_pairs(&a.pair, &src, &tgt, &mut m)?;
    println!("{} prefix pairs from {} sentences", src.len(), s.len());
    m.result("pairs", src.len());
    m.write(a.out.manifest.as_deref(), &a.pair.out_src)
}

pub fn gen_synth(a: &GenSynthArgs) -> CliResult<()> {
    let mut m = Manifest::new("gen-synth", a);
    let task: SynthTask = a.task.parse()?;
    let c = gen_synthetic(task, a.n, a.vocab, a.len_min, a.len_max, a.seed)?;
    write_pairs(&a.pair, &c.src, &c.tgt, &mut m)?;
    if let Some(p) = &a.out_align {
        let mut text = String::new();
        for al in &c.align {
            text.push_str(&al.to_pharaoh());
            text.push('\n');
        }
        write_atomic(p, text.as_bytes())?;
        m.output(p);
    }
    m.seed("corpus", a.seed);
    m.write(a.out.manifest.as_deref(), &a.pair.out_src)
}
