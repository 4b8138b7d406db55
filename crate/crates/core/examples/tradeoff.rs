//! Trains desk-scale models on the synthetic tasks and prints the
//! quality/latency numbers for every agent, plus the chunk-training effect.
//!
//! `cargo run --release -p simulmt-core --example tradeoff -- copy`
//!
//! `EPOCHS`, `DECAY_AFTER`, `HIDDEN` and `BATCH` override the desk configuration.

use std::time::Instant;

use simulmt::agents::{tune_static_rw, Policy};
use simulmt::metrics::evaluate_agent;
use simulmt::transforms::{chunk_corpus, gen_synthetic, SynthTask};
use simulmt::{Checkpoint, Error, Search, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let task: SynthTask = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(SynthTask::Copy);
    let data = gen_synthetic(task, 2000, 20, 4, 8, 1)?;
    let test = gen_synthetic(task, 200, 20, 4, 8, 2)?;
    let env = |k: &str| std::env::var(k).ok().and_then(|v| v.parse::<usize>().ok());
    let mut cfg = TrainConfig::desk();
    cfg.epochs = env("EPOCHS").unwrap_or(cfg.epochs);
    cfg.start_decay_after = env("DECAY_AFTER").unwrap_or(cfg.start_decay_after);
    cfg.hidden_size = env("HIDDEN").unwrap_or(cfg.hidden_size);
    cfg.batch_size = env("BATCH").unwrap_or(cfg.batch_size);
    cfg.embed_size = cfg.hidden_size;
    let start = Instant::now();
    let (ckpt, reports) = Checkpoint::train(&data.src, &data.tgt, &cfg, |_| {})?;
    println!(
        "{task}: trained in {:.1}s, final loss {:.4}",
        start.elapsed().as_secs_f64(),
        reports.last().map_or(f64::NAN, |r| r.mean_loss)
    );
    let policies = ["wue", "wiw", "wid", "static:1,1", "static:2,1", "static:3,1", "chunk:4"];
    for p in policies {
        let r = evaluate_agent(&ckpt, p.parse()?, &test.src, &test.tgt, Search::Greedy)?;
        println!("{p:12} BLEU {:6.2}  AP {:.4}", 100.0 * r.bleu, r.ap.unwrap_or(f64::NAN));
    }
    let ids: Vec<Vec<u32>> = test.src.iter().map(|s| ckpt.vocab_src.encode(s)).collect();
    let tuned = tune_static_rw(
        &ckpt.params,
        &ids,
        &test.tgt,
        &[1, 2, 3, 4],
        &[1, 2, 3],
        0.75,
        Search::Greedy,
        |x| ckpt.vocab_tgt.decode(x),
    );
    match tuned {
        Ok(t) => println!(
            "tuned S={} RW={} BLEU {:.2} AP {:.4}",
            t.best.s,
            t.best.rw,
            100.0 * t.best.bleu,
            t.best.ap.unwrap_or(f64::NAN)
        ),
        Err(Error::NoFeasibleAgent { grid, .. }) => {
            let min_ap = grid.iter().filter_map(|g| g.ap).fold(f64::INFINITY, f64::min);
            println!("no static agent under AP 0.75 (lowest grid AP {min_ap:.4})");
        }
        Err(e) => return Err(e.into()),
    }

    let chunks = chunk_corpus(&data.src, &data.tgt, &data.align, 4)?;
    let (src, tgt): (Vec<_>, Vec<_>) = chunks.into_iter().map(|c| (c.src, c.tgt)).unzip();
    let (tuned, _) = ckpt.fine_tune(&src, &tgt, &cfg.fine_tuning(), |_| {})?;
    let chunk = Policy::Chunk(4);
    let before = evaluate_agent(&ckpt, chunk, &test.src, &test.tgt, Search::Greedy)?.bleu;
    let after = evaluate_agent(&tuned, chunk, &test.src, &test.tgt, Search::Greedy)?.bleu;
    println!(
        "chunk:4 BLEU before {:.2} after chunk fine-tuning {:.2}",
        100.0 * before,
        100.0 * after
    );
    Ok(())
}
