use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{loss_and_grad, Dropout};
use super::params::Seq2SeqParams;
use crate::error::{invalid, Error, Result};
use crate::numerics::sgd_step;

/// Optimizer and architecture settings.
///
/// `Default` gives the published NMT setup (500-dimensional states, SGD at
/// 1.0 halved per epoch late in training, dropout 0.3, 13 epochs);
/// [`TrainConfig::desk`] shrinks the model for laptop-scale runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub decay_rate: f64,
    /// Decay is applied at the start of every epoch after this one.
    pub start_decay_after: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub hidden_size: usize,
    pub embed_size: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub init_range: f64,
    pub max_vocab: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            decay_rate: 0.5,
            start_decay_after: 8,
            dropout: 0.3,
            epochs: 13,
            hidden_size: 500,
            embed_size: 500,
            batch_size: 64,
            clip_norm: 5.0,
            init_range: 0.1,
            max_vocab: 50_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn paper() -> Self {
        Self::default()
    }

    /// Small model that trains on toy corpora in well under a minute.
    pub fn desk() -> Self {
        Self {
            hidden_size: 64,
            embed_size: 64,
            batch_size: 16,
            max_vocab: 200,
            ..Self::default()
        }
    }

    /// Continued training on new data: 3 epochs at 0.1, no decay.
    pub fn fine_tuning(&self) -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 3,
            start_decay_after: usize::MAX,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(invalid(format!("train config: {m}")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return bad("decay_rate must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.hidden_size == 0 || self.embed_size == 0 || self.batch_size == 0 {
            return bad("sizes must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip_norm must be positive");
        }
        if self.max_vocab < 4 {
            return bad("max_vocab must leave room for the 4 reserved tokens");
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (1-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let decays = epoch.saturating_sub(self.start_decay_after);
        self.learning_rate * self.decay_rate.powi(decays.min(i32::MAX as usize) as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean cross-entropy per target token (including `</s>`).
    pub mean_loss: f64,
}

fn check_corpus(src: &[Vec<u32>], tgt: &[Vec<u32>]) -> Result<()> {
    if src.len() != tgt.len() {
        return Err(invalid(format!(
            "parallel corpora differ in length: {} vs {}",
            src.len(),
            tgt.len()
        )));
    }
    if src.is_empty() {
        return Err(invalid("empty training corpus"));
    }
    Ok(())
}

/// Trains from scratch with parameters drawn from `cfg.seed`.
pub fn train_full(
    src: &[Vec<u32>],
    tgt: &[Vec<u32>],
    src_vocab: usize,
    tgt_vocab: usize,
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<(Seq2SeqParams<f32>, Vec<EpochReport>)> {
    check_corpus(src, tgt)?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = Seq2SeqParams::init(
        src_vocab,
        tgt_vocab,
        cfg.embed_size,
        cfg.hidden_size,
        cfg.init_range,
        &mut rng,
    );
    run_epochs(params, src, tgt, cfg, &mut rng, on_epoch)
}

/// Continues training `params` on new data with the same loop.
pub fn fine_tune(
    params: &Seq2SeqParams<f32>,
    src: &[Vec<u32>],
    tgt: &[Vec<u32>],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<(Seq2SeqParams<f32>, Vec<EpochReport>)> {
    check_corpus(src, tgt)?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9));
    run_epochs(params.clone(), src, tgt, cfg, &mut rng, on_epoch)
}

fn run_epochs(
    mut params: Seq2SeqParams<f32>,
    src: &[Vec<u32>],
    tgt: &[Vec<u32>],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<(Seq2SeqParams<f32>, Vec<EpochReport>)> {
    let usable: Vec<usize> = (0..src.len()).filter(|&i| !src[i].is_empty()).collect();
    if usable.is_empty() {
        return Err(invalid("every training pair has an empty source"));
    }
    let mut grads = params.zeros_like();
    let mut reports = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let lr = cfg.lr_at(epoch);
        let mut order = usable.clone();
        order.shuffle(rng);
        let mut total_loss = 0.0;
        let mut total_tokens = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            grads.tensors_mut().into_iter().for_each(|g| g.fill_zero());
            for &i in batch {
                let dropout = (cfg.dropout > 0.0).then_some(Dropout {
                    rate: cfg.dropout,
                    rng: &mut *rng,
                });
                let loss = loss_and_grad(&params, &src[i], &tgt[i], dropout, &mut grads)?;
                total_loss += loss as f64;
                total_tokens += tgt[i].len() + 1;
            }
            let k = 1.0 / batch.len() as f32;
            grads.tensors_mut().into_iter().for_each(|g| g.scale(k));
            let grad_refs = grads.tensors();
            sgd_step(&mut params.tensors_mut(), &grad_refs, lr, Some(cfg.clip_norm))?;
        }
        if !params.all_finite() {
            return Err(Error::NonFinite(format!("parameters diverged in epoch {epoch}")));
        }
        let report = EpochReport {
            epoch,
            learning_rate: lr,
            mean_loss: total_loss / total_tokens as f64,
        };
        on_epoch(&report);
        reports.push(report);
    }
    Ok((params, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults() {
        let c = TrainConfig::default();
        assert_eq!(
            (c.learning_rate, c.decay_rate, c.dropout, c.epochs),
            (1.0, 0.5, 0.3, 13)
        );
        assert_eq!((c.hidden_size, c.embed_size), (500, 500));
    }

    #[test]
    fn decay_schedule_starts_after_epoch_eight() {
        let c = TrainConfig::default();
        let lrs: Vec<f64> = (1..=13).map(|e| c.lr_at(e)).collect();
        assert!(lrs[..8].iter().all(|&l| l == 1.0));
        assert_eq!(&lrs[8..], &[0.5, 0.25, 0.125, 0.0625, 0.03125]);
    }

    #[test]
    fn fine_tuning_has_no_decay() {
        let c = TrainConfig::desk().fine_tuning();
        assert!((1..=3).all(|e| c.lr_at(e) == 0.1));
    }

    #[test]
    fn zero_lr_keeps_initialization() {
        let src = vec![vec![4, 5], vec![5, 4, 4]];
        let tgt = vec![vec![4], vec![5, 5]];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 1,
            hidden_size: 4,
            embed_size: 3,
            ..TrainConfig::desk()
        };
        let (trained, _) = train_full(&src, &tgt, 6, 6, &cfg, |_| {}).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = Seq2SeqParams::<f32>::init(6, 6, 3, 4, cfg.init_range, &mut rng);
        assert_eq!(trained, init);
    }

    #[test]
    fn zero_epoch_fine_tune_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = Seq2SeqParams::<f32>::init(6, 6, 3, 4, 0.1, &mut rng);
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::desk().fine_tuning()
        };
        let (q, reports) = fine_tune(&p, &[vec![4]], &[vec![5]], &cfg, |_| {}).unwrap();
        assert_eq!(p, q);
        assert!(reports.is_empty());
    }

    #[test]
    fn mismatched_corpora_rejected() {
        let r = train_full(&[vec![4]], &[], 6, 6, &TrainConfig::desk(), |_| {});
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
