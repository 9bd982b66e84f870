//! Frames, erasure channels and the experiment runner comparing the
//! low-delay decoder against the baseline on the same received streams.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convcode::{encode, PolyGenerator};
use crate::decoder::{DecodeReport, Decoder, DecoderConfig, ReceivedStream, SymbolStatus};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::rng::SplitMix64;
use crate::sysrep::{membership_check, StateSpace};

/// A message `m_0..m_γ` and its codeword `v_0..v_{γ+μ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub n: usize,
    pub k: usize,
    pub gamma: usize,
    pub message: Vec<Vec<Fe>>,
    pub blocks: Vec<Vec<Fe>>,
}

impl Frame {
    pub fn encode(g: &PolyGenerator, message: Vec<Vec<Fe>>) -> Result<Self> {
        let blocks = encode(g, &message)?;
        Ok(Self {
            n: g.n(),
            k: g.k(),
            gamma: message.len() - 1,
            message,
            blocks,
        })
    }

    /// Uniformly random message of `γ + 1` blocks.
    pub fn random(g: &PolyGenerator, gamma: usize, rng: &mut SplitMix64) -> Result<Self> {
        let f = g.field();
        let message = (0..=gamma).map(|_| (0..g.k()).map(|_| f.random(rng)).collect()).collect();
        Self::encode(g, message)
    }

    pub fn symbol_count(&self) -> usize {
        self.blocks.len() * self.n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    /// Independent erasures; inputs use `p_erase_u` when given.
    Iid { p_erase: f64, p_erase_u: Option<f64> },
    /// Gilbert-Elliott: starts good, good never erases.
    Burst { p_good_bad: f64, p_bad_good: f64, p_erase_bad: f64 },
    /// A fixed mask, `true` = erased.
    Pattern { mask: Vec<Vec<bool>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub channel: Channel,
    pub seed: u64,
}

impl ChannelModel {
    pub fn iid(p_erase: f64, seed: u64) -> Self {
        Self {
            channel: Channel::Iid { p_erase, p_erase_u: None },
            seed,
        }
    }

    pub fn pattern(mask: Vec<Vec<bool>>) -> Self {
        Self {
            channel: Channel::Pattern { mask },
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs: Vec<f64> = match &self.channel {
            Channel::Iid { p_erase, p_erase_u } => std::iter::once(*p_erase).chain(*p_erase_u).collect(),
            Channel::Burst {
                p_good_bad,
                p_bad_good,
                p_erase_bad,
            } => vec![*p_good_bad, *p_bad_good, *p_erase_bad],
            Channel::Pattern { .. } => Vec::new(),
        };
        match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            Some(p) => Err(Error::InvalidChannel(format!("probability {p} outside [0, 1]"))),
            None => Ok(()),
        }
    }

    /// Erasure mask for `blocks` blocks of `n` symbols, `k` of them inputs.
    pub fn mask(&self, blocks: usize, n: usize, k: usize) -> Result<Vec<Vec<bool>>> {
        self.validate()?;
        let mut rng = SplitMix64::new(self.seed);
        match &self.channel {
            Channel::Iid { p_erase, p_erase_u } => Ok((0..blocks)
                .map(|_| {
                    (0..n)
                        .map(|c| rng.bernoulli(if c >= n - k { p_erase_u.unwrap_or(*p_erase) } else { *p_erase }))
                        .collect()
                })
                .collect()),
            Channel::Burst {
                p_good_bad,
                p_bad_good,
                p_erase_bad,
            } => {
                let mut bad = false;
                Ok((0..blocks)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                bad = if bad { !rng.bernoulli(*p_bad_good) } else { rng.bernoulli(*p_good_bad) };
                                bad && rng.bernoulli(*p_erase_bad)
                            })
                            .collect()
                    })
                    .collect())
            }
            Channel::Pattern { mask } => {
                if mask.len() != blocks || mask.iter().any(|b| b.len() != n) {
                    return Err(Error::Pattern(format!(
                        "mask is {} blocks of {:?} symbols, frame is {blocks} blocks of {n}",
                        mask.len(),
                        mask.iter().map(Vec::len).collect::<Vec<_>>()
                    )));
                }
                Ok(mask.clone())
            }
        }
    }
}

pub fn apply_channel(frame: &Frame, model: &ChannelModel) -> Result<ReceivedStream> {
    let mask = model.mask(frame.blocks.len(), frame.n, frame.k)?;
    ReceivedStream::masked(frame.n, frame.k, frame.gamma, &frame.blocks, &mask)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub gamma: usize,
    pub trials: usize,
    pub delay: usize,
    pub seed: u64,
}

/// One decoder's outcome on one trial.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderTrial {
    pub lost: usize,
    pub recovered: usize,
    pub delay_sum: i64,
    pub max_delay: Option<i64>,
    pub negative_delay: usize,
    pub mults: u64,
    pub termination_used: bool,
    #[serde(skip)]
    pub histogram: BTreeMap<i64, usize>,
}

impl DecoderTrial {
    fn from_report(r: &DecodeReport) -> Self {
        let delays: Vec<i64> = r.recovered().map(|(_, _, d)| d).collect();
        let mut histogram = BTreeMap::new();
        for &d in &delays {
            *histogram.entry(d).or_insert(0) += 1;
        }
        Self {
            lost: r.lost_count(),
            recovered: delays.len(),
            delay_sum: delays.iter().sum(),
            max_delay: delays.iter().copied().max(),
            negative_delay: delays.iter().filter(|&&d| d < 0).count(),
            mults: r.mults,
            termination_used: r.termination_used,
            histogram,
        }
    }

    pub fn mean_delay(&self) -> Option<f64> {
        (self.recovered > 0).then(|| self.delay_sum as f64 / self.recovered as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub erasures: usize,
    pub low_delay: DecoderTrial,
    pub baseline: DecoderTrial,
    /// Symbols recovered by both decoders and the summed delays of each.
    pub common: usize,
    pub common_delay_low: i64,
    pub common_delay_baseline: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub lost: usize,
    pub recovered: usize,
    pub delay_sum: i64,
    pub mean_delay: Option<f64>,
    pub max_delay: Option<i64>,
    pub negative_delay: usize,
    pub mults: u64,
    pub mean_mults: f64,
    pub complete_frames: usize,
    pub termination_frames: usize,
    /// Recovered symbols per delay.
    pub delay_histogram: BTreeMap<i64, usize>,
}

impl Aggregate {
    fn add(&mut self, t: &DecoderTrial) {
        self.lost += t.lost;
        self.recovered += t.recovered;
        self.delay_sum += t.delay_sum;
        self.max_delay = self.max_delay.max(t.max_delay);
        self.negative_delay += t.negative_delay;
        self.mults += t.mults;
        self.complete_frames += (t.lost == 0) as usize;
        self.termination_frames += t.termination_used as usize;
        for (&d, &c) in &t.histogram {
            *self.delay_histogram.entry(d).or_insert(0) += c;
        }
    }

    fn close(&mut self, trials: usize) {
        self.mean_delay = (self.recovered > 0).then(|| self.delay_sum as f64 / self.recovered as f64);
        self.mean_mults = self.mults as f64 / trials.max(1) as f64;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonDelay {
    pub symbols: usize,
    pub low_delay_mean: Option<f64>,
    pub baseline_mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub config: ExperimentConfig,
    pub channel: Channel,
    pub symbols_per_frame: usize,
    pub erasures: usize,
    pub low_delay: Aggregate,
    pub baseline: Aggregate,
    pub common: CommonDelay,
    pub trials: Vec<TrialRecord>,
}

fn check_sound(report: &DecodeReport, frame: &Frame, trial: usize, seed: u64) -> Result<()> {
    let fail = |detail: String| Error::Soundness { trial, seed, detail };
    for (t, block) in report.symbols.iter().enumerate() {
        for (c, s) in block.iter().enumerate() {
            if *s != SymbolStatus::Lost && report.values[t][c].as_ref() != Some(&frame.blocks[t][c]) {
                return Err(fail(format!("{:?} decoder: symbol ({t}, {c}) differs from the transmitted one", report.decoder)));
            }
        }
    }
    Ok(())
}

fn run_trial(dec: &Decoder, g: &PolyGenerator, model: &ChannelModel, cfg: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let mut rng = SplitMix64::new(seed);
    let frame = Frame::random(g, cfg.gamma, &mut rng)?;
    if !membership_check(dec.system(), &frame.blocks, true) {
        return Err(Error::Integrity("generator and system describe different codes".into()));
    }
    let model = ChannelModel {
        channel: model.channel.clone(),
        seed: rng.next_u64(),
    };
    let stream = apply_channel(&frame, &model)?;
    let low = dec.decode(&stream)?;
    let base = dec.baseline(&stream)?;
    check_sound(&low, &frame, trial, seed)?;
    check_sound(&base, &frame, trial, seed)?;
    let erasures = stream.erasure_count();
    for r in [&low, &base] {
        let clean = r.symbols.iter().flatten().filter(|s| **s == SymbolStatus::ReceivedClean).count();
        let recovered = r.recovered().count();
        if clean + recovered + r.lost_count() != frame.symbol_count() || clean + erasures != frame.symbol_count() {
            return Err(Error::Soundness {
                trial,
                seed,
                detail: format!("{:?} decoder does not account for every symbol", r.decoder),
            });
        }
    }
    let (mut common, mut common_low, mut common_base) = (0, 0, 0);
    for (t, block) in low.symbols.iter().enumerate() {
        for c in 0..block.len() {
            if let (SymbolStatus::Recovered { .. }, SymbolStatus::Recovered { .. }) = (&low.symbols[t][c], &base.symbols[t][c]) {
                common += 1;
                common_low += low.delay(t, c).expect("recovered");
                common_base += base.delay(t, c).expect("recovered");
            }
        }
    }
    Ok(TrialRecord {
        trial,
        seed,
        erasures,
        low_delay: DecoderTrial::from_report(&low),
        baseline: DecoderTrial::from_report(&base),
        common,
        common_delay_low: common_low,
        common_delay_baseline: common_base,
    })
}

/// Runs `trials` independent frames through the channel and both decoders,
/// verifying every recovered symbol against the transmitted frame. Trial
/// `t` draws its message and channel seed from `seed + t`.
pub fn run_experiment(sys: &StateSpace, g: &PolyGenerator, model: &ChannelModel, cfg: &ExperimentConfig) -> Result<TrialStats> {
    if cfg.trials == 0 {
        return Err(Error::InvalidChannel("at least one trial is required".into()));
    }
    model.validate()?;
    let horizon = cfg.gamma + g.mu();
    let dec = Decoder::new(sys, DecoderConfig::new(cfg.delay), horizon)?;
    let trials: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(&dec, g, model, cfg, t))
        .collect::<Result<_>>()?;

    let (mut low, mut base) = (Aggregate::default(), Aggregate::default());
    let (mut erasures, mut common, mut common_low, mut common_base) = (0, 0, 0i64, 0i64);
    for t in &trials {
        low.add(&t.low_delay);
        base.add(&t.baseline);
        erasures += t.erasures;
        common += t.common;
        common_low += t.common_delay_low;
        common_base += t.common_delay_baseline;
    }
    low.close(cfg.trials);
    base.close(cfg.trials);
    Ok(TrialStats {
        config: cfg.clone(),
        channel: model.channel.clone(),
        symbols_per_frame: (horizon + 1) * g.n(),
        erasures,
        low_delay: low,
        baseline: base,
        common: CommonDelay {
            symbols: common,
            low_delay_mean: (common > 0).then(|| common_low as f64 / common as f64),
            baseline_mean: (common > 0).then(|| common_base as f64 / common as f64),
        },
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::example_mask;
    use crate::field::Field;
    use crate::sysrep::{construct_example_532, generator_of};

    fn example() -> (StateSpace, PolyGenerator) {
        let sys = construct_example_532(&Field::example_field()).unwrap();
        let g = generator_of(&sys).unwrap();
        (sys, g)
    }

    #[test]
    fn extreme_probabilities() {
        let (_, g) = example();
        let frame = Frame::random(&g, 3, &mut SplitMix64::new(1)).unwrap();
        let clean = apply_channel(&frame, &ChannelModel::iid(0.0, 5)).unwrap();
        assert_eq!(clean.erasure_count(), 0);
        assert_eq!(clean, ReceivedStream::clean(5, 3, 3, &frame.blocks).unwrap());
        let gone = apply_channel(&frame, &ChannelModel::iid(1.0, 5)).unwrap();
        assert_eq!(gone.erasure_count(), frame.symbol_count());
    }

    #[test]
    fn channel_masks() {
        let iid = ChannelModel::iid(0.3, 9);
        assert_eq!(iid.mask(6, 5, 3).unwrap(), iid.mask(6, 5, 3).unwrap());
        assert_ne!(iid.mask(6, 5, 3).unwrap(), ChannelModel::iid(0.3, 10).mask(6, 5, 3).unwrap());
        let pattern = ChannelModel::pattern(example_mask());
        assert_eq!(pattern.mask(5, 5, 3).unwrap(), example_mask());
        assert!(matches!(pattern.mask(6, 5, 3), Err(Error::Pattern(_))));
        assert!(matches!(ChannelModel::iid(1.5, 0).mask(1, 5, 3), Err(Error::InvalidChannel(_))));
        let split = ChannelModel {
            channel: Channel::Iid { p_erase: 1.0, p_erase_u: Some(0.0) },
            seed: 3,
        };
        assert!(split.mask(4, 5, 3).unwrap().iter().all(|b| b == &[true, true, false, false, false]));
        let burst = ChannelModel {
            channel: Channel::Burst { p_good_bad: 0.1, p_bad_good: 0.2, p_erase_bad: 1.0 },
            seed: 3,
        };
        let flat: Vec<bool> = burst.mask(400, 5, 3).unwrap().into_iter().flatten().collect();
        let erased = flat.iter().filter(|&&e| e).count();
        let runs = flat.windows(2).filter(|w| w[1] && !w[0]).count();
        assert!(erased > 400 && erased / runs >= 3, "{erased} erasures in {runs} runs");
    }

    #[test]
    fn clean_experiment() {
        let (sys, g) = example();
        let cfg = ExperimentConfig { gamma: 3, trials: 1, delay: 1, seed: 0 };
        let stats = run_experiment(&sys, &g, &ChannelModel::iid(0.0, 0), &cfg).unwrap();
        assert_eq!(stats.erasures, 0);
        for agg in [&stats.low_delay, &stats.baseline] {
            assert_eq!((agg.recovered, agg.lost, agg.mults, agg.max_delay), (0, 0, 0, None));
        }
    }

    #[test]
    fn experiment_is_sound_and_reproducible() {
        let (sys, g) = example();
        let cfg = ExperimentConfig { gamma: 3, trials: 40, delay: 1, seed: 77 };
        let model = ChannelModel::iid(0.15, 0);
        let a = run_experiment(&sys, &g, &model, &cfg).unwrap();
        let b = run_experiment(&sys, &g, &model, &cfg).unwrap();
        assert_eq!(a, b);
        let per_trial: usize = a.trials.iter().map(|t| t.low_delay.recovered + t.low_delay.lost).sum();
        assert_eq!(per_trial, a.erasures);
        assert_eq!(a.low_delay.delay_histogram.values().sum::<usize>(), a.low_delay.recovered);
        assert!(a.erasures > 0 && a.low_delay.recovered > 0);
    }

    #[test]
    fn foreign_generator_is_rejected() {
        let (sys, _) = example();
        let f = Field::example_field();
        let other = crate::convcode::random_generator(&f, 5, 3, &[1, 1, 0], &mut SplitMix64::new(2)).unwrap();
        let cfg = ExperimentConfig { gamma: 3, trials: 2, delay: 1, seed: 0 };
        assert!(matches!(run_experiment(&sys, &other, &ChannelModel::iid(0.1, 0), &cfg), Err(Error::Integrity(_))));
    }
}
