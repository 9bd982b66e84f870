//! Subcommands of the `isodecode` binary. Each `cmd_*` function takes file
//! contents and returns the artifact it produces; the binary only does I/O.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use isodecode::convcode::{profile, CodeProfile};
use isodecode::decoder::Decoder;
use isodecode::example::{verify_example, ExampleVerification};
use isodecode::formats::{
    parse_frame, parse_mask, parse_message, parse_stream, stream_from_report, to_json, write_frame, write_stream,
    CodeSpec,
};
use isodecode::pattern::DEFAULT_MINOR_BUDGET;
use isodecode::pipeline::{run_experiment, Channel, ChannelModel, ExperimentConfig, Frame};
use isodecode::sysrep::{is_mdp_system, kalman_observable, kalman_reachable, quality_report, QualityReport};
use isodecode::{DecoderConfig, ErasureSymbol, Field, ReceivedStream, SplitMix64};

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    /// The main artifact (a file body).
    pub artifact: String,
    /// Optional JSON report written next to the artifact.
    pub report: Option<String>,
    /// Human-readable lines for the terminal.
    pub summary: String,
    /// Exit status 0 when true.
    pub success: bool,
}

impl Output {
    fn ok(artifact: String, summary: String) -> Self {
        Self {
            artifact,
            report: None,
            summary,
            success: true,
        }
    }
}

/// `p^m` as written in file headers, resolved to the default field of that
/// size. Only used where elements are copied, never multiplied.
pub fn field_from_reference(r: &str) -> Result<Field> {
    let (p, m) = r.split_once('^').with_context(|| format!("bad field reference `{r}`"))?;
    Ok(Field::gf(p.parse()?, m.parse()?)?)
}

fn header_field(text: &str) -> Result<Field> {
    let first = text.lines().next().unwrap_or_default();
    let r = first
        .split_whitespace()
        .find_map(|t| t.strip_prefix("field="))
        .context("stream header lacks `field=`")?;
    field_from_reference(r)
}

/// Builds a channel from command-line options; exactly one of `p_erase`,
/// `burst` (`"good_bad,bad_good,erase"`) and `pattern` must be given.
pub fn channel_model(
    p_erase: Option<f64>,
    p_erase_u: Option<f64>,
    burst: Option<&str>,
    pattern: Option<&str>,
    seed: u64,
) -> Result<ChannelModel> {
    let channel = match (p_erase, burst, pattern) {
        (Some(p), None, None) => Channel::Iid { p_erase: p, p_erase_u },
        (None, Some(b), None) => {
            let v: Vec<f64> = b
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad burst parameters `{b}`"))?;
            let [p_good_bad, p_bad_good, p_erase_bad] = v[..] else {
                bail!("burst needs three probabilities, got {}", v.len());
            };
            Channel::Burst {
                p_good_bad,
                p_bad_good,
                p_erase_bad,
            }
        }
        (None, None, Some(text)) => Channel::Pattern { mask: parse_mask(text)? },
        _ => bail!("give exactly one of --p-erase, --burst, --pattern"),
    };
    let model = ChannelModel { channel, seed };
    model.validate()?;
    Ok(model)
}

pub fn cmd_gen_example() -> Result<Output> {
    let spec = CodeSpec::example()?;
    let summary = format!(
        "({}, {}, {}) code over GF({}), T = {}, L = {}",
        spec.n,
        spec.k,
        spec.delta,
        spec.field.reference(),
        spec.delay.unwrap_or(0),
        spec.big_window()
    );
    Ok(Output::ok(spec.to_text(), summary))
}

/// Encodes a message file, or a random message of `gamma + 1` blocks drawn
/// from `seed` when no message is given.
pub fn cmd_encode(spec_text: &str, message_text: Option<&str>, seed: u64, gamma: usize) -> Result<Output> {
    let spec = CodeSpec::parse(spec_text)?;
    let g = spec.generator()?;
    let frame = match message_text {
        Some(text) => Frame::encode(&g, parse_message(&spec.field, text)?)?,
        None => Frame::random(&g, gamma, &mut SplitMix64::new(seed))?,
    };
    let summary = format!("{} message blocks -> {} code blocks", frame.message.len(), frame.blocks.len());
    Ok(Output::ok(write_frame(&spec.field, frame.n, frame.k, frame.gamma, &frame.blocks), summary))
}

/// Erases symbols of a stream; symbols already erased stay erased.
pub fn cmd_erase(stream_text: &str, model: &ChannelModel) -> Result<Output> {
    let field = header_field(stream_text)?;
    let stream = parse_stream(&field, stream_text)?;
    let mask = model.mask(stream.blocks().len(), stream.n(), stream.k())?;
    let blocks = stream
        .blocks()
        .iter()
        .zip(&mask)
        .map(|(b, m)| b.iter().zip(m).map(|(s, &e)| if e { ErasureSymbol::Erased } else { s.clone() }).collect())
        .collect();
    let out = ReceivedStream::new(stream.n(), stream.k(), stream.gamma(), blocks)?;
    let summary = format!("{} of {} symbols erased", out.erasure_count(), out.blocks().len() * out.n());
    Ok(Output::ok(write_stream(&field, &out), summary))
}

/// Decodes a received stream; the artifact is the decoded stream with `*`
/// for lost symbols and the report is the per-symbol JSON report.
pub fn cmd_decode(spec_text: &str, stream_text: &str, delay: Option<usize>, baseline: bool) -> Result<Output> {
    let spec = CodeSpec::parse(spec_text)?;
    let sys = spec.system()?;
    let stream = parse_stream(&spec.field, stream_text)?;
    let delay = delay.or(spec.delay).unwrap_or_else(|| spec.big_window());
    let dec = Decoder::new(&sys, DecoderConfig::new(delay), stream.horizon())?;
    let report = if baseline { dec.baseline(&stream)? } else { dec.decode(&stream)? };
    let decoded = stream_from_report(&report)?;
    let lost = report.lost_count();
    let max_delay = report.recovered().map(|(_, _, d)| d).max();
    let summary = format!(
        "{} erasures, {} recovered (max delay {}), {} lost, {} multiplications",
        stream.erasure_count(),
        report.recovered().count(),
        max_delay.map_or("-".into(), |d| d.to_string()),
        lost,
        report.mults
    );
    Ok(Output {
        artifact: write_stream(&spec.field, &decoded),
        report: Some(to_json(&report)),
        summary,
        success: lost == 0,
    })
}

pub fn cmd_simulate(
    spec_text: &str,
    model: &ChannelModel,
    trials: usize,
    gamma: usize,
    delay: Option<usize>,
    seed: u64,
) -> Result<Output> {
    let spec = CodeSpec::parse(spec_text)?;
    let sys = spec.system()?;
    let g = spec.generator()?;
    let cfg = ExperimentConfig {
        gamma,
        trials,
        delay: delay.or(spec.delay).unwrap_or_else(|| spec.big_window()),
        seed,
    };
    let stats = run_experiment(&sys, &g, model, &cfg)?;
    let fmt = |m: Option<f64>| m.map_or("-".into(), |m| format!("{m:.4}"));
    let summary = format!(
        "{trials} trials, {} erasures\nlow-delay: {} lost, mean delay {}, {} multiplications\nbaseline:  {} lost, mean delay {}, {} multiplications",
        stats.erasures,
        stats.low_delay.lost,
        fmt(stats.low_delay.mean_delay),
        stats.low_delay.mults,
        stats.baseline.lost,
        fmt(stats.baseline.mean_delay),
        stats.baseline.mults
    );
    Ok(Output::ok(to_json(&stats), summary))
}

pub fn verification_summary(v: &ExampleVerification) -> String {
    let mut lines: Vec<String> = v
        .checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    let status = |t: usize, c: usize| match v.decode.delay(t, c) {
        Some(d) if v.decode.symbols[t][c] != isodecode::SymbolStatus::ReceivedClean => format!("delay {d}"),
        Some(_) => "received".into(),
        None => "lost".into(),
    };
    lines.push(format!(
        "y_0 {}, y_1 {}, u_1[0] {}, y_2 {}, y_4 {}, u_4 {}",
        status(0, 0),
        status(1, 0),
        status(1, 2),
        status(2, 0),
        status(4, 0),
        status(4, 2)
    ));
    lines.push(if v.passed() { "PASS".into() } else { "FAIL".into() });
    lines.join("\n")
}

pub fn cmd_verify_example() -> Result<Output> {
    let v = verify_example(&Field::example_field())?;
    Ok(Output {
        artifact: to_json(&v),
        report: None,
        summary: verification_summary(&v),
        success: v.passed(),
    })
}

#[derive(Serialize)]
struct Inspection {
    profile: CodeProfile,
    states: usize,
    reachable: bool,
    observable: bool,
    mdp_system: Option<bool>,
    quality: QualityReport,
}

pub fn cmd_inspect(spec_text: &str, delay: Option<usize>, gamma: usize) -> Result<Output> {
    let spec = CodeSpec::parse(spec_text)?;
    let sys = spec.system()?;
    let g = spec.generator()?;
    let t = delay.or(spec.delay).unwrap_or_else(|| spec.big_window());
    let inspection = Inspection {
        profile: profile(&g, DEFAULT_MINOR_BUDGET),
        states: sys.s(),
        reachable: kalman_reachable(&sys),
        observable: kalman_observable(&sys),
        mdp_system: is_mdp_system(&sys, DEFAULT_MINOR_BUDGET).ok(),
        quality: quality_report(&sys, t, gamma, DEFAULT_MINOR_BUDGET)?,
    };
    let summary = format!(
        "({}, {}, {}) code, L = {}, {} states, MDP {:?}",
        spec.n, spec.k, spec.delta, inspection.profile.l, inspection.states, inspection.mdp_system
    );
    Ok(Output::ok(to_json(&inspection), summary))
}

/// Reads a frame file written by `encode`; erasures are rejected.
pub fn read_frame(spec: &CodeSpec, text: &str) -> Result<ReceivedStream> {
    Ok(parse_frame(&spec.field, text)?)
}
