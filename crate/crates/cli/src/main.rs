use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use isodecode::formats::utf8;
use isodecode_cli::{
    channel_model, cmd_decode, cmd_encode, cmd_erase, cmd_gen_example, cmd_inspect, cmd_simulate, cmd_verify_example,
    Output,
};

#[derive(Parser)]
#[command(name = "isodecode", version, about = "Low-delay erasure decoding of convolutional codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ChannelArgs {
    /// Per-symbol erasure probability.
    #[arg(long)]
    p_erase: Option<f64>,
    /// Erasure probability for input symbols (defaults to --p-erase).
    #[arg(long, requires = "p_erase")]
    p_erase_u: Option<f64>,
    /// Gilbert-Elliott channel: good-to-bad, bad-to-good, erasure in bad.
    #[arg(long, value_name = "GB,BG,E")]
    burst: Option<String>,
    /// Mask file (`*` erased, `.` received).
    #[arg(long)]
    pattern: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the (5,3,2) example code spec.
    GenExample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a message file (or a random message) into a frame.
    Encode {
        spec: PathBuf,
        message: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        gamma: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Erase symbols of a stream through a channel.
    Erase {
        stream: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a received stream.
    Decode {
        spec: PathBuf,
        stream: PathBuf,
        #[arg(long)]
        delay: Option<usize>,
        /// Use the big-window baseline decoder.
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON decode report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run random frames through a channel and both decoders.
    Simulate {
        spec: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        gamma: usize,
        #[arg(long)]
        delay: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the example code and check the decoding narrative.
    VerifyExample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print code profile and decoder-quality properties.
    Inspect {
        spec: PathBuf,
        #[arg(long)]
        delay: Option<usize>,
        #[arg(long, default_value_t = 3)]
        gamma: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(utf8(&bytes).with_context(|| path.display().to_string())?.to_string())
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn channel(args: &ChannelArgs, seed: u64) -> Result<isodecode::ChannelModel> {
    let pattern = args.pattern.as_deref().map(read).transpose()?;
    channel_model(args.p_erase, args.p_erase_u, args.burst.as_deref(), pattern.as_deref(), seed)
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>, Option<PathBuf>)> {
    Ok(match cli.cmd {
        Cmd::GenExample { out } => (cmd_gen_example()?, out, None),
        Cmd::Encode {
            spec,
            message,
            seed,
            gamma,
            out,
        } => {
            let msg = message.as_deref().map(read).transpose()?;
            (cmd_encode(&read(&spec)?, msg.as_deref(), seed, gamma)?, out, None)
        }
        Cmd::Erase {
            stream,
            channel: ch,
            seed,
            out,
        } => (cmd_erase(&read(&stream)?, &channel(&ch, seed)?)?, out, None),
        Cmd::Decode {
            spec,
            stream,
            delay,
            baseline,
            out,
            report,
        } => (cmd_decode(&read(&spec)?, &read(&stream)?, delay, baseline)?, out, report),
        Cmd::Simulate {
            spec,
            channel: ch,
            trials,
            gamma,
            delay,
            seed,
            out,
        } => (cmd_simulate(&read(&spec)?, &channel(&ch, seed)?, trials, gamma, delay, seed)?, out, None),
        Cmd::VerifyExample { out } => (cmd_verify_example()?, out, None),
        Cmd::Inspect { spec, delay, gamma, out } => (cmd_inspect(&read(&spec)?, delay, gamma)?, out, None),
    })
}

fn main() -> ExitCode {
    let result = run(Cli::parse()).and_then(|(output, out, report)| {
        emit(out.as_deref(), &output.artifact)?;
        if let (Some(path), Some(body)) = (report, &output.report) {
            emit(Some(&path), body)?;
        }
        eprintln!("{}", output.summary);
        Ok(output.success)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
