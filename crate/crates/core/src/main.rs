use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tcq::conformance::{check_soft_gradient_with, run_suite, OracleConfig};
use tcq::entropy::{EntropyContainer, ModelKind, TensorShape};
use tcq::eval::{
    load_tensor_auto, run_compare, run_rd_sweep, write_raw_f32, write_sweep_csv, CompareConfig, RDReport, SourceKind,
    SourceSpec, SweepRow, Tensor, TensorFormat,
};
use tcq::indexing::{decode, encode_method1, encode_method2, Bitstream, Header, Method};
use tcq::{reconstruct, viterbi_quantize, Codebook, Error, Result, TrellisSpec};

#[derive(Parser)]
#[command(name = "tcq", version, about = "Trellis coded quantization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize a tensor file (raw f32 or PGM) into a .tcq bitstream
    Quantize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2)]
        rate: u32,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        method: u8,
        #[arg(long, value_enum, default_value_t = TrellisName::Default4)]
        trellis: TrellisName,
    },
    /// Decode a .tcq file (any method) into a raw f32 tensor
    Dequantize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Arithmetic-code the union indices of a method-1/2 bitstream
    EntropyEncode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "neighbor")]
        model: ModelKind,
        /// Index plane layout C,H,W (default 1,1,N)
        #[arg(long)]
        shape: Option<String>,
    },
    /// Turn an entropy-coded container back into a method-2 bitstream
    EntropyDecode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Paired TCQ vs SQ measurement on one source
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 4)]
        rate: u32,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        method: u8,
        /// Also report the soft-quantization gap at this temperature
        #[arg(long)]
        sigma: Option<f64>,
        /// Entropy-code the index planes with this model
        #[arg(long)]
        entropy: Option<ModelKind>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Rate-distortion sweep written as CSV
    RdSweep {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        rates: Vec<u32>,
        #[arg(long)]
        entropy: Option<ModelKind>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the soft-quantization derivative against finite differences
    SoftquantCheck {
        /// Fixed temperature (random in [0.5, 50] when omitted)
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the oracle suite and print a JSON summary
    Conformance {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        seq_len: usize,
        #[arg(long, default_value_t = 2)]
        max_rate: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TrellisName {
    Default4,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceName {
    Uniform,
    Gaussian,
    Laplacian,
    File,
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, value_enum, default_value_t = SourceName::Uniform)]
    source: SourceName,
    /// Tensor file for `--source file`
    #[arg(long)]
    input: Option<PathBuf>,
    /// Standard deviation (gaussian) or scale (laplacian)
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    #[arg(long, default_value_t = 1 << 20)]
    samples: usize,
    /// Sequence length; 0 with a file source means one sequence per channel
    #[arg(long, default_value_t = 4096)]
    seqlen: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SourceArgs {
    fn spec(&self) -> Result<SourceSpec> {
        let kind = match self.source {
            SourceName::Uniform => SourceKind::Uniform {
                v_min: -1.0,
                v_max: 1.0,
            },
            SourceName::Gaussian => SourceKind::Gaussian { sigma: self.scale },
            SourceName::Laplacian => SourceKind::Laplacian { scale: self.scale },
            SourceName::File => {
                let path = self
                    .input
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("--source file needs --input".into()))?;
                let head = fs::read(&path)?;
                let format = TensorFormat::sniff(&head)
                    .ok_or_else(|| Error::Malformed(format!("{} is neither TNSR nor P5", path.display())))?;
                SourceKind::File { path, format }
            }
        };
        Ok(SourceSpec {
            kind,
            samples: self.samples,
            seq_len: self.seqlen,
            seed: self.seed,
        })
    }
}

fn method_from(m: u8) -> Method {
    if m == 1 {
        Method::Subset
    } else {
        Method::Union
    }
}

fn parse_shape(s: &str) -> Result<TensorShape> {
    let dims = s
        .split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidArgument(format!("shape {s:?} must be C,H,W")))?;
    match dims[..] {
        [c, h, w] => Ok(TensorShape::new(c, h, w)),
        _ => Err(Error::InvalidArgument(format!("shape {s:?} must be C,H,W"))),
    }
}

fn print_report(r: &RDReport) {
    print!(
        "{:<4} R={} mse={:.6e} snr_db={:.4} psnr_db={:.4} header_bits={}",
        r.quantizer, r.rate_bits_per_symbol, r.mse, r.snr_db, r.psnr_db, r.header_overhead_bits
    );
    if let Some(b) = r.entropy_coded_bpp {
        print!(" entropy_bpp={b:.4}");
    }
    if let Some(g) = r.soft_gap_mse {
        print!(" soft_gap_mse={g:.6e}");
    }
    println!(" elapsed_ms={:.1}", r.elapsed_ms);
}

fn run(cli: Cli) -> Result<bool> {
    let t = TrellisSpec::default4();
    match cli.command {
        Command::Quantize {
            input,
            output,
            rate,
            method,
            trellis: TrellisName::Default4,
        } => {
            let tensor = load_tensor_auto(&input)?;
            let cb = Codebook::symmetric(rate)?;
            let qs = viterbi_quantize(&tensor.data, &cb, &t)?;
            let bs = match method_from(method) {
                Method::Subset => encode_method1(&qs, &cb, &t)?,
                _ => encode_method2(&qs, &cb, &t)?,
            };
            fs::write(&output, bs.to_bytes())?;
            println!(
                "{} symbols, R={rate}, method {method}, mse {:.6e}, {} bytes",
                qs.len(),
                qs.distortion / qs.len() as f64,
                bs.to_bytes().len()
            );
        }
        Command::Dequantize { input, output } => {
            let bytes = fs::read(&input)?;
            let header = Header::parse(&bytes)?;
            let cb = Codebook::symmetric(header.rate)?;
            let (qs, shape) = if header.method == Method::Entropy {
                let c = EntropyContainer::from_bytes(&bytes)?;
                (c.decode(&cb, &t)?, c.shape)
            } else {
                let qs = decode(&Bitstream::from_bytes(&bytes)?, &cb, &t)?;
                let n = qs.len();
                (qs, TensorShape::flat(n))
            };
            let values = reconstruct(&qs, &cb, &t)?;
            write_raw_f32(&output, &Tensor::new(shape, values)?)?;
        }
        Command::EntropyEncode {
            input,
            output,
            model,
            shape,
        } => {
            let bs = Bitstream::from_bytes(&fs::read(&input)?)?;
            let cb = Codebook::symmetric(bs.header.rate)?;
            let qs = decode(&bs, &cb, &t)?;
            let shape = match shape {
                Some(s) => parse_shape(&s)?,
                None => TensorShape::flat(qs.len()),
            };
            let c = EntropyContainer::encode(&qs, &cb, &t, shape, model)?;
            let bytes = c.to_bytes();
            fs::write(&output, &bytes)?;
            println!(
                "{} symbols, model {}, payload {} bytes ({:.4} bits/symbol)",
                qs.len(),
                model.name(),
                c.payload.len(),
                8.0 * c.payload.len() as f64 / qs.len() as f64
            );
        }
        Command::EntropyDecode { input, output } => {
            let c = EntropyContainer::from_bytes(&fs::read(&input)?)?;
            let cb = Codebook::symmetric(c.header.rate)?;
            let qs = c.decode(&cb, &t)?;
            fs::write(&output, encode_method2(&qs, &cb, &t)?.to_bytes())?;
        }
        Command::Compare {
            source,
            rate,
            method,
            sigma,
            entropy,
            csv,
        } => {
            let cfg = CompareConfig {
                rate,
                method: method_from(method),
                sigma,
                entropy,
            };
            let (tcq, sq) = run_compare(&source.spec()?, &cfg)?;
            print_report(&tcq);
            print_report(&sq);
            println!("gain_db={:.4}", tcq.snr_db - sq.snr_db);
            if let Some(path) = csv {
                let rows = [SweepRow::from(&tcq), SweepRow::from(&sq)];
                write_sweep_csv(&rows, fs::File::create(path)?)?;
            }
        }
        Command::RdSweep {
            source,
            rates,
            entropy,
            csv,
        } => {
            let base = CompareConfig {
                entropy,
                ..CompareConfig::new(1)
            };
            let rows = run_rd_sweep(&source.spec()?, &rates, &base)?;
            match csv {
                Some(path) => write_sweep_csv(&rows, fs::File::create(path)?)?,
                None => write_sweep_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::SoftquantCheck { sigma, trials, seed } => {
            if let Some(s) = sigma {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidArgument(format!("sigma must be > 0, got {s}")));
                }
            }
            let r = check_soft_gradient_with(trials, seed, sigma)?;
            println!(
                "{} trials, max relative error {:.3e}, {}",
                r.trials,
                r.max_error.unwrap_or(0.0),
                if r.passed { "PASS" } else { "FAIL" }
            );
            if let Some(c) = &r.counterexample {
                println!("counterexample: {c}");
            }
            return Ok(r.passed);
        }
        Command::Conformance {
            trials,
            seq_len,
            max_rate,
            seed,
        } => {
            let cfg = OracleConfig {
                max_sequence_len: seq_len,
                max_rate,
                trials,
                seed: seed.unwrap_or(OracleConfig::default().seed),
            };
            let report = run_suite(&cfg)?;
            let mut out = io::stdout().lock();
            writeln!(out, "{}", report.to_json())?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
