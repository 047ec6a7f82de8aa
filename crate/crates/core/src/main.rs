use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use interval_entropy::entropy::{Limits, DEFAULT_MAX_SEGMENTS};
use interval_entropy::network::{self, GateProfile};
use interval_entropy::rational::parse_rational;
use interval_entropy::report::{self, EntropySource, NetDomain};
use interval_entropy::Error;

#[derive(Parser)]
#[command(name = "interval-entropy", version, about = "Entropy brackets, periods and network bounds for piecewise-linear interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Largest iterate examined.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    kmax: u64,
    /// Segment ceiling for any single iterate.
    #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_segments: u64,
    /// Interval `a,b` on which networks are extracted and clamped.
    #[arg(long, value_parser = parse_domain, default_value = "0,1")]
    domain: Domain,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn limits(&self) -> Limits {
        Limits::with_max_segments(self.max_segments as usize)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket the entropy of a map, network file or catalog map.
    Analyze {
        input: String,
        #[command(flatten)]
        common: Common,
        /// Also list minimal periods up to this bound.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        periods: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Include wall-clock timings (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Compare a network's measured laps and entropy with its structural bounds.
    BoundCheck {
        #[arg(required_unless_present = "random_net", conflicts_with = "random_net")]
        network: Option<PathBuf>,
        /// Generate a random ReLU network with `l,m` (depth, width).
        #[arg(long, value_parser = parse_shape)]
        random_net: Option<(usize, usize)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum width for a depth-l network to approximate a target.
    WidthCert {
        #[arg(long, required_unless_present = "h", conflicts_with = "h")]
        target: Option<String>,
        /// Entropy in bits, instead of a target.
        #[arg(long, allow_negative_numbers = true)]
        h: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        l: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// `relu`, `max:N` or `t,d1,d2`.
        #[arg(long, default_value = "relu", value_parser = parse_profile)]
        gate: GateProfile,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal periods and Sharkovsky consistency.
    Periods {
        input: String,
        /// Largest period searched.
        #[arg(long = "periods", default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        up_to: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Write CSV data for plots into a directory.
    ExportPlot {
        #[arg(required_unless_present = "tent_sweep")]
        input: Option<String>,
        /// Sweep tent maps over a grid of slopes instead.
        #[arg(long)]
        tent_sweep: bool,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        kmax: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS as u64, value_parser = clap::value_parser!(u64).range(1..))]
        max_segments: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone)]
struct Domain(NetDomain);

fn parse_domain(s: &str) -> Result<Domain, String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a = parse_rational(a.trim()).map_err(|e| e.to_string())?;
    let b = parse_rational(b.trim()).map_err(|e| e.to_string())?;
    if a >= b {
        return Err("need a < b".into());
    }
    Ok(Domain(NetDomain { a, b }))
}

fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (l, m) = s.split_once(',').ok_or("expected l,m")?;
    let l: usize = l.trim().parse().map_err(|e| format!("{e}"))?;
    let m: usize = m.trim().parse().map_err(|e| format!("{e}"))?;
    if l == 0 || m == 0 {
        return Err("l and m must be positive".into());
    }
    Ok((l, m))
}

fn parse_profile(s: &str) -> Result<GateProfile, String> {
    if s == "relu" {
        return Ok(GateProfile::RELU);
    }
    if let Some(n) = s.strip_prefix("max:") {
        let n: u64 = n.parse().map_err(|e| format!("{e}"))?;
        if n == 0 {
            return Err("max gate arity must be positive".into());
        }
        return Ok(GateProfile::max_gate(n));
    }
    let parts: Vec<u64> = s.split(',').map(|p| p.trim().parse::<u64>()).collect::<Result<_, _>>().map_err(|e| format!("{e}"))?;
    match parts[..] {
        [t, d1, d2] => GateProfile::new(t, d1, d2).map_err(|e| e.to_string()),
        _ => Err("expected relu, max:N or t,d1,d2".into()),
    }
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status(resource_limited: bool, notices: &[String]) -> u8 {
    for n in notices {
        eprintln!("note: {n}");
    }
    if resource_limited {
        report::EXIT_RESOURCE as u8
    } else {
        0
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Analyze { input, common, periods, format, timings } => {
            let limits = common.limits();
            let input = report::load_input(&input, &common.domain.0, limits)?;
            let opts = report::AnalyzeOptions {
                k_max: common.kmax as usize,
                periods: periods.map(|p| p as usize),
                limits,
                timings,
            };
            let r = report::cmd_analyze(&input, &opts)?;
            match format {
                Format::Json => emit(&common.out, &report::to_json(&r))?,
                Format::Csv => {
                    let rows = r.bracket.as_ref().map(|b| b.evidence.as_slice()).unwrap_or(&[]);
                    emit(&common.out, &report::evidence_csv(rows))?
                }
            }
            Ok(status(r.resource_limited, &r.notices))
        }
        Command::BoundCheck { network: path, random_net, seed, common } => {
            let net = match (path, random_net) {
                (Some(p), _) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| Error::MalformedInput(format!("{}: {e}", p.display())))?;
                    network::parse_network(&text)?
                }
                (None, Some((l, m))) => network::random_relu_network(l, m, seed),
                (None, None) => unreachable!("clap requires one source"),
            };
            let r = report::cmd_bound_check(&net, &common.domain.0, common.kmax as usize, common.limits())?;
            emit(&common.out, &report::to_json(&r))?;
            let code = status(!r.notices.is_empty(), &r.notices);
            if !r.bound_satisfied {
                eprintln!("bound violated");
                return Ok(report::EXIT_BOUND_VIOLATION as u8);
            }
            Ok(code)
        }
        Command::WidthCert { target, h, l, k, gate, common } => {
            let limits = common.limits();
            let loaded;
            let source = match (h, target) {
                (Some(h), _) => EntropySource::Given(h),
                (None, Some(t)) => {
                    loaded = report::load_input(&t, &common.domain.0, limits)?;
                    EntropySource::Target { input: &loaded, k_max: common.kmax as usize, limits }
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let c = report::cmd_width_cert(source, l as usize, gate, k as usize)?;
            emit(&common.out, &report::to_json(&c))?;
            Ok(0)
        }
        Command::Periods { input, up_to, common } => {
            let limits = common.limits();
            let input = report::load_input(&input, &common.domain.0, limits)?;
            let p = report::cmd_periods(&input, up_to as usize, limits)?;
            emit(&common.out, &report::to_json(&p))?;
            let notices: Vec<String> = p.set.truncated.iter().map(|e| format!("periods: {e}")).collect();
            Ok(status(!notices.is_empty(), &notices))
        }
        Command::ExportPlot { input, tent_sweep, kmax, max_segments, out } => {
            let limits = Limits::with_max_segments(max_segments as usize);
            let export = if tent_sweep {
                report::cmd_export_sweep(&report::default_sweep_alphas(), kmax as usize, limits)?
            } else {
                let input = report::load_input(input.as_deref().unwrap(), &NetDomain::default(), limits)?;
                report::cmd_export_plot(&input, kmax as usize, limits)?
            };
            std::fs::create_dir_all(&out)?;
            for (name, text) in &export.files {
                let path = out.join(name);
                std::fs::write(&path, text)?;
                println!("{}", path.display());
            }
            Ok(status(export.resource_limited, &export.notices))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(report::EXIT_FLAGS as u8),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(report::exit_code(&e) as u8)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
