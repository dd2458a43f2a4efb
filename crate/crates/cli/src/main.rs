//! `qca`: check, scan, evolve and certify finite cyclic quantum cellular automata.
//!
//! Exit codes: 0 success / true, 1 computed false, 2 usage error,
//! 3 resource or budget error.

mod args;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qca::partitioned::{
    certify_with_budget, compose_rule, controlled_xor_construction, rotation_gate,
    watrous_partition, LocalGate,
};
use qca::quantum::{basis_state, evolve, lift_rule, QuantumRule};
use qca::reversibility::{check_bijective_with_budget, permutation_profile_with_budget};
use qca::rulescan::{
    conjecture_eval, export_report, format_table, scan, ConjectureOptions, ConjectureStatus,
    ReportFormat, ScanRequest,
};
use qca::{
    decode_config, spacetime_trace, ConfigIndex, Error, LatticeSpec, Order, RuleTable,
    DEFAULT_BUDGET, DEFAULT_DENSE_CAP, DEFAULT_TOLERANCE,
};

/// A failed invocation: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn usage_from(e: Error) -> Self {
        Self::usage(e.to_string())
    }

    fn resource(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::DenseCapExceeded { .. } => 3,
            Error::NotBijective => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

#[derive(Parser)]
#[command(name = "qca", version, about = "Finite cyclic quantum cellular automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a rule forms a QCA on a ring of the given size.
    Check {
        #[command(flatten)]
        rule: RuleSource,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Scan a grid of sizes and elementary rules.
    Scan {
        /// Sizes, e.g. `3..22`.
        #[arg(long, value_parser = args::parse_range::<usize>)]
        sizes: (usize, usize),
        /// Rule numbers, e.g. `128..255`.
        #[arg(long, value_parser = args::parse_range::<u8>, default_value = "128..255")]
        rules: (u8, u8),
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        /// Zero all timing fields for byte-stable output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evolve a configuration, classically or as a quantum state.
    Evolve {
        #[command(flatten)]
        rule: EvolveSource,
        #[command(flatten)]
        params: ConstructionParams,
        #[arg(long)]
        size: Option<usize>,
        /// `1`, `0b1011`, `cells:0,2,1` or a decimal index (`idx:k`).
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        quantum: bool,
        #[arg(long, value_enum, default_value_t = RenderFormat::Ascii)]
        format: RenderFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        dense_cap: u64,
    },
    /// Order and cycle structure of a bijective global map.
    Order {
        #[command(flatten)]
        rule: RuleSource,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Certificate for one of the built-in `g ∘ e` constructions.
    Partitioned {
        #[arg(value_enum)]
        name: Construction,
        #[command(flatten)]
        params: ConstructionParams,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long)]
        budget: Option<u64>,
        /// Also print the composed rule table.
        #[arg(long)]
        show_rule: bool,
    },
    /// Compare computed forming sets with the conjectured residue-class table.
    Conjecture {
        #[arg(long, value_parser = args::parse_range::<usize>)]
        sizes: (usize, usize),
        /// Decide only affine rules, via GF(2) rank; others stay undecided.
        #[arg(long)]
        affine_only: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RuleSource {
    /// Elementary rule number.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=255))]
    rule: Option<u32>,
    /// Rule table file: alphabet size then s^3 outputs.
    #[arg(long)]
    rule_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EvolveSource {
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=255))]
    rule: Option<u32>,
    #[arg(long)]
    rule_file: Option<PathBuf>,
    /// Built-in construction.
    #[arg(long, value_enum)]
    partitioned: Option<Construction>,
}

#[derive(Args)]
struct ConstructionParams {
    /// Rotation angle in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Classical rule `e` under the rotation gate.
    #[arg(long, default_value_t = 204, value_parser = clap::value_parser!(u32).range(0..=255))]
    base_rule: u32,
    /// Part sizes `L,M,R` for the partition shuffle.
    #[arg(long, default_value = "2,2,2")]
    dims: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Watrous,
    Rotation,
    Cxor,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ascii,
    Pgm,
    Amps,
}

fn budget_of(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("QCA_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("QCA_BUDGET must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn load_rule(source: &RuleSource) -> Result<(RuleTable, String), Failure> {
    match (&source.rule, &source.rule_file) {
        (Some(r), _) => Ok((RuleTable::elementary(*r)?, format!("rule {r}"))),
        (None, Some(path)) => Ok((args::read_rule_file(path)?, path.display().to_string())),
        (None, None) => Err(Failure::usage("a rule is required")),
    }
}

fn construction(name: Construction, params: &ConstructionParams) -> Result<(RuleTable, LocalGate), Failure> {
    match name {
        Construction::Watrous => {
            let dims: Vec<u32> = params
                .dims
                .split(',')
                .map(|d| d.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::usage(format!("bad --dims `{}`", params.dims)))?;
            let [l, m, r] = dims[..] else {
                return Err(Failure::usage("--dims needs three sizes L,M,R"));
            };
            let (e, g, _) = watrous_partition(l, m, r)?;
            Ok((e, g))
        }
        Construction::Rotation => Ok((
            RuleTable::elementary(params.base_rule)?,
            rotation_gate(params.theta)?,
        )),
        Construction::Cxor => Ok(controlled_xor_construction()?),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::resource(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::resource(e.to_string())),
    }
}

fn cells_text(idx: ConfigIndex, spec: &LatticeSpec) -> String {
    decode_config(idx, spec)
        .map(|c| c.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(""))
        .unwrap_or_default()
}

fn cmd_check(source: &RuleSource, size: usize, budget: Option<u64>) -> CmdResult {
    let (rule, label) = load_rule(source)?;
    let spec = LatticeSpec::new(rule.alphabet(), size).map_err(Failure::usage_from)?;
    let verdict = check_bijective_with_budget(&rule, &spec, budget_of(budget)?)?;
    if verdict.bijective {
        println!("{label}, n = {size}: forms QCA");
        return Ok(ExitCode::SUCCESS);
    }
    println!("{label}, n = {size}: not QCA");
    if let Some((a, b)) = verdict.collision {
        let image = qca::global_step(&rule, a, &spec)?;
        println!(
            "collision: {a} ({}) and {b} ({}) both map to {image} ({})",
            cells_text(a, &spec),
            cells_text(b, &spec),
            cells_text(image, &spec)
        );
    }
    Ok(ExitCode::from(1))
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    sizes: (usize, usize),
    rules: (u8, u8),
    format: Format,
    out: &Option<PathBuf>,
    jobs: Option<usize>,
    budget: Option<u64>,
    no_timing: bool,
) -> CmdResult {
    let request = ScanRequest {
        budget: budget_of(budget)?,
        jobs,
        timing: !no_timing,
        ..ScanRequest::new(sizes, rules)
    };
    request.validate().map_err(Failure::usage_from)?;
    let report = scan(&request)?;
    let fmt = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    let bytes = export_report(&report, fmt)?;
    let table = format_table(&report);
    emit(out, &bytes)?;
    if out.is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_evolve(
    source: &EvolveSource,
    params: &ConstructionParams,
    size: Option<usize>,
    init: Option<&str>,
    steps: usize,
    quantum: bool,
    format: RenderFormat,
    out: &Option<PathBuf>,
    dense_cap: u64,
) -> CmdResult {
    let qrule: QuantumRule = match (&source.rule, &source.rule_file, &source.partitioned) {
        (Some(r), _, _) => lift_rule(&RuleTable::elementary(*r)?),
        (_, Some(path), _) => lift_rule(&args::read_rule_file(path)?),
        (_, _, Some(name)) => {
            let (e, g) = construction(*name, params)?;
            compose_rule(&e, &g)?
        }
        _ => return Err(Failure::usage("a rule is required")),
    };
    let (spec, start) = args::parse_init(init.unwrap_or("1"), size, qrule.alphabet())?;

    if !quantum {
        let Some(rule) = qrule.as_classical() else {
            return Err(Failure::usage("this rule is not classical; add --quantum"));
        };
        let rows = spacetime_trace(&rule, start, &spec, steps)?;
        let bytes = match format {
            RenderFormat::Ascii => render::ascii_classical(&rows, &spec).into_bytes(),
            RenderFormat::Pgm => render::pgm_classical(&rows, &spec),
            RenderFormat::Amps => {
                return Err(Failure::usage("--format amps needs --quantum"));
            }
        };
        emit(out, &bytes)?;
        return Ok(ExitCode::SUCCESS);
    }

    if spec.config_count() > dense_cap {
        return Err(Error::DenseCapExceeded {
            dim: spec.config_count(),
            cap: dense_cap,
        }
        .into());
    }
    let states = evolve(&qrule, basis_state(start, &spec)?, steps)?;
    let bytes = match format {
        RenderFormat::Ascii => render::ascii_quantum(&states).into_bytes(),
        RenderFormat::Pgm => render::pgm_quantum(&states),
        RenderFormat::Amps => render::amps(&states).into_bytes(),
    };
    emit(out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_order(source: &RuleSource, size: usize, budget: Option<u64>) -> CmdResult {
    let (rule, label) = load_rule(source)?;
    let spec = LatticeSpec::new(rule.alphabet(), size).map_err(Failure::usage_from)?;
    match permutation_profile_with_budget(&rule, &spec, budget_of(budget)?) {
        Ok(p) => {
            match p.order {
                Order::Finite(k) => println!("order {k}"),
                Order::Overflow => println!("order overflow (> 2^63)"),
            }
            println!("cycles {}", p.cycle_count);
            println!("longest cycle {}", p.longest_cycle);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NotBijective) => Err(Failure {
            code: 1,
            message: format!("{label}, n = {size}: not bijective"),
        }),
        Err(e) => Err(e.into()),
    }
}

fn cmd_partitioned(
    name: Construction,
    params: &ConstructionParams,
    size: usize,
    budget: Option<u64>,
    show_rule: bool,
) -> CmdResult {
    let (e, g) = construction(name, params)?;
    let spec = LatticeSpec::new(e.alphabet(), size).map_err(Failure::usage_from)?;
    let cert = certify_with_budget(&e, &g, &spec, DEFAULT_TOLERANCE, budget_of(budget)?)?;
    println!("alphabet s = {}, n = {size}", e.alphabet());
    println!("(i)  F_e bijective: {}", cert.e_bijective.bijective);
    if let Some((a, b)) = cert.e_bijective.collision {
        println!("     collision: {a} and {b}");
    }
    println!(
        "(ii) lambda unitary: {} (deviation {:e})",
        cert.lambda_unitary, cert.lambda_deviation
    );
    println!("conclusion: {}", if cert.conclusion { "forms QCA" } else { "not certified" });
    if show_rule {
        let f = compose_rule(&e, &g)?;
        let s = e.alphabet() as u8;
        println!("composed rule (left center right -> amplitudes):");
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let v: Vec<String> = f
                        .vector(a, b, c)
                        .iter()
                        .map(|z| format!("{:.6}{:+.6}i", z.re + 0.0, z.im + 0.0))
                        .collect();
                    println!("{a} {b} {c} -> [{}]", v.join(", "));
                }
            }
        }
    }
    Ok(if cert.conclusion {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn join(rules: &[u8]) -> String {
    if rules.is_empty() {
        "-".into()
    } else {
        rules.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
    }
}

fn cmd_conjecture(
    sizes: (usize, usize),
    affine_only: bool,
    jobs: Option<usize>,
    budget: Option<u64>,
) -> CmdResult {
    if sizes.0 < 3 {
        return Err(Failure::usage("sizes must be at least 3"));
    }
    let opts = ConjectureOptions {
        budget: budget_of(budget)?,
        affine_only,
        jobs,
    };
    let report = if affine_only {
        None
    } else {
        let needed = LatticeSpec::binary(sizes.1).map_err(Failure::usage_from)?.config_count();
        if needed > opts.budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: opts.budget,
            }
            .into());
        }
        Some(scan(&ScanRequest {
            budget: opts.budget,
            jobs,
            timing: false,
            ..ScanRequest::new(sizes, (128, 255))
        })?)
    };
    println!("conjectured residue-class table (unproven); rules 128..255");
    println!("{:>3}  {:<5}  {:<42}  {:<42}  status", "n", "class", "expected", "computed");
    let mut mismatch = false;
    for n in sizes.0..=sizes.1 {
        let v = conjecture_eval(n, report.as_ref(), &opts)?;
        mismatch |= v.status == ConjectureStatus::Mismatch;
        let status = match v.status {
            ConjectureStatus::Match => "match".to_string(),
            ConjectureStatus::Mismatch => "MISMATCH".to_string(),
            ConjectureStatus::Uncovered => "uncovered (outside table)".to_string(),
            ConjectureStatus::Partial => format!("partial ({} undecided)", v.undecided_rules.len()),
        };
        println!(
            "{n:>3}  {:<5}  {:<42}  {:<42}  {status}",
            v.residue_class.map_or("-", |c| c.label()),
            join(&v.expected_rules),
            join(&v.computed_rules),
        );
    }
    Ok(if mismatch {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Check { rule, size, budget } => cmd_check(&rule, size, budget),
        Command::Scan {
            sizes,
            rules,
            format,
            out,
            jobs,
            budget,
            no_timing,
        } => cmd_scan(sizes, rules, format, &out, jobs, budget, no_timing),
        Command::Evolve {
            rule,
            params,
            size,
            init,
            steps,
            quantum,
            format,
            out,
            dense_cap,
        } => cmd_evolve(
            &rule,
            &params,
            size,
            init.as_deref(),
            steps,
            quantum,
            format,
            &out,
            dense_cap,
        ),
        Command::Order { rule, size, budget } => cmd_order(&rule, size, budget),
        Command::Partitioned {
            name,
            params,
            size,
            budget,
            show_rule,
        } => cmd_partitioned(name, &params, size, budget, show_rule),
        Command::Conjecture {
            sizes,
            affine_only,
            jobs,
            budget,
        } => cmd_conjecture(sizes, affine_only, jobs, budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
