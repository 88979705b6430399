//! Commands behind the `qsec` binary.
//!
//! Every command renders into a byte buffer so that output can be compared
//! across runs; [`run`] reports whether a hard failure occurred.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsec_core::distributions::{spike_for_mutual_information, spike_for_variational_distance, ConstraintKind};
use qsec_core::harness::{
    default_campaign, summarize, write_csv, write_json_lines, write_summary_text, write_text, CampaignConfig,
    CampaignSummary, EnsembleRecipe, RecipeKind,
};
use qsec_core::locking::{build_locking_ensemble, locking_report, LockingReport, LockingVariant};
use qsec_core::{criteria_record, ensemble_to_json, parse_ensemble, run_campaign, CriteriaRecord, SearchBudget};

pub const TOOL: &str = "qsec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "qsec", version, about = "Security-criteria lab for classical-quantum key ensembles")]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-bit BB84 locking ensemble: criteria and the known-bit attack.
    LockingDemo(LockingArgs),
    /// Criteria of an ensemble read from a JSON file.
    Criteria(CriteriaArgs),
    /// Randomized checks of the d / chi / I_ac inequalities.
    BoundsSweep(SweepArgs),
    /// Extremal spike distribution under an information or distance budget.
    Extremal(ExtremalArgs),
}

#[derive(Debug, Args)]
pub struct LockingArgs {
    /// as_printed, symmetric_corrected or control.
    #[arg(long, default_value = "symmetric_corrected", value_parser = parse_variant)]
    pub variant: LockingVariant,

    /// Sampled attack rounds per value of k1.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    /// Also write the ensemble file to this path.
    #[arg(long)]
    pub emit_ensemble: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    pub ensemble_file: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// A recipe kind, or `default` for a spread over every kind.
    #[arg(long, default_value = "random_mixed")]
    pub kind: String,

    #[arg(long, default_value_t = 2)]
    pub n: u32,

    #[arg(long, default_value_t = 4)]
    pub dim: usize,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,

    /// Random starts of the accessible-information search.
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,

    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub n: u32,

    /// Entropy-deficit exponent: n - H(P) = 2^-l'.
    #[arg(long = "l-prime", conflicts_with = "l", allow_negative_numbers = true)]
    pub l_prime: Option<f64>,

    /// Distance exponent: v(P, U) = 2^-l.
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,

    /// mutual_information or variational_distance; inferred from the
    /// exponent flag when absent.
    #[arg(long)]
    pub kind: Option<String>,

    /// Include the full distribution (n <= 16).
    #[arg(long)]
    pub with_distribution: bool,
}

fn parse_variant(s: &str) -> Result<LockingVariant, String> {
    s.parse().map_err(|e: qsec_core::Error| e.to_string())
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: Vec<u8>,
    pub hard_failure: bool,
    pub messages: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'a str,
    version: &'a str,
    command_line: &'a [String],
    seed: u64,
    variant: Option<&'a str>,
    report: T,
}

struct Meta<'a> {
    command_line: &'a [String],
    seed: u64,
}

impl Meta<'_> {
    fn json<T: Serialize>(&self, variant: Option<&str>, report: T) -> anyhow::Result<Vec<u8>> {
        let env = Envelope {
            tool: TOOL,
            version: VERSION,
            command_line: self.command_line,
            seed: self.seed,
            variant,
            report,
        };
        let mut out = serde_json::to_vec_pretty(&env)?;
        out.push(b'\n');
        Ok(out)
    }

    fn header(&self, prefix: &str, variant: Option<&str>) -> String {
        let mut s = format!("{prefix}tool {TOOL} {VERSION}\n{prefix}command {}\n{prefix}seed {}\n", self.command_line.join(" "), self.seed);
        if let Some(v) = variant {
            let _ = writeln!(s, "{prefix}variant {v}");
        }
        s
    }
}

/// Runs a parsed command. `command_line` is recorded verbatim in the
/// report.
pub fn run(cli: &Cli, command_line: &[String]) -> anyhow::Result<Outcome> {
    let meta = Meta {
        command_line,
        seed: cli.seed,
    };
    match &cli.command {
        Command::LockingDemo(a) => locking_demo(a, cli.format, &meta),
        Command::Criteria(a) => criteria(a, cli.format, &meta),
        Command::BoundsSweep(a) => bounds_sweep(a, cli.format, &meta),
        Command::Extremal(a) => extremal(a, cli.format, &meta),
    }
}

fn json_only(format: Format, what: &str) -> anyhow::Result<()> {
    if format == Format::Csv {
        bail!("csv output is only available for bounds-sweep; {what} is a nested report (use json or text)");
    }
    Ok(())
}

fn locking_demo(a: &LockingArgs, format: Format, meta: &Meta) -> anyhow::Result<Outcome> {
    json_only(format, "locking-demo")?;
    let le = build_locking_ensemble(a.variant);
    if let Some(path) = &a.emit_ensemble {
        std::fs::write(path, ensemble_to_json(&le.ensemble) + "\n")
            .with_context(|| format!("writing ensemble to {}", path.display()))?;
    }
    let report = locking_report(&le, a.trials, meta.seed)?;
    let violations = report.invariant_violations();
    let label = a.variant.label();
    let output = match format {
        Format::Json => meta.json(Some(label), &report)?,
        _ => render_locking_text(&report, &meta.header("", Some(label))).into_bytes(),
    };
    Ok(Outcome {
        output,
        hard_failure: !violations.is_empty(),
        messages: violations,
    })
}

fn render_locking_text(r: &LockingReport, header: &str) -> String {
    let c = &r.criteria;
    let mut s = header.to_string();
    let _ = writeln!(s, "d {:.12}", c.d);
    if let (Some(j), Some(res)) = (c.d_joint, c.forms_agreement_residual) {
        let _ = writeln!(s, "d_joint {j:.12} (residual {res:.3e})");
    }
    let _ = writeln!(s, "d_prime {:.12}", c.d_prime);
    let _ = writeln!(s, "chi {:.12}", c.chi);
    let per_key: Vec<String> = r.ideal_comparison.per_key.iter().map(|v| format!("{v:.12}")).collect();
    let _ = writeln!(s, "ideal comparison value {:.12} per key [{}]", r.ideal_comparison.value, per_key.join(", "));
    let _ = writeln!(s, "1/2 + ideal comparison value = {:.12}", r.composition);
    for k in &r.kpa {
        let _ = writeln!(
            s,
            "k1 = {}: unlocking success {}/{} = {:.6} (closed form {:.6}); conjugate bases {:.6} (closed form {:.6})",
            k.known_k1,
            k.unlocking.successes,
            k.unlocking.trials,
            k.unlocking.success_rate,
            k.unlocking.closed_form_success,
            k.conjugate_control.success_rate,
            k.conjugate_control.closed_form_success
        );
    }
    let _ = writeln!(s, "average state distance from I/4 {:.12}", r.average_state_distance_from_mixed);
    for note in &r.notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

fn criteria(a: &CriteriaArgs, format: Format, meta: &Meta) -> anyhow::Result<Outcome> {
    json_only(format, "criteria")?;
    let text = std::fs::read_to_string(&a.ensemble_file).with_context(|| format!("reading {}", a.ensemble_file.display()))?;
    let e = parse_ensemble(&text).with_context(|| format!("loading {}", a.ensemble_file.display()))?;
    let record = criteria_record(&e)?;
    let output = match format {
        Format::Json => meta.json(None, &record)?,
        _ => render_criteria_text(&record, &meta.header("", None)).into_bytes(),
    };
    Ok(Outcome {
        output,
        hard_failure: false,
        messages: Vec::new(),
    })
}

fn render_criteria_text(r: &CriteriaRecord, header: &str) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "n {}  state_dim {}  uniform_prior {}", r.n, r.state_dim, r.uniform_prior);
    let _ = writeln!(s, "d {:.12}", r.d);
    match (r.d_joint, r.forms_agreement_residual) {
        (Some(j), Some(res)) => {
            let _ = writeln!(s, "d_joint {j:.12} (residual {res:.3e})");
        }
        _ => {
            let _ = writeln!(s, "d_joint - (joint dimension above cap)");
        }
    }
    let _ = writeln!(s, "d_prime {:.12}", r.d_prime);
    let _ = writeln!(s, "chi {:.12}", r.chi);
    let _ = writeln!(s, "d_ideal_reference {:.12}", r.d_ideal_reference);
    let _ = writeln!(s, "delta_e {:.12}", r.delta_e);
    let _ = writeln!(s, "i_e_deficit {:.12}", r.i_e_deficit);
    let _ = writeln!(s, "measured_mutual_information {:.12}", r.measured_mutual_information);
    for note in &r.p1_bound_notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

#[derive(Debug, Serialize)]
struct SweepHeader<'a> {
    tool: &'a str,
    version: &'a str,
    command_line: &'a [String],
    seed: u64,
    kind: &'a str,
    count: u64,
    budget: SearchBudget,
}

#[derive(Debug, Serialize)]
struct SweepFooter<'a> {
    summary: &'a CampaignSummary,
    hard_failures: usize,
    lemma2_inconclusive_rate: f64,
}

fn bounds_sweep(a: &SweepArgs, format: Format, meta: &Meta) -> anyhow::Result<Outcome> {
    let recipes = if a.kind == "default" {
        default_campaign(a.count as usize)
    } else {
        let kind: RecipeKind = a.kind.parse()?;
        let recipe = EnsembleRecipe::new(kind, a.n, a.dim)?;
        vec![recipe; a.count as usize]
    };
    let budget = SearchBudget {
        restarts: a.restarts,
        max_iters: a.max_iters,
    };
    let config = CampaignConfig {
        budget,
        ..Default::default()
    };
    let reports = run_campaign(&recipes, &config, meta.seed)?;
    let summary = summarize(&reports);
    let hard = summary.hard_failures();
    let mut out = Vec::new();
    match format {
        Format::Json => {
            let header = SweepHeader {
                tool: TOOL,
                version: VERSION,
                command_line: meta.command_line,
                seed: meta.seed,
                kind: &a.kind,
                count: a.count,
                budget,
            };
            out.extend(serde_json::to_vec(&header)?);
            out.push(b'\n');
            write_json_lines(&mut out, &reports)?;
            let footer = SweepFooter {
                summary: &summary,
                hard_failures: hard,
                lemma2_inconclusive_rate: summary.inconclusive_rate(),
            };
            out.extend(serde_json::to_vec(&footer)?);
            out.push(b'\n');
        }
        Format::Csv => {
            out.extend(meta.header("# ", None).into_bytes());
            write_csv(&mut out, &reports)?;
        }
        Format::Text => {
            out.extend(meta.header("", None).into_bytes());
            write_text(&mut out, &reports)?;
            out.push(b'\n');
            write_summary_text(&mut out, &summary)?;
        }
    }
    let mut messages = Vec::new();
    if hard > 0 {
        messages.push(format!("{hard} failures of checks that must always hold"));
    }
    if format == Format::Csv {
        let mut footer = Vec::new();
        write_summary_text(&mut footer, &summary)?;
        messages.extend(String::from_utf8(footer)?.lines().map(str::to_string));
    }
    Ok(Outcome {
        output: out,
        hard_failure: hard > 0,
        messages,
    })
}

fn extremal(a: &ExtremalArgs, format: Format, meta: &Meta) -> anyhow::Result<Outcome> {
    json_only(format, "extremal")?;
    let kind = match (a.kind.as_deref(), a.l_prime, a.l) {
        (Some("mutual_information"), _, _) | (None, Some(_), None) => ConstraintKind::MutualInformation,
        (Some("variational_distance"), _, _) | (None, None, Some(_)) => ConstraintKind::VariationalDistance,
        (Some(other), _, _) => bail!("unknown constraint kind {other:?}"),
        (None, None, None) => bail!("give --l-prime or --l"),
        (None, Some(_), Some(_)) => unreachable!("clap rejects both exponents"),
    };
    let exponent = a.l_prime.or(a.l).context("missing exponent (--l-prime or --l)")?;
    let mut spike = match kind {
        ConstraintKind::MutualInformation => spike_for_mutual_information(a.n, exponent)?,
        ConstraintKind::VariationalDistance => spike_for_variational_distance(a.n, exponent)?,
    };
    if !a.with_distribution {
        spike.resulting_distribution = None;
    }
    let output = match format {
        Format::Json => meta.json(None, &spike)?,
        _ => {
            let mut s = meta.header("", None);
            let _ = writeln!(s, "constraint {} = 2^-{} = {:.6e}", kind.label(), spike.constraint_exponent, spike.constraint_value);
            let _ = writeln!(s, "achieved {:.6e}", spike.achieved_value);
            let _ = writeln!(s, "p1 {:.12e}", spike.resulting_p1);
            let _ = writeln!(s, "reference {} = {:.12e} (exponent {:.6})", spike.reference_formula, spike.reference_p1, spike.reference_exponent);
            let _ = writeln!(s, "ratio to reference {:.6}", spike.ratio_to_reference);
            let _ = writeln!(s, "discrepancy {}", spike.discrepancy);
            s.into_bytes()
        }
    };
    Ok(Outcome {
        output,
        hard_failure: false,
        messages: Vec::new(),
    })
}
