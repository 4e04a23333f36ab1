//! Command-line front end for `hkb-core`.
//!
//! [`run`] parses arguments, dispatches a subcommand and returns the process
//! exit code: 0 on success, 1 when `check` finds engines that disagree, 2 on
//! usage or input errors, 3 when every engine exceeds its budget.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hkb_core::algebra::parse_monomial;
use hkb_core::engines::{cross_check, parse_corpus, CheckReport, DEFAULT_ENUM_CAP};
use hkb_core::keycheck::{MembershipChecker, MembershipTrace, Witness};
use hkb_core::multiplicity::{estimate_multiplicity, EstimateOptions, MultiplicityReport, Sample};
use hkb_core::oracle::DEFAULT_ORACLE_CAP;
use hkb_core::{classify, hk, parse_binomial, Binomial, Budgets, Classification, Engine, HkOptions, HkReport, PrimePower};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Environment variable naming a JSON config file.
pub const CONFIG_ENV: &str = "HKB_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Plain,
}

/// Settings from the config file. Command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub enum_cap: Option<u64>,
    pub oracle_cap: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub verbose: Option<bool>,
    pub timing: Option<bool>,
}

/// Resolved settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub enum_cap: u64,
    pub oracle_cap: u64,
    pub workers: Option<usize>,
    pub format: Format,
    pub verbose: bool,
    pub timing: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            enum_cap: DEFAULT_ENUM_CAP,
            oracle_cap: DEFAULT_ORACLE_CAP,
            workers: None,
            format: Format::Plain,
            verbose: false,
            timing: false,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    fn resolve(file: FileConfig, flags: &Common) -> Result<Config, CliError> {
        let d = Config::default();
        let cfg = Config {
            enum_cap: flags.enum_cap.or(file.enum_cap).unwrap_or(d.enum_cap),
            oracle_cap: flags.oracle_cap.or(file.oracle_cap).unwrap_or(d.oracle_cap),
            workers: flags.workers.or(file.workers),
            format: flags.format.or(file.format).unwrap_or(d.format),
            verbose: flags.verbose || file.verbose.unwrap_or(false),
            timing: flags.timing || file.timing.unwrap_or(false),
        };
        if cfg.enum_cap == 0 || cfg.oracle_cap == 0 {
            return Err(CliError::usage("caps must be positive"));
        }
        if cfg.workers == Some(0) {
            return Err(CliError::usage("workers must be positive"));
        }
        Ok(cfg)
    }

    fn budgets(&self) -> Budgets {
        Budgets {
            enum_cap: self.enum_cap,
            oracle_cap: self.oracle_cap,
            ..Budgets::default()
        }
    }

    fn hk_options(&self) -> HkOptions {
        HkOptions {
            budgets: self.budgets(),
            verbose: self.verbose,
            timing: self.timing,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage".into(),
            message: message.into(),
            code: EXIT_USAGE,
        }
    }
}

impl From<hkb_core::Error> for CliError {
    fn from(e: hkb_core::Error) -> Self {
        let code = match e {
            hkb_core::Error::Resource { .. } => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        };
        Self {
            kind: e.kind().into(),
            message: e.to_string(),
            code,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self {
            kind: "io".into(),
            message: e.to_string(),
            code: EXIT_USAGE,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self {
            kind: "io".into(),
            message: e.to_string(),
            code: EXIT_USAGE,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hkb", version, about = "Hilbert-Kunz functions of binomial hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// HK(p^n) for one n.
    Hk {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: Engine,
        #[command(flatten)]
        common: Common,
    },
    /// HK(p^n) over a range of n.
    Table {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long = "n-range", value_parser = parse_range)]
        n_range: RangeInclusive<u32>,
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: Engine,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the HK multiplicity from HK(p^n)/p^{n(m-1)}.
    Mult {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long = "n-range", value_parser = parse_range)]
        n_range: RangeInclusive<u32>,
        /// Also report the exact multiplicity of a two-variable binomial.
        #[arg(long = "exact-1dim")]
        exact_1dim: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Variable classification by exponent difference.
    Classify {
        #[command(flatten)]
        poly: PolyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Membership scan of one standard monomial modulo (x^q, f).
    Trace {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Exponent vector, as "4,1" or "x1^4*x2".
        #[arg(long)]
        monomial: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run every engine on a JSONL corpus and report disagreements.
    Check {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct PolyArgs {
    /// Binomial such as "x1^3 - x2^2".
    #[arg(long)]
    poly: String,
    /// Number of variables, if larger than the highest index used.
    #[arg(long)]
    vars: Option<usize>,
    #[arg(long)]
    p: u64,
}

impl PolyArgs {
    fn binomial(&self) -> Result<Binomial, CliError> {
        Ok(parse_binomial(&self.poly, self.p, self.vars)?)
    }
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    verbose: bool,
    #[arg(long = "enum-cap")]
    enum_cap: Option<u64>,
    #[arg(long = "oracle-cap")]
    oracle_cap: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Add wall-clock timings under "timing".
    #[arg(long)]
    timing: bool,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: hkb_core::Error| e.to_string())
}

/// Inclusive range written `a..b`.
fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("range must satisfy 1 <= a <= b, got {a}..{b}"));
    }
    Ok(a..=b)
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Hk { common, .. }
            | Command::Table { common, .. }
            | Command::Mult { common, .. }
            | Command::Classify { common, .. }
            | Command::Trace { common, .. }
            | Command::Check { common, .. } => common,
        }
    }
}

/// Runs with the real standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// `argv` includes the program name.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let json_requested = requests_json(&argv);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let error = CliError::usage(e.to_string().trim_end());
            report_error(err, &error, json_requested);
            return error.code;
        }
    };
    let file = match std::env::var_os(CONFIG_ENV) {
        Some(path) if !path.is_empty() => Config::load(Path::new(&path)),
        _ => Ok(FileConfig::default()),
    };
    let cfg = file.and_then(|f| Config::resolve(f, cli.command.common()));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            report_error(err, &e, json_requested);
            return e.code;
        }
    };
    let mut buf = Vec::new();
    let result = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli.command, &cfg, &mut buf))),
        None => dispatch(&cli.command, &cfg, &mut buf),
    };
    let result = result.and_then(|code| {
        out.write_all(&buf)?;
        out.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            report_error(err, &e, cfg.format == Format::Json);
            e.code
        }
    }
}

fn requests_json(argv: &[String]) -> bool {
    argv.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || argv.iter().any(|a| a == "--format=json")
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
    exit_code: i32,
}

fn report_error(err: &mut dyn Write, e: &CliError, json: bool) {
    let _ = if json {
        let body = serde_json::json!({ "error": ErrorBody { kind: &e.kind, message: &e.message, exit_code: e.code } });
        writeln!(err, "{body}")
    } else {
        writeln!(err, "error: {}", e.message)
    };
}

fn dispatch(cmd: &Command, cfg: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Hk { poly, n, engine, .. } => {
            let f = poly.binomial()?;
            let q = PrimePower::new(poly.p, *n)?;
            let rep = hk(&f, &q, *engine, &cfg.hk_options())?;
            emit_hk(&rep, cfg, out)?;
        }
        Command::Table {
            poly, n_range, engine, ..
        } => {
            let f = poly.binomial()?;
            let opts = cfg.hk_options();
            let rows = n_range
                .clone()
                .map(|n| {
                    let q = PrimePower::new(poly.p, n)?;
                    Ok(hk(&f, &q, *engine, &opts)?)
                })
                .collect::<Result<Vec<HkReport>, CliError>>()?;
            emit_table(&f, &rows, cfg, out)?;
        }
        Command::Mult {
            poly, n_range, exact_1dim, ..
        } => {
            let f = poly.binomial()?;
            let opts = EstimateOptions {
                hk: cfg.hk_options(),
                c: None,
                exact_1dim: *exact_1dim,
            };
            let rep = estimate_multiplicity(&f, n_range.clone(), &opts)?;
            emit_mult(&f, &rep, cfg, out)?;
        }
        Command::Classify { poly, .. } => {
            let f = poly.binomial()?;
            emit_classification(&f, &classify(&f), cfg, out)?;
        }
        Command::Trace { poly, n, monomial, .. } => {
            let f = poly.binomial()?;
            let q = PrimePower::new(poly.p, *n)?;
            let a = parse_monomial(monomial, f.m())?;
            let trace = MembershipChecker::new(&f, &q)?.trace(a.as_slice())?;
            emit_trace(&trace, cfg, out)?;
        }
        Command::Check { corpus, .. } => {
            let text = std::fs::read_to_string(corpus)
                .map_err(|e| CliError::usage(format!("cannot read corpus {}: {e}", corpus.display())))?;
            let entries = parse_corpus(&text)?;
            let report = cross_check(&entries, cfg.budgets(), None)?;
            emit_check(&report, cfg, out)?;
            return Ok(if report.mismatches > 0 {
                EXIT_MISMATCH
            } else if report.invalid > 0 {
                EXIT_USAGE
            } else {
                EXIT_OK
            });
        }
    }
    Ok(EXIT_OK)
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn no_csv(what: &str) -> CliError {
    CliError::usage(format!("csv output is not available for {what}"))
}

fn write_samples_csv<'a>(samples: impl IntoIterator<Item = &'a Sample>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "q", "hk", "engine", "estimate_num", "estimate_den"])?;
    for s in samples {
        w.write_record([
            s.n.to_string(),
            s.q.to_string(),
            s.hk.to_string(),
            s.engine.to_string(),
            s.estimate.0.numer().to_string(),
            s.estimate.0.denom().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn emit_hk(rep: &HkReport, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => write_json(rep, out),
        Format::Csv => write_samples_csv([&Sample::from_report(rep)], out),
        Format::Plain => {
            writeln!(out, "{}", rep.value)?;
            if cfg.verbose {
                writeln!(out, "engine: {}", rep.engine)?;
                for note in &rep.guard_notes {
                    writeln!(out, "note: {note}")?;
                }
                if let Some(s) = &rep.oracle_stats {
                    writeln!(
                        out,
                        "oracle: {} nodes, {} dead, {} merges, {} live, {} conflicts",
                        s.nodes, s.dead, s.merges, s.live, s.conflicts
                    )?;
                }
            }
            if let Some(t) = &rep.timing {
                writeln!(out, "time: {:.3} ms", t.ms)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TableReport<'a> {
    poly: String,
    p: String,
    m: usize,
    rows: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reports: Option<&'a [HkReport]>,
}

fn render_rows(header: [&str; 5], rows: &[[String; 5]]) -> String {
    let mut widths = header.map(str::len);
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cells: [&str; 5]| {
        let cols: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "{}", cols.join("  ").trim_end());
    };
    line(&mut s, header);
    for r in rows {
        line(&mut s, [&r[0], &r[1], &r[2], &r[3], &r[4]]);
    }
    s
}

fn sample_rows(samples: &[Sample]) -> String {
    let rows: Vec<[String; 5]> = samples
        .iter()
        .map(|s| {
            [
                s.n.to_string(),
                s.q.to_string(),
                s.hk.to_string(),
                s.engine.to_string(),
                s.estimate.0.to_string(),
            ]
        })
        .collect();
    render_rows(["n", "q", "hk", "engine", "estimate"], &rows)
}

fn emit_table(f: &Binomial, reports: &[HkReport], cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let rows: Vec<Sample> = reports.iter().map(Sample::from_report).collect();
    match cfg.format {
        Format::Json => write_json(
            &TableReport {
                poly: f.to_string(),
                p: f.p().to_string(),
                m: f.m(),
                rows,
                reports: cfg.verbose.then_some(reports),
            },
            out,
        ),
        Format::Csv => write_samples_csv(&rows, out),
        Format::Plain => {
            write!(out, "{}", sample_rows(&rows))?;
            if cfg.timing {
                for r in reports {
                    if let Some(t) = &r.timing {
                        writeln!(out, "time n={}: {:.3} ms", r.n, t.ms)?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn emit_mult(f: &Binomial, rep: &MultiplicityReport, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => write_json(rep, out),
        Format::Csv => write_samples_csv(&rep.samples, out),
        Format::Plain => {
            writeln!(out, "{f} over F_{}, d = {}", f.p(), rep.d)?;
            write!(out, "{}", sample_rows(&rep.samples))?;
            if let Some(l) = &rep.limit {
                writeln!(out, "limit: {}", l.0)?;
            }
            if let (Some(g), Some(b)) = (&rep.gap, &rep.bound) {
                writeln!(out, "gap: {}  bound: {}", g.0, b.0)?;
            }
            writeln!(out, "converged: {}", if rep.converged { "yes" } else { "no" })?;
            if let Some(e) = &rep.exact {
                writeln!(out, "exact: {} (case {})", e.value, e.case.label())?;
            }
            if let Some(note) = &rep.note {
                writeln!(out, "note: {note}")?;
            }
            Ok(())
        }
    }
}

fn emit_classification(f: &Binomial, c: &Classification, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => write_json(c, out),
        Format::Csv => Err(no_csv("classify")),
        Format::Plain => {
            writeln!(out, "{f}: r = {}, s = {}, t = {}", c.r, c.s, c.t)?;
            let order: Vec<String> = c.perm.iter().map(|&v| format!("x{}", v + 1)).collect();
            writeln!(out, "key order: {}", order.join(" < "))?;
            let mut rows = Vec::new();
            for (i, v) in c.neg.iter().enumerate() {
                rows.push([
                    format!("N{}", i + 1),
                    format!("x{}", v.var + 1),
                    format!("-{}", v.a),
                    format!("{}..{}", v.nmin, v.nmax),
                    format!("a={} b={}", v.a, v.b),
                ]);
            }
            for (i, v) in c.zero.iter().enumerate() {
                rows.push([
                    format!("Z{}", i + 1),
                    format!("x{}", v.var + 1),
                    "0".into(),
                    format!("{}..{}", v.zmin, v.zmax),
                    String::new(),
                ]);
            }
            for (i, v) in c.pos.iter().enumerate() {
                rows.push([
                    format!("P{}", i + 1),
                    format!("x{}", v.var + 1),
                    v.dp.to_string(),
                    format!("{}..{}", v.pmin, v.pmax),
                    String::new(),
                ]);
            }
            write!(out, "{}", render_rows(["class", "var", "delta", "min..max", ""], &rows))?;
            Ok(())
        }
    }
}

fn fmt_vec(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

fn emit_trace(t: &MembershipTrace, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => write_json(t, out),
        Format::Csv => Err(no_csv("trace")),
        Format::Plain => {
            writeln!(out, "monomial: {}", fmt_vec(&t.monomial))?;
            let order: Vec<String> = t.key_order.iter().map(|&v| format!("x{}", v + 1)).collect();
            writeln!(out, "key order: {}", order.join(" < "))?;
            writeln!(out, "lead divides: {}, trail divides: {}", t.lead_divides, t.trail_divides)?;
            for s in &t.steps {
                writeln!(
                    out,
                    "M={}: shifted {} candidate {}{}",
                    s.m,
                    fmt_vec(&s.shifted),
                    fmt_vec(&s.candidate),
                    if s.convergent { " convergent" } else { "" }
                )?;
            }
            let witness = match t.result.witness {
                Witness::TrailDivides => "trail term divides".to_string(),
                Witness::MutationWitness(m) => format!("M = {m}"),
                Witness::None => "none".to_string(),
            };
            writeln!(
                out,
                "member: {} (witness: {witness}; M_max = {})",
                if t.result.member { "yes" } else { "no" },
                t.result.mmax_scanned
            )?;
            Ok(())
        }
    }
}

fn emit_check(r: &CheckReport, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let value = |e: &hkb_core::engines::CheckEntry, engine: Engine| e.values.get(&engine).cloned().unwrap_or_default();
    match cfg.format {
        Format::Json => write_json(r, out),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["index", "poly", "p", "n", "expected", "closed", "direct", "oracle", "agree", "error"])?;
            for e in &r.entries {
                w.write_record([
                    e.index.to_string(),
                    e.poly.clone(),
                    e.p.to_string(),
                    e.n.to_string(),
                    e.expected.clone().unwrap_or_default(),
                    value(e, Engine::Closed),
                    value(e, Engine::Direct),
                    value(e, Engine::Oracle),
                    e.agree.to_string(),
                    e.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Plain => {
            for e in &r.entries {
                let status = match (&e.error, e.agree) {
                    (Some(_), _) => "INVALID",
                    (None, true) => "ok",
                    (None, false) => "MISMATCH",
                };
                if status == "ok" && !cfg.verbose {
                    continue;
                }
                write!(out, "#{} {} p={} n={}: {status}", e.index, e.poly, e.p, e.n)?;
                if let Some(msg) = &e.error {
                    write!(out, " ({msg})")?;
                }
                if let Some(v) = &e.expected {
                    write!(out, " expected={v}")?;
                }
                for engine in Engine::CONCRETE {
                    match (e.values.get(&engine), e.skipped.get(&engine)) {
                        (Some(v), _) => write!(out, " {engine}={v}")?,
                        (None, Some(_)) => write!(out, " {engine}=skipped")?,
                        _ => {}
                    }
                }
                writeln!(out)?;
            }
            writeln!(
                out,
                "{} entries, {} mismatches, {} invalid",
                r.entries.len(),
                r.mismatches,
                r.invalid
            )?;
            Ok(())
        }
    }
}
