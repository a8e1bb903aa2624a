//! Command-line front end. `run` is the whole program minus process exit, so tests drive it in-process.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde_json::{json, Map, Value};

use crate::bernoulli::{bernoulli_table, n2g, verify_denominator_identity};
use crate::error::Error;
use crate::green::{check_distribution, check_sl2_invariance, integral_over_torus, phi, torsion_log_sum, Method};
use crate::lattice::{LatticeCoord, Tau, TorsionCoord, UnimodularMatrix};
use crate::numerics::{agree_bits, decimal, digits_for, PrecisionContext, DEFAULT_BITS, DEFAULT_GUARD, MIN_BITS};
use crate::orderbound::{ratio_order_refined, verify_ratio_order};
use crate::reckon::{preset_point, unit_check, UnitExponent, UnitOptions, Verdict, UNIT_MIN_BITS};
use crate::report::{pairs, CheckReport};
use crate::suite::{self, SuiteConfig, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable read for the default precision; `--prec` wins over it.
pub const PREC_ENV: &str = "ELLGREEN_PREC";

/// Default precision of `unitcheck`, which refuses anything below 512 bits.
pub const UNIT_DEFAULT_BITS: u32 = 768;

/// Upper end accepted for Bernoulli indices and ranges.
const BERNOULLI_MAX: u64 = 200;

#[derive(Parser, Debug)]
#[command(name = "ellgreen", version, about = "Green function of a complex torus, evaluated and checked at high precision")]
pub struct Cli {
    /// Output precision in bits (at least 64).
    #[arg(long, global = true, env = PREC_ENV)]
    pub prec: Option<u32>,

    /// Guard bits carried on top of --prec.
    #[arg(long, global = true, default_value_t = DEFAULT_GUARD)]
    pub guard: u32,

    /// Newline-delimited JSON reports.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// CSV with a header row.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Seed of the pseudo-random test-point stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Treat inconclusive results (an unrecognized unit) as failures.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate phi at one point.
    Phi(PhiArgs),
    /// Run property checks.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Exact Bernoulli numbers and derived constants.
    Bernoulli {
        #[command(subcommand)]
        what: BernoulliCmd,
    },
    /// Order bounds for residue ratio sets.
    #[command(name = "ratio-order", visible_alias = "lemma45")]
    RatioOrder {
        #[command(subcommand)]
        mode: RatioCmd,
    },
    /// Recognize exp(24 n phi) at a torsion point as an algebraic number.
    Unitcheck(UnitArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sigma,
    Siegel,
    Kronecker,
    All,
}

#[derive(Args, Debug)]
pub struct PhiArgs {
    /// `re,im`, or a preset: i, 2i, rho.
    #[arg(long, default_value = "i")]
    pub tau: String,
    /// Point `a1,a2` of the torus, as exact rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
}

#[derive(Subcommand, Debug)]
pub enum CheckKind {
    /// Distribution relation.
    Dist {
        /// Multipliers, e.g. `2,3,5` or `2..5`.
        #[arg(long, default_value = "2,3,4,5")]
        n: String,
        #[arg(long, default_value = "i")]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Invariance under change of basis.
    Sl2 {
        #[arg(long, default_value = "i")]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// `a,b,c,d` or S, T, I; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        matrix: Vec<String>,
    },
    /// Mean of phi over the torus by the midpoint rule.
    Integral {
        #[arg(long, default_value = "i")]
        tau: String,
        #[arg(long, default_value_t = 1024)]
        grid: u64,
    },
    /// Sum of phi over the nonzero n-torsion points.
    TorsionSum {
        #[arg(long, default_value = "2,3,5,6")]
        n: String,
        #[arg(long, default_value = "i")]
        tau: String,
    },
    /// Agreement of the three evaluators on the grid (i/g, j/g).
    Paths {
        #[arg(long, default_value_t = 5)]
        grid: u64,
        #[arg(long, default_value = "i")]
        tau: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum BernoulliCmd {
    /// B_t for a range of t.
    Table {
        #[arg(long, default_value = "0..10")]
        t: String,
    },
    /// N_2g = 2 * denominator(B_2g / 2g), up to sign.
    N2g {
        #[arg(long, default_value = "1..3")]
        g: String,
    },
    /// Denominator of B_c / c against the prime product, for even c.
    #[command(name = "denominators", visible_alias = "eq33")]
    Denominators {
        #[arg(long, default_value = "2..60")]
        c: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum RatioCmd {
    /// Refined and coarse bounds.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
    },
    /// Compare the refined bound with exhaustive enumeration.
    Verify {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
        #[arg(long, default_value_t = 50)]
        pmax: u64,
        #[arg(long, default_value_t = 6)]
        dmax: u32,
    },
}

#[derive(Args, Debug)]
pub struct UnitArgs {
    #[arg(long, default_value = "i")]
    pub tau: String,
    /// Exact order of the preset torsion point: (1/6,1/6) for 6, (1/n,0) otherwise.
    #[arg(long, default_value_t = 6)]
    pub order: u64,
    /// Explicit torsion point `p1/q,p2/q`, overriding --order.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub maxdeg: usize,
    /// 24 (default) or 12.
    #[arg(long, default_value_t = 24)]
    pub exponent: u64,
    /// Precision of the replication run (default: twice --prec).
    #[arg(long)]
    pub replicate: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Subset of criteria, e.g. `1,4,6` or `1..5`.
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Failure of a command: message plus exit code.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergent(_) | Error::DependentRows => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Fail(code, e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(EXIT_FAIL, e.to_string())
    }
}

impl From<csv::Error> for Fail {
    fn from(e: csv::Error) -> Self {
        Fail(EXIT_FAIL, e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, msg.into())
}

/// Parses `a..b` (inclusive), `a,b,c` or a single number.
pub fn parse_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    let s = s.trim();
    let bad = || format!("expected numbers or ranges 'a..b' separated by commas, got '{s}'");
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(format!("empty range '{item}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse::<u64>().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

struct Out<'a> {
    w: &'a mut dyn Write,
    format: Format,
}

impl Out<'_> {
    fn line(&mut self, s: &str) -> std::io::Result<()> {
        writeln!(self.w, "{s}")
    }

    fn json(&mut self, v: &Value) -> std::io::Result<()> {
        writeln!(self.w, "{v}")
    }

    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) -> std::result::Result<(), Fail> {
        match self.format {
            Format::Csv => {
                let mut wtr = csv::Writer::from_writer(Vec::new());
                wtr.write_record(header)?;
                for r in rows {
                    wtr.write_record(r)?;
                }
                let bytes = wtr.into_inner().map_err(|e| Fail(EXIT_FAIL, e.to_string()))?;
                self.w.write_all(&bytes)?;
            }
            _ => {
                let widths: Vec<usize> =
                    (0..header.len()).map(|i| rows.iter().map(|r| r[i].len()).chain(std::iter::once(header[i].len())).max().unwrap_or(0)).collect();
                let fmt_row =
                    |cells: Vec<&str>| cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string();
                self.line(&fmt_row(header.to_vec()))?;
                for r in rows {
                    self.line(&fmt_row(r.iter().map(String::as_str).collect()))?;
                }
            }
        }
        Ok(())
    }

    /// Emits check reports in the selected format; returns the exit code.
    fn reports(&mut self, command: &str, reports: &[CheckReport]) -> CmdResult {
        match self.format {
            Format::Json => {
                for r in reports {
                    self.json(&r.to_json(command))?;
                }
            }
            Format::Csv => {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|r| vec![r.name().to_string(), r.passed().to_string(), r.residual_str(), r.tolerance_str(), kv(r.inputs()), kv(r.outputs())])
                    .collect();
                self.table(&["name", "passed", "residual", "tolerance", "inputs", "outputs"], &rows)?;
            }
            Format::Text => {
                for r in reports {
                    self.line(&r.to_line())?;
                    for (k, v) in r.outputs() {
                        self.line(&format!("    {k} = {v}"))?;
                    }
                }
                let failed = reports.iter().filter(|r| !r.passed()).count();
                self.line(&if failed == 0 { format!("all {} checks passed", reports.len()) } else { format!("{failed} of {} checks FAILED", reports.len()) })?;
            }
        }
        Ok(if reports.iter().all(CheckReport::passed) { EXIT_OK } else { EXIT_FAIL })
    }
}

fn kv(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn context(cli: &Cli, default_bits: u32) -> std::result::Result<PrecisionContext, Fail> {
    let bits = cli.prec.unwrap_or(default_bits);
    if bits < MIN_BITS {
        return Err(usage(format!("precision must be at least {MIN_BITS} bits, got {bits}")));
    }
    Ok(PrecisionContext::new(bits, cli.guard)?)
}

fn parse_tau(s: &str) -> std::result::Result<Tau, Fail> {
    Ok(Tau::parse(s)?)
}

fn parse_point(s: &str) -> std::result::Result<LatticeCoord, Fail> {
    let z = LatticeCoord::parse(s)?;
    if z.is_zero() {
        return Err(Error::ZeroPoint.into());
    }
    Ok(z)
}

/// Runs the program on `args` (including the program name), writing reports to `out`
/// and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => write!(out, "{}", e.render()),
                _ => write!(err, "{}", e.render()),
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let mut o = Out { w: out, format };
    let res = match &cli.command {
        Command::Phi(a) => cmd_phi(&cli, a, &mut o),
        Command::Check { kind } => cmd_check(&cli, kind, &mut o),
        Command::Bernoulli { what } => cmd_bernoulli(what, &mut o),
        Command::RatioOrder { mode } => cmd_ratio(mode, &mut o),
        Command::Unitcheck(a) => cmd_unitcheck(&cli, a, &mut o),
        Command::Selftest(a) => cmd_selftest(&cli, a, &mut o),
    };
    match res {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn cmd_phi(cli: &Cli, a: &PhiArgs, o: &mut Out) -> CmdResult {
    let ctx = context(cli, DEFAULT_BITS)?;
    let tau = parse_tau(&a.tau)?;
    let z = parse_point(&a.z)?;
    let methods: Vec<Method> = match a.method {
        MethodArg::Sigma => vec![Method::Sigma],
        MethodArg::Siegel => vec![Method::Siegel],
        MethodArg::Kronecker => vec![Method::Kronecker],
        MethodArg::All => Method::ALL.to_vec(),
    };
    let vals = methods.iter().map(|&m| phi(m, &z, &tau, &ctx)).collect::<crate::Result<Vec<_>>>()?;
    let digits = digits_for(&ctx);
    // required agreement: full minus two guards between the product paths, 30 bits with the series path
    let mut agreements = Vec::new();
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let need = if vals[i].method == Method::Kronecker || vals[j].method == Method::Kronecker { 30 } else { ctx.bits().saturating_sub(2 * ctx.guard()) };
            let got = agree_bits(&vals[i].value, &vals[j].value, &ctx);
            agreements.push((format!("{}/{}", vals[i].method, vals[j].method), got, need));
        }
    }
    let passed = agreements.iter().all(|(_, got, need)| got >= need);
    match o.format {
        Format::Json => {
            let values: Vec<Value> =
                vals.iter().map(|v| json!({"method": v.method.as_str(), "value": decimal(&v.value, digits), "est_error": decimal(&v.est_error, 6)})).collect();
            let mut agree = Map::new();
            for (k, got, _) in &agreements {
                agree.insert(k.clone(), Value::String(got.to_string()));
            }
            let mut obj = json!({
                "command": "phi",
                "inputs": pairs(&[("tau".into(), tau.to_string()), ("z".into(), z.to_string()), ("method".into(), format!("{:?}", a.method).to_lowercase())]),
                "outputs": pairs(&vals.iter().map(|v| (v.method.to_string(), decimal(&v.value, digits))).collect::<Vec<_>>()),
                "values": values,
                "agree_bits": agree,
                "bits": ctx.bits(),
                "version": crate::VERSION,
            });
            if !agreements.is_empty() {
                obj["passed"] = json!(passed);
            }
            o.json(&obj)?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = vals.iter().map(|v| vec![v.method.to_string(), decimal(&v.value, digits), decimal(&v.est_error, 6)]).collect();
            o.table(&["method", "value", "est_error"], &rows)?;
        }
        Format::Text => {
            o.line(&format!("tau = {tau}   z = {z}   bits = {}", ctx.bits()))?;
            for v in &vals {
                o.line(&format!("{:<10} {}  (+- {})", v.method.as_str(), decimal(&v.value, digits), decimal(&v.est_error, 3)))?;
            }
            for (k, got, need) in &agreements {
                o.line(&format!("agree {k:<17} {got} bits (need {need})"))?;
            }
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_check(cli: &Cli, kind: &CheckKind, o: &mut Out) -> CmdResult {
    let ctx = context(cli, DEFAULT_BITS)?;
    let mut reports = Vec::new();
    let command = match kind {
        CheckKind::Dist { n, tau, z } => {
            let tau = parse_tau(tau)?;
            let z = parse_point(z)?;
            for n in parse_list(n).map_err(usage)? {
                reports.push(check_distribution(&z, n, &tau, &ctx)?);
            }
            "check dist"
        }
        CheckKind::Sl2 { tau, z, matrix } => {
            let tau = parse_tau(tau)?;
            let z = parse_point(z)?;
            let mats: Vec<UnimodularMatrix> = if matrix.is_empty() {
                vec![UnimodularMatrix::s(), UnimodularMatrix::t(1)]
            } else {
                matrix.iter().map(|m| m.parse::<UnimodularMatrix>()).collect::<crate::Result<_>>()?
            };
            for m in &mats {
                reports.push(check_sl2_invariance(&z, &tau, m, &ctx)?);
            }
            "check sl2"
        }
        CheckKind::Integral { tau, grid } => {
            reports.push(integral_over_torus(&parse_tau(tau)?, *grid, &ctx)?);
            "check integral"
        }
        CheckKind::TorsionSum { n, tau } => {
            let tau = parse_tau(tau)?;
            for n in parse_list(n).map_err(usage)? {
                reports.push(torsion_log_sum(n, &tau, &ctx)?);
            }
            "check torsion-sum"
        }
        CheckKind::Paths { grid, tau } => {
            let tau = parse_tau(tau)?;
            if *grid < 2 || *grid > 64 {
                return Err(usage(format!("grid must be in 2..64, got {grid}")));
            }
            reports = path_reports(*grid, &tau, &ctx)?;
            "check paths"
        }
    };
    o.reports(command, &reports)
}

fn path_reports(grid: u64, tau: &Tau, ctx: &PrecisionContext) -> crate::Result<Vec<CheckReport>> {
    let p = ctx.working();
    let tol_prod = ctx.pow2_neg(ctx.bits().saturating_sub(2 * ctx.guard()));
    let mut out = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            if i == 0 && j == 0 {
                continue;
            }
            let t = TorsionCoord::new(i as i64, j as i64, grid)?;
            let z = t.coord();
            let s = phi(Method::Sigma, &z, tau, ctx)?.value;
            let g = phi(Method::Siegel, &z, tau, ctx)?.value;
            let k = phi(Method::Kronecker, &z, tau, ctx)?.value;
            let scale = Float::with_val(p, s.abs_ref()).max(&ctx.real(1));
            let res_g = Float::with_val(p, &s - &g).abs();
            let res_k = Float::with_val(p, &s - &k).abs();
            out.push(
                CheckReport::new("sigma_vs_siegel", ctx.bits(), res_g, tol_prod.clone())
                    .with_input("tau", tau)
                    .with_input("z", t)
                    .with_output("agree_bits", agree_bits(&s, &g, ctx)),
            );
            out.push(
                CheckReport::new("sigma_vs_kronecker", ctx.bits(), res_k, scale * ctx.pow2_neg(30))
                    .with_input("tau", tau)
                    .with_input("z", t)
                    .with_output("agree_bits", agree_bits(&s, &k, ctx)),
            );
        }
    }
    Ok(out)
}

fn bernoulli_range(s: &str) -> std::result::Result<Vec<u64>, Fail> {
    let v = parse_list(s).map_err(usage)?;
    if v.iter().any(|&x| x > BERNOULLI_MAX) {
        return Err(usage(format!("indices must not exceed {BERNOULLI_MAX}")));
    }
    Ok(v)
}

fn row_json(command: &str, inputs: &[(&str, String)], outputs: &[(&str, String)], passed: Option<bool>) -> Value {
    let to = |kv: &[(&str, String)]| pairs(&kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<Vec<_>>());
    let mut v = json!({"command": command, "inputs": to(inputs), "outputs": to(outputs), "bits": 0, "version": crate::VERSION});
    if let Some(p) = passed {
        v["passed"] = json!(p);
    }
    v
}

fn cmd_bernoulli(what: &BernoulliCmd, o: &mut Out) -> CmdResult {
    match what {
        BernoulliCmd::Table { t } => {
            let ts = bernoulli_range(t)?;
            let table = bernoulli_table(*ts.iter().max().unwrap_or(&0) as usize);
            let rows: Vec<Vec<String>> = ts.iter().map(|&t| vec![t.to_string(), table[t as usize].to_string()]).collect();
            if o.format == Format::Json {
                for r in &rows {
                    o.json(&row_json("bernoulli table", &[("t", r[0].clone())], &[("B", r[1].clone())], None))?;
                }
            } else {
                o.table(&["t", "B_t"], &rows)?;
            }
            Ok(EXIT_OK)
        }
        BernoulliCmd::N2g { g } => {
            let gs = bernoulli_range(g)?;
            if gs.iter().any(|&g| g == 0 || 2 * g > BERNOULLI_MAX) {
                return Err(usage(format!("g must be in 1..{}", BERNOULLI_MAX / 2)));
            }
            let rows: Vec<Vec<String>> = gs.iter().map(|&g| Ok(vec![g.to_string(), n2g(g)?.to_string()])).collect::<crate::Result<_>>()?;
            if o.format == Format::Json {
                for r in &rows {
                    o.json(&row_json("bernoulli n2g", &[("g", r[0].clone())], &[("N_2g", r[1].clone())], None))?;
                }
            } else {
                o.table(&["g", "N_2g"], &rows)?;
            }
            Ok(EXIT_OK)
        }
        BernoulliCmd::Denominators { c } => {
            let cs = bernoulli_range(c)?;
            let cs: Vec<u64> = if cs.len() > 1 { cs.into_iter().filter(|c| c % 2 == 0).collect() } else { cs };
            let reports = cs.iter().map(|&c| verify_denominator_identity(c)).collect::<crate::Result<Vec<_>>>()?;
            if o.format == Format::Text || o.format == Format::Csv {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|r| {
                        let get = |k: &str| r.output(k).unwrap_or("").to_string();
                        vec![r.inputs()[0].1.clone(), get("lhs"), get("rhs"), if r.passed() { "equal".into() } else { "DIFFER".into() }]
                    })
                    .collect();
                o.table(&["c", "lhs", "rhs", "verdict"], &rows)?;
                Ok(if reports.iter().all(CheckReport::passed) { EXIT_OK } else { EXIT_FAIL })
            } else {
                o.reports("bernoulli denominators", &reports)
            }
        }
    }
}

fn cmd_ratio(mode: &RatioCmd, o: &mut Out) -> CmdResult {
    match mode {
        RatioCmd::Bound { n, c } => {
            let b = ratio_order_refined(*n, *c)?;
            let per: Vec<String> = b.per_prime.iter().map(|(p, e)| format!("{p}^{e}")).collect();
            let outputs =
                [("refined", b.refined.to_string()), ("coarse", b.coarse.to_string()), ("per_prime", per.join(" ")), ("two_part", b.two_part.to_string())];
            match o.format {
                Format::Json => {
                    o.json(&row_json("ratio-order bound", &[("n", n.to_string()), ("c", c.to_string())], &outputs, Some(b.refined_divides_coarse())))?
                }
                Format::Csv => o.table(
                    &["n", "c", "refined", "coarse", "per_prime", "two_part"],
                    &[vec![n.to_string(), c.to_string(), outputs[0].1.clone(), outputs[1].1.clone(), outputs[2].1.clone(), outputs[3].1.clone()]],
                )?,
                Format::Text => {
                    o.line(&format!("n = {n}, c = {c}"))?;
                    for (k, v) in &outputs {
                        o.line(&format!("{k:<10} {v}"))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        RatioCmd::Verify { n, c, pmax, dmax } => {
            if *dmax == 0 {
                return Err(usage("dmax must be at least 1"));
            }
            let v = verify_ratio_order(*n, *c, *pmax, *dmax)?;
            if o.format == Format::Text {
                o.line(&format!("{:<6} {:>6} {:>8} {:>4} {}", "p", "cap", "oracle", "bound", "tight"))?;
                for pc in v.primes.iter().filter(|pc| pc.brute > 0 || pc.formula > 0) {
                    o.line(&format!("{:<6} {:>6} {:>8} {:>4} {}", pc.p, pc.delta_cap, pc.brute, pc.formula, if pc.tight() { "yes" } else { "" }))?;
                }
            }
            o.reports("ratio-order verify", std::slice::from_ref(&v.report))
        }
    }
}

fn cmd_unitcheck(cli: &Cli, a: &UnitArgs, o: &mut Out) -> CmdResult {
    let ctx = context(cli, UNIT_DEFAULT_BITS)?;
    if ctx.bits() < UNIT_MIN_BITS {
        return Err(Error::PrecisionTooLow { got: ctx.bits(), need: UNIT_MIN_BITS }.into());
    }
    let tau = parse_tau(&a.tau)?;
    let point = match &a.point {
        Some(s) => {
            let z = LatticeCoord::parse(s)?;
            let q = z.order().and_then(|q| q.to_u64()).ok_or_else(|| usage("point order too large"))?;
            let scale = |x: &rug::Rational| (x.clone() * rug::Integer::from(q)).numer().to_i64().unwrap_or(0);
            TorsionCoord::new(scale(z.a1()), scale(z.a2()), q)?
        }
        None => preset_point(a.order)?,
    };
    let exponent = match a.exponent {
        24 => UnitExponent::TwentyFour,
        12 => UnitExponent::Twelve,
        e => return Err(usage(format!("exponent must be 24 or 12, got {e}"))),
    };
    let opts = UnitOptions { exponent, replication_bits: a.replicate };
    let r = unit_check(&tau, &point, a.maxdeg, &opts, &ctx)?;
    let poly = r.polynomial.as_ref().map(|p| p.to_string()).unwrap_or_else(|| "none".into());
    let opt = |x: &Option<rug::Integer>| x.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "none".into());
    let residual = r.residual.as_ref().map(|x| decimal(x, 6)).unwrap_or_else(|| "none".into());
    let outputs = [
        ("value", r.value_str()),
        ("polynomial", poly),
        ("constant_abs", opt(&r.constant_abs)),
        ("leading_abs", opt(&r.leading_abs)),
        ("residual", residual),
        ("verdict", r.verdict.to_string()),
        ("replication_bits", r.replication_bits.to_string()),
    ];
    let inputs = [
        ("tau", tau.to_string()),
        ("point", point.to_string()),
        ("order", r.order.to_string()),
        ("exponent", r.exponent.to_string()),
        ("maxdeg", a.maxdeg.to_string()),
    ];
    let ok = !(cli.strict && r.verdict == Verdict::Unrecognized);
    match o.format {
        Format::Json => {
            let mut v = row_json("unitcheck", &inputs, &outputs, Some(ok));
            v["bits"] = json!(r.bits);
            o.json(&v)?;
        }
        Format::Csv => {
            let header: Vec<&str> = inputs.iter().chain(&outputs).map(|(k, _)| *k).collect();
            let row: Vec<String> = inputs.iter().chain(&outputs).map(|(_, v)| v.clone()).collect();
            o.table(&header, &[row])?;
        }
        Format::Text => {
            for (k, v) in inputs.iter().chain(&outputs) {
                o.line(&format!("{k:<17} {v}"))?;
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_selftest(cli: &Cli, a: &SelftestArgs, o: &mut Out) -> CmdResult {
    let ctx = context(cli, DEFAULT_BITS)?;
    let cfg = SuiteConfig { bits: ctx.bits(), guard: ctx.guard(), seed: cli.seed };
    let ids = match &a.only {
        Some(s) => {
            let ids: Vec<u32> = parse_list(s).map_err(usage)?.into_iter().map(|x| x as u32).collect();
            if let Some(bad) = ids.iter().find(|i| !suite::all_ids().contains(i)) {
                return Err(usage(format!("no criterion {bad}")));
            }
            ids
        }
        None => suite::all_ids(),
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let oc = suite::run_criterion(id, &cfg)?;
        match o.format {
            Format::Json => o.w.write_all(oc.to_ndjson().as_bytes())?,
            Format::Csv => {}
            Format::Text => {
                o.line(&format!("criterion {:>2}  {}  {:>8.2}s  {}", oc.id, if oc.passed() { "PASS" } else { "FAIL" }, oc.elapsed.as_secs_f64(), oc.title))?;
                for r in oc.details.iter().filter(|r| !r.passed()) {
                    o.line(&format!("    {}", r.to_line()))?;
                }
            }
        }
        outcomes.push(oc);
    }
    match o.format {
        Format::Json => o.json(&suite::overall_json(&outcomes, &cfg))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                outcomes.iter().map(|oc| vec![oc.id.to_string(), oc.title.to_string(), oc.passed().to_string(), oc.details.len().to_string()]).collect();
            o.table(&["criterion", "title", "passed", "checks"], &rows)?;
        }
        Format::Text => {
            let failed = outcomes.iter().filter(|x| !x.passed()).count();
            o.line(&format!("seed {}  bits {}  {} of {} criteria passed", cfg.seed, cfg.bits, outcomes.len() - failed, outcomes.len()))?;
        }
    }
    Ok(if outcomes.iter().all(suite::CriterionOutcome::passed) { EXIT_OK } else { EXIT_FAIL })
}
