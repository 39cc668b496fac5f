//! `tcs` command-line front end.
//!
//! Every subcommand renders to text, JSON or CSV. Big integers are decimal
//! strings in JSON. Exit codes: 0 success, 1 precision/budget/runtime
//! failure, 2 usage error, 3 fixture or sweep mismatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::parse_decimal;
use crate::cache::PrimeCache;
use crate::classes::{class_spec, has_speed_one, min_base, min_base_class, smallest_speed_one};
use crate::decadic::root_residue;
use crate::error::{Error, Result};
use crate::primes::{q_table_indices, q_table_with, smallest_prime_with_speed, PrimeSpeedRecord};
use crate::speed::{
    constant_speed_at, constant_speed_report_from, speed_profile, speeds_through, TetrationBase,
};
use crate::verify::{run_fixtures, sweep};

pub const DEFAULT_DIGITS: u32 = 64;
pub const MIN_DIGITS: u32 = 16;
pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DIGITS_ENV: &str = "TCS_DIGITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Working precision when a subcommand is not given `--digits`.
    pub digits: u32,
    pub cache_path: Option<PathBuf>,
    pub output: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        Config { digits: DEFAULT_DIGITS, cache_path: None, output: OutputFormat::Text }
    }
}

impl Config {
    /// Defaults with the `TCS_DIGITS` override applied.
    pub fn from_env_value(value: Option<&str>) -> std::result::Result<Self, String> {
        let mut config = Config::default();
        if let Some(v) = value {
            config.digits = parse_digits(v)?;
        }
        Ok(config)
    }
}

fn parse_digits(s: &str) -> std::result::Result<u32, String> {
    let d: u32 = s.trim().parse().map_err(|_| format!("invalid digit count {s:?}"))?;
    if d < MIN_DIGITS {
        return Err(format!("precision must be at least {MIN_DIGITS} digits, got {d}"));
    }
    Ok(d)
}

#[derive(Parser, Debug)]
#[command(name = "tcs", version, about = "Congruence speed of integer tetration in radix 10")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    output: OutputFormat,

    /// Shorthand for `--output json`.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constant speed V(A), or V(A, B) with --height.
    Speed {
        a: String,
        #[arg(long)]
        height: Option<u64>,
        /// Fixed working precision; without it the precision adapts.
        #[arg(long, value_parser = parse_digits)]
        digits: Option<u32>,
    },
    /// Frozen digits and speed at every height up to --max-height.
    Profile {
        a: String,
        #[arg(long)]
        max_height: u64,
        #[arg(long, value_parser = parse_digits)]
        digits: Option<u32>,
    },
    /// Smallest base with constant speed N, optionally restricted to a last digit.
    MinBase {
        n: u64,
        #[arg(long = "class")]
        class: Option<u32>,
    },
    /// First K bases with last digit S1 and constant speed N.
    Class {
        s1: u32,
        n: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Root I of y^5 = y truncated to N digits.
    Root {
        i: u32,
        #[arg(long)]
        digits: u32,
    },
    /// Smallest prime with constant speed N.
    Q {
        n: u64,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Smallest bases per speed: class 5 against the other classes.
    Table1 {
        #[arg(long, default_value_t = 19)]
        max: u64,
    },
    /// Smallest primes per speed, with drops marked.
    Table2 {
        #[arg(long, default_value_t = 21)]
        max: u64,
        #[arg(long, value_delimiter = ',')]
        extra: Vec<u64>,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Oracle/formula sweep and worked-example fixtures.
    Verify {
        /// Sweep bases up to this value.
        #[arg(long)]
        sweep: Option<u64>,
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long, value_parser = parse_digits)]
        digits: Option<u32>,
        /// Run the worked-example fixtures (default when --sweep is absent).
        #[arg(long)]
        fixtures: bool,
    },
    /// OEIS b-file lines.
    Oeis {
        /// Smallest base per constant speed, from n = 0.
        #[arg(long, required = true)]
        min_bases: bool,
        #[arg(long, default_value_t = 20)]
        terms: u64,
    },
}

/// Plain rows for CSV and aligned text.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(self.header.clone());
        for row in &self.rows {
            out += &line(row.iter().map(String::as_str).collect());
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = self.header.join(",") + "\n";
        for row in &self.rows {
            out += &(row.join(",") + "\n");
        }
        out
    }
}

struct Rendered {
    text: String,
    json: Value,
    table: Table,
    /// Exit status for a completed run whose content is a failure (fixtures).
    status: i32,
}

impl Rendered {
    fn new(text: String, json: Value, table: Table) -> Self {
        Rendered { text, json, table, status: 0 }
    }
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted { .. } | Error::BudgetExhausted { .. } => 1,
        Error::FixtureMismatch { .. } => 3,
        Error::Cache(_) | Error::Invariant(_) | Error::ExactTowerTooLarge { .. } => 1,
        _ => 2,
    }
}

fn base_arg(s: &str) -> Result<TetrationBase> {
    TetrationBase::new(parse_decimal(s)?)
}

fn speed(a: &str, height: Option<u64>, digits: Option<u32>, config: &Config) -> Result<Rendered> {
    let a = base_arg(a)?;
    let (v, heights) = match height {
        Some(b) => {
            if b == 0 {
                return Err(Error::HeightTooSmall { min: 1, got: 0 });
            }
            let speeds = match digits {
                Some(d) => fixed_speeds(&a, b, d)?,
                None => speeds_through(&a, b, config.digits)?.0,
            };
            let heights: Vec<(u64, u64)> = (1..=b).zip(speeds).collect();
            (heights[b as usize - 1].1, heights)
        }
        None => {
            let report = match digits {
                Some(d) => constant_speed_at(&a, d)?,
                None => constant_speed_report_from(&a, config.digits)?,
            };
            (report.value, report.heights)
        }
    };
    let json = json!({ "a": a.to_string(), "V": v, "heights": heights });
    let table = Table {
        header: vec!["b", "V"],
        rows: heights.iter().map(|(b, s)| vec![b.to_string(), s.to_string()]).collect(),
    };
    Ok(Rendered::new(format!("{v}\n"), json, table))
}

fn fixed_speeds(a: &TetrationBase, max_height: u64, digits: u32) -> Result<Vec<u64>> {
    let (speeds, used) = speeds_through(a, max_height, digits)?;
    if used > digits {
        return Err(Error::PrecisionExhausted { digits: digits as u64 });
    }
    Ok(speeds)
}

fn profile(a: &str, max_height: u64, digits: Option<u32>, config: &Config) -> Result<Rendered> {
    let a = base_arg(a)?;
    let p = speed_profile(&a, max_height, digits.unwrap_or(config.digits))?;
    let rows: Vec<Vec<String>> = p
        .entries
        .iter()
        .map(|e| {
            let s = e.speed.map_or("?".to_string(), |v| v.to_string());
            vec![e.height.to_string(), e.frozen.to_string(), s]
        })
        .collect();
    let entries: Vec<Value> = p
        .entries
        .iter()
        .map(|e| json!({ "b": e.height, "nu": e.frozen.to_string(), "V": e.speed }))
        .collect();
    let json = json!({
        "a": a.to_string(),
        "digits": p.precision_digits,
        "entries": entries,
        "constant_speed": to_json(&p.constant_speed),
    });
    let table = Table { header: vec!["b", "nu", "V"], rows };
    let summary = match p.constant_speed {
        crate::speed::ConstantSpeed::Zero => "V(a) = 0\n".to_string(),
        crate::speed::ConstantSpeed::Stable { value, confirmed_at } => {
            format!("V(a) = {value} (settled at b = {confirmed_at})\n")
        }
        crate::speed::ConstantSpeed::Unresolved => "V(a) unresolved within this profile\n".to_string(),
    };
    let text = table.text() + &summary;
    Ok(Rendered::new(text, json, table))
}

fn min_base_cmd(n: u64, class: Option<u32>) -> Result<Rendered> {
    let value: Option<BigUint> = match class {
        None => Some(min_base(n)?),
        Some(s1) if n == 1 => smallest_speed_one(s1)?.map(BigUint::from),
        Some(s1) if n == 0 => {
            if !(1..=9).contains(&s1) {
                return Err(Error::ResidueClass(s1));
            }
            (s1 == 1).then(|| BigUint::from(1u32))
        }
        Some(s1) => Some(min_base_class(s1, n)?),
    };
    let shown = value.as_ref().map_or("none".to_string(), BigUint::to_string);
    let json = json!({ "n": n, "class": class, "min_base": value.map(|v| v.to_string()) });
    let table = Table { header: vec!["n", "class", "min_base"], rows: vec![vec![
        n.to_string(),
        class.map_or(String::new(), |c| c.to_string()),
        shown.clone(),
    ]] };
    Ok(Rendered::new(format!("{shown}\n"), json, table))
}

fn class_members(s1: u32, n: u64, count: usize) -> Result<Vec<BigUint>> {
    if !(1..=9).contains(&s1) {
        return Err(Error::ResidueClass(s1));
    }
    Ok(match n {
        0 => if s1 == 1 { vec![BigUint::from(1u32)] } else { Vec::new() }.into_iter().take(count).collect(),
        1 if s1 == 5 => Vec::new(),
        1 => (0u64..)
            .map(|j| BigUint::from(s1 as u64 + 10 * j))
            .filter(|a| a > &BigUint::from(1u32) && has_speed_one(a))
            .take(count)
            .collect(),
        _ => class_spec(s1, n)?.first(count),
    })
}

fn class_cmd(s1: u32, n: u64, count: usize) -> Result<Rendered> {
    let members = class_members(s1, n, count)?;
    let strings: Vec<String> = members.iter().map(BigUint::to_string).collect();
    let json = json!({ "class": s1, "n": n, "members": strings });
    let table = Table { header: vec!["a"], rows: strings.iter().map(|s| vec![s.clone()]).collect() };
    let text = strings.iter().map(|s| format!("{s}\n")).collect();
    Ok(Rendered::new(text, json, table))
}

fn root_cmd(i: u32, digits: u32) -> Result<Rendered> {
    if digits == 0 {
        return Err(Error::ZeroDigitLength);
    }
    let r = root_residue(i, digits)?;
    let s = r.to_padded_string();
    let json = json!({ "i": i, "digits": digits, "residue": s });
    let table = Table { header: vec!["i", "digits", "residue"], rows: vec![vec![i.to_string(), digits.to_string(), s.clone()]] };
    Ok(Rendered::new(format!("{s}\n"), json, table))
}

fn record_lookup(cache: &mut Option<PrimeCache>, n: u64, budget: u64) -> Result<PrimeSpeedRecord> {
    match cache {
        Some(c) => Ok(c.lookup(n, budget)?.0),
        None => smallest_prime_with_speed(n, budget),
    }
}

fn open_cache(flag: Option<PathBuf>, config: &Config) -> Result<Option<PrimeCache>> {
    flag.or_else(|| config.cache_path.clone()).map(PrimeCache::open).transpose()
}

fn record_row(r: &PrimeSpeedRecord) -> Vec<String> {
    vec![r.n.to_string(), r.q.to_string(), r.method.to_string(), r.oracle_checked.to_string()]
}

fn q_cmd(n: u64, cache: Option<PathBuf>, budget: u64, config: &Config) -> Result<Rendered> {
    let mut cache = open_cache(cache, config)?;
    let r = record_lookup(&mut cache, n, budget)?;
    let table = Table { header: vec!["n", "q", "method", "oracle_checked"], rows: vec![record_row(&r)] };
    Ok(Rendered::new(format!("{}\n", r.q), to_json(&r), table))
}

fn table1_cmd(max: u64) -> Result<Rendered> {
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in 1..=max {
        let (five, other) = if n == 1 {
            let other = (1..=9).filter_map(|s| smallest_speed_one(s).ok().flatten()).min();
            (None, other.map(BigUint::from).expect("speed-one bases exist"))
        } else {
            let other = [1, 2, 3, 4, 6, 7, 8, 9]
                .into_iter()
                .map(|s| min_base_class(s, n))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .expect("eight classes");
            (Some(min_base_class(5, n)?), other)
        };
        let five_s = five.as_ref().map(BigUint::to_string);
        rows.push(vec![n.to_string(), five_s.clone().unwrap_or_else(|| "-".into()), other.to_string()]);
        json_rows.push(json!({ "n": n, "class5": five_s, "other_classes": other.to_string() }));
    }
    let table = Table { header: vec!["n", "class5", "other_classes"], rows };
    Ok(Rendered::new(table.text(), json!({ "rows": json_rows }), table))
}

fn table2_cmd(max: u64, extra: &[u64], cache: Option<PathBuf>, budget: u64, config: &Config) -> Result<Rendered> {
    let mut cache = open_cache(cache, config)?;
    let table = q_table_with(max, extra, |n| record_lookup(&mut cache, n, budget))?;
    let indices = q_table_indices(max, extra);
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for r in table.rows(&indices) {
        let drop = table.drops.contains(&r.n);
        let mut row = record_row(r);
        row.push(drop.to_string());
        rows.push(row);
        json_rows.push(json!({
            "n": r.n,
            "q": r.q.to_string(),
            "method": r.method,
            "oracle_checked": r.oracle_checked,
            "drop": drop,
        }));
    }
    let drops: Vec<u64> = table.drops.iter().copied().filter(|n| indices.contains(n)).collect();
    let t = Table { header: vec!["n", "q", "method", "oracle_checked", "drop"], rows };
    Ok(Rendered::new(t.text(), json!({ "rows": json_rows, "drops": drops }), t))
}

fn verify_cmd(sweep_max: Option<u64>, from: u64, digits: Option<u32>, fixtures: bool, config: &Config) -> Result<Rendered> {
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut status = 0;
    if let Some(a_max) = sweep_max {
        let report = sweep(from, a_max, digits.unwrap_or(config.digits).max(crate::verify::SWEEP_MIN_DIGITS))?;
        text += &format!(
            "sweep {}..={}: {} bases, {} mismatches\n",
            report.range.0,
            report.range.1,
            report.checked,
            report.mismatches.len()
        );
        for m in &report.mismatches {
            text += &format!("  a = {}: oracle {}, formula {}, classes {:?}\n", m.a, m.oracle, m.formula, m.membership);
            rows.push(vec!["sweep".into(), m.a.clone(), m.oracle.to_string(), m.formula.to_string()]);
        }
        if !report.passed() {
            status = 3;
        }
        json.insert("sweep".into(), to_json(&report));
    }
    if fixtures || sweep_max.is_none() {
        let outcomes = run_fixtures()?;
        for f in &outcomes {
            let mark = if f.passed { "PASS" } else { "FAIL" };
            text += &format!("{mark} {}: expected {}, got {}\n", f.name, f.expected, f.actual);
            rows.push(vec!["fixture".into(), f.name.clone(), f.expected.clone(), f.actual.clone()]);
            if !f.passed {
                status = 3;
            }
        }
        json.insert("fixtures".into(), to_json(&outcomes));
    }
    let table = Table { header: vec!["kind", "subject", "expected", "actual"], rows };
    Ok(Rendered { text, json: Value::Object(json), table, status })
}

fn oeis_cmd(terms: u64) -> Result<Rendered> {
    let values = (0..terms).map(min_base).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> =
        values.iter().enumerate().map(|(n, v)| vec![n.to_string(), v.to_string()]).collect();
    let text = rows.iter().map(|r| format!("{} {}\n", r[0], r[1])).collect();
    let json = json!({
        "terms": values.iter().enumerate().map(|(n, v)| json!({ "n": n, "a": v.to_string() })).collect::<Vec<_>>()
    });
    Ok(Rendered::new(text, json, Table { header: vec!["n", "a"], rows }))
}

fn dispatch(command: Command, config: &Config) -> Result<Rendered> {
    match command {
        Command::Speed { a, height, digits } => speed(&a, height, digits, config),
        Command::Profile { a, max_height, digits } => profile(&a, max_height, digits, config),
        Command::MinBase { n, class } => min_base_cmd(n, class),
        Command::Class { s1, n, count } => class_cmd(s1, n, count),
        Command::Root { i, digits } => root_cmd(i, digits),
        Command::Q { n, cache, budget } => q_cmd(n, cache, budget, config),
        Command::Table1 { max } => table1_cmd(max),
        Command::Table2 { max, extra, cache, budget } => table2_cmd(max, &extra, cache, budget, config),
        Command::Verify { sweep, from, digits, fixtures } => verify_cmd(sweep, from, digits, fixtures, config),
        Command::Oeis { min_bases: _, terms } => oeis_cmd(terms),
    }
}

/// Parse `args` (program name first), run, and write to `out`/`err`.
pub fn run<I, T>(args: I, config: Config, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let mut config = config;
    config.output = if cli.json { OutputFormat::Json } else { cli.output };
    match dispatch(cli.command, &config) {
        Ok(r) => {
            let body = match config.output {
                OutputFormat::Text => r.text,
                OutputFormat::Json => serde_json::to_string(&r.json).expect("json value") + "\n",
                OutputFormat::Csv => r.table.csv(),
            };
            if out.write_all(body.as_bytes()).is_err() {
                return 1;
            }
            r.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary: reads `TCS_DIGITS` and the process arguments.
pub fn main_with_env() -> i32 {
    let env = std::env::var(DIGITS_ENV).ok();
    let config = match Config::from_env_value(env.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {DIGITS_ENV}: {msg}");
            return 2;
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), config, &mut stdout.lock(), &mut stderr.lock())
}
