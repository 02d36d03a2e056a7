use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use charnum::cache::Cache;
use charnum::scalar::{format_count, Count};
use charnum::special_tangent::Route;
use charnum::tables::{self, Body, Cell, Table};
use charnum::{BlowupClass, Constraint, Engine, EngineError, RawConstraint};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

const USAGE: u8 = 1;
const MISMATCH: u8 = 2;
const INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "charnum", version, about = "Exact characteristic numbers of rational, nodal and elliptic curves in P^r")]
struct Cli {
    /// Persist computed counts to this file and reuse them on later runs.
    #[arg(long, global = true, env = "CHARNUM_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads for table generation (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a single count.
    Count(CountArgs),
    /// Regenerate a reference table, optionally checking it.
    Table(TableArgs),
    /// Regenerate and check every reference table.
    Verify,
    /// Reduce or integrate a class in the blowup of P^r x P^r.
    Chow(ChowArgs),
    /// Print the class of a two-marked family in the blowup.
    Family(FamilyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Rational curves.
    Rational,
    /// Marked point with special tangents (--mark, --wtang).
    W,
    /// Two components meeting twice, constraints per component (--g1, --g2).
    Rr2,
    /// Two components meeting twice, one constraint shared out (--delta).
    Rr2Total,
    /// Rational curves with a node (node condition via `node:<k>`).
    Nodal,
    /// Elliptic curves with fixed generic j-invariant.
    J,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Divisor,
    Blowup,
}

#[derive(clap::Args)]
struct CountArgs {
    kind: Kind,
    /// Ambient projective dimension, 2 to 5.
    #[arg(long)]
    r: u8,
    /// Degree, or `d1,d2` for two-component counts.
    #[arg(long)]
    d: String,
    /// Constraint such as `t:1;c2:3;c3:4;node:1`.
    #[arg(long, default_value = "")]
    delta: String,
    /// Constraint on the first component.
    #[arg(long, default_value = "")]
    g1: String,
    /// Constraint on the second component.
    #[arg(long, default_value = "")]
    g2: String,
    /// Node codimensions `k,l` for two-component counts.
    #[arg(long, default_value = "0,0")]
    nodes: String,
    /// Codimension of the space containing the marked point.
    #[arg(long, default_value_t = 0)]
    mark: u32,
    /// Number of special tangents at the marked point.
    #[arg(long, default_value_t = 0)]
    wtang: u32,
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    /// Count unordered pairs when both components carry the same data.
    #[arg(long)]
    unordered: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(clap::Args)]
struct TableArgs {
    /// Embedded table number, 1 to 18.
    #[arg(required_unless_present = "fixture")]
    id: Option<u32>,
    /// Read the table from a fixture file instead.
    #[arg(long, conflicts_with = "id")]
    fixture: Option<PathBuf>,
    /// Compare against the embedded reference values.
    #[arg(long)]
    verify: bool,
    /// Only this column (e.g. `J`, `N_l`).
    #[arg(long)]
    col: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(clap::Args)]
struct ChowArgs {
    #[arg(long)]
    r: u8,
    /// Print the degree of a top-dimensional class instead of its normal form.
    #[arg(long)]
    integrate: bool,
    expr: String,
}

#[derive(clap::Args)]
struct FamilyArgs {
    #[arg(long)]
    r: u8,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value = "")]
    delta: String,
}

/// Error carrying the process exit code.
struct Failure(u8, anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<EngineError>() {
            Some(EngineError::Invariant(_)) | Some(EngineError::FamilyClass { .. }) => INVARIANT,
            _ => USAGE,
        };
        Failure(code, e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    }
    let engine = match &cli.cache {
        Some(path) => Engine::with_cache(Cache::with_file(path)),
        None => Engine::new(),
    };
    match run(&engine, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(engine: &Engine, command: Command) -> Result<(), Failure> {
    match command {
        Command::Count(args) => {
            let v = count(engine, &args)?;
            println!("{}", format_count(&v));
            Ok(())
        }
        Command::Table(args) => {
            let table = match (&args.fixture, args.id) {
                (Some(path), _) => {
                    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    tables::parse(&src).with_context(|| format!("parsing {}", path.display()))?
                }
                (None, Some(id)) => tables::get(id).ok_or_else(|| anyhow!("no table {id} (expected 1..=18)"))?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            table_command(engine, &table, &args)
        }
        Command::Verify => {
            let mut failed = 0;
            for table in tables::all() {
                let results = evaluate_cells(engine, &table.cells())?;
                let bad = results.iter().filter(|(c, v)| *v != c.expected).count();
                println!("table {:>2}: {} cells, {} mismatches", table.id, results.len(), bad);
                report_mismatches(table.id, &results);
                failed += bad;
            }
            if failed > 0 {
                return Err(Failure(MISMATCH, anyhow!("{failed} cells differ from the reference tables")));
            }
            Ok(())
        }
        Command::Chow(args) => {
            check_r(args.r)?;
            let class = BlowupClass::<Count>::parse(args.r, &args.expr).map_err(anyhow::Error::from)?;
            if args.integrate {
                println!("{}", format_count(&class.integrate().map_err(anyhow::Error::from)?));
            } else {
                println!("{class}");
            }
            Ok(())
        }
        Command::Family(args) => {
            let (c, mult) = constraint(&args.delta, args.r, args.d)?;
            match engine.family_class(args.r, args.d, &c).map_err(anyhow::Error::from)? {
                Some(fc) => println!("{}", fc.class.scale(&mult)),
                None => println!("0"),
            }
            Ok(())
        }
    }
}

fn check_r(r: u8) -> Result<()> {
    if !(1..=5).contains(&r) {
        bail!("--r must be between 1 and 5");
    }
    Ok(())
}

fn constraint(text: &str, r: u8, d: u32) -> Result<(Constraint, Count)> {
    let raw = RawConstraint::parse(text, r).with_context(|| format!("constraint `{text}`"))?;
    Ok(charnum::constraints::normalize_hyperplanes(&raw, d))
}

fn numbers(text: &str, what: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|x| x.trim().parse::<u32>().with_context(|| format!("{what} `{text}`")))
        .collect()
}

fn two(text: &str, what: &str) -> Result<(u32, u32)> {
    match numbers(text, what)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => bail!("{what} must be two numbers `a,b`, got `{text}`"),
    }
}

fn count(engine: &Engine, a: &CountArgs) -> Result<Count> {
    let r = a.r;
    let v = match a.kind {
        Kind::Rational | Kind::W | Kind::Nodal | Kind::J => {
            let d = numbers(&a.d, "degree")?;
            let &[d] = d.as_slice() else { bail!("--d takes a single degree for this kind") };
            let (c, mult) = constraint(&a.delta, r, d)?;
            let v = match a.kind {
                Kind::Rational => engine.rational(r, d, &c)?,
                Kind::Nodal => engine.nodal(r, d, &c)?,
                Kind::J => engine.elliptic(r, d, &c)?,
                _ => match a.route {
                    RouteArg::Auto => engine.special(r, d, &c, a.mark, a.wtang)?,
                    RouteArg::Divisor => engine.special_via(Route::Divisor, r, d, &c, a.mark, a.wtang)?,
                    RouteArg::Blowup => engine.special_via(Route::Blowup, r, d, &c, a.mark, a.wtang)?,
                },
            };
            v * mult
        }
        Kind::Rr2 | Kind::Rr2Total => {
            let (d1, d2) = two(&a.d, "degrees")?;
            let (k, l) = two(&a.nodes, "nodes")?;
            if a.kind == Kind::Rr2Total {
                // a hyperplane meets the pair in d1 + d2 points
                let (c, mult) = constraint(&a.delta, r, d1 + d2)?;
                engine.rr2_total(r, d1, d2, &c, k, l)? * mult
            } else {
                let (g1, m1) = constraint(&a.g1, r, d1)?;
                let (g2, m2) = constraint(&a.g2, r, d2)?;
                let mut v = engine.rr2(r, d1, d2, &g1, &g2, k, l)? * m1 * m2;
                if a.unordered && d1 == d2 && g1 == g2 {
                    v /= Count::from_integer(2.into());
                }
                v
            }
        }
    };
    Ok(v)
}

fn evaluate_cells(engine: &Engine, cells: &[Cell]) -> Result<Vec<(Cell, Count)>, Failure> {
    let results: Vec<_> = cells.par_iter().map(|c| engine.evaluate(&c.query).map(|v| (c.clone(), v))).collect();
    results.into_iter().map(|r| r.map_err(|e| Failure::from(anyhow::Error::from(e)))).collect()
}

fn report_mismatches(id: u32, results: &[(Cell, Count)]) {
    for (cell, got) in results.iter().filter(|(c, v)| *v != c.expected) {
        eprintln!(
            "mismatch: table {id} {} {}: expected {}, got {}",
            cell.row,
            cell.column,
            format_count(&cell.expected),
            format_count(got)
        );
    }
}

fn table_command(engine: &Engine, table: &Table, args: &TableArgs) -> Result<(), Failure> {
    let mut cells = table.cells();
    if let Some(col) = &args.col {
        cells.retain(|c| &c.column == col);
        if cells.is_empty() {
            return Err(anyhow!("table {} has no column `{col}`", table.id).into());
        }
    }
    let results = evaluate_cells(engine, &cells)?;
    let sep = if args.format == Format::Csv { "," } else { "  " };
    let mut out = std::io::stdout().lock();
    let mut emit = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match &table.body {
        Body::Nodal { columns, rows, .. } => {
            let labels: Vec<&str> = columns
                .iter()
                .map(|(l, _)| l.as_str())
                .filter(|l| args.col.as_deref().is_none_or(|c| c == *l))
                .collect();
            let mut grid: Vec<Vec<String>> = vec![std::iter::once("t").chain(labels.iter().copied()).map(str::to_string).collect()];
            for row in rows {
                let tag = format!("t={}", row.tangencies);
                let mut line = vec![row.tangencies.to_string()];
                for label in &labels {
                    let v = results
                        .iter()
                        .find(|(c, _)| c.row == tag && c.column == *label)
                        .map_or_else(|| "-".to_string(), |(_, v)| format_count(v));
                    line.push(v);
                }
                grid.push(line);
            }
            for line in align(&grid, args.format) {
                emit(line.join(sep));
            }
        }
        _ => {
            let label = if matches!(table.body, Body::Special(_)) { "mark,special" } else { "nodes" };
            let mut grid = vec![vec!["conditions".to_string(), label.to_string(), "count".to_string()]];
            for (cell, v) in &results {
                grid.push(vec![cell.row.clone(), cell.column.clone(), format_count(v)]);
            }
            for line in align(&grid, args.format) {
                emit(line.join(sep));
            }
        }
    }
    if args.verify {
        report_mismatches(table.id, &results);
        let bad = results.iter().filter(|(c, v)| *v != c.expected).count();
        if bad > 0 {
            return Err(Failure(MISMATCH, anyhow!("{bad} of {} cells differ", results.len())));
        }
        eprintln!("table {}: all {} cells match", table.id, results.len());
    }
    Ok(())
}

fn align(grid: &[Vec<String>], format: Format) -> Vec<Vec<String>> {
    if format == Format::Csv {
        return grid.to_vec();
    }
    let width = grid.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|i| grid.iter().filter_map(|r| r.get(i)).map(String::len).max().unwrap_or(0))
        .collect();
    grid.iter()
        .map(|r| {
            r.iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect()
        })
        .collect()
}
