use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use partmech::dist::brev_capped;
use partmech::exact::solve_exact;
use partmech::generators::{self, two_gap_reference_partition, GenSpec};
use partmech::mechanism::{eval_menu, eval_partition, optimize_prices};
use partmech::ptas::{solve_ptas, PtasConfig};
use partmech::rational::{format_rational, parse_rational, to_decimal};
use partmech::{srev, ProductInstance, Rational, SolveReport};

use crate::args::{
    Cli, Command, CompareArgs, EvalArgs, Family, GenArgs, Method, PtasArgs, RandomArgs, SolveArgs,
};
use crate::error::CliError;
use crate::formats::{
    read_instance, read_json, to_json, write_text, GadgetMetaFile, InstanceFile, MechanismFile,
    MenuFile,
};

const DECIMALS: usize = 6;

/// Runs a parsed command line, writing the primary output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
            let mut buf: Vec<u8> = Vec::new();
            let result = pool.install(|| dispatch(&cli.command, &mut buf));
            emit(out, &String::from_utf8_lossy(&buf))?;
            result
        }
        None => dispatch(&cli.command, out),
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn usage_rational(flag: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

pub fn parse_edges(s: &str) -> Result<Vec<(usize, usize, usize)>, CliError> {
    s.split(';')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            let parts: Vec<usize> = e
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad hyperedge {e:?}")))?;
            match parts.as_slice() {
                &[a, b, c] => Ok((a, b, c)),
                _ => Err(CliError::Usage(format!(
                    "hyperedge {e:?} needs three coordinates"
                ))),
            }
        })
        .collect()
}

fn random_spec(r: &RandomArgs, seed: u64) -> Result<GenSpec, CliError> {
    let n = r.n.unwrap_or(6);
    Ok(GenSpec::Random {
        n: usize::try_from(n).map_err(|_| CliError::Usage("--n is too large".into()))?,
        max_support_size: r.max_support,
        value_bound: r.value_bound,
        seed,
    })
}

fn gen_spec(a: &GenArgs) -> Result<GenSpec, CliError> {
    Ok(match a.family {
        Family::TwoBundles => GenSpec::TwoBundles,
        Family::HartNisan => GenSpec::HartNisan,
        Family::TwoGap => GenSpec::TwoGap {
            n: a.random
                .n
                .ok_or_else(|| CliError::Usage("two-gap needs --n".into()))?,
        },
        Family::ThreeDm => GenSpec::ThreeDm {
            edges: parse_edges(
                a.edges
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("3dm needs --edges".into()))?,
            )?,
        },
        Family::Random => random_spec(&a.random, a.random.seed)?,
    })
}

/// Default gadget metadata path: `inst.json` becomes `inst.meta.json`.
pub fn meta_path_for(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (inst, meta) = gen_spec(a)?.generate()?;
    let text = to_json(&InstanceFile::from_instance(&inst));
    match &a.out {
        Some(p) => write_text(p, &text)?,
        None => emit(out, &text)?,
    }
    if let Some(meta) = meta {
        let path = a
            .meta
            .clone()
            .or_else(|| a.out.as_deref().map(meta_path_for));
        match path {
            Some(p) => write_text(&p, &to_json(&GadgetMetaFile::from_meta(&meta)))?,
            None => eprintln!("note: pass --out or --meta to save the gadget metadata"),
        }
    }
    Ok(())
}

pub fn ptas_config(p: &PtasArgs, support_cap: usize) -> Result<PtasConfig, CliError> {
    let mut cfg = PtasConfig::new(
        usage_rational("eps", &p.eps)?,
        usage_rational("delta", &p.delta)?,
    )?;
    cfg.ell_max = p.ell_max;
    cfg.grid_levels = p.grid_levels;
    cfg.low_threshold_exp = p.low_exp;
    cfg.support_cap = support_cap;
    let cfg = cfg.with_env_overrides();
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
pub struct SolveReportJson {
    pub method: &'static str,
    pub revenue: String,
    pub revenue_decimal: String,
    pub srev: String,
    pub srev_decimal: String,
    pub brev: Option<String>,
    pub brev_decimal: Option<String>,
    pub brev_error: Option<String>,
    pub partitions_examined: u64,
    pub candidates_skipped: u64,
    pub truncated: bool,
    pub elapsed_seconds: f64,
    pub mechanism: MechanismFile,
}

pub fn solve(inst: &ProductInstance, a: &SolveArgs) -> Result<SolveReport, CliError> {
    Ok(match a.method {
        Method::Exact => solve_exact(inst, a.max_n)?,
        Method::Ptas => solve_ptas(inst, &ptas_config(&a.ptas, a.support_cap)?)?,
    })
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&a.instance)?;
    let report = solve(&inst, a)?;
    let (s, _) = srev(&inst);
    let b = brev_capped(&inst, a.support_cap);
    let mechanism = MechanismFile::from_partition(&report.best);
    let json = SolveReportJson {
        method: match a.method {
            Method::Exact => "exact",
            Method::Ptas => "ptas",
        },
        revenue: format_rational(&report.revenue),
        revenue_decimal: to_decimal(&report.revenue, DECIMALS),
        srev: format_rational(&s),
        srev_decimal: to_decimal(&s, DECIMALS),
        brev: b.as_ref().ok().map(|q| format_rational(&q.revenue)),
        brev_decimal: b.as_ref().ok().map(|q| to_decimal(&q.revenue, DECIMALS)),
        brev_error: b.as_ref().err().map(|e| e.to_string()),
        partitions_examined: report.partitions_examined,
        candidates_skipped: report.candidates_skipped,
        truncated: report.truncated,
        elapsed_seconds: report.elapsed.as_secs_f64(),
        mechanism: mechanism.clone(),
    };
    if let Some(p) = &a.out {
        write_text(p, &to_json(&mechanism))?;
    }
    let text = to_json(&json);
    if let Some(p) = &a.report {
        write_text(p, &text)?;
    }
    emit(out, &text)?;
    if report.truncated {
        return Err(CliError::BudgetExhausted(report.partitions_examined));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EvalReportJson {
    pub kind: &'static str,
    pub revenue: String,
    pub revenue_decimal: String,
}

pub fn evaluate(a: &EvalArgs) -> Result<Rational, CliError> {
    let inst = read_instance(&a.instance)?;
    if a.menu {
        let menu = read_json::<MenuFile>(&a.mechanism)?.to_menu()?;
        Ok(eval_menu(&inst, &menu)?)
    } else {
        let pp = read_json::<MechanismFile>(&a.mechanism)?.to_partition()?;
        Ok(eval_partition(&inst, &pp)?)
    }
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let revenue = evaluate(a)?;
    let json = EvalReportJson {
        kind: if a.menu { "menu" } else { "partition" },
        revenue: format_rational(&revenue),
        revenue_decimal: to_decimal(&revenue, DECIMALS),
    };
    emit(out, &to_json(&json))
}

/// One comparison row. `None` means the column was not requested or does
/// not apply; `Err` carries a per-row error marker.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub instance_id: String,
    pub n: usize,
    pub srev: Rational,
    pub brev: Result<Rational, &'static str>,
    pub prev_exact: Option<Result<Rational, &'static str>>,
    pub prev_ptas: Option<Result<Rational, &'static str>>,
    pub prev_lower: Option<Result<Rational, &'static str>>,
    pub elapsed_exact: Option<Duration>,
    pub elapsed_ptas: Option<Duration>,
    pub elapsed_lower: Option<Duration>,
}

impl CompareRow {
    /// Best partition revenue found over `max(srev, brev)`.
    pub fn ratio(&self) -> Option<Rational> {
        let brev = self.brev.as_ref().ok()?;
        let floor = std::cmp::max(&self.srev, brev);
        if *floor <= Rational::from_integer(0.into()) {
            return None;
        }
        [&self.prev_exact, &self.prev_ptas, &self.prev_lower]
            .into_iter()
            .filter_map(|c| c.as_ref().and_then(|r| r.as_ref().ok()))
            .max()
            .map(|best| best / floor)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Methods {
    exact: bool,
    ptas: bool,
    lower: bool,
}

fn parse_methods(s: &str) -> Result<Methods, CliError> {
    let mut m = Methods::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "exact" => m.exact = true,
            "ptas" => m.ptas = true,
            "lower" => m.lower = true,
            other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
        }
    }
    Ok(m)
}

/// A row source: id, instance, and an optional reference partition.
type Source = (
    String,
    Result<ProductInstance, CliError>,
    Option<Vec<Vec<usize>>>,
);

fn sources(a: &CompareArgs) -> Result<Vec<Source>, CliError> {
    let mut rows: Vec<Source> = a
        .instances
        .iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            (id, read_instance(p), None)
        })
        .collect();
    match a.family {
        None => {}
        Some(Family::TwoBundles) => rows.push((
            "two-bundles".into(),
            Ok(generators::gen_two_bundles()),
            None,
        )),
        Some(Family::HartNisan) => {
            rows.push(("hart-nisan".into(), Ok(generators::gen_hart_nisan()), None))
        }
        Some(Family::TwoGap) => {
            for s in a.sizes.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let n: u64 = s
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad size {s:?}")))?;
                let inst = generators::gen_two_gap(n).map_err(CliError::from);
                rows.push((
                    format!("two-gap-n{n}"),
                    inst,
                    Some(two_gap_reference_partition(n)),
                ));
            }
        }
        Some(Family::Random) => {
            for k in 0..a.count {
                let seed = a.random.seed.wrapping_add(k);
                let inst = random_spec(&a.random, seed)?
                    .generate()
                    .map(|g| g.0)
                    .map_err(CliError::from);
                rows.push((format!("random-s{seed}"), inst, None));
            }
        }
        Some(Family::ThreeDm) => {
            return Err(CliError::Usage(
                "compare cannot sweep 3dm; generate instance files instead".into(),
            ))
        }
    }
    Ok(rows)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn solve_cell(r: Result<SolveReport, CliError>) -> Result<Rational, &'static str> {
    match r {
        Ok(rep) if rep.truncated => {
            Err(CliError::BudgetExhausted(rep.partitions_examined).marker())
        }
        Ok(rep) => Ok(rep.revenue),
        Err(e) => Err(e.marker()),
    }
}

/// Computes every requested column; errors inside a row become markers.
pub fn compare_rows(a: &CompareArgs) -> Result<Vec<CompareRow>, CliError> {
    let methods = parse_methods(&a.methods)?;
    let cfg = if methods.ptas {
        Some(ptas_config(&a.ptas, a.support_cap)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for (id, inst, reference) in sources(a)? {
        let inst = match inst {
            Ok(i) => i,
            Err(e) => {
                eprintln!("{id}: {e}");
                continue;
            }
        };
        let (s, _) = srev(&inst);
        let b = brev_capped(&inst, a.support_cap)
            .map(|q| q.revenue)
            .map_err(|e| CliError::from(e).marker());
        let mut row = CompareRow {
            instance_id: id,
            n: inst.n(),
            srev: s,
            brev: b,
            prev_exact: None,
            prev_ptas: None,
            prev_lower: None,
            elapsed_exact: None,
            elapsed_ptas: None,
            elapsed_lower: None,
        };
        if methods.exact {
            let (r, t) = timed(|| solve_exact(&inst, a.max_n).map_err(CliError::from));
            row.prev_exact = Some(solve_cell(r));
            row.elapsed_exact = Some(t);
        }
        if let Some(cfg) = &cfg {
            let (r, t) = timed(|| solve_ptas(&inst, cfg).map_err(CliError::from));
            row.prev_ptas = Some(solve_cell(r));
            row.elapsed_ptas = Some(t);
        }
        if methods.lower {
            if let Some(blocks) = &reference {
                let (r, t) = timed(|| optimize_prices(&inst, blocks));
                row.prev_lower = Some(
                    r.map(|(_, rev)| rev)
                        .map_err(|e| CliError::from(e).marker()),
                );
                row.elapsed_lower = Some(t);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 11] = [
    "instance_id",
    "n",
    "srev",
    "brev",
    "prev_exact",
    "prev_ptas",
    "prev_lower",
    "ratio_prev_over_maxsb",
    "elapsed_exact_ms",
    "elapsed_ptas_ms",
    "elapsed_lower_ms",
];

fn cell(c: &Option<Result<Rational, &'static str>>) -> String {
    match c {
        None => String::new(),
        Some(Ok(x)) => to_decimal(x, DECIMALS),
        Some(Err(m)) => (*m).to_string(),
    }
}

fn ms(d: &Option<Duration>) -> String {
    d.map(|d| format!("{:.3}", d.as_secs_f64() * 1e3))
        .unwrap_or_default()
}

pub fn render_csv(rows: &[CompareRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let brev = match &r.brev {
            Ok(x) => to_decimal(x, DECIMALS),
            Err(m) => (*m).to_string(),
        };
        let ratio = r
            .ratio()
            .map(|x| to_decimal(&x, DECIMALS))
            .unwrap_or_default();
        w.write_record([
            r.instance_id.clone(),
            r.n.to_string(),
            to_decimal(&r.srev, DECIMALS),
            brev,
            cell(&r.prev_exact),
            cell(&r.prev_ptas),
            cell(&r.prev_lower),
            ratio,
            ms(&r.elapsed_exact),
            ms(&r.elapsed_ptas),
            ms(&r.elapsed_lower),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = render_csv(&compare_rows(a)?);
    match &a.out {
        Some(p) => write_text(p, &text),
        None => emit(out, &text),
    }
}
