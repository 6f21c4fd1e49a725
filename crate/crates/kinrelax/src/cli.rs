//! Run configuration, key-value config parsing and case orchestration.

use crate::harness::couette::{couette_case, profile_csv, CouetteKind};
use crate::harness::gaussian::{self, GaussianVariant};
use crate::harness::report::{self, convergence_csv, Ledger};
use crate::harness::shock;
use crate::stability;
use crate::{Error, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    GaussianA,
    GaussianB,
    GaussianC,
    CouetteIso,
    CouetteAdiab,
    ShockBl,
    StabilityTable,
    Knudsen,
}

impl CaseId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian_a" => CaseId::GaussianA,
            "gaussian_b" => CaseId::GaussianB,
            "gaussian_c" => CaseId::GaussianC,
            "couette_iso" => CaseId::CouetteIso,
            "couette_adiab" => CaseId::CouetteAdiab,
            "shock_bl" => CaseId::ShockBl,
            "stability_table" => CaseId::StabilityTable,
            "knudsen" => CaseId::Knudsen,
            other => return Err(Error::config(format!("unknown case '{other}'"))),
        })
    }

    pub fn id(self) -> &'static str {
        match self {
            CaseId::GaussianA => "gaussian_a",
            CaseId::GaussianB => "gaussian_b",
            CaseId::GaussianC => "gaussian_c",
            CaseId::CouetteIso => "couette_iso",
            CaseId::CouetteAdiab => "couette_adiab",
            CaseId::ShockBl => "shock_bl",
            CaseId::StabilityTable => "stability_table",
            CaseId::Knudsen => "knudsen",
        }
    }

    fn gaussian(self) -> Option<GaussianVariant> {
        match self {
            CaseId::GaussianA => Some(GaussianVariant::A),
            CaseId::GaussianB => Some(GaussianVariant::B),
            CaseId::GaussianC => Some(GaussianVariant::C),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedSetting {
    CaseDefault,
    Fixed(f64),
    Dynamic,
}

/// Parsed run configuration; unset options fall back to the per-case
/// defaults of the validation setups.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: CaseId,
    pub n: Vec<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub order: Option<usize>,
    pub iterations: Option<usize>,
    pub cfl: Option<f64>,
    pub speed: SpeedSetting,
    pub speed_factor: f64,
    pub t_end: Option<f64>,
    pub out_dir: PathBuf,
    pub snapshots: Option<Vec<f64>>,
    pub threads: usize,
    pub re: f64,
    pub a_multipliers: Vec<f64>,
}

impl RunConfig {
    pub fn new(case: CaseId) -> Self {
        RunConfig {
            case,
            n: Vec::new(),
            nx: None,
            ny: None,
            order: None,
            iterations: None,
            cfl: None,
            speed: SpeedSetting::CaseDefault,
            speed_factor: 2.1,
            t_end: None,
            out_dir: PathBuf::from("out"),
            snapshots: None,
            threads: 0,
            re: 200.0,
            a_multipliers: vec![2.1, 4.2, 8.4, 16.8, 33.6],
        }
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(4)
    }

    /// Kinetic CFL number: 1 at orders 1 and 4, 0.8 at order 2.
    pub fn cfl(&self) -> f64 {
        self.cfl
            .unwrap_or(if self.order() == 2 { 0.8 } else { 1.0 })
    }

    pub fn iterations(&self) -> usize {
        self.iterations.unwrap_or(self.order())
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::config(format!("bad integer for '{key}': '{v}'")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::config(format!("bad number for '{key}': '{v}'")))
}

fn parse_list<T, F: Fn(&str) -> Result<T>>(v: &str, f: F) -> Result<Vec<T>> {
    v.split(',').map(|s| f(s.trim())).collect()
}

/// Parse a `key = value` per-line configuration. `#` starts a comment;
/// unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut case = None;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if key == "case" {
            case = Some(CaseId::parse(&value)?);
        } else {
            pairs.push((key, value));
        }
    }
    let case = case.ok_or_else(|| Error::config("missing required key 'case'"))?;
    let mut cfg = RunConfig::new(case);
    for (key, value) in pairs {
        match key.as_str() {
            "n" => cfg.n = parse_list(&value, |s| parse_usize("n", s))?,
            "nx" => cfg.nx = Some(parse_usize("nx", &value)?),
            "ny" => cfg.ny = Some(parse_usize("ny", &value)?),
            "order" => {
                let o = parse_usize("order", &value)?;
                if !matches!(o, 1 | 2 | 4) {
                    return Err(Error::config(format!("unsupported order {o} (use 1, 2 or 4)")));
                }
                cfg.order = Some(o);
            }
            "iterations" => cfg.iterations = Some(parse_usize("iterations", &value)?),
            "cfl" => cfg.cfl = Some(parse_f64("cfl", &value)?),
            "kinetic_speed" => {
                cfg.speed = if value == "dynamic" {
                    SpeedSetting::Dynamic
                } else {
                    SpeedSetting::Fixed(parse_f64("kinetic_speed", &value)?)
                };
            }
            "speed_factor" => cfg.speed_factor = parse_f64("speed_factor", &value)?,
            "t_end" => cfg.t_end = Some(parse_f64("t_end", &value)?),
            "out_dir" => cfg.out_dir = PathBuf::from(&value),
            "snapshots" => cfg.snapshots = Some(parse_list(&value, |s| parse_f64("snapshots", s))?),
            "threads" => cfg.threads = parse_usize("threads", &value)?,
            "re" => cfg.re = parse_f64("re", &value)?,
            "a_multipliers" => {
                cfg.a_multipliers = parse_list(&value, |s| parse_f64("a_multipliers", s))?
            }
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
    }
    Ok(cfg)
}

/// What a run produced: stdout lines plus written artifact paths.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

impl RunSummary {
    fn push(&mut self, s: String) {
        self.lines.push(s);
    }

    fn artifact(&mut self, p: PathBuf) {
        self.artifacts.push(p);
    }
}

pub fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

/// Execute a configured run, writing artifacts under `out_dir`.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    init_threads(cfg.threads);
    std::fs::create_dir_all(&cfg.out_dir)?;
    let start = Instant::now();
    let mut summary = match cfg.case {
        CaseId::StabilityTable => run_stability(&cfg.out_dir),
        CaseId::GaussianA | CaseId::GaussianB | CaseId::GaussianC => run_gaussian(cfg),
        CaseId::Knudsen => run_knudsen(cfg),
        CaseId::CouetteIso | CaseId::CouetteAdiab => run_couette(cfg),
        CaseId::ShockBl => run_shock(cfg),
    }?;
    summary.push(format!(
        "wall_clock_s={:.3}",
        start.elapsed().as_secs_f64()
    ));
    Ok(summary)
}

fn run_stability(out_dir: &Path) -> Result<RunSummary> {
    let rows = stability::compute_table(4096, 1e-3)?;
    let csv = stability::table_csv(&rows);
    let path = out_dir.join("stability_table.csv");
    report::write_text(&path, &csv)?;
    let mut summary = RunSummary::default();
    summary.push(format!("stability table: {} pairings", rows.len()));
    summary.artifact(path);
    Ok(summary)
}

fn run_gaussian(cfg: &RunConfig) -> Result<RunSummary> {
    let variant = cfg.case.gaussian().expect("gaussian case");
    let orders: Vec<usize> = match cfg.order {
        Some(o) => vec![o],
        None => {
            if cfg.n.len() > 1 {
                vec![1, 2, 4]
            } else {
                vec![4]
            }
        }
    };
    let grids = if cfg.n.is_empty() { vec![40] } else { cfg.n.clone() };
    let speed = match cfg.speed {
        SpeedSetting::Fixed(a) => Some(a),
        _ => None,
    };
    gaussian_convergence(variant, &orders, &grids, speed, &cfg.out_dir)
}

/// Convergence study over grids and orders; shared by `run` configs with a
/// grid list and by the `convergence` subcommand.
pub fn gaussian_convergence(
    variant: GaussianVariant,
    orders: &[usize],
    grids: &[usize],
    speed: Option<f64>,
    out_dir: &Path,
) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let mut summary = RunSummary::default();
    let mut rows = Vec::new();
    for &order in orders {
        for &n in grids {
            let rep = match speed {
                Some(a) => gaussian::run_single_with_speed(variant, order, n, a)?,
                None => gaussian::run_single(variant, order, n)?,
            };
            rows.push(rep);
        }
        let start = rows.len() - grids.len();
        report::attach_slopes(&mut rows[start..]);
    }
    for r in &rows {
        summary.push(format!(
            "{} order={} n={} l2={:.6e} slope={} mass_drift={:.2e} steps={}",
            variant.id(),
            r.order,
            r.n,
            r.l2,
            r.slope.map(|s| format!("{s:.3}")).unwrap_or("-".into()),
            r.mass_drift,
            r.steps
        ));
    }
    let path = out_dir.join(format!("convergence_{}.csv", variant.id()));
    report::write_text(&path, &convergence_csv(variant.id(), &rows))?;
    summary.artifact(path);
    Ok(summary)
}

fn run_knudsen(cfg: &RunConfig) -> Result<RunSummary> {
    let n = cfg.n.first().copied().unwrap_or(320);
    let rows = gaussian::knudsen_study(&cfg.a_multipliers, n)?;
    let mut summary = RunSummary::default();
    for r in &rows {
        summary.push(format!(
            "knudsen a={}c eps={:.3e} l2={:.6e} slope={}",
            r.multiplier,
            r.epsilon,
            r.l2,
            r.slope.map(|s| format!("{s:.3}")).unwrap_or("-".into()),
        ));
    }
    let path = cfg.out_dir.join("knudsen.csv");
    report::write_text(&path, &gaussian::knudsen_csv(&rows))?;
    summary.artifact(path);
    Ok(summary)
}

fn run_couette(cfg: &RunConfig) -> Result<RunSummary> {
    let kind = if cfg.case == CaseId::CouetteIso {
        CouetteKind::Isothermal
    } else {
        CouetteKind::Adiabatic
    };
    let n = cfg.n.first().copied().unwrap_or(match kind {
        CouetteKind::Isothermal => 8,
        CouetteKind::Adiabatic => 16,
    });
    let order = cfg.order.unwrap_or(2);
    let rep = couette_case(kind, n, order)?;
    let mut summary = RunSummary::default();
    summary.push(format!(
        "{} order={} n={} max_T_error={:.6e} steps={} mass_drift={:.2e}",
        kind.id(),
        order,
        n,
        rep.max_t_err,
        rep.steps,
        rep.mass_drift
    ));
    let ppath = cfg.out_dir.join(format!("profile_{}.csv", kind.id()));
    report::write_text(&ppath, &profile_csv(&rep))?;
    summary.artifact(ppath);
    let ledger = Ledger {
        case: kind.id().into(),
        steps: rep.steps,
        mass_initial: 1.0,
        mass_final: 1.0 + rep.mass_drift,
    };
    let lpath = cfg.out_dir.join(format!("ledger_{}.csv", kind.id()));
    report::write_text(&lpath, &ledger.csv())?;
    summary.artifact(lpath);
    Ok(summary)
}

fn run_shock(cfg: &RunConfig) -> Result<RunSummary> {
    let nx = cfg.nx.unwrap_or(250);
    let ny = cfg.ny.unwrap_or(nx / 2);
    let t_end = cfg.t_end.unwrap_or(0.6);
    let snaps: Vec<f64> = cfg
        .snapshots
        .clone()
        .unwrap_or_else(|| vec![0.6, 1.0])
        .into_iter()
        .filter(|t| *t <= t_end + 1e-12)
        .collect();
    let order = cfg.order();
    let rep = shock::shock_bl_case(cfg.re, nx, ny, t_end, order, Some(&cfg.out_dir), &snaps)?;
    let mut summary = RunSummary::default();
    summary.push(format!(
        "shock_bl re={} {}x{} order={} steps={} t={:.3} mass_drift={:.2e} rho_min={:.4} p_min={:.4} T=[{:.4},{:.4}]",
        rep.re, rep.nx, rep.ny, order, rep.steps, rep.t_final, rep.mass_drift(),
        rep.rho_min, rep.p_min, rep.temp_min, rep.temp_max
    ));
    let ledger = Ledger {
        case: "shock_bl".into(),
        steps: rep.steps,
        mass_initial: rep.mass_initial,
        mass_final: rep.mass_final,
    };
    let lpath = cfg.out_dir.join("ledger_shock_bl.csv");
    report::write_text(&lpath, &ledger.csv())?;
    summary.artifact(lpath);
    for s in &rep.snapshots {
        summary.artifact(s.clone());
    }
    Ok(summary)
}

/// Parse a grid list: either comma-separated sizes or a dyadic range
/// `lo..hi` (doubling from `lo` through `hi`).
pub fn parse_grids(s: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad grid range '{s}'")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad grid range '{s}'")))?;
        if lo == 0 || hi < lo {
            return Err(Error::config(format!("bad grid range '{s}'")));
        }
        let mut out = Vec::new();
        let mut n = lo;
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        Ok(out)
    } else {
        parse_list(s, |t| parse_usize("grids", t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_minimal_config() {
        let cfg = parse_config("case = gaussian_c\n").unwrap();
        assert_eq!(cfg.case, CaseId::GaussianC);
        assert_eq!(cfg.order(), 4);
        assert_eq!(cfg.cfl(), 1.0);
        assert_eq!(cfg.iterations(), 4);
    }

    #[test]
    fn order_two_gets_reduced_cfl() {
        let cfg = parse_config("case = gaussian_a\norder = 2\n").unwrap();
        assert_eq!(cfg.cfl(), 0.8);
        assert_eq!(cfg.iterations(), 2);
    }

    #[test]
    fn order_three_rejected() {
        assert!(parse_config("case = gaussian_a\norder = 3\n").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config("case = gaussian_a\nfrobnicate = 7\n").unwrap_err();
        assert!(err.to_string().contains("frobnicate"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn comments_and_lists_parse() {
        let cfg = parse_config(
            "# comment\ncase = gaussian_c # trailing\nn = 10, 20, 40\nkinetic_speed = 21\n",
        )
        .unwrap();
        assert_eq!(cfg.n, vec![10, 20, 40]);
        assert_eq!(cfg.speed, SpeedSetting::Fixed(21.0));
        let dynamic = parse_config("case = shock_bl\nkinetic_speed = dynamic\n").unwrap();
        assert_eq!(dynamic.speed, SpeedSetting::Dynamic);
    }

    #[test]
    fn grid_ranges() {
        assert_eq!(parse_grids("10..320").unwrap(), vec![10, 20, 40, 80, 160, 320]);
        assert_eq!(parse_grids("10,14,33").unwrap(), vec![10, 14, 33]);
        assert!(parse_grids("0..8").is_err());
    }
}
