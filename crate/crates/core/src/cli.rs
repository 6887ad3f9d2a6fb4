//! Command-line experiments emitting versioned JSON or CSV reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{
    negligibility_falsifier, sweep_report, witness_search, write_csv, EpsGrid, FalsifierParams,
    ModerationStatus, NegligibilityStatus, RateReport, DEFAULT_ETA, MAX_FALSIFIER_DEGREE,
};
use crate::error::{Error, Result};
use crate::exprdsl::{format as format_expr, parse, parse_smooth};
use crate::funcspace::{CompactSet, Domain, Interval};
use crate::genfunc::Representative;
use crate::mollifier::{build_moment_mollifier, Mollifier, MAX_MOMENT_ORDER};
use crate::quadrature::QuadConfig;
use crate::seminorm::{grid_sup, kernel_norm_general, BoundedFamily, SupConfig};
use crate::specialmap::{k_eps, special_rep, PsiKernel, SpecialConfig};

pub const SCHEMA: &str = "colombeau-lab/1";
pub const THREADS_ENV: &str = "COLOMBEAU_LAB_THREADS";
/// Moment residual accepted by the `mollifier` command.
pub const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Mollifier,
    Rates,
    Negligible,
    Special,
    Demo,
}

/// Every experiment parameter. Missing grid bounds fall back to
/// per-command defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub expr: Option<String>,
    #[serde(rename = "K")]
    pub k: [f64; 2],
    pub m: usize,
    pub c: usize,
    pub l: usize,
    pub q: usize,
    pub d_max: usize,
    pub eps_base: Option<f64>,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub radius: f64,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    pub omega: Domain,
    pub grid_points: usize,
    pub eta: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            expr: None,
            k: [-1.0, 1.0],
            m: 0,
            c: 0,
            l: 0,
            q: 2,
            d_max: 3,
            eps_base: None,
            k_min: None,
            k_max: None,
            radius: 1.0,
            b: vec!["sin".into(), "poly(0, 0, 0, 1)".into()],
            omega: Domain::real_line(),
            grid_points: 401,
            eta: DEFAULT_ETA,
            output: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    /// `(base, k_min, k_max)` used when the grid is not given.
    fn default_grid(&self) -> (f64, u32, u32) {
        match self.command {
            Some(Command::Negligible) => (std::f64::consts::SQRT_2, 2, 16),
            Some(Command::Special) => (std::f64::consts::SQRT_2, 2, 12),
            _ => (2.0, 4, 14),
        }
    }

    pub fn grid(&self) -> Result<EpsGrid> {
        let (b, lo, hi) = self.default_grid();
        EpsGrid::new(self.eps_base.unwrap_or(b), self.k_min.unwrap_or(lo), self.k_max.unwrap_or(hi))
    }

    pub fn compact(&self) -> Result<CompactSet> {
        CompactSet::new(self.k[0], self.k[1])
    }

    pub fn family(&self) -> Result<BoundedFamily> {
        let members = self.b.iter().map(|s| parse_smooth(s)?.build()).collect::<Result<Vec<_>>>()?;
        BoundedFamily::new(members)
    }

    pub fn sup(&self) -> SupConfig {
        SupConfig::default().with_grid(self.grid_points)
    }

    fn representative(&self) -> Result<(String, Representative)> {
        let text = self.expr.as_deref().ok_or_else(|| Error::InvalidParam("--expr is required".into()))?;
        let ast = parse(text)?;
        Ok((format_expr(&ast), ast.to_representative(self.omega)?))
    }

    /// Checks the preconditions of the selected command.
    pub fn validate(&self) -> Result<()> {
        let cmd = self.command.ok_or_else(|| Error::InvalidParam("no command given".into()))?;
        if self.q > MAX_MOMENT_ORDER {
            return Err(Error::OrderBudget { requested: self.q, budget: MAX_MOMENT_ORDER });
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParam(format!("radius must be positive, got {}", self.radius)));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParam("grid_points must be at least 2".into()));
        }
        if matches!(cmd, Command::Mollifier | Command::Demo) {
            return Ok(());
        }
        self.compact()?;
        self.grid()?;
        self.representative()?;
        match cmd {
            Command::Negligible => {
                if self.d_max == 0 || self.d_max > MAX_FALSIFIER_DEGREE {
                    return Err(Error::InvalidParam(format!(
                        "D_max must be in 1..={MAX_FALSIFIER_DEGREE}, got {}",
                        self.d_max
                    )));
                }
                let q = self.d_max * (1 + self.c + self.l) + 1;
                if q > MAX_MOMENT_ORDER {
                    return Err(Error::OrderBudget { requested: q, budget: MAX_MOMENT_ORDER });
                }
                if !(self.eta > 0.0) {
                    return Err(Error::InvalidParam("η must be positive".into()));
                }
                self.family()?;
            }
            Command::Special => {
                let g = self.grid()?;
                if g.largest() >= 1.0 {
                    return Err(Error::InvalidParam("special mapping needs ε < 1; raise k_min".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Parser, Debug)]
#[command(name = "colombeau-lab", version, about = "Colombeau generalized-function laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Build a moment mollifier and check its moments.
    Mollifier(Flags),
    /// Fit the ε-rate of ‖R(S_εφ)‖_{K,m} and search a moderateness witness.
    Rates(Flags),
    /// Run the degree-bounded negligibility falsifier.
    Negligible(Flags),
    /// Rates under the special-algebra cutoff kernels ψ_ε.
    Special(Flags),
    /// Reproduce the canonical verdicts.
    Demo(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    expr: Option<String>,
    #[arg(long = "K", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    k: Option<Vec<f64>>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "d-max")]
    d_max: Option<usize>,
    #[arg(long = "eps-base")]
    eps_base: Option<f64>,
    #[arg(long = "k-min")]
    k_min: Option<u32>,
    #[arg(long = "k-max")]
    k_max: Option<u32>,
    #[arg(long)]
    radius: Option<f64>,
    /// Bounded family members, e.g. `--B sin "poly(0, 0, 0, 1)"`.
    #[arg(long = "B", num_args = 1..)]
    b: Option<Vec<String>>,
    /// Open domain ends; `inf` and `-inf` are accepted.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    omega: Option<Vec<f64>>,
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParam(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParam(format!("bad config {}: {e}", path.display())))
}

fn merge(command: Command, f: Flags) -> Result<RunConfig> {
    let mut cfg = match &f.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(command);
    if let Some(v) = f.expr {
        cfg.expr = Some(v);
    }
    if let Some(v) = f.k {
        cfg.k = [v[0], v[1]];
    }
    macro_rules! take {
        ($($name:ident),*) => {$( if let Some(v) = f.$name { cfg.$name = v; } )*};
    }
    take!(m, c, l, q, d_max, radius, b, grid_points, eta, format);
    if f.eps_base.is_some() {
        cfg.eps_base = f.eps_base;
    }
    if f.k_min.is_some() {
        cfg.k_min = f.k_min;
    }
    if f.k_max.is_some() {
        cfg.k_max = f.k_max;
    }
    if let Some(v) = f.omega {
        cfg.omega = Domain::new(v[0], v[1])?;
    }
    if f.output.is_some() {
        cfg.output = f.output;
    }
    Ok(cfg)
}

/// Result of a command before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub result: serde_json::Value,
    /// `(seminorm_id, report)` pairs for CSV output.
    pub samples: Vec<(String, RateReport)>,
    /// Plain-text rendering, used by `demo`.
    pub summary: Option<String>,
}

fn error_exit(cmd: Command) -> i32 {
    match cmd {
        Command::Mollifier => 2,
        _ => 3,
    }
}

/// Parses `args`, runs the command and writes its report. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    init_threads();
    let (cmd, flags) = match cli.command {
        Sub::Mollifier(f) => (Command::Mollifier, f),
        Sub::Rates(f) => (Command::Rates, f),
        Sub::Negligible(f) => (Command::Negligible, f),
        Sub::Special(f) => (Command::Special, f),
        Sub::Demo(f) => (Command::Demo, f),
    };
    let cfg = match merge(cmd, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit(cmd);
        }
    };
    match execute(&cfg).and_then(|out| emit(&cfg, &out).map(|_| out.exit_code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = remediation(&e) {
                eprintln!("hint: {hint}");
            }
            error_exit(cmd)
        }
    }
}

fn remediation(e: &Error) -> Option<&'static str> {
    match e {
        Error::Domain(_) => Some("shrink --K, narrow the support with --radius, or raise --k-min"),
        Error::OrderBudget { .. } => Some("lower --m, --c, --l or --q"),
        Error::Construction { .. } => Some("lower --q; the moment system is ill-conditioned"),
        Error::Syntax { .. } => Some("see the expression grammar in the README"),
        Error::InsufficientSamples { .. } => Some("widen the ε grid with --k-min/--k-max"),
        _ => None,
    }
}

/// Caps the rayon pool at `COLOMBEAU_LAB_THREADS` workers when set.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn unix_seconds() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn envelope(cfg: &RunConfig, result: &serde_json::Value) -> serde_json::Value {
    json!({
        "schema": SCHEMA,
        "command": cfg.command,
        "config": cfg,
        "result": result,
        "metadata": { "version": env!("CARGO_PKG_VERSION"), "timestamp": unix_seconds() },
    })
}

fn emit(cfg: &RunConfig, out: &Outcome) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidParam(format!("cannot write output: {e}"));
    let mut bytes = Vec::new();
    match (&out.summary, cfg.format) {
        (Some(text), _) if cfg.output.is_none() => bytes.extend_from_slice(text.as_bytes()),
        (_, Format::Csv) => {
            let refs: Vec<(&str, &RateReport)> = out.samples.iter().map(|(id, r)| (id.as_str(), r)).collect();
            write_csv(&mut bytes, &refs)?;
        }
        _ => {
            let text = serde_json::to_string_pretty(&envelope(cfg, &out.result))
                .map_err(|e| Error::InvalidParam(format!("serialization failed: {e}")))?;
            bytes.extend_from_slice(text.as_bytes());
            bytes.push(b'\n');
        }
    }
    match &cfg.output {
        Some(p) => std::fs::write(p, &bytes).map_err(io)?,
        None => std::io::stdout().write_all(&bytes).map_err(io)?,
    }
    if let (Some(text), Some(_)) = (&out.summary, &cfg.output) {
        print!("{text}");
    }
    Ok(())
}

/// Runs a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command.expect("validated") {
        Command::Mollifier => cmd_mollifier(cfg),
        Command::Rates => cmd_rates(cfg),
        Command::Negligible => cmd_negligible(cfg),
        Command::Special => cmd_special(cfg),
        Command::Demo => cmd_demo(cfg),
    }
}

/// Moments `j = 0..=q` checked against `δ_{j0}`.
pub fn moment_table(phi: &Mollifier) -> Result<Vec<(usize, f64, f64)>> {
    let quad = QuadConfig::precise();
    (0..=phi.q())
        .map(|j| {
            let mu = phi.moment(j, &quad)?;
            let target = if j == 0 { 1.0 } else { 0.0 };
            Ok((j, mu, (mu - target).abs()))
        })
        .collect()
}

fn cmd_mollifier(cfg: &RunConfig) -> Result<Outcome> {
    let phi = build_moment_mollifier(cfg.q, cfg.radius)?;
    let table = moment_table(&phi)?;
    let max_residual = table.iter().map(|t| t.2).fold(0.0, f64::max);
    let rows: Vec<serde_json::Value> =
        table.iter().map(|(j, mu, res)| json!({ "j": j, "moment": mu, "residual": res })).collect();
    let ok = max_residual <= MOMENT_TOL;
    if !ok {
        eprintln!("moment residual {max_residual:e} exceeds {MOMENT_TOL:e}");
    }
    let samples = vec![(
        "moment_residual".to_string(),
        RateReport::of(table.iter().map(|(j, _, r)| (*j as f64, *r)).collect()),
    )];
    Ok(Outcome {
        exit_code: if ok { 0 } else { 2 },
        result: json!({ "mollifier": phi, "moments": rows, "max_residual": max_residual, "tolerance": MOMENT_TOL }),
        samples,
        summary: None,
    })
}

fn cmd_rates(cfg: &RunConfig) -> Result<Outcome> {
    let (text, r) = cfg.representative()?;
    let phi = build_moment_mollifier(cfg.q, cfg.radius)?;
    let k = cfg.compact()?;
    let grid = cfg.grid()?;
    let sup = cfg.sup();
    let report = sweep_report(&r, &phi, &k, cfg.m, &grid, &sup)?;
    let verdict = witness_search(report.clone(), &phi, cfg.c, cfg.d_max as u32, &sup)?;
    Ok(Outcome {
        exit_code: 0,
        result: json!({
            "expr": text,
            "slope": report.slope,
            "report": report,
            "moderateness": verdict,
        }),
        samples: vec![(format!("R_K,{}", cfg.m), report)],
        summary: None,
    })
}

fn falsifier_params(cfg: &RunConfig) -> Result<FalsifierParams> {
    Ok(FalsifierParams {
        k: cfg.compact()?,
        m: cfg.m,
        c: cfg.c,
        l: cfg.l,
        d_max: cfg.d_max,
        radius: cfg.radius,
        grid: cfg.grid()?,
        family: cfg.family()?,
        eta: cfg.eta,
    })
}

fn cmd_negligible(cfg: &RunConfig) -> Result<Outcome> {
    let (text, r) = cfg.representative()?;
    let params = falsifier_params(cfg)?;
    let verdict = negligibility_falsifier(&r, &params, &cfg.sup())?;
    let exit_code = match verdict.status {
        NegligibilityStatus::ConsistentWithNegligible => 0,
        NegligibilityStatus::RefutedToDegree { .. } => 1,
    };
    let samples = verdict
        .evidence
        .iter()
        .flat_map(|e| {
            [(format!("R_D{}", e.degree), e.seminorm.clone()), (format!("defect_D{}", e.degree), e.defect.clone())]
        })
        .collect();
    let slopes: Vec<Option<f64>> = verdict.evidence.iter().map(|e| e.seminorm.slope).collect();
    Ok(Outcome {
        exit_code,
        result: json!({ "expr": text, "decay_slopes": slopes, "verdict": verdict }),
        samples,
        summary: None,
    })
}

/// `ε ↦ ‖ψ⃗_ε‖_{K,c;L,l}` and `ε ↦ ‖R(ψ⃗_ε)‖_{K,m}`.
pub fn special_reports(cfg: &RunConfig) -> Result<(RateReport, RateReport)> {
    let (_, r) = cfg.representative()?;
    let special = SpecialConfig::new(cfg.q, cfg.radius, cfg.omega)?;
    let k = cfg.compact()?;
    let grid = cfg.grid()?;
    let k_big = k_eps(&cfg.omega, grid.largest())?;
    if !(k_big.lo() <= k.lo() && k.hi() <= k_big.hi()) {
        return Err(Error::Domain(format!(
            "K = [{}, {}] is not inside K_ε = [{}, {}] at the largest ε",
            k.lo(),
            k.hi(),
            k_big.lo(),
            k_big.hi()
        )));
    }
    let l_set = k.enlarge(cfg.radius * grid.largest());
    let sup = cfg.sup();
    let mut kernel = Vec::new();
    let mut expr = Vec::new();
    for eps in grid.eps() {
        let psi = PsiKernel::new(&special, eps)?;
        kernel.push((eps, kernel_norm_general(&psi, &k, cfg.c, &l_set, cfg.l, &sup)?.value));
        let v = grid_sup(
            |x| {
                let mut best: f64 = 0.0;
                for j in 0..=cfg.m {
                    best = best.max(special_rep(&r, &special, eps, x, j)?.abs());
                }
                Ok(best)
            },
            &k,
            &[],
            &sup,
        )?;
        expr.push((eps, v.value));
    }
    Ok((RateReport::of(kernel), RateReport::of(expr)))
}

fn cmd_special(cfg: &RunConfig) -> Result<Outcome> {
    let (text, _) = cfg.representative()?;
    let (kernel, expr) = special_reports(cfg)?;
    Ok(Outcome {
        exit_code: 0,
        result: json!({
            "expr": text,
            "kernel_slope": kernel.slope,
            "expected_kernel_slope": -((1 + cfg.c + cfg.l) as f64),
            "kernel": kernel,
            "expr_slope": expr.slope,
            "expr_report": expr,
        }),
        samples: vec![("psi".to_string(), kernel), (format!("R_K,{}", cfg.m), expr)],
        summary: None,
    })
}

/// One reproduced claim of the demo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoLine {
    pub claim: String,
    pub measured: String,
    pub ok: bool,
}

/// The canonical trio plus the embedding checks.
pub fn demo_lines(grid_points: usize) -> Result<Vec<DemoLine>> {
    let mut lines = Vec::new();
    let base = RunConfig { grid_points, ..RunConfig::default() };
    let k = base.compact()?;
    let sup = base.sup();
    let grid = EpsGrid::default();
    let phi = build_moment_mollifier(2, 1.0)?;
    let rep = |s: &str| parse(s).and_then(|a| a.to_representative(Domain::real_line()));

    let delta = rep("iota(delta)")?;
    let r = sweep_report(&delta, &phi, &k, 0, &grid, &sup)?;
    let s = r.slope.unwrap_or(f64::NAN);
    lines.push(DemoLine { claim: "iota(delta) rate -1".into(), measured: format!("slope {s:.4}"), ok: (s + 1.0).abs() <= 0.05 });

    let sq = rep("iota(delta)*iota(delta)")?;
    let r = sweep_report(&sq, &phi, &k, 0, &grid, &sup)?;
    let s = r.slope.unwrap_or(f64::NAN);
    let v = witness_search(r, &phi, 1, 3, &sup)?;
    let w = v.witness.as_ref().map(|w| (w.c, w.d));
    lines.push(DemoLine {
        claim: "iota(delta)^2 rate -2, moderate with (c, d) = (0, 2)".into(),
        measured: format!("slope {s:.4}, witness {w:?}"),
        ok: (s + 2.0).abs() <= 0.05 && v.status == ModerationStatus::ModerateWitnessed && w == Some((0, 2)),
    });

    let sg = rep("sigma(sin)")?;
    let r = sweep_report(&sg, &phi, &k, 0, &grid, &sup)?;
    let s = r.slope.unwrap_or(f64::NAN);
    lines.push(DemoLine { claim: "sigma(sin) rate 0".into(), measured: format!("slope {s:.4}"), ok: s.abs() <= 0.05 });

    let neg = RunConfig { command: Some(Command::Negligible), ..base.clone() };
    let params = falsifier_params(&neg)?;
    let f = rep("iota(reg(sin)) - sigma(sin)")?;
    let v = negligibility_falsifier(&f, &params, &sup)?;
    let slopes: Vec<String> = v
        .evidence
        .iter()
        .map(|e| format!("q={} {}", e.q_used, e.seminorm.slope.map_or("n/a".into(), |s| format!("{s:.3}"))))
        .collect();
    let rates_ok = v
        .evidence
        .iter()
        .all(|e| e.seminorm.slope.is_some_and(|s| s >= (e.q_used as f64 + 1.0) - 0.1));
    lines.push(DemoLine {
        claim: "iota(sin) - sigma(sin) consistent with negligible, decay >= q+1".into(),
        measured: format!("{}; slopes {}", v.status, slopes.join(", ")),
        ok: v.status == NegligibilityStatus::ConsistentWithNegligible && rates_ok,
    });

    let hh = rep("iota(H)*iota(H) - iota(H)")?;
    let v = negligibility_falsifier(&hh, &params, &sup)?;
    let bound = v.refutations.iter().map(|r| r.persistent_lower_bound).fold(f64::INFINITY, f64::min);
    lines.push(DemoLine {
        claim: "iota(H)^2 - iota(H) refuted to degree 3, persistent value near 1/4".into(),
        measured: format!("{}, lower bound {bound:.6}", v.status),
        ok: v.status == NegligibilityStatus::RefutedToDegree { degree: 3 } && (0.2..=0.3).contains(&bound),
    });

    let v = negligibility_falsifier(&delta, &params, &sup)?;
    lines.push(DemoLine {
        claim: "iota(delta) refuted".into(),
        measured: v.status.to_string(),
        ok: matches!(v.status, NegligibilityStatus::RefutedToDegree { .. }),
    });
    Ok(lines)
}

fn cmd_demo(cfg: &RunConfig) -> Result<Outcome> {
    let lines = demo_lines(cfg.grid_points)?;
    let mut text = String::from("colombeau-lab demo\n\n");
    for l in &lines {
        text.push_str(&format!("[{}] {}\n       {}\n", if l.ok { "ok" } else { "MISMATCH" }, l.claim, l.measured));
    }
    let all = lines.iter().all(|l| l.ok);
    text.push_str(&format!("\n{}\n", if all { "all claims reproduced" } else { "some claims not reproduced" }));
    Ok(Outcome { exit_code: 0, result: json!({ "lines": lines, "all_ok": all }), samples: vec![], summary: Some(text) })
}
