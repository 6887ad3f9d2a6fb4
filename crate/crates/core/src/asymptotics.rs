//! ε-sweeps over scaled mollifiers, log-log rate fits, moderateness
//! witnesses and the degree-bounded negligibility falsifier.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{CompactSet, Interval};
use crate::genfunc::{eval, KernelArg, Representative};
use crate::mollifier::{admissible, build_moment_mollifier, scale, starred, Mollifier};
use crate::quadrature::QuadConfig;
use crate::seminorm::{
    defect_norm, grid_sup, kernel_norm, norm_c, BoundedFamily, Monomial, PosPoly, SupConfig, SupEstimate,
};

/// Values below this are treated as zero by rate fits.
pub const NOISE_FLOOR: f64 = 1e-14;
/// Fits with a smaller coefficient of determination are flagged.
pub const MIN_R_SQUARED: f64 = 0.98;
pub const MIN_FIT_SAMPLES: usize = 4;
pub const DEFAULT_ETA: f64 = 1e-3;

/// `ε_k = base^{-k}` for `k = k_min..=k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub base: f64,
    pub k_min: u32,
    pub k_max: u32,
}

impl Default for EpsGrid {
    fn default() -> Self {
        Self { base: 2.0, k_min: 4, k_max: 14 }
    }
}

impl EpsGrid {
    pub fn new(base: f64, k_min: u32, k_max: u32) -> Result<Self> {
        let g = Self { base, k_min, k_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base > 1.0 && self.base.is_finite()) {
            return Err(Error::InvalidParam(format!("ε base must exceed 1, got {}", self.base)));
        }
        if self.k_min > self.k_max {
            return Err(Error::InvalidParam(format!("k_min {} exceeds k_max {}", self.k_min, self.k_max)));
        }
        if self.eps().iter().any(|e| *e <= 0.0) {
            return Err(Error::InvalidParam("ε grid underflows to zero".into()));
        }
        Ok(())
    }

    pub fn eps(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(|k| self.base.powi(-(k as i32))).collect()
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn largest(&self) -> f64 {
        self.base.powi(-(self.k_min as i32))
    }
}

/// A least-squares fit of `log value` against `log ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub samples: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub stderr: Option<f64>,
    pub r_squared: Option<f64>,
    /// Half-open index range of `samples` considered by the fit.
    pub window: (usize, usize),
    /// Number of samples in the window above the noise floor.
    pub used: usize,
    /// False when the fit is missing or `r_squared < MIN_R_SQUARED`.
    pub accepted: bool,
}

impl RateReport {
    /// Fits when possible; otherwise returns the samples with no fit.
    pub fn of(samples: Vec<(f64, f64)>) -> Self {
        let n = samples.len();
        fit_rate(&samples, None).unwrap_or_else(|_| {
            let used = samples.iter().filter(|(_, v)| *v >= NOISE_FLOOR).count();
            RateReport {
                samples,
                slope: None,
                intercept: None,
                stderr: None,
                r_squared: None,
                window: (0, n),
                used,
                accepted: false,
            }
        })
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }
}

/// Least-squares slope of `(log ε, log value)` over `window` (default all),
/// skipping values below [`NOISE_FLOOR`].
pub fn fit_rate(samples: &[(f64, f64)], window: Option<(usize, usize)>) -> Result<RateReport> {
    let (a, b) = window.unwrap_or((0, samples.len()));
    if a > b || b > samples.len() {
        return Err(Error::InvalidParam(format!("window {a}..{b} out of range for {} samples", samples.len())));
    }
    let pts: Vec<(f64, f64)> = samples[a..b]
        .iter()
        .filter(|(e, v)| *v >= NOISE_FLOOR && *e > 0.0 && v.is_finite())
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { usable: n, required: MIN_FIT_SAMPLES });
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam("all ε values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    // Exactly constant data is a perfect fit.
    let r_squared = if syy <= 1e-30 * (1.0 + my * my) { 1.0 } else { 1.0 - sse / syy };
    Ok(RateReport {
        samples: samples.to_vec(),
        slope: Some(slope),
        intercept: Some(intercept),
        stderr: Some(stderr),
        r_squared: Some(r_squared),
        window: (a, b),
        used: n,
        accepted: r_squared >= MIN_R_SQUARED,
    })
}

/// `‖R(arg, ·)‖_{K,m}` with extra grid points around the singular support.
pub fn rep_seminorm(
    r: &Representative,
    arg: &KernelArg,
    k: &CompactSet,
    m: usize,
    half_width: f64,
    cfg: &SupConfig,
) -> Result<SupEstimate> {
    let focus: Vec<CompactSet> = r
        .singular_points()
        .into_iter()
        .filter_map(|x0| CompactSet::new(x0 - half_width, x0 + half_width).ok())
        .collect();
    grid_sup(
        |x| {
            let mut best: f64 = 0.0;
            for j in 0..=m {
                best = best.max(eval(r, arg, x, j)?.abs());
            }
            Ok(best)
        },
        k,
        &focus,
        cfg,
    )
}

fn check_admissible(r: &Representative, phi: &Mollifier, k: &CompactSet, eps: f64) -> Result<()> {
    let reach = phi.radius() * eps;
    let d = r.domain();
    if !(admissible(phi, k.lo(), d) && admissible(phi, k.hi(), d)) || !(k.lo() - reach > d.lo() && k.hi() + reach < d.hi()) {
        return Err(Error::Domain(format!(
            "K + supp S_εφ at ε = {eps} leaves the domain; shrink K or raise k_min"
        )));
    }
    Ok(())
}

/// `ε ↦ ‖R(S_εφ, ·)‖_{K,m}` over the grid.
pub fn sweep(
    r: &Representative,
    phi: &Mollifier,
    k: &CompactSet,
    m: usize,
    grid: &EpsGrid,
    cfg: &SupConfig,
) -> Result<Vec<(f64, SupEstimate)>> {
    grid.validate()?;
    let scaled = scale(phi, grid.largest())?;
    check_admissible(r, &scaled, k, 1.0)?;
    grid.eps()
        .into_iter()
        .map(|eps| {
            let s = scale(phi, eps)?;
            let est = rep_seminorm(r, &KernelArg::Conv(s), k, m, eps * phi.radius(), cfg)?;
            Ok((eps, est))
        })
        .collect()
}

pub fn sweep_report(
    r: &Representative,
    phi: &Mollifier,
    k: &CompactSet,
    m: usize,
    grid: &EpsGrid,
    cfg: &SupConfig,
) -> Result<RateReport> {
    Ok(RateReport::of(sweep(r, phi, k, m, grid, cfg)?.into_iter().map(|(e, s)| (e, s.value)).collect()))
}

/// `ε ↦ ‖(S_εφ)* - δ⃗‖_{K,c;B}`.
pub fn defect_sweep(
    phi: &Mollifier,
    k: &CompactSet,
    c: usize,
    family: &BoundedFamily,
    grid: &EpsGrid,
    cfg: &SupConfig,
) -> Result<RateReport> {
    grid.validate()?;
    let quad = QuadConfig::precise();
    let samples = grid
        .eps()
        .into_iter()
        .map(|eps| Ok((eps, defect_norm(&starred(&scale(phi, eps)?), k, c, family, cfg, &quad)?.value)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::of(samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModerationStatus {
    ModerateWitnessed,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub c: usize,
    pub d: u32,
    pub lambda: PosPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationVerdict {
    pub status: ModerationStatus,
    pub witness: Option<Witness>,
    pub evidence: RateReport,
    /// `‖S_εφ‖_c` per grid point for the witnessing `c`.
    pub kernel_values: Vec<f64>,
}

/// Slope tolerance for accepting `‖R‖ / y^d` as bounded when ε → 0.
const RATIO_SLOPE_TOL: f64 = 0.05;

/// Searches the smallest `(c, d)`, `c` first, with `‖R‖ ≤ C·‖S_εφ‖_c^d`
/// on every sample and a ratio that does not grow as `ε → 0`.
#[allow(clippy::too_many_arguments)]
pub fn moderateness_probe(
    r: &Representative,
    phi: &Mollifier,
    k: &CompactSet,
    m: usize,
    grid: &EpsGrid,
    c_max: usize,
    d_max: u32,
    cfg: &SupConfig,
) -> Result<ModerationVerdict> {
    let evidence = sweep_report(r, phi, k, m, grid, cfg)?;
    witness_search(evidence, phi, c_max, d_max, cfg)
}

/// The witness search of [`moderateness_probe`] on an existing sweep.
pub fn witness_search(
    evidence: RateReport,
    phi: &Mollifier,
    c_max: usize,
    d_max: u32,
    cfg: &SupConfig,
) -> Result<ModerationVerdict> {
    let values: Vec<f64> = evidence.samples.iter().map(|s| s.1).collect();
    for c in 0..=c_max {
        let ys = evidence
            .samples
            .iter()
            .map(|(eps, _)| Ok(norm_c(&scale(phi, *eps)?, c, cfg)?.value))
            .collect::<Result<Vec<f64>>>()?;
        for d in 0..=d_max {
            let ratios: Vec<(f64, f64)> =
                evidence.samples.iter().zip(&ys).map(|((e, v), y)| (*e, v / y.powi(d as i32))).collect();
            let bounded = match fit_rate(&ratios, None) {
                Ok(fit) => fit.slope.is_some_and(|s| s >= -RATIO_SLOPE_TOL),
                Err(_) => values.iter().all(|v| *v < NOISE_FLOOR),
            };
            if !bounded {
                continue;
            }
            let constant = ratios.iter().map(|p| p.1).fold(0.0, f64::max) * (1.0 + 1e-12);
            let lambda = PosPoly::new(0, vec![Monomial { y_exp: vec![d], z_exp: vec![0], coeff: constant }])?;
            let dominated = values.iter().zip(&ys).all(|(v, y)| *v <= constant * y.powi(d as i32));
            if dominated {
                return Ok(ModerationVerdict {
                    status: ModerationStatus::ModerateWitnessed,
                    witness: Some(Witness { c, d, lambda }),
                    evidence,
                    kernel_values: ys,
                });
            }
        }
    }
    Ok(ModerationVerdict { status: ModerationStatus::Undetermined, witness: None, evidence, kernel_values: vec![] })
}

/// Inputs of the negligibility falsifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifierParams {
    pub k: CompactSet,
    pub m: usize,
    pub c: usize,
    pub l: usize,
    pub d_max: usize,
    pub radius: f64,
    pub grid: EpsGrid,
    pub family: BoundedFamily,
    pub eta: f64,
}

pub const MAX_FALSIFIER_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NegligibilityStatus {
    ConsistentWithNegligible,
    RefutedToDegree { degree: usize },
}

impl std::fmt::Display for NegligibilityStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::ConsistentWithNegligible => write!(f, "consistent-with-negligible"),
            Self::RefutedToDegree { degree } => write!(f, "refuted-to-degree({degree})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    pub degree: usize,
    pub q_used: usize,
    pub persistent_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEvidence {
    pub degree: usize,
    pub q_used: usize,
    pub persistent_lower_bound: f64,
    /// Largest `y^α z^β` over the small-ε half, `1 ≤ α, β ≤ degree`.
    pub max_monomial: f64,
    pub refuted: bool,
    pub seminorm: RateReport,
    pub defect: RateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegligibilityVerdict {
    pub status: NegligibilityStatus,
    pub refutations: Vec<Refutation>,
    pub evidence: Vec<DegreeEvidence>,
}

/// For each degree `D`, measures `R` on `φ_D ∈ 𝒜_q` with
/// `q = D(1+c+l)+1`. A seminorm that stays above `η` on the small-ε half,
/// while every ideal monomial of degree `≤ D` is below `η/10` there,
/// refutes domination by any such polynomial.
pub fn negligibility_falsifier(r: &Representative, p: &FalsifierParams, cfg: &SupConfig) -> Result<NegligibilityVerdict> {
    if p.d_max == 0 || p.d_max > MAX_FALSIFIER_DEGREE {
        return Err(Error::InvalidParam(format!("D_max must be in 1..={MAX_FALSIFIER_DEGREE}, got {}", p.d_max)));
    }
    if !(p.eta > 0.0) {
        return Err(Error::InvalidParam("η must be positive".into()));
    }
    p.grid.validate()?;
    let eps = p.grid.eps();
    let half = eps.len() / 2;
    let quad = QuadConfig::precise();
    let l_set = p.k.enlarge(p.radius * p.grid.largest());
    let mut evidence: Vec<DegreeEvidence> = Vec::with_capacity(p.d_max);
    let mut measured: Option<(Vec<f64>, RateReport, Vec<f64>, Vec<f64>)> = None;
    for degree in 1..=p.d_max {
        let q = degree * (1 + p.c + p.l) + 1;
        let phi = build_moment_mollifier(q, p.radius)?;
        // odd q shares its profile with q - 1
        let reuse = measured.as_ref().is_some_and(|m| m.0 == phi.coefficients());
        if !reuse {
            let seminorm = sweep_report(r, &phi, &p.k, p.m, &p.grid, cfg)?;
            let mut ys = Vec::with_capacity(eps.len());
            let mut zs = Vec::with_capacity(eps.len());
            for &e in &eps[half..] {
                let kern = starred(&scale(&phi, e)?);
                ys.push(kernel_norm(&kern, &p.k, p.c, &l_set, p.l, cfg)?.value);
                zs.push(defect_norm(&kern, &p.k, p.c, &p.family, cfg, &quad)?.value);
            }
            measured = Some((phi.coefficients().to_vec(), seminorm, ys, zs));
        }
        let (_, seminorm, ys, zs) = measured.as_ref().expect("measured above");
        let mut max_monomial: f64 = 0.0;
        for (y, z) in ys.iter().zip(zs) {
            for a in 1..=degree as i32 {
                for b in 1..=degree as i32 {
                    max_monomial = max_monomial.max(y.powi(a) * z.powi(b));
                }
            }
        }
        let persistent = seminorm.samples[half..].iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let refuted = persistent >= p.eta && max_monomial < p.eta / 10.0;
        let defect = RateReport::of(eps[half..].iter().copied().zip(zs.iter().copied()).collect());
        evidence.push(DegreeEvidence {
            degree,
            q_used: q,
            persistent_lower_bound: persistent,
            max_monomial,
            refuted,
            seminorm: seminorm.clone(),
            defect,
        });
    }
    let refutations: Vec<Refutation> = evidence
        .iter()
        .filter(|e| e.refuted)
        .map(|e| Refutation { degree: e.degree, q_used: e.q_used, persistent_lower_bound: e.persistent_lower_bound })
        .collect();
    let status = match refutations.iter().map(|r| r.degree).max() {
        Some(degree) => NegligibilityStatus::RefutedToDegree { degree },
        None => NegligibilityStatus::ConsistentWithNegligible,
    };
    Ok(NegligibilityVerdict { status, refutations, evidence })
}

/// Writes `eps,value,seminorm_id` rows.
pub fn write_csv<W: Write>(out: W, reports: &[(&str, &RateReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParam(format!("csv output failed: {e}"));
    w.write_record(["eps", "value", "seminorm_id"]).map_err(io)?;
    for (id, rep) in reports {
        for (e, v) in &rep.samples {
            w.write_record([format!("{e:e}"), format!("{v:e}"), id.to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidParam(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Distribution;
    use crate::funcspace::SmoothFunction;

    fn law(p: f64) -> Vec<(f64, f64)> {
        EpsGrid::default().eps().into_iter().map(|e| (e, 3.0 * e.powf(p))).collect()
    }

    #[test]
    fn fit_exact_laws() {
        let r = fit_rate(&law(-1.0), None).unwrap();
        assert!((r.slope.unwrap() + 1.0).abs() < 1e-12 && r.accepted);
        assert!((fit_rate(&law(3.0), None).unwrap().slope.unwrap() - 3.0).abs() < 1e-12);
        let c = fit_rate(&law(0.0), None).unwrap();
        assert!(c.slope.unwrap().abs() < 1e-12 && c.accepted);
    }

    #[test]
    fn fit_needs_samples_above_floor() {
        let s: Vec<(f64, f64)> = law(20.0);
        assert!(matches!(fit_rate(&s, None), Err(Error::InsufficientSamples { .. })));
        assert!(RateReport::of(s).slope.is_none());
    }

    #[test]
    fn grid_defaults() {
        let g = EpsGrid::default();
        let e = g.eps();
        assert_eq!(e.len(), 11);
        assert_eq!(e[0], 0.0625);
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!(EpsGrid::new(1.0, 1, 2).is_err());
        assert!(EpsGrid::new(2.0, 3, 2).is_err());
    }

    #[test]
    fn delta_sweep_slopes() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        let k = CompactSet::new(-1.0, 1.0).unwrap();
        let grid = EpsGrid::new(2.0, 4, 10).unwrap();
        let cfg = SupConfig::default().with_grid(401);
        let d = Representative::embed(Distribution::delta(0.0));
        let rep = sweep_report(&d, &phi, &k, 0, &grid, &cfg).unwrap();
        assert!((rep.slope.unwrap() + 1.0).abs() < 0.01, "{rep:?}");
        let sq = Representative::product(d.clone(), d).unwrap();
        let v = moderateness_probe(&sq, &phi, &k, 0, &grid, 1, 3, &cfg).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.c, w.d), (0, 2));
        let s = Representative::sigma(SmoothFunction::sin());
        let rep = sweep_report(&s, &phi, &k, 0, &grid, &cfg).unwrap();
        assert!(rep.slope.unwrap().abs() < 1e-9);
        let v = moderateness_probe(&s, &phi, &k, 0, &grid, 1, 3, &cfg).unwrap();
        assert_eq!(v.witness.map(|w| (w.c, w.d)), Some((0, 0)));
    }

    #[test]
    fn inadmissible_sweep_is_reported() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        let u = Distribution::delta(0.0).on(crate::funcspace::Domain::new(-1.0, 1.0).unwrap()).unwrap();
        let k = CompactSet::new(-0.99, 0.99).unwrap();
        let e = sweep(&Representative::embed(u), &phi, &k, 0, &EpsGrid::default(), &SupConfig::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn csv_layout() {
        let rep = RateReport::of(law(1.0));
        let mut buf = Vec::new();
        write_csv(&mut buf, &[("a", &rep)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,value,seminorm_id\n"));
        assert_eq!(text.lines().count(), 12);
    }
}
