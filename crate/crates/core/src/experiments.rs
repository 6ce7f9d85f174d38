//! Seeded batch experiments: built-in scenarios, λ sweeps, catalogs and report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorings::{
    canonical_form, classify_orbital_exotic, enumerate_axial, is_axial_vd, AxialCase, AxialColoring, Coloring, Split, Verdict,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, random_near_origin, IntegratorConfig, Trajectory};
use crate::matrix::{NetworkShape, ValueMatrix};
use crate::model::{first_bifurcation, gains_from_coefficients, CriticalCoefficients, Irrep, ModelConfig, SigmoidParams};
use crate::patterns::{analyze_state, zero_sum_report, PatternClass, PatternReport, ZeroSumReport};

/// Final states with max-norm below this count as having returned to the origin.
pub const ORIGIN_TOL: f64 = 1e-6;

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

fn default_radius() -> f64 {
    1e-3
}

fn default_quantization_tol() -> f64 {
    crate::patterns::DEFAULT_QUANTIZATION_TOL
}

/// Scenario integrator settings: library defaults with a sparser trajectory record.
pub fn default_scenario_integrator() -> IntegratorConfig<f64> {
    IntegratorConfig { record_stride: 100, ..IntegratorConfig::default() }
}

/// One batch experiment. JSON schema: every field below by name; `seeds`,
/// `integrator`, `radius`, `quantization_tol` and `lambda` are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub shape: NetworkShape,
    pub coefficients: CriticalCoefficients<f64>,
    pub sigmoids: SigmoidParams<f64>,
    /// Offset of λ above the first bifurcation threshold.
    pub epsilon: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_scenario_integrator")]
    pub integrator: IntegratorConfig<f64>,
    /// Half-width of the uniform box of initial conditions around the origin.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_quantization_tol")]
    pub quantization_tol: f64,
    /// Explicit λ; overrides threshold + ε when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Scenario {
    fn builtin(name: &str, c: [f64; 4], s: [f64; 2]) -> Self {
        Scenario {
            name: name.to_string(),
            shape: NetworkShape { m: 4, n: 6 },
            coefficients: CriticalCoefficients::new(c[0], c[1], c[2], c[3]),
            sigmoids: SigmoidParams { s1: s[0], s2: s[1] },
            epsilon: 1e-2,
            seeds: default_seeds(),
            integrator: default_scenario_integrator(),
            radius: default_radius(),
            quantization_tol: default_quantization_tol(),
            lambda: None,
        }
    }

    pub fn builtin_names() -> [&'static str; 4] {
        ["consensus-4x6", "deadlock-4x6", "dissensus-orbital-4x6", "dissensus-exotic-4x6"]
    }

    /// The 4×6 simulation setups: consensus, deadlock and the two dissensus parameter sets.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "consensus-4x6" => Self::builtin(name, [-1.0, 1.0, -1.0, -1.0], [0.5, 0.3]),
            "deadlock-4x6" => Self::builtin(name, [-1.0, -1.0, 1.0, -1.0], [0.5, 0.3]),
            "dissensus-orbital-4x6" => Self::builtin(name, [1.0, -1.0, -0.5, -0.5], [0.5, 0.3]),
            "dissensus-exotic-4x6" => Self::builtin(name, [1.0, -1.0, -1.0, -1.0], [-0.1, -0.3]),
            _ => return None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if self.coefficients.to_vec().iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("scenario parameters".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        if !(self.quantization_tol > 0.0) {
            return Err(Error::InvalidParameter("quantization_tol must be positive".into()));
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return Err(Error::NonFinite("scenario parameters".into()));
            }
        }
        NetworkShape::new(self.shape.m, self.shape.n)?;
        SigmoidParams::new(self.sigmoids.s1, self.sigmoids.s2)?;
        self.integrator.validate()
    }

    /// Component expected to break first.
    pub fn target(&self) -> Result<Irrep> {
        first_bifurcation(&self.coefficients)
            .map(|t| t.irrep)
            .ok_or_else(|| Error::InvalidParameter("coefficients have no unique first bifurcation".into()))
    }

    /// `lambda` if given, otherwise first threshold + ε.
    pub fn lambda(&self) -> Result<f64> {
        if let Some(l) = self.lambda {
            return Ok(l);
        }
        let t = first_bifurcation(&self.coefficients)
            .ok_or_else(|| Error::InvalidParameter("coefficients have no unique first bifurcation".into()))?;
        Ok(t.lambda + self.epsilon)
    }

    pub fn model(&self, lambda: f64) -> Result<ModelConfig<f64>> {
        let gains = gains_from_coefficients(&self.coefficients, self.shape);
        ModelConfig::new(self.shape, gains, self.sigmoids, lambda)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub converged: bool,
    pub diverged: bool,
    pub residual: f64,
    pub elapsed_time: f64,
    pub diverged_at: Option<f64>,
    /// Largest absolute final value.
    pub amplitude: f64,
    pub final_state: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialMatchReport {
    pub catalog_index: usize,
    pub case: AxialCase,
    /// Canonical representative from the catalog.
    pub canonical: Coloring,
    pub verdict: Verdict,
    /// Exact rational red fraction, as `p/q`.
    pub rho: Option<String>,
    pub zero_block: Option<Vec<usize>>,
    /// The quantized coloring itself passed the exact axiality check.
    pub axial_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub lambda: f64,
    pub equilibrium: EquilibriumSummary,
    pub zero_sums: ZeroSumReport,
    pub coloring: Option<Coloring>,
    pub pattern: Option<PatternReport>,
    /// Why no pattern was extracted (divergence or ambiguous quantization).
    pub pattern_error: Option<String>,
    pub axial: Option<AxialMatchReport>,
}

impl RunReport {
    pub fn returned_to_origin(&self) -> bool {
        self.equilibrium.converged && self.equilibrium.amplitude <= ORIGIN_TOL
    }

    pub fn class(&self) -> Option<PatternClass> {
        self.pattern.as_ref().map(|p| p.class)
    }
}

/// Catalog of one shape with lazily computed verdicts.
pub struct CatalogCache {
    entries: Vec<AxialColoring>,
    verdicts: Vec<Option<Verdict>>,
}

impl CatalogCache {
    pub fn new(shape: NetworkShape) -> Result<Self> {
        let entries = enumerate_axial(shape)?;
        let verdicts = vec![None; entries.len()];
        Ok(CatalogCache { entries, verdicts })
    }

    pub fn entries(&self) -> &[AxialColoring] {
        &self.entries
    }

    pub fn verdict(&mut self, index: usize) -> Result<Verdict> {
        if let Some(v) = self.verdicts[index] {
            return Ok(v);
        }
        let v = classify_orbital_exotic(&self.entries[index].coloring)?;
        self.verdicts[index] = Some(v);
        Ok(v)
    }

    fn lookup(&self, c: &Coloring) -> Result<Option<usize>> {
        let key = canonical_form(c)?;
        Ok(self.entries.iter().position(|a| a.coloring == key))
    }
}

/// A single seeded run: report plus the recorded trajectory.
pub struct RunOutput {
    pub report: RunReport,
    pub trajectory: Trajectory<f64>,
}

fn simulate(s: &Scenario, cfg: &ModelConfig<f64>, seed: u64) -> Result<(RunReport, Trajectory<f64>, Option<Coloring>)> {
    let z0 = random_near_origin(s.shape, s.radius, seed)?;
    let (trajectory, eq) = integrate(&z0, cfg, &s.integrator)?;
    let z = &eq.final_state;
    let amplitude = z.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let equilibrium = EquilibriumSummary {
        converged: eq.converged,
        diverged: eq.diverged(),
        residual: eq.residual,
        elapsed_time: eq.elapsed_time,
        diverged_at: eq.diverged_at,
        amplitude,
        final_state: z.rows(),
    };
    let mut report = RunReport {
        scenario: s.name.clone(),
        seed,
        lambda: cfg.lambda,
        zero_sums: if eq.diverged() { ZeroSumReport { max_abs_row_sum: f64::NAN, max_abs_col_sum: f64::NAN, amplitude: f64::NAN } } else { zero_sum_report(z) },
        equilibrium,
        coloring: None,
        pattern: None,
        pattern_error: None,
        axial: None,
    };
    if eq.diverged() {
        report.pattern_error = Some("state became non-finite".into());
        return Ok((report, trajectory, None));
    }
    match analyze_state(z, s.quantization_tol) {
        Ok((c, p)) => {
            report.coloring = Some(c.clone());
            report.pattern = Some(p);
            Ok((report, trajectory, Some(c)))
        }
        Err(e) => {
            report.pattern_error = Some(e.to_string());
            Ok((report, trajectory, None))
        }
    }
}

/// Run every seed of `s` (in parallel) and attach catalog matches. Output is in
/// seed order and independent of the thread count.
pub fn run_scenario_with(s: &Scenario, catalog: &mut CatalogCache) -> Result<Vec<RunOutput>> {
    s.validate()?;
    let cfg = s.model(s.lambda()?)?;
    let runs: Vec<Result<_>> = s.seeds.par_iter().map(|&seed| simulate(s, &cfg, seed)).collect();
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let (mut report, trajectory, coloring) = run?;
        if let Some(c) = coloring {
            if let Some(index) = catalog.lookup(&c)? {
                let entry = &catalog.entries()[index];
                let (case, canonical, rho, zero_block) =
                    (entry.case, entry.coloring.clone(), entry.rho.as_ref().map(|r| r.to_string()), entry.zero_block.clone());
                report.axial = Some(AxialMatchReport {
                    catalog_index: index,
                    case,
                    canonical,
                    verdict: catalog.verdict(index)?,
                    rho,
                    zero_block,
                    axial_verified: is_axial_vd(&c),
                });
            }
        }
        out.push(RunOutput { report, trajectory });
    }
    Ok(out)
}

pub fn run_scenario(s: &Scenario) -> Result<Vec<RunOutput>> {
    let mut catalog = CatalogCache::new(s.shape)?;
    run_scenario_with(s, &mut catalog)
}

/// Tallies over a batch of runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub runs: usize,
    pub converged: usize,
    pub diverged: usize,
    pub returned_to_origin: usize,
    pub by_class: BTreeMap<String, usize>,
    pub axial_matches: usize,
    pub by_verdict: BTreeMap<String, usize>,
    pub by_case: BTreeMap<String, usize>,
    /// Mean `max |row sum| / amplitude` over converged runs away from the origin.
    pub mean_row_ratio: Option<f64>,
    pub mean_col_ratio: Option<f64>,
}

pub fn census<'a>(reports: impl IntoIterator<Item = &'a RunReport>) -> Census {
    let mut c = Census::default();
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    for r in reports {
        c.runs += 1;
        c.converged += usize::from(r.equilibrium.converged);
        c.diverged += usize::from(r.equilibrium.diverged);
        c.returned_to_origin += usize::from(r.returned_to_origin());
        if !r.equilibrium.converged {
            continue;
        }
        if let Some(class) = r.class() {
            *c.by_class.entry(format!("{class:?}")).or_default() += 1;
        }
        if let Some(a) = &r.axial {
            c.axial_matches += 1;
            *c.by_verdict.entry(format!("{:?}", a.verdict)).or_default() += 1;
            *c.by_case.entry(format!("{:?}", a.case)).or_default() += 1;
        }
        if !r.returned_to_origin() {
            rows.push(r.zero_sums.row_ratio());
            cols.push(r.zero_sums.col_ratio());
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    c.mean_row_ratio = mean(&rows);
    c.mean_col_ratio = mean(&cols);
    c
}

/// Write `seed_NNN.{json,csv,svg}` per run and `summary.json` into `dir`.
pub fn write_run_outputs(dir: &Path, runs: &[RunOutput]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for run in runs {
        let stem = format!("seed_{:03}", run.report.seed);
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&run.report)? + "\n")?;
        fs::write(dir.join(format!("{stem}.csv")), run.trajectory.to_csv())?;
        let z = ValueMatrix::from_rows(run.report.equilibrium.final_state.clone())?;
        let title = format!("{} seed {}", run.report.scenario, run.report.seed);
        fs::write(dir.join(format!("{stem}.svg")), heatmap_svg(&z, &title))?;
    }
    let summary = census(runs.iter().map(|r| &r.report));
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub runs: usize,
    pub converged: usize,
    pub frac_origin: f64,
    pub frac_consensus: f64,
    pub frac_deadlock: f64,
    pub frac_dissensus: f64,
    /// Converged to a nonzero fully synchronous state.
    pub frac_synchronous: f64,
    pub mean_amplitude: f64,
}

/// One batch per λ (the scenario's own λ and ε are ignored). Fractions are
/// over all seeds; runs that neither converge nor return count in none.
pub fn sweep_lambda(s: &Scenario, lambdas: &[f64]) -> Result<Vec<SweepRow>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda list".into()));
    }
    s.validate()?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let cfg = s.model(lambda)?;
        let runs: Vec<RunReport> = s
            .seeds
            .par_iter()
            .map(|&seed| simulate(s, &cfg, seed).map(|r| r.0))
            .collect::<Result<_>>()?;
        let total = runs.len().max(1) as f64;
        let frac = |pred: &dyn Fn(&RunReport) -> bool| runs.iter().filter(|r| pred(r)).count() as f64 / total;
        let is_class = |r: &RunReport, k: PatternClass| r.equilibrium.converged && !r.returned_to_origin() && r.class() == Some(k);
        let finite: Vec<f64> = runs.iter().map(|r| r.equilibrium.amplitude).filter(|a| a.is_finite()).collect();
        rows.push(SweepRow {
            lambda,
            runs: runs.len(),
            converged: runs.iter().filter(|r| r.equilibrium.converged).count(),
            frac_origin: frac(&|r| r.returned_to_origin()),
            frac_consensus: frac(&|r| is_class(r, PatternClass::Consensus)),
            frac_deadlock: frac(&|r| is_class(r, PatternClass::Deadlock)),
            frac_dissensus: frac(&|r| is_class(r, PatternClass::Dissensus)),
            frac_synchronous: frac(&|r| is_class(r, PatternClass::FullySynchronous)),
            mean_amplitude: if finite.is_empty() { f64::NAN } else { finite.iter().sum::<f64>() / finite.len() as f64 },
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "lambda,runs,converged,frac_origin,frac_consensus,frac_deadlock,frac_dissensus,frac_synchronous,mean_amplitude\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.9e}",
            r.lambda,
            r.runs,
            r.converged,
            r.frac_origin,
            r.frac_consensus,
            r.frac_deadlock,
            r.frac_dissensus,
            r.frac_synchronous,
            r.mean_amplitude
        );
    }
    out
}

/// Adjacent grid values `(below, above)` where the all-return-to-origin regime ends.
pub fn observed_transition(rows: &[SweepRow]) -> Option<(f64, f64)> {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    sorted.windows(2).find(|w| w[0].frac_origin == 1.0 && w[1].frac_origin < 1.0).map(|w| (w[0].lambda, w[1].lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub case: AxialCase,
    pub coloring: Coloring,
    pub rho: Option<String>,
    pub split: Option<Split>,
    pub verdict: Verdict,
    /// Distinct colors carry distinct values in the bifurcating solution.
    pub minimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogExport {
    pub shape: NetworkShape,
    pub entries: Vec<CatalogEntry>,
    pub counts_by_case: BTreeMap<String, usize>,
    pub counts_by_verdict: BTreeMap<String, usize>,
}

pub fn catalog(shape: NetworkShape) -> Result<CatalogExport> {
    let entries = enumerate_axial(shape)?
        .into_iter()
        .map(|a| {
            Ok(CatalogEntry {
                case: a.case,
                verdict: classify_orbital_exotic(&a.coloring)?,
                rho: a.rho.as_ref().map(|r| r.to_string()),
                split: a.split,
                minimal: a.minimal,
                coloring: a.coloring,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts_by_case = BTreeMap::new();
    let mut counts_by_verdict = BTreeMap::new();
    for e in &entries {
        *counts_by_case.entry(format!("{:?}", e.case)).or_insert(0) += 1;
        *counts_by_verdict.entry(format!("{:?}", e.verdict)).or_insert(0) += 1;
    }
    Ok(CatalogExport { shape, entries, counts_by_case, counts_by_verdict })
}

/// Diverging map on `[−1, 1]`: red below zero, yellow at zero, blue above.
pub fn value_color(t: f64) -> (u8, u8, u8) {
    const RED: [f64; 3] = [215.0, 48.0, 39.0];
    const YELLOW: [f64; 3] = [255.0, 255.0, 191.0];
    const BLUE: [f64; 3] = [69.0, 117.0, 180.0];
    let t = if t.is_finite() { t.clamp(-1.0, 1.0) } else { 0.0 };
    let (from, to, u) = if t < 0.0 { (YELLOW, RED, -t) } else { (YELLOW, BLUE, t) };
    let mix = |k: usize| (from[k] + (to[k] - from[k]) * u).round() as u8;
    (mix(0), mix(1), mix(2))
}

/// Heatmap with one rect per cell, symmetric color scale around zero,
/// agents labelled down the left and options along the top.
pub fn heatmap_svg(z: &ValueMatrix<f64>, title: &str) -> String {
    const CELL: usize = 48;
    const LEFT: usize = 80;
    const TOP: usize = 56;
    let (m, n) = (z.m(), z.n());
    let scale = z.as_slice().iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
    let (w, h) = (LEFT + n * CELL + 8, TOP + m * CELL + 8);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12">"#);
    for j in 0..n {
        let x = LEFT + j * CELL + CELL / 2;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">option {}</text>"#, TOP - 8, j + 1);
    }
    for i in 0..m {
        let y = TOP + i * CELL + CELL / 2 + 4;
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">agent {}</text>"#, LEFT - 8, i + 1);
        for j in 0..n {
            let v = z.get(i, j);
            let (r, g, b) = value_color(if scale > 0.0 { v / scale } else { 0.0 });
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" stroke="#ffffff"><title>{v:.6}</title></rect>"##,
                LEFT + j * CELL,
                TOP + i * CELL
            );
        }
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
