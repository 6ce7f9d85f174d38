use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use synbreak::colorings::{random_generic_state, synthesize_stable_admissible, tiling_decomposition, Coloring};
use synbreak::experiments::{
    catalog, census, observed_transition, run_scenario, sweep_csv, sweep_lambda, write_run_outputs, Scenario,
};
use synbreak::model::first_bifurcation;
use synbreak::patterns::{analyze_state, DEFAULT_QUANTIZATION_TOL};
use synbreak::{NetworkShape, ValueMatrix};

#[derive(Parser)]
#[command(name = "synbreak", version, about = "Synchrony-breaking experiments on agent-option value networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario over its seeds and write per-seed reports, trajectories and heatmaps.
    Simulate(ScenarioArgs),
    /// Census of final states over a list of λ values.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated λ values, or `start:stop:count` for an even grid.
        #[arg(long)]
        lambda_list: String,
    },
    /// Axial colorings of an m×n network with their orbital/exotic verdicts.
    Catalog {
        m: usize,
        n: usize,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Quantize a value matrix read from CSV and print its pattern report.
    Classify {
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_QUANTIZATION_TOL)]
        tol: f64,
    },
    /// Build an admissible map with a stable equilibrium on a balanced coloring.
    Synthesize {
        /// Coloring in text form: one row per line, space-separated color ids.
        coloring: PathBuf,
        /// Seed for the generic color values.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds as `a..b` (half-open), `a-b` (inclusive) or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let mut s = match (&self.scenario, &self.config) {
            (Some(name), None) => Scenario::by_name(name).with_context(|| {
                format!("unknown scenario {name:?}; built-ins: {}", Scenario::builtin_names().join(", "))
            })?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Scenario::from_json(&text)?
            }
            _ => bail!("pass exactly one of --scenario or --config"),
        };
        if let Some(seeds) = &self.seeds {
            s.seeds = parse_seeds(seeds)?;
        }
        if let Some(eps) = self.epsilon {
            s.epsilon = eps;
        }
        s.validate()?;
        Ok(s)
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        return Ok((a.trim().parse()?..b.trim().parse()?).collect());
    }
    if let Some((a, b)) = text.split_once('-') {
        return Ok((a.trim().parse()?..=b.trim().parse()?).collect());
    }
    text.split(',').map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}"))).collect()
}

fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (a, b): (f64, f64) = (parts[0].trim().parse()?, parts[1].trim().parse()?);
        let count: usize = parts[2].trim().parse()?;
        if count < 2 {
            bail!("a λ grid needs at least two points");
        }
        return Ok((0..count).map(|k| a + (b - a) * k as f64 / (count - 1) as f64).collect());
    }
    text.split(',').map(|s| s.trim().parse().with_context(|| format!("bad λ {s:?}"))).collect()
}

fn read_matrix_csv(path: &Path) -> Result<ValueMatrix<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.trim().parse::<f64>().with_context(|| format!("bad value {v:?}"))).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(ValueMatrix::from_rows(rows)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => {
            let s = args.load()?;
            let runs = run_scenario(&s)?;
            if let Some(dir) = &args.out_dir {
                let dir = dir.join(&s.name);
                write_run_outputs(&dir, &runs)?;
                eprintln!("wrote {} runs to {}", runs.len(), dir.display());
            }
            println!("{}", serde_json::to_string_pretty(&census(runs.iter().map(|r| &r.report)))?);
        }
        Command::Sweep { scenario, lambda_list } => {
            let s = scenario.load()?;
            let rows = sweep_lambda(&s, &parse_lambdas(&lambda_list)?)?;
            let csv = sweep_csv(&rows);
            match &scenario.out_dir {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join(format!("{}-sweep.csv", s.name)), &csv)?;
                }
                None => print!("{csv}"),
            }
            if let Some(t) = first_bifurcation(&s.coefficients) {
                eprintln!("predicted threshold: {:?} at λ = {}", t.irrep, t.lambda);
            }
            if let Some((lo, hi)) = observed_transition(&rows) {
                eprintln!("observed transition between λ = {lo} and λ = {hi}");
            }
        }
        Command::Catalog { m, n, catalog: path } => {
            let export = catalog(NetworkShape::new(m, n)?)?;
            let json = serde_json::to_string_pretty(&export)? + "\n";
            match path {
                Some(p) => fs::write(p, json)?,
                None => print!("{json}"),
            }
            eprintln!("by case: {:?}; by verdict: {:?}", export.counts_by_case, export.counts_by_verdict);
        }
        Command::Classify { csv, tol } => {
            let z = read_matrix_csv(&csv)?;
            let (_, report) = analyze_state(&z, tol)?;
            println!("{}", report.to_json()?);
        }
        Command::Synthesize { coloring, seed } => {
            let text = fs::read_to_string(&coloring).with_context(|| format!("reading {}", coloring.display()))?;
            let c: Coloring = text.parse()?;
            let tiling = tiling_decomposition(&c)?;
            let y = random_generic_state(&c, seed);
            let r = synthesize_stable_admissible(&c, &y)?;
            let out = serde_json::json!({
                "coloring": c,
                "blocks": tiling.blocks.len(),
                "state": y.rows(),
                "nodes": r.map.nodes,
                "residual": r.residual,
                "fd_step": r.fd_step,
                "max_eigenvalue_deviation": r.max_eigenvalue_deviation,
                "stable": r.is_stable(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}
