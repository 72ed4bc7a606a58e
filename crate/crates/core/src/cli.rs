//! Config-driven batch commands: spectra, matrices, decompositions,
//! verification reports, and symbol/operator averaging, emitted as JSON or
//! CSV. One job per invocation; output files are written atomically
//! (write-then-rename).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bergman::SpaceParams;
use crate::combinatorics::enumerate_multi_indices;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::representation::{average_operator, isotypic_decomposition};
use crate::symbols::{BlockPartition, SymbolSpec};
use crate::toeplitz::{
    block_radial_spectrum, spectrum_vs_matrix, toeplitz_matrix, Method, OperatorMatrix,
    SpectrumTable,
};

/// Default quadrature order when the config omits a method block.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;
/// Default Monte Carlo sample count.
pub const DEFAULT_MC_COUNT: usize = 1_000_000;

/// Job command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Matrix,
    Decompose,
    Verify,
    Average,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        match name {
            "spectrum" => Some(Command::Spectrum),
            "matrix" => Some(Command::Matrix),
            "decompose" => Some(Command::Decompose),
            "verify" => Some(Command::Verify),
            "average" => Some(Command::Average),
            _ => None,
        }
    }
}

/// Output format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Raw method block as it appears in config JSON.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub quadrature: Option<QuadratureConfig>,
    pub monte_carlo: Option<MonteCarloConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: Option<usize>,
    #[serde(default)]
    pub split_points: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub count: Option<usize>,
    /// Mandatory: wall-clock seeding would break reproducibility.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Closed-form / quadrature comparison tolerance (default 1e-8).
    pub closed_form: Option<f64>,
    /// Statistical comparison width in standard errors (default 4).
    pub sigma: Option<f64>,
}

/// Raw configuration document, prior to validation.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n: usize,
    pub m: u32,
    /// Block sizes summing to n; omitted means the full group U(n).
    pub group: Option<Vec<usize>>,
    pub symbol: Option<SymbolSpec>,
    /// Second symbol for the `verify` commutator check.
    pub second_symbol: Option<SymbolSpec>,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    /// For `average`: radii grid at which to report the radialized symbol
    /// instead of the averaged operator.
    pub grid: Option<Vec<Vec<f64>>>,
    /// Averaging sample count / seed (general groups only).
    pub averaging_samples: Option<usize>,
    pub averaging_seed: Option<u64>,
}

/// A field-level validation finding. Diagnostics are data, not exceptions.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

/// A fully-resolved job with defaults applied.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub params: SpaceParams,
    pub group: BlockPartition,
    pub symbol: Option<SymbolSpec>,
    pub second_symbol: Option<SymbolSpec>,
    pub quadrature: QuadratureSpec,
    pub mc_count: usize,
    pub mc_seed: Option<u64>,
    pub use_monte_carlo: bool,
    pub out_path: Option<PathBuf>,
    pub format: Format,
    pub closed_form_tolerance: f64,
    pub sigma: f64,
    pub grid: Option<Vec<Vec<f64>>>,
    pub averaging_samples: usize,
    pub averaging_seed: u64,
}

/// Parses and validates a configuration document. Returns either a resolved
/// job or the full list of diagnostics; never panics on malformed input.
pub fn validate_config(text: &str) -> std::result::Result<JobConfig, Vec<Diagnostic>> {
    let raw: RawConfig = match serde_json::from_str(text) {
        Ok(raw) => raw,
        Err(e) => {
            return Err(vec![Diagnostic {
                field: "<document>".into(),
                message: format!("invalid JSON: {e}"),
            }]);
        }
    };
    validate_raw(&raw)
}

fn validate_raw(raw: &RawConfig) -> std::result::Result<JobConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    let params = match SpaceParams::new(raw.n, raw.m) {
        Ok(p) => Some(p),
        Err(e) => {
            diags.push(Diagnostic {
                field: "n/m".into(),
                message: e.to_string(),
            });
            None
        }
    };

    let group = match &raw.group {
        None => Some(BlockPartition::full(raw.n.max(1))),
        Some(blocks) => match BlockPartition::new(blocks.clone()) {
            Ok(p) if p.n() == raw.n => Some(p),
            Ok(p) => {
                diags.push(Diagnostic {
                    field: "group".into(),
                    message: format!("partition sums to {} ≠ n={}", p.n(), raw.n),
                });
                None
            }
            Err(e) => {
                diags.push(Diagnostic {
                    field: "group".into(),
                    message: e.to_string(),
                });
                None
            }
        },
    };

    // Build the symbol once to surface family/parameter problems early.
    if let Some(spec) = &raw.symbol {
        if let Err(e) = spec.build(raw.n.max(1)) {
            diags.push(Diagnostic {
                field: "symbol".into(),
                message: e.to_string(),
            });
        }
    }
    if let Some(spec) = &raw.second_symbol {
        if let Err(e) = spec.build(raw.n.max(1)) {
            diags.push(Diagnostic {
                field: "second_symbol".into(),
                message: e.to_string(),
            });
        }
    }

    if raw.method.quadrature.is_some() && raw.method.monte_carlo.is_some() {
        diags.push(Diagnostic {
            field: "method".into(),
            message: "exactly one of `quadrature` and `monte_carlo` may be given".into(),
        });
    }

    let use_monte_carlo = raw.method.monte_carlo.is_some();
    let mc = raw.method.monte_carlo.clone().unwrap_or(MonteCarloConfig {
        count: None,
        seed: None,
    });
    if use_monte_carlo && mc.seed.is_none() {
        diags.push(Diagnostic {
            field: "method.monte_carlo.seed".into(),
            message: "seed is mandatory for Monte Carlo methods".into(),
        });
    }
    let mc_count = mc.count.unwrap_or(DEFAULT_MC_COUNT);
    if mc_count == 0 {
        diags.push(Diagnostic {
            field: "method.monte_carlo.count".into(),
            message: "sample count must be ≥ 1".into(),
        });
    }

    let qc = raw.method.quadrature.clone().unwrap_or(QuadratureConfig {
        order: None,
        split_points: Vec::new(),
    });
    let quadrature = QuadratureSpec::with_order(qc.order.unwrap_or(DEFAULT_QUADRATURE_ORDER))
        .and_then(|s| {
            if qc.split_points.is_empty() {
                Ok(s)
            } else {
                QuadratureSpec::with_splits(s.order, qc.split_points.clone())
            }
        });
    let quadrature = match quadrature {
        Ok(q) => Some(q),
        Err(e) => {
            diags.push(Diagnostic {
                field: "method.quadrature".into(),
                message: e.to_string(),
            });
            None
        }
    };

    let sigma = raw.tolerances.sigma.unwrap_or(4.0);
    let closed_form = raw.tolerances.closed_form.unwrap_or(1e-8);
    if sigma <= 0.0 || closed_form <= 0.0 {
        diags.push(Diagnostic {
            field: "tolerances".into(),
            message: "tolerances must be positive".into(),
        });
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(JobConfig {
        params: params.unwrap(),
        group: group.unwrap(),
        symbol: raw.symbol.clone(),
        second_symbol: raw.second_symbol.clone(),
        quadrature: quadrature.unwrap(),
        mc_count,
        mc_seed: mc.seed,
        use_monte_carlo,
        out_path: raw.output.path.clone(),
        format: raw.output.format.unwrap_or_default(),
        closed_form_tolerance: closed_form,
        sigma,
        grid: raw.grid.clone(),
        averaging_samples: raw.averaging_samples.unwrap_or(64),
        averaging_seed: raw.averaging_seed.unwrap_or(1),
    })
}

/// Result of a job: the rendered document and the process exit status.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    pub document: String,
}

fn require_symbol(config: &JobConfig) -> Result<crate::symbols::Symbol> {
    let spec = config
        .symbol
        .as_ref()
        .ok_or_else(|| Error::Config("this command requires a `symbol` block".into()))?;
    spec.build(config.params.n())
}

fn spectrum_json(table: &SpectrumTable, order: &crate::combinatorics::BasisOrder) -> serde_json::Value {
    let per_index: Vec<_> = order
        .iter()
        .map(|(_, p)| {
            json!({
                "p": p.entries(),
                "eigenvalue": table.per_index(p),
            })
        })
        .collect();
    json!({
        "n": table.params.n(),
        "m": table.params.m(),
        "partition": table.partition.blocks(),
        "entries": table
            .entries
            .iter()
            .map(|(d, ev, dim)| json!({"degrees": d, "eigenvalue": ev, "dimension": dim}))
            .collect::<Vec<_>>(),
        "per_index": per_index,
        "method": table.method,
        "error_estimate": table.error_estimate,
    })
}

fn spectrum_csv(table: &SpectrumTable) -> String {
    let mut out = String::from("degrees,eigenvalue\n");
    for (d, ev, _) in &table.entries {
        let key: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{},{}", key.join("-"), ev);
    }
    out
}

fn matrix_json(t: &OperatorMatrix, order: &crate::combinatorics::BasisOrder) -> serde_json::Value {
    let dim = t.dim();
    let rows: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|q| {
            (0..dim)
                .map(|p| {
                    let e = t.entries()[(q, p)];
                    [e.re, e.im]
                })
                .collect()
        })
        .collect();
    json!({
        "n": t.params().n(),
        "m": t.params().m(),
        "basis": order.iter().map(|(_, p)| p.entries().to_vec()).collect::<Vec<_>>(),
        "entries": rows,
        "provenance": t.provenance(),
        "error_estimate": t.error_estimate(),
    })
}

fn matrix_csv(t: &OperatorMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for q in 0..t.dim() {
        for p in 0..t.dim() {
            let e = t.entries()[(q, p)];
            let _ = writeln!(out, "{q},{p},{},{}", e.re, e.im);
        }
    }
    out
}

/// Executes a job. Returns the rendered document and the exit status; writes
/// the output file atomically when a path is configured.
pub fn run(command: Command, config: &JobConfig) -> Result<RunOutput> {
    let params = config.params;
    let order = enumerate_multi_indices(params.n(), params.m())?;
    let mut exit_code = 0;

    let document = match command {
        Command::Spectrum => {
            let a = require_symbol(config)?;
            let table =
                block_radial_spectrum(params, &config.group, &a, &config.quadrature, &order)?;
            match config.format {
                Format::Json => pretty(&spectrum_json(&table, &order))?,
                Format::Csv => spectrum_csv(&table),
            }
        }
        Command::Matrix => {
            let a = require_symbol(config)?;
            let method = if config.use_monte_carlo {
                Method::MonteCarlo {
                    count: config.mc_count,
                    seed: config.mc_seed.expect("validated"),
                }
            } else {
                Method::Quadrature(config.quadrature.clone())
            };
            let t = toeplitz_matrix(params, &order, &a, &method)?;
            match config.format {
                Format::Json => pretty(&matrix_json(&t, &order))?,
                Format::Csv => matrix_csv(&t),
            }
        }
        Command::Decompose => {
            let decomposition = isotypic_decomposition(params, &config.group, &order)?;
            let components: Vec<_> = decomposition
                .components()
                .iter()
                .map(|c| {
                    json!({
                        "degrees": c.degrees,
                        "dimension": c.dimension,
                        "basis_positions": c.basis_positions,
                    })
                })
                .collect();
            let doc = json!({
                "n": params.n(),
                "m": params.m(),
                "partition": config.group.blocks(),
                "components": components,
            });
            match config.format {
                Format::Json => pretty(&doc)?,
                Format::Csv => {
                    let mut out = String::from("degrees,dimension\n");
                    for c in decomposition.components() {
                        let key: Vec<String> =
                            c.degrees.iter().map(|x| x.to_string()).collect();
                        let _ = writeln!(out, "{},{}", key.join("-"), c.dimension);
                    }
                    out
                }
            }
        }
        Command::Verify => {
            let a = require_symbol(config)?;
            let b = config
                .second_symbol
                .as_ref()
                .map(|s| s.build(params.n()))
                .transpose()?
                .unwrap_or_else(|| a.clone());
            let report = spectrum_vs_matrix(
                params,
                &config.group,
                &a,
                &b,
                &config.quadrature,
                config.mc_count,
                config.mc_seed.unwrap_or(DEFAULT_VERIFY_SEED),
                &order,
            )?;
            if !report.passed() {
                exit_code = 1;
            }
            match config.format {
                Format::Json => pretty(&json!({
                    "passed": report.passed(),
                    "checks": report.checks,
                }))?,
                Format::Csv => {
                    let mut out = String::from("check,measured,tolerance,pass\n");
                    for c in &report.checks {
                        let _ =
                            writeln!(out, "{},{},{},{}", c.name, c.measured, c.tolerance, c.pass);
                    }
                    out
                }
            }
        }
        Command::Average => {
            let a = require_symbol(config)?;
            if let Some(grid) = &config.grid {
                // Report the group-averaged (radialized) symbol at the given
                // block-radius grid points.
                let averaged = crate::symbols::radialize_block(
                    &a,
                    &config.group,
                    config.averaging_samples.max(256),
                    config.averaging_seed,
                )?;
                let values: Vec<_> = grid
                    .iter()
                    .map(|radii| {
                        if radii.len() != config.group.num_blocks() {
                            return Err(Error::DimensionMismatch(format!(
                                "grid point has {} radii, partition has {} blocks",
                                radii.len(),
                                config.group.num_blocks()
                            )));
                        }
                        let mut z = vec![crate::C64::new(0.0, 0.0); params.n()];
                        let mut start = 0;
                        for (&k, &r) in config.group.blocks().iter().zip(radii.iter()) {
                            z[start] = crate::C64::new(r, 0.0);
                            start += k;
                        }
                        let v = averaged.evaluate(&z);
                        Ok(json!({"radii": radii, "value": [v.re, v.im]}))
                    })
                    .collect::<Result<_>>()?;
                pretty(&json!({
                    "n": params.n(),
                    "m": params.m(),
                    "partition": config.group.blocks(),
                    "symbol_average": values,
                }))?
            } else {
                let method = Method::MonteCarlo {
                    count: config.mc_count,
                    seed: config.mc_seed.unwrap_or(DEFAULT_VERIFY_SEED),
                };
                let t = toeplitz_matrix(params, &order, &a, &method)?;
                let averaged = average_operator(
                    params,
                    &config.group,
                    &order,
                    &t,
                    config.averaging_samples,
                    config.averaging_seed,
                )?;
                match config.format {
                    Format::Json => pretty(&matrix_json(&averaged, &order))?,
                    Format::Csv => matrix_csv(&averaged),
                }
            }
        }
    };

    if let Some(path) = &config.out_path {
        write_atomic(path, &document)?;
    }
    Ok(RunOutput {
        exit_code,
        document,
    })
}

/// Seed used for verification/averaging sampling when the config does not
/// name one (quadrature-method configs have no seed field).
pub const DEFAULT_VERIFY_SEED: u64 = 7;

fn pretty(value: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the document to a sibling temporary file, then renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Convenience for tests and the binary: parse, validate, and run in one
/// step, mapping diagnostics to exit status 1 and non-convergence to 2.
pub fn run_from_text(command_name: &str, config_text: &str) -> (i32, String) {
    let Some(command) = Command::parse(command_name) else {
        let doc = serde_json::to_string_pretty(&vec![Diagnostic {
            field: "<command>".into(),
            message: format!(
                "unknown command `{command_name}`; expected spectrum, matrix, decompose, verify, or average"
            ),
        }])
        .unwrap();
        return (1, doc);
    };
    match validate_config(config_text) {
        Err(diags) => {
            let doc = serde_json::to_string_pretty(&diags).unwrap();
            (1, doc)
        }
        Ok(config) => match run(command, &config) {
            Ok(out) => (out.exit_code, out.document),
            Err(e @ Error::NonConvergence(_)) => (2, format!("{{\"error\": \"{e}\"}}\n")),
            Err(e) => (
                1,
                serde_json::to_string_pretty(&vec![Diagnostic {
                    field: "<runtime>".into(),
                    message: e.to_string(),
                }])
                .unwrap(),
            ),
        },
    }
}
