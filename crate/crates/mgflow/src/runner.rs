//! Scenario execution: artifact layout, incremental diagnostics writing,
//! checkpoint/resume, expectation checks, and concurrent parameter sweeps.
//!
//! Output directory layout for one run:
//!
//! ```text
//! <out>/diagnostics.csv          one row per diagnostics record
//! <out>/snapshots/loop_NNNNNN.csv  loop samples every `output.stride` records
//! <out>/final_loop.csv           samples of the final curve
//! <out>/checkpoint.json          resumable state, refreshed at each snapshot
//! <out>/manifest.json            hashes, classification, artifact paths
//! ```

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use mgflow_core::flow::{self, Classification, FlowState};

use crate::artifacts::{
    classification_str, diagnostics_row, fmt_f64, read_checkpoint, write_json_pretty,
    write_loop_csv, ArtifactPaths, Checkpoint, FinalSummary, RunManifest, CHECKPOINT_FORMAT,
    DIAGNOSTICS_HEADER,
};
use crate::config::ScenarioConfig;

/// What went wrong, mapped onto the CLI exit-code contract.
#[derive(Debug)]
pub enum RunError {
    /// Configuration or setup violations (exit 1); one line per problem.
    Config(Vec<String>),
    /// IO or integrator failure while running (exit 2).
    Runtime(String),
    /// The run finished but not with the classification `--expect` asked for
    /// (exit 3).
    Expectation { expected: Classification, got: Classification },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Runtime(_) => 2,
            RunError::Expectation { .. } => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(violations) => {
                writeln!(f, "invalid configuration:")?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
            RunError::Runtime(msg) => write!(f, "run failed: {msg}"),
            RunError::Expectation { expected, got } => write!(
                f,
                "expected classification {}, got {}",
                classification_str(*expected),
                classification_str(*got)
            ),
        }
    }
}

impl std::error::Error for RunError {}

/// Per-invocation switches of `mgflow run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.directory` when set.
    pub out_dir: Option<PathBuf>,
    /// Require this final classification (exit 3 otherwise).
    pub expect: Option<Classification>,
    /// Continue from `checkpoint.json` in the output directory if present.
    pub resume: bool,
}

fn resolve_out_dir(config: &ScenarioConfig, opts: &RunOptions) -> Result<PathBuf, RunError> {
    let dir = match &opts.out_dir {
        Some(d) => d.clone(),
        None => match &config.output.directory {
            Some(d) => PathBuf::from(d),
            None => {
                return Err(RunError::Config(vec![
                    "output.directory: no output directory set (pass --out or set \
                     output.directory)"
                        .to_string(),
                ]))
            }
        },
    };
    if dir.as_os_str().is_empty() {
        return Err(RunError::Config(vec!["output.directory: empty path".to_string()]));
    }
    Ok(dir)
}

fn io_err(context: &str, e: std::io::Error) -> RunError {
    RunError::Runtime(format!("{context}: {e}"))
}

/// Keep the header and the first `rows` data rows of an existing diagnostics
/// file, returning how many data rows were kept.
fn truncate_diagnostics(path: &Path, rows: usize) -> Result<usize, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| io_err("resume: cannot read existing diagnostics.csv", e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RunError::Runtime("resume: diagnostics.csv is empty".to_string()))?;
    if header != DIAGNOSTICS_HEADER {
        return Err(RunError::Runtime(
            "resume: diagnostics.csv has an unexpected header".to_string(),
        ));
    }
    let kept: Vec<&str> = lines.take(rows).collect();
    let mut out = String::with_capacity(text.len());
    out.push_str(header);
    out.push('\n');
    for line in &kept {
        out.push_str(line);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err("resume: cannot rewrite diagnostics.csv", e))?;
    Ok(kept.len())
}

/// List `snapshots/loop_*.csv` relative paths, sorted by name.
fn list_snapshots(out_dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(out_dir.join("snapshots"))
        .map(|entries| {
            entries
                .filter_map(|e| e.ok())
                .filter_map(|e| e.file_name().into_string().ok())
                .filter(|name| name.starts_with("loop_") && name.ends_with(".csv"))
                .map(|name| format!("snapshots/{name}"))
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

/// Validate, integrate, and write all artifacts for one scenario. Returns
/// the manifest together with the resolved output directory.
pub fn run_scenario(
    config: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<(RunManifest, PathBuf), RunError> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let out_dir = resolve_out_dir(config, opts)?;
    fs::create_dir_all(out_dir.join("snapshots"))
        .map_err(|e| io_err("cannot create output directory", e))?;

    let field = config.field();
    let flow_config = config.flow_config();
    let physics_hash = config.physics_hash();
    let diagnostics_path = out_dir.join("diagnostics.csv");
    let checkpoint_path = out_dir.join("checkpoint.json");

    // Resume from the checkpoint when asked to and one exists; otherwise
    // start fresh. `records_base` counts rows already on disk, and the first
    // observer callback of a resumed run re-emits the checkpointed record,
    // which is skipped instead of written twice.
    let mut start_state: Option<FlowState> = None;
    let mut records_base = 0usize;
    if opts.resume && checkpoint_path.exists() {
        let cp = read_checkpoint(&checkpoint_path).map_err(RunError::Runtime)?;
        if cp.physics_hash != physics_hash {
            return Err(RunError::Config(vec![format!(
                "checkpoint: physics hash mismatch (checkpoint {}, config {}); refusing to \
                 resume a different scenario",
                cp.physics_hash, physics_hash
            )]));
        }
        cp.state
            .curve
            .revalidate()
            .map_err(|e| RunError::Runtime(format!("resume: checkpointed curve invalid: {e}")))?;
        records_base = truncate_diagnostics(&diagnostics_path, cp.records_written)?;
        start_state = Some(cp.state);
    }
    let resuming = start_state.is_some();
    let state = match start_state {
        Some(s) => s,
        None => {
            let initial = config
                .initial_loop()
                .map_err(|e| RunError::Config(vec![format!("initial: {e}")]))?;
            fs::write(&diagnostics_path, format!("{DIAGNOSTICS_HEADER}\n"))
                .map_err(|e| io_err("cannot create diagnostics.csv", e))?;
            FlowState::new(initial)
        }
    };

    let diag_file = fs::OpenOptions::new()
        .append(true)
        .open(&diagnostics_path)
        .map_err(|e| io_err("cannot open diagnostics.csv", e))?;
    let mut writer = BufWriter::new(diag_file);
    let mut row_index = records_base;
    let mut skip_first = resuming;
    let mut first_error: Option<RunError> = None;
    let snapshot_stride = config.output.stride;

    let started = Instant::now();
    let outcome = flow::resume_with(state, &field, &flow_config, |st, rec| {
        if skip_first {
            skip_first = false;
            return;
        }
        if first_error.is_some() {
            return;
        }
        let mut attempt = || -> Result<(), RunError> {
            writeln!(writer, "{}", diagnostics_row(rec))
                .map_err(|e| io_err("cannot write diagnostics row", e))?;
            if row_index % snapshot_stride == 0 {
                let name = format!("loop_{row_index:06}.csv");
                write_loop_csv(&out_dir.join("snapshots").join(&name), &st.curve)
                    .map_err(|e| io_err("cannot write loop snapshot", e))?;
                writer.flush().map_err(|e| io_err("cannot flush diagnostics.csv", e))?;
                let cp = Checkpoint {
                    format: CHECKPOINT_FORMAT.to_string(),
                    physics_hash: physics_hash.clone(),
                    records_written: row_index + 1,
                    state: st.clone(),
                };
                write_json_pretty(&checkpoint_path, &cp)
                    .map_err(|e| io_err("cannot write checkpoint", e))?;
            }
            Ok(())
        };
        if let Err(e) = attempt() {
            first_error = Some(e);
        }
        row_index += 1;
    })
    .map_err(|e| RunError::Runtime(e.to_string()))?;
    let wall_seconds = started.elapsed().as_secs_f64();
    writer.flush().map_err(|e| io_err("cannot flush diagnostics.csv", e))?;
    drop(writer);
    if let Some(e) = first_error {
        return Err(e);
    }

    write_loop_csv(&out_dir.join("final_loop.csv"), &outcome.final_state.curve)
        .map_err(|e| io_err("cannot write final_loop.csv", e))?;
    let final_checkpoint = Checkpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        physics_hash,
        records_written: row_index,
        state: outcome.final_state.clone(),
    };
    write_json_pretty(&checkpoint_path, &final_checkpoint)
        .map_err(|e| io_err("cannot write checkpoint", e))?;

    let final_record = outcome
        .series
        .last()
        .ok_or_else(|| RunError::Runtime("run produced no diagnostics records".to_string()))?;
    let manifest = RunManifest {
        config_hash: config.config_hash(),
        physics_hash: final_checkpoint.physics_hash.clone(),
        classification: outcome.classification,
        wall_seconds,
        artifacts: ArtifactPaths {
            diagnostics: "diagnostics.csv".to_string(),
            final_loop: "final_loop.csv".to_string(),
            snapshots: list_snapshots(&out_dir),
            checkpoint: "checkpoint.json".to_string(),
        },
        final_summary: FinalSummary::from_record(final_record),
        note: outcome.note.clone(),
        blowup: outcome.blowup.clone(),
    };
    write_json_pretty(&out_dir.join("manifest.json"), &manifest)
        .map_err(|e| io_err("cannot write manifest.json", e))?;

    if let Some(expected) = opts.expect {
        if expected != outcome.classification {
            return Err(RunError::Expectation { expected, got: outcome.classification });
        }
    }
    Ok((manifest, out_dir))
}

/// One sweep case: the swept value, its subdirectory (relative to the sweep
/// root), and the finished manifest.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub value: f64,
    pub dir: String,
    pub manifest: RunManifest,
}

/// Per-invocation switches of `mgflow sweep`.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Sweep root directory; overrides `output.directory`.
    pub out_dir: Option<PathBuf>,
    /// Maximum concurrent scenarios.
    pub threads: usize,
}

/// Set the numeric field addressed by a dotted path (array indices allowed as
/// numeric segments) and return the resulting config.
fn override_numeric(
    base: &ScenarioConfig,
    param_path: &str,
    value: f64,
) -> Result<ScenarioConfig, String> {
    let mut root = serde_json::to_value(base).expect("config serialization cannot fail");
    let mut cursor = &mut root;
    for part in param_path.split('.') {
        let next = match cursor {
            serde_json::Value::Object(map) => map.get_mut(part),
            serde_json::Value::Array(items) => match part.parse::<usize>() {
                Ok(idx) => items.get_mut(idx),
                Err(_) => None,
            },
            _ => None,
        };
        cursor = next.ok_or_else(|| {
            format!("sweep.param: path {param_path:?} has no component {part:?}")
        })?;
    }
    if !cursor.is_number() {
        return Err(format!("sweep.param: {param_path:?} does not address a numeric field"));
    }
    let number = serde_json::Number::from_f64(value)
        .ok_or_else(|| format!("sweep.values: {value} is not a finite number"))?;
    *cursor = serde_json::Value::Number(number);
    serde_json::from_value(root)
        .map_err(|e| format!("sweep.param: overriding {param_path:?} broke the config: {e}"))
}

/// Directory-name rendering of a swept value (finite floats display as
/// digits, `.`, `-`, and `e` only, all safe in file names).
fn value_slug(value: f64) -> String {
    format!("{value}")
}

/// Run one scenario per value, each in its own subdirectory, with at most
/// `threads` running at once. The summary CSV keeps the input value order.
pub fn run_sweep(
    base: &ScenarioConfig,
    param_path: &str,
    values: &[f64],
    opts: &SweepOptions,
) -> Result<(Vec<SweepCase>, PathBuf), RunError> {
    if values.is_empty() {
        return Err(RunError::Config(vec![
            "sweep.values: at least one value is required".to_string(),
        ]));
    }
    let violations = base.validate();
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let sweep_root = resolve_out_dir(
        base,
        &RunOptions { out_dir: opts.out_dir.clone(), expect: None, resume: false },
    )?;

    // Build and validate every case config before running anything, so a bad
    // sweep fails fast and atomically.
    let mut cases: Vec<(f64, String, ScenarioConfig)> = Vec::with_capacity(values.len());
    let mut case_errors: Vec<String> = Vec::new();
    for (i, &value) in values.iter().enumerate() {
        match override_numeric(base, param_path, value) {
            Ok(config) => {
                let errs = config.validate();
                if errs.is_empty() {
                    cases.push((value, format!("case_{i:02}_{}", value_slug(value)), config));
                } else {
                    case_errors
                        .extend(errs.into_iter().map(|e| format!("{param_path} = {value}: {e}")));
                }
            }
            Err(e) => case_errors.push(e),
        }
    }
    if !case_errors.is_empty() {
        return Err(RunError::Config(case_errors));
    }
    fs::create_dir_all(&sweep_root).map_err(|e| io_err("cannot create sweep directory", e))?;

    let results: Vec<Mutex<Option<Result<RunManifest, RunError>>>> =
        cases.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = opts.threads.clamp(1, cases.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let (_, dir, config) = &cases[i];
                let case_opts = RunOptions {
                    out_dir: Some(sweep_root.join(dir)),
                    expect: None,
                    resume: false,
                };
                let outcome = run_scenario(config, &case_opts).map(|(manifest, _)| manifest);
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    // Summary rows in input order; failed cases are recorded as "error" so
    // the summary stays aligned with the value list.
    let mut summary = String::from("value,classification,final_kinetic,final_residual\n");
    let mut finished: Vec<SweepCase> = Vec::with_capacity(cases.len());
    let mut first_error: Option<RunError> = None;
    for ((value, dir, _), cell) in cases.iter().zip(results) {
        let result = cell.into_inner().unwrap().expect("worker pool covered every case");
        match result {
            Ok(manifest) => {
                summary.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(*value),
                    classification_str(manifest.classification),
                    fmt_f64(manifest.final_summary.kinetic),
                    fmt_f64(manifest.final_summary.residual_l2),
                ));
                finished.push(SweepCase { value: *value, dir: dir.clone(), manifest });
            }
            Err(e) => {
                summary.push_str(&format!("{},error,NA,NA\n", fmt_f64(*value)));
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    let summary_path = sweep_root.join("summary.csv");
    fs::write(&summary_path, summary).map_err(|e| io_err("cannot write summary.csv", e))?;
    match first_error {
        Some(e) => Err(e),
        None => Ok((finished, summary_path)),
    }
}
