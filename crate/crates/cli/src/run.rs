//! Run directories, artifact files and the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::{load_config, resolve_path, ExperimentConfig, Mode};
use crate::error::{CliError, EXIT_OK};
use crate::modes::{execute, Artifacts};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub lab_version: String,
    pub core_version: String,
    pub mode: String,
    pub seed: u64,
    pub status: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub run: RunInfo,
    pub result: BTreeMap<String, String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn to_text(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::config(format!("manifest: {e}")))
    }

    pub fn from_text(s: &str) -> Result<Manifest, CliError> {
        toml::from_str(s).map_err(|e| CliError::config(format!("manifest: {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub status: String,
    pub exit: i32,
}

/// Fresh `<out>/<mode>-<utc stamp>` directory; a numeric suffix keeps
/// earlier runs intact.
pub fn create_run_dir(out: &Path, mode: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let stem = format!("{mode}-{stamp}");
    for k in 0.. {
        let name = if k == 0 { stem.clone() } else { format!("{stem}-{k}") };
        let dir = out.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// Run `cfg` in a new directory under `cfg.out`. `base` resolves relative
/// paths inside the config.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path, workers: usize) -> Result<RunOutcome, CliError> {
    let mode = cfg.mode.ok_or_else(|| CliError::config("mode not set"))?;
    let dir = create_run_dir(Path::new(&cfg.out), mode.name())?;
    run_into(cfg, base, &dir, workers)
}

pub fn run_into(cfg: &ExperimentConfig, base: &Path, dir: &Path, workers: usize) -> Result<RunOutcome, CliError> {
    let art = match cfg.mode {
        Some(Mode::Sweep) => sweep(cfg, base, dir, workers)?,
        _ => execute(cfg, base).unwrap_or_else(|e| Artifacts::failure(&e)),
    };
    write_artifacts(cfg, dir, &art)?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        status: art.status,
        exit: art.exit,
    })
}

fn write_artifacts(cfg: &ExperimentConfig, dir: &Path, art: &Artifacts) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join("trace.csv"))?;
    if !art.trace.header.is_empty() {
        w.write_record(&art.trace.header)?;
    }
    for r in &art.trace.rows {
        w.write_record(r)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("plot.csv"))?;
    w.write_record(["series", "x", "y"])?;
    for r in &art.plot {
        w.write_record(r)?;
    }
    w.flush()?;

    let mut report = String::new();
    report.push_str(&format!("mode: {}\nstatus: {}\nexit: {}\n", cfg.mode.map(|m| m.name()).unwrap_or("-"), art.status, art.exit));
    for (k, v) in &art.report {
        report.push_str(&format!("{k}: {v}\n"));
    }
    for (k, v) in &art.result {
        report.push_str(&format!("{k}: {v}\n"));
    }
    fs::write(dir.join("report.txt"), report)?;

    let m = Manifest {
        run: RunInfo {
            lab_version: env!("CARGO_PKG_VERSION").into(),
            core_version: extremal_core::VERSION.into(),
            mode: cfg.mode.map(|m| m.name()).unwrap_or("-").into(),
            seed: cfg.seed,
            status: art.status.clone(),
            exit_code: art.exit,
        },
        result: art.result.clone(),
        config: cfg.clone(),
    };
    fs::write(dir.join("manifest.txt"), m.to_text()?)?;
    Ok(())
}

/// Independent configs on up to `workers` threads, each in
/// `<dir>/<index>-<mode>`. The sweep exits with the first nonzero child code.
fn sweep(cfg: &ExperimentConfig, base: &Path, dir: &Path, workers: usize) -> Result<Artifacts, CliError> {
    let mut children = Vec::new();
    for p in &cfg.sweep.configs {
        let path = resolve_path(base, p);
        let c = load_config(&path, &[])?;
        if c.mode.is_none() || c.mode == Some(Mode::Sweep) {
            return Err(CliError::config(format!("{}: sweep entries need a non-sweep mode", path.display())));
        }
        let child_base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        children.push((c, child_base));
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunOutcome, String>>>> = Mutex::new(vec![None; children.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(children.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= children.len() {
                    break;
                }
                let (c, b) = &children[i];
                let sub = dir.join(format!("{i}-{}", c.mode.map(|m| m.name()).unwrap_or("-")));
                let r = fs::create_dir(&sub)
                    .map_err(CliError::from)
                    .and_then(|_| run_into(c, b, &sub, 1))
                    .map_err(|e| e.to_string());
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().unwrap();
    let mut art = Artifacts {
        status: "ok".into(),
        exit: EXIT_OK,
        ..Artifacts::default()
    };
    art.trace.header = ["index", "config", "dir", "status", "exit"].iter().map(|s| s.to_string()).collect();
    for (i, r) in results.into_iter().enumerate() {
        let (d, status, exit) = match r.expect("every child runs") {
            Ok(o) => (o.dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(), o.status, o.exit),
            Err(e) => (String::new(), format!("failed: {e}"), 1),
        };
        if art.exit == EXIT_OK && exit != EXIT_OK {
            art.exit = exit;
            art.status = format!("child {i} failed");
        }
        art.trace.rows.push(vec![i.to_string(), cfg.sweep.configs[i].clone(), d, status, exit.to_string()]);
    }
    art.result.insert("children".into(), cfg.sweep.configs.len().to_string());
    Ok(art)
}
