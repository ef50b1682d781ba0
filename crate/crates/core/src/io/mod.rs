//! Configuration, eigen-cache, dataset emission and plotting.

pub mod cache;
pub mod config;
pub mod dataset;
pub mod svg;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use cache::{CachePolicy, DirectSolver, EigenCache, SystemKey, TotalSolver};
pub use config::{parse_config, parse_config_str, RunConfig};
pub use dataset::{emit_dataset, emit_json, format_sig9, Cell, Schema, Table};

use crate::error::Result;
use crate::experiments::FigureOutput;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "ETHLAB_OUT_DIR";

/// Writes every table, document and (with `plot`) SVG of `out` into `dir`,
/// followed by `<name>_manifest.json`. Returns the written paths in order.
pub fn write_figure(out: &FigureOutput, cfg: &RunConfig, dir: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for t in &out.tables {
        paths.push(emit_dataset(t, dir)?);
    }
    for (name, doc) in &out.documents {
        let p = dir.join(format!("{name}.json"));
        emit_json(doc, &p)?;
        paths.push(p);
    }
    if plot {
        for (name, p) in &out.plots {
            let path = dir.join(format!("{name}.svg"));
            dataset::write_text(&path, &p.render())?;
            paths.push(path);
        }
    }
    let name = out.experiment.short_name();
    let manifest = manifest(out, cfg, &paths);
    let p = dir.join(format!("{name}_manifest.json"));
    emit_json(&manifest, &p)?;
    paths.push(p);
    Ok(paths)
}

fn manifest(out: &FigureOutput, cfg: &RunConfig, files: &[PathBuf]) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": out.experiment,
        "config": cfg,
        "seeds": {
            "seed": cfg.seed,
            "system_stream": 0,
            "operator_streams": "operator index + 1",
        },
        "timings_seconds": out.timings.iter().map(|(k, v)| json!({ "phase": k, "seconds": v })).collect::<Vec<_>>(),
        "results": out.results,
        "files": files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect::<Vec<_>>(),
    })
}
