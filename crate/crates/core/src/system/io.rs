//! Loading and saving of system files and their time-series CSVs.

use super::types::{DemandAndResSeries, SeriesRefs, SystemFile};
use super::SystemSpec;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in `{path}` at line {line}, column {column}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("`{owner}` references unknown {kind} `{target}`")]
    DanglingReference {
        kind: String,
        owner: String,
        target: String,
    },
    #[error("inconsistent data for `{entity}`: {detail}")]
    Inconsistent { entity: String, detail: String },
    #[error("unit/base inconsistency: {0}")]
    BaseInconsistency(String),
    #[error("series error in `{path}`: {detail}")]
    Series { path: PathBuf, detail: String },
}

/// Loads a system JSON file and its time-series CSVs, resolving every
/// cross-reference. The returned spec is immutable and thread-safe.
pub fn load_system(path: impl AsRef<Path>) -> Result<SystemSpec, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: SystemFile = serde_json::from_str(&text).map_err(|e| LoadError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })?;
    if !(file.base_mva.is_finite() && file.base_mva > 0.0) {
        return Err(LoadError::BaseInconsistency(format!(
            "base_mva must be positive and finite, got {}",
            file.base_mva
        )));
    }

    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let load_ids: Vec<&str> = file.loads.iter().map(|l| l.id.as_str()).collect();
    let res_ids: Vec<&str> = file.res.iter().map(|r| r.id.as_str()).collect();
    let loads = read_series(&dir.join(&file.series.loads), &load_ids)?;
    let res = if file.res.is_empty() {
        Vec::new()
    } else {
        read_series(&dir.join(&file.series.res), &res_ids)?
    };

    let horizon = loads.first().map(Vec::len).unwrap_or(0);
    if loads.iter().any(|s| s.len() != horizon) {
        return Err(LoadError::Series {
            path: dir.join(&file.series.loads),
            detail: "load series have unequal lengths".into(),
        });
    }
    if !res.is_empty() && res.iter().any(|s| s.len() != horizon) {
        return Err(LoadError::Series {
            path: dir.join(&file.series.res),
            detail: format!("RES series length does not match load horizon {horizon}"),
        });
    }

    let series = DemandAndResSeries {
        horizon,
        load: loads,
        res,
    };
    SystemSpec::resolve(file, series)
}

/// Writes the system back out as JSON plus the two series CSVs.
/// `load_system(save_system(spec))` is the identity: every numeric field
/// round-trips bit-exactly.
pub fn save_system(spec: &SystemSpec, path: impl AsRef<Path>) -> Result<(), LoadError> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".to_string());
    let file = SystemFile {
        base_mva: spec.base_mva,
        areas: spec.areas.clone(),
        buses: spec.buses.clone(),
        generators: spec.generators.clone(),
        converters: spec.converters.clone(),
        ac_lines: spec.ac_lines.clone(),
        loads: spec.loads.clone(),
        res: spec.res.clone(),
        series: SeriesRefs {
            loads: format!("{stem}_loads.csv"),
            res: format!("{stem}_res.csv"),
        },
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let io_err = |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    };
    let json = serde_json::to_string_pretty(&file).expect("serializable");
    std::fs::write(path, json).map_err(io_err)?;

    let load_ids: Vec<&str> = spec.loads.iter().map(|l| l.id.as_str()).collect();
    write_series(
        &dir.join(&file.series.loads),
        &load_ids,
        &spec.series.load,
        spec.series.horizon,
    )?;
    let res_ids: Vec<&str> = spec.res.iter().map(|r| r.id.as_str()).collect();
    write_series(
        &dir.join(&file.series.res),
        &res_ids,
        &spec.series.res,
        spec.series.horizon,
    )?;
    Ok(())
}

/// Reads a series CSV with header `period,<id>,...`. Every id in `ids` must
/// have a column; unknown columns are rejected to catch renamed entities.
fn read_series(path: &Path, ids: &[&str]) -> Result<Vec<Vec<f64>>, LoadError> {
    let series_err = |detail: String| LoadError::Series {
        path: path.to_path_buf(),
        detail,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| series_err(e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| series_err(e.to_string()))?
        .clone();
    let mut col_of: HashMap<&str, usize> = HashMap::new();
    for (c, h) in headers.iter().enumerate() {
        if c == 0 {
            if h != "period" {
                return Err(series_err(format!(
                    "first column must be `period`, got `{h}`"
                )));
            }
            continue;
        }
        if col_of.insert(h, c).is_some() {
            return Err(series_err(format!("duplicate column `{h}`")));
        }
    }
    for (h, _) in col_of.iter() {
        if !ids.contains(h) {
            return Err(series_err(format!("column `{h}` matches no entity id")));
        }
    }
    let mut cols: Vec<usize> = Vec::with_capacity(ids.len());
    for id in ids {
        let c = col_of
            .get(id)
            .ok_or_else(|| series_err(format!("missing column for entity `{id}`")))?;
        cols.push(*c);
    }

    let mut out: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| series_err(e.to_string()))?;
        for (slot, &c) in cols.iter().enumerate() {
            let raw = rec.get(c).ok_or_else(|| {
                series_err(format!("row {}: missing field {}", row_no + 2, c))
            })?;
            let v: f64 = raw.trim().parse().map_err(|_| {
                series_err(format!("row {}: `{raw}` is not a number", row_no + 2))
            })?;
            out[slot].push(v);
        }
    }
    Ok(out)
}

fn write_series(
    path: &Path,
    ids: &[&str],
    series: &[Vec<f64>],
    horizon: usize,
) -> Result<(), LoadError> {
    let mut text = String::from("period");
    for id in ids {
        text.push(',');
        text.push_str(id);
    }
    text.push('\n');
    for t in 0..horizon {
        text.push_str(&(t + 1).to_string());
        for s in series {
            text.push(',');
            // `{}` on f64 prints the shortest representation that parses
            // back to the same bits, so the CSV round-trips exactly
            text.push_str(&s[t].to_string());
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}
