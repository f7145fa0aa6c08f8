//! On-disk forms of grain statistics.
//!
//! `stats.txt` holds one `key,value` pair per line in a fixed order:
//!
//! ```text
//! width,<cells>
//! height,<cells>
//! grain_count,<n>
//! labels,<k>
//! non_blank_cells,<n>
//! mean_grain_area,<real>
//! orientation_fraction_<label>,<real>     (k lines)
//! hist_bins,<b>
//! hist_edge_<i>,<real>                    (b + 1 lines)
//! hist_count_<i>,<n>                      (b lines)
//! ```
//!
//! Reals use the shortest representation that parses back to the same value.
//! Per-grain areas live in the sibling `centroids.csv` (`id,label,x,y,area`).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MicrostructureStats, SizeHistogram};
use crate::error::{Error, Result};
use crate::raster::io::csv_error;
use crate::raster::{save_csv, Label};

pub const STATS_FILE: &str = "stats.txt";
pub const CENTROIDS_FILE: &str = "centroids.csv";

/// A row of the centroid CSV. `z` is present only for volumetric seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidRow {
    pub id: u32,
    pub label: Label,
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
    pub area: usize,
}

pub fn write_centroids_csv(path: impl AsRef<Path>, rows: &[CentroidRow]) -> Result<()> {
    let with_z = rows.iter().any(|r| r.z.is_some());
    let header: &[&str] = if with_z {
        &["id", "label", "x", "y", "area", "z"]
    } else {
        &["id", "label", "x", "y", "area"]
    };
    save_csv(
        path,
        header,
        rows.iter().map(|r| {
            let mut out = vec![
                r.id.to_string(),
                r.label.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.area.to_string(),
            ];
            if with_z {
                out.push(r.z.unwrap_or(0.0).to_string());
            }
            out
        }),
    )
}

pub fn read_centroids_csv(path: impl AsRef<Path>) -> Result<Vec<CentroidRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let missing = |name: &str| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: format!("missing column {name:?}"),
    };
    let id_col = column("id").ok_or_else(|| missing("id"))?;
    let label_col = column("label").ok_or_else(|| missing("label"))?;
    let x_col = column("x").ok_or_else(|| missing("x"))?;
    let y_col = column("y").ok_or_else(|| missing("y"))?;
    let area_col = column("area");
    let z_col = column("z");

    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = |col: &str| Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("row {}: bad {col}", line + 2),
        };
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        rows.push(CentroidRow {
            id: field(id_col).parse().map_err(|_| bad("id"))?,
            label: field(label_col).parse().map_err(|_| bad("label"))?,
            x: field(x_col).parse().map_err(|_| bad("x"))?,
            y: field(y_col).parse().map_err(|_| bad("y"))?,
            z: match z_col {
                Some(c) => Some(field(c).parse().map_err(|_| bad("z"))?),
                None => None,
            },
            area: match area_col {
                Some(c) if !field(c).is_empty() => field(c).parse().map_err(|_| bad("area"))?,
                _ => 0,
            },
        });
    }
    Ok(rows)
}

pub fn format_stats_summary(stats: &MicrostructureStats) -> String {
    let mut out = String::new();
    let filled: usize = stats.grain_areas.iter().sum();
    let mean_area = if stats.grain_count == 0 {
        0.0
    } else {
        filled as f64 / stats.grain_count as f64
    };
    let _ = writeln!(out, "width,{}", stats.dims.0);
    let _ = writeln!(out, "height,{}", stats.dims.1);
    let _ = writeln!(out, "grain_count,{}", stats.grain_count);
    let _ = writeln!(out, "labels,{}", stats.orientation_fractions.len());
    let _ = writeln!(out, "non_blank_cells,{filled}");
    let _ = writeln!(out, "mean_grain_area,{mean_area}");
    for (l, f) in stats.orientation_fractions.iter().enumerate() {
        let _ = writeln!(out, "orientation_fraction_{l},{f}");
    }
    let _ = writeln!(out, "hist_bins,{}", stats.histogram.counts.len());
    for (i, e) in stats.histogram.edges.iter().enumerate() {
        let _ = writeln!(out, "hist_edge_{i},{e}");
    }
    for (i, c) in stats.histogram.counts.iter().enumerate() {
        let _ = writeln!(out, "hist_count_{i},{c}");
    }
    out
}

pub fn write_stats_summary(path: impl AsRef<Path>, stats: &MicrostructureStats) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_stats_summary(stats)).map_err(|e| Error::io(path, e))
}

/// Reloads stats written by [`write_stats_summary`] plus `centroids.csv`.
pub fn read_stats_dir(dir: impl AsRef<Path>) -> Result<MicrostructureStats> {
    let dir = dir.as_ref();
    let path = dir.join(STATS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let corrupt = |reason: String| Error::CorruptFile {
        path: path.clone(),
        reason,
    };
    let mut kv: HashMap<&str, &str> = HashMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once(',')
            .ok_or_else(|| corrupt(format!("malformed line {line:?}")))?;
        kv.insert(k.trim(), v.trim());
    }
    fn get<T: std::str::FromStr>(
        kv: &HashMap<&str, &str>,
        key: &str,
    ) -> std::result::Result<T, String> {
        kv.get(key)
            .ok_or_else(|| format!("missing key {key}"))?
            .parse()
            .map_err(|_| format!("bad value for {key}"))
    }
    let width: usize = get(&kv, "width").map_err(corrupt)?;
    let height: usize = get(&kv, "height").map_err(corrupt)?;
    let grain_count: usize = get(&kv, "grain_count").map_err(corrupt)?;
    let labels: usize = get(&kv, "labels").map_err(corrupt)?;
    let bins: usize = get(&kv, "hist_bins").map_err(corrupt)?;
    let orientation_fractions = (0..labels)
        .map(|l| get::<f64>(&kv, &format!("orientation_fraction_{l}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(corrupt)?;

    let rows = read_centroids_csv(dir.join(CENTROIDS_FILE))?;
    if rows.len() != grain_count {
        return Err(corrupt(format!(
            "grain_count is {grain_count} but {CENTROIDS_FILE} has {} rows",
            rows.len()
        )));
    }
    let grain_areas: Vec<usize> = rows.iter().map(|r| r.area).collect();
    let filled: usize = grain_areas.iter().sum();
    let volume_fractions = grain_areas
        .iter()
        .map(|&a| {
            if filled == 0 {
                0.0
            } else {
                a as f64 / filled as f64
            }
        })
        .collect();
    let max_area = grain_areas.iter().copied().max().unwrap_or(1);
    Ok(MicrostructureStats {
        dims: (width, height),
        grain_count,
        orientation_fractions,
        histogram: SizeHistogram::build(&grain_areas, bins.max(1), max_area),
        grain_areas,
        volume_fractions,
    })
}
