use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{nearest_seed, CentroidSet3, Metric};
use crate::error::{Error, Result};
use crate::raster::io::{save_csv, save_png};
use crate::raster::{render, Label, LabelGrid, Palette};

pub const MANIFEST_FILE: &str = "manifest.csv";

/// A `w x h x d` block of labels stored x-fastest, then y, then z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVolume {
    dims: [usize; 3],
    cells: Vec<Label>,
}

impl LabelVolume {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cells(&self) -> &[Label] {
        &self.cells
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Label {
        let [w, h, _] = self.dims;
        self.cells[(z * h + y) * w + x]
    }

    pub fn slice(&self, z: usize) -> LabelGrid {
        let [w, h, _] = self.dims;
        LabelGrid::new(w, h, self.cells[z * w * h..(z + 1) * w * h].to_vec())
            .expect("positive dims")
    }
}

pub fn voxel_tessellation_3d(cs: &CentroidSet3, metric: Metric) -> LabelVolume {
    let dims = cs.dims();
    let [w, h, d] = dims;
    let pts = cs.points();
    let cells = (0..d)
        .into_par_iter()
        .flat_map_iter(|z| {
            (0..h).flat_map(move |y| {
                (0..w).map(move |x| {
                    let at = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
                    pts[nearest_seed(pts, &at, metric)].label
                })
            })
        })
        .collect();
    LabelVolume { dims, cells }
}

/// Writes one PNG per z slice plus a `slice,filename` manifest.
pub fn write_volume(dir: &Path, volume: &LabelVolume, palette: &Palette) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let depth = volume.dims[2];
    let digits = depth.saturating_sub(1).to_string().len().max(3);
    let mut rows = Vec::with_capacity(depth);
    for z in 0..depth {
        let name = format!("slice_{z:0digits$}.png");
        save_png(dir.join(&name), &render(&volume.slice(z), palette)?)?;
        rows.push(vec![z.to_string(), name]);
    }
    save_csv(&dir.join(MANIFEST_FILE), &["slice", "filename"], &rows)
}
