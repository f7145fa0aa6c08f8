//! Grid and palette primitives shared by every engine.

pub(crate) mod io;
mod quantize;

pub use io::{load_png, read_palette_csv, save_csv, save_png, write_palette_csv};
pub use quantize::quantize_image;

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Categorical orientation class.
pub type Label = u16;

pub type Rgb = [u8; 3];

/// Colour used for blank cells when rendering.
pub const BLANK_COLOR: Rgb = [0, 0, 0];

/// Row-major lattice of labels.
///
/// Unassigned cells are stored in-band: when `blank` is set, cells holding
/// that value count as empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelGrid {
    width: usize,
    height: usize,
    cells: Vec<Label>,
    blank: Option<Label>,
}

impl LabelGrid {
    pub fn new(width: usize, height: usize, cells: Vec<Label>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return Err(Error::invalid(format!(
                "grid {width}x{height} needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            cells,
            blank: None,
        })
    }

    /// Grid with every cell set to `label`. Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        Self {
            width,
            height,
            cells: vec![label; width * height],
            blank: None,
        }
    }

    /// Builds a grid from rows of equal length.
    pub fn from_rows<R: AsRef<[Label]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::invalid("ragged rows"));
        }
        let cells = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(width, height, cells)
    }

    pub fn with_blank(mut self, blank: Label) -> Self {
        self.blank = Some(blank);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Label] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Label] {
        &mut self.cells
    }

    pub fn blank(&self) -> Option<Label> {
        self.blank
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Label {
        self.cells[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        let i = self.index(x, y);
        self.cells[i] = label;
    }

    #[inline]
    pub fn is_blank(&self, label: Label) -> bool {
        self.blank == Some(label)
    }

    pub fn blank_count(&self) -> usize {
        match self.blank {
            Some(b) => self.cells.iter().filter(|&&c| c == b).count(),
            None => 0,
        }
    }

    /// One past the largest non-blank label present (0 for an all-blank grid).
    pub fn label_bound(&self) -> usize {
        self.cells
            .iter()
            .filter(|&&c| !self.is_blank(c))
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Checks that every non-blank cell is below `palette_len`.
    pub fn validate(&self, palette_len: usize) -> Result<()> {
        for (i, &c) in self.cells.iter().enumerate() {
            if !self.is_blank(c) && c as usize >= palette_len {
                return Err(Error::invalid(format!(
                    "cell ({}, {}) has label {c}, palette has {palette_len} entries",
                    i % self.width,
                    i / self.width
                )));
            }
        }
        Ok(())
    }

    /// Per-label cell counts for labels `0..bound`, blanks excluded.
    pub fn label_counts(&self, bound: usize) -> Vec<usize> {
        let mut counts = vec![0; bound];
        for &c in &self.cells {
            if !self.is_blank(c) && (c as usize) < bound {
                counts[c as usize] += 1;
            }
        }
        counts
    }

    /// Relabels non-blank cells in first-occurrence row-major order.
    pub fn canonicalized(&self) -> LabelGrid {
        let mut map: HashMap<Label, Label> = HashMap::new();
        let cells = self
            .cells
            .iter()
            .map(|&c| {
                if self.is_blank(c) {
                    return c;
                }
                let next = map.len() as Label;
                *map.entry(c).or_insert(next)
            })
            .collect();
        LabelGrid {
            cells,
            ..self.clone()
        }
    }
}

/// Packed 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "image {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: Rgb) {
        let w = self.width;
        self.pixels[y * w + x] = color;
    }

    /// Fills the clipped rectangle `[x0, x1) x [y0, y1)`.
    pub fn fill_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, color: Rgb) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.set(x, y, color);
            }
        }
    }

    /// Copies `src` with its top-left corner at `(x0, y0)`, clipping at the edges.
    pub fn blit(&mut self, src: &RgbImage, x0: usize, y0: usize) {
        for y in 0..src.height {
            for x in 0..src.width {
                if x0 + x < self.width && y0 + y < self.height {
                    self.set(x0 + x, y0 + y, src.get(x, y));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaletteEntry {
    pub label: Label,
    pub color: Rgb,
    pub name: String,
}

/// Colour legend mapping labels `0..len` to distinct colours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    entries: Vec<PaletteEntry>,
}

impl Palette {
    pub fn new(entries: Vec<PaletteEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.label as usize != i {
                return Err(Error::invalid(format!(
                    "palette labels must be consecutive from 0; entry {i} has label {}",
                    e.label
                )));
            }
            if entries[..i].iter().any(|o| o.color == e.color) {
                return Err(Error::invalid(format!(
                    "palette colour {:?} appears more than once",
                    e.color
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Palette with default names `orientation_<label>`.
    pub fn from_colors(colors: &[Rgb]) -> Result<Self> {
        Self::new(
            colors
                .iter()
                .enumerate()
                .map(|(i, &color)| PaletteEntry {
                    label: i as Label,
                    color,
                    name: format!("orientation_{i}"),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }

    pub fn color(&self, label: Label) -> Option<Rgb> {
        self.entries.get(label as usize).map(|e| e.color)
    }

    pub fn label_of(&self, color: Rgb) -> Option<Label> {
        self.entries
            .iter()
            .find(|e| e.color == color)
            .map(|e| e.label)
    }

    pub fn colors(&self) -> Vec<Rgb> {
        self.entries.iter().map(|e| e.color).collect()
    }
}

/// Paints each cell with its palette colour; blank cells become [`BLANK_COLOR`].
pub fn render(grid: &LabelGrid, palette: &Palette) -> Result<RgbImage> {
    grid.validate(palette.len())?;
    if grid.blank_count() > 0 && palette.label_of(BLANK_COLOR).is_some() {
        return Err(Error::invalid(
            "palette uses pure black, which is reserved for blank cells",
        ));
    }
    let pixels = grid
        .cells()
        .iter()
        .map(|&c| {
            if grid.is_blank(c) {
                BLANK_COLOR
            } else {
                palette.entries[c as usize].color
            }
        })
        .collect();
    RgbImage::new(grid.width(), grid.height(), pixels)
}

/// Inverse of [`render`]: exact colour lookup against `palette`.
///
/// Pure black pixels that are not a palette colour decode to the blank label
/// `palette.len()`. Any other unknown colour is an error.
pub fn decode(image: &RgbImage, palette: &Palette) -> Result<LabelGrid> {
    let lookup: HashMap<Rgb, Label> = palette.entries.iter().map(|e| (e.color, e.label)).collect();
    let blank = palette.len() as Label;
    let mut saw_blank = false;
    let mut cells = Vec::with_capacity(image.pixels.len());
    for (i, &px) in image.pixels.iter().enumerate() {
        match lookup.get(&px) {
            Some(&l) => cells.push(l),
            None if px == BLANK_COLOR => {
                saw_blank = true;
                cells.push(blank);
            }
            None => {
                return Err(Error::invalid(format!(
                    "pixel ({}, {}) colour {:?} is not in the palette",
                    i % image.width,
                    i / image.width,
                    px
                )))
            }
        }
    }
    let grid = LabelGrid::new(image.width, image.height, cells)?;
    Ok(if saw_blank {
        grid.with_blank(blank)
    } else {
        grid
    })
}
