//! Median-cut colour quantisation.
//!
//! Boxes are split until `k` boxes exist or no box holds two distinct colours.
//! The box with the widest single-channel extent splits first (ties: lowest box
//! index), along its widest channel (ties: lowest channel index), at the pixel
//! weighted median (lower middle for even counts). Palette colours are rounded
//! weighted box means. Each pixel then takes its nearest palette colour in
//! squared RGB distance, and labels are numbered by first occurrence.

use std::collections::{BTreeMap, HashMap};

use super::{Label, LabelGrid, Palette, Rgb, RgbImage};
use crate::error::{Error, Result};

type ColorBox = Vec<(Rgb, u64)>;

pub fn quantize_image(image: &RgbImage, k: usize) -> Result<(LabelGrid, Palette)> {
    if k == 0 {
        return Err(Error::invalid("colour count k must be at least 1"));
    }
    if image.pixels().is_empty() {
        return Err(Error::invalid("cannot quantize an empty image"));
    }

    let mut histogram: BTreeMap<Rgb, u64> = BTreeMap::new();
    for &px in image.pixels() {
        *histogram.entry(px).or_default() += 1;
    }

    let mut boxes: Vec<ColorBox> = vec![histogram.into_iter().collect()];
    while boxes.len() < k {
        let Some(pick) = widest_box(&boxes) else {
            break;
        };
        let (left, right) = split_box(std::mem::take(&mut boxes[pick]));
        boxes[pick] = left;
        boxes.insert(pick + 1, right);
    }

    let mut candidates: Vec<Rgb> = Vec::with_capacity(boxes.len());
    for b in &boxes {
        let c = box_mean(b);
        if !candidates.contains(&c) {
            candidates.push(c);
        }
    }

    let mut nearest_cache: HashMap<Rgb, usize> = HashMap::new();
    let mut first_seen: Vec<usize> = Vec::new();
    let mut relabel: HashMap<usize, Label> = HashMap::new();
    let mut cells = Vec::with_capacity(image.pixels().len());
    for &px in image.pixels() {
        let idx = *nearest_cache
            .entry(px)
            .or_insert_with(|| nearest(&candidates, px));
        let label = *relabel.entry(idx).or_insert_with(|| {
            first_seen.push(idx);
            (first_seen.len() - 1) as Label
        });
        cells.push(label);
    }

    let colors: Vec<Rgb> = first_seen.iter().map(|&i| candidates[i]).collect();
    let grid = LabelGrid::new(image.width(), image.height(), cells)?;
    Ok((grid, Palette::from_colors(&colors)?))
}

fn channel_range(b: &ColorBox, ch: usize) -> u8 {
    let lo = b.iter().map(|(c, _)| c[ch]).min().unwrap_or(0);
    let hi = b.iter().map(|(c, _)| c[ch]).max().unwrap_or(0);
    hi - lo
}

fn widest_channel(b: &ColorBox) -> (usize, u8) {
    let mut best = (0, channel_range(b, 0));
    for ch in 1..3 {
        let r = channel_range(b, ch);
        if r > best.1 {
            best = (ch, r);
        }
    }
    best
}

fn widest_box(boxes: &[ColorBox]) -> Option<usize> {
    let mut best: Option<(usize, u8)> = None;
    for (i, b) in boxes.iter().enumerate() {
        if b.len() < 2 {
            continue;
        }
        let r = widest_channel(b).1;
        if best.is_none_or(|(_, br)| r > br) {
            best = Some((i, r));
        }
    }
    best.map(|(i, _)| i)
}

fn split_box(mut b: ColorBox) -> (ColorBox, ColorBox) {
    let (ch, _) = widest_channel(&b);
    b.sort_by_key(|(c, _)| (c[ch], *c));
    let total: u64 = b.iter().map(|(_, w)| w).sum();
    let median = (total - 1) / 2;
    let mut cum = 0;
    let mut cut = b.len() - 1;
    for (i, (_, w)) in b.iter().enumerate() {
        cum += w;
        if cum > median {
            cut = i + 1;
            break;
        }
    }
    // both halves must hold at least one colour
    let cut = cut.clamp(1, b.len() - 1);
    let right = b.split_off(cut);
    (b, right)
}

fn box_mean(b: &ColorBox) -> Rgb {
    let total: u64 = b.iter().map(|(_, w)| w).sum();
    let mut out = [0u8; 3];
    for (ch, slot) in out.iter_mut().enumerate() {
        let sum: u64 = b.iter().map(|(c, w)| c[ch] as u64 * w).sum();
        *slot = ((sum + total / 2) / total) as u8;
    }
    out
}

fn dist2(a: Rgb, b: Rgb) -> u32 {
    (0..3)
        .map(|i| (a[i] as i32 - b[i] as i32).pow(2) as u32)
        .sum()
}

fn nearest(colors: &[Rgb], px: Rgb) -> usize {
    let mut best = 0;
    let mut best_d = u32::MAX;
    for (i, &c) in colors.iter().enumerate() {
        let d = dist2(c, px);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::render;
    use crate::rng::SeededRng;

    fn image(w: usize, h: usize, f: impl Fn(usize, usize) -> Rgb) -> RgbImage {
        let px = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        RgbImage::new(w, h, px).unwrap()
    }

    #[test]
    fn uniform_image_collapses() {
        let img = RgbImage::filled(10, 10, [255, 0, 0]);
        let (g, p) = quantize_image(&img, 8).unwrap();
        assert!(g.cells().iter().all(|&c| c == 0));
        assert_eq!(p.len(), 1);
        assert_eq!(p.color(0), Some([255, 0, 0]));
    }

    #[test]
    fn two_tone_exact() {
        let img = image(
            2,
            2,
            |_, y| if y == 0 { [0, 0, 0] } else { [255, 255, 255] },
        );
        let (g, p) = quantize_image(&img, 2).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(g.label_counts(2), vec![2, 2]);
        assert_eq!(p.colors(), vec![[0, 0, 0], [255, 255, 255]]);
    }

    #[test]
    fn lossless_when_k_covers_distinct_colors() {
        let mut rng = SeededRng::new(3);
        let colors: Vec<Rgb> = (0..5)
            .map(|_| {
                [
                    rng.below(256) as u8,
                    rng.below(256) as u8,
                    rng.below(256) as u8,
                ]
            })
            .collect();
        let choice: Vec<usize> = (0..256).map(|_| rng.below(5)).collect();
        let img = image(16, 16, |x, y| colors[choice[y * 16 + x]]);
        let (g, p) = quantize_image(&img, 5).unwrap();
        // brute force: every pixel reproduced exactly
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(p.color(g.get(x, y)).unwrap(), img.get(x, y));
            }
        }
    }

    #[test]
    fn palette_bounded_by_k() {
        let img = image(32, 32, |x, y| {
            [(x * 8) as u8, (y * 8) as u8, ((x + y) * 4) as u8]
        });
        for k in 1..10 {
            let (g, p) = quantize_image(&img, k).unwrap();
            assert!(p.len() <= k);
            g.validate(p.len()).unwrap();
            // every cell maps to its nearest palette colour
            for (i, &l) in g.cells().iter().enumerate() {
                let px = img.pixels()[i];
                let d = dist2(p.color(l).unwrap(), px);
                assert!(p.colors().iter().all(|&c| dist2(c, px) >= d));
            }
        }
    }

    #[test]
    fn even_split_takes_lower_middle() {
        // weights 1,1,1,1 along red: lower median is the 2nd pixel
        let b: ColorBox = vec![
            ([0, 0, 0], 1),
            ([10, 0, 0], 1),
            ([20, 0, 0], 1),
            ([30, 0, 0], 1),
        ];
        let (l, r) = split_box(b);
        assert_eq!(l.len(), 2);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn errors() {
        assert!(quantize_image(&RgbImage::filled(0, 0, [0, 0, 0]), 3).is_err());
        assert!(quantize_image(&RgbImage::filled(2, 2, [0, 0, 0]), 0).is_err());
    }

    #[test]
    fn round_trip_through_render() {
        let palette = [
            [10, 20, 30],
            [200, 0, 0],
            [0, 200, 0],
            [0, 0, 200],
            [90, 90, 90],
            [1, 2, 3],
            [250, 250, 0],
            [0, 250, 250],
        ];
        let img = image(12, 9, |x, y| palette[(x * 7 + y * 3) % 8]);
        let (g, p) = quantize_image(&img, 8).unwrap();
        assert_eq!(render(&g, &p).unwrap(), img);
    }
}
