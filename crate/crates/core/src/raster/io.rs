//! PNG and CSV file I/O.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind};
use std::path::Path;

use png::{BitDepth, ColorType, DecodingError};

use super::{Label, Palette, PaletteEntry, Rgb, RgbImage};
use crate::error::{Error, Result};

/// Reads an 8-bit RGB or RGBA PNG. Alpha is discarded.
pub fn load_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| decode_error(path, e))?;

    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    let channels = match (info.color_type, info.bit_depth) {
        (ColorType::Rgb, BitDepth::Eight) => 3,
        (ColorType::Rgba, BitDepth::Eight) => 4,
        (ct, bd) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                format: format!(
                    "{} at {}-bit depth (expected 8-bit RGB or RGBA)",
                    color_name(ct),
                    bd as u8
                ),
            })
        }
    };

    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::CorruptFile {
            path: path.to_path_buf(),
            reason: "image dimensions overflow".into(),
        })?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| decode_error(path, e))?;
    let stride = frame.line_size;
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(stride).take(height) {
        for px in row[..width * channels].chunks_exact(channels) {
            pixels.push([px[0], px[1], px[2]]);
        }
    }
    RgbImage::new(width, height, pixels)
}

fn color_name(ct: ColorType) -> &'static str {
    match ct {
        ColorType::Grayscale => "grayscale",
        ColorType::GrayscaleAlpha => "grayscale+alpha",
        ColorType::Indexed => "palette (indexed colour)",
        ColorType::Rgb => "RGB",
        ColorType::Rgba => "RGBA",
    }
}

fn decode_error(path: &Path, err: DecodingError) -> Error {
    match err {
        DecodingError::IoError(e) if e.kind() != ErrorKind::UnexpectedEof => Error::io(path, e),
        other => Error::CorruptFile {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Writes an 8-bit RGB PNG.
pub fn save_png(path: impl AsRef<Path>, image: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        image.width() as u32,
        image.height() as u32,
    );
    encoder.set_color(ColorType::Rgb);
    encoder.set_depth(BitDepth::Eight);
    let to_io = |e: png::EncodingError| match e {
        png::EncodingError::IoError(e) => Error::io(path, e),
        other => Error::invalid(format!("{}: {other}", path.display())),
    };
    let mut writer = encoder.write_header().map_err(to_io)?;
    let data: Vec<u8> = image.pixels().iter().flatten().copied().collect();
    writer.write_image_data(&data).map_err(to_io)?;
    writer.finish().map_err(to_io)
}

/// Writes a header row followed by `rows`, comma-separated with LF line endings.
pub fn save_csv<R, S>(path: impl AsRef<Path>, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator,
    R::Item: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        let row: Vec<S> = row.into_iter().collect();
        w.write_record(row.iter().map(|s| s.as_ref()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::io(path, e),
            _ => unreachable!(),
        }
    } else {
        Error::CorruptFile {
            path: path.to_path_buf(),
            reason: err.to_string(),
        }
    }
}

/// Palette sidecar: `label,r,g,b,name`.
pub fn write_palette_csv(path: impl AsRef<Path>, palette: &Palette) -> Result<()> {
    save_csv(
        path,
        &["label", "r", "g", "b", "name"],
        palette.entries().iter().map(|e| {
            vec![
                e.label.to_string(),
                e.color[0].to_string(),
                e.color[1].to_string(),
                e.color[2].to_string(),
                e.name.clone(),
            ]
        }),
    )
}

pub fn read_palette_csv(path: impl AsRef<Path>) -> Result<Palette> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut entries = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = |what: &str| Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("row {}: {what}", line + 2),
        };
        if rec.len() < 4 {
            return Err(bad("expected label,r,g,b,name"));
        }
        let label: Label = rec[0].trim().parse().map_err(|_| bad("bad label"))?;
        let mut color: Rgb = [0; 3];
        for (ch, slot) in color.iter_mut().enumerate() {
            *slot = rec[ch + 1]
                .trim()
                .parse()
                .map_err(|_| bad("bad colour channel"))?;
        }
        let name = rec.get(4).unwrap_or("").to_string();
        entries.push(PaletteEntry { label, color, name });
    }
    Palette::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = SeededRng::new(9);
        let px = (0..9)
            .map(|_| {
                [
                    rng.below(256) as u8,
                    rng.below(256) as u8,
                    rng.below(256) as u8,
                ]
            })
            .collect();
        let img = RgbImage::new(3, 3, px).unwrap();
        let path = dir.path().join("a.png");
        save_png(&path, &img).unwrap();
        assert_eq!(load_png(&path).unwrap(), img);
    }

    fn write_raw(path: &Path, w: u32, h: u32, ct: ColorType, bd: BitDepth, data: &[u8]) {
        let file = File::create(path).unwrap();
        let mut enc = png::Encoder::new(BufWriter::new(file), w, h);
        enc.set_color(ct);
        enc.set_depth(bd);
        if ct == ColorType::Indexed {
            enc.set_palette(vec![0, 0, 0, 255, 255, 255]);
        }
        let mut wr = enc.write_header().unwrap();
        wr.write_image_data(data).unwrap();
        wr.finish().unwrap();
    }

    #[test]
    fn rgba_drops_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgba.png");
        write_raw(
            &path,
            2,
            1,
            ColorType::Rgba,
            BitDepth::Eight,
            &[1, 2, 3, 0, 4, 5, 6, 255],
        );
        let img = load_png(&path).unwrap();
        assert_eq!(img.pixels(), &[[1, 2, 3], [4, 5, 6]]);
    }

    #[test]
    fn sixteen_bit_and_indexed_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p16 = dir.path().join("deep.png");
        write_raw(&p16, 1, 1, ColorType::Rgb, BitDepth::Sixteen, &[0; 6]);
        match load_png(&p16) {
            Err(Error::UnsupportedFormat { format, .. }) => {
                assert!(format.contains("16-bit"), "{format}")
            }
            other => panic!("unexpected {other:?}"),
        }
        let pidx = dir.path().join("indexed.png");
        write_raw(&pidx, 1, 1, ColorType::Indexed, BitDepth::Eight, &[1]);
        match load_png(&pidx) {
            Err(Error::UnsupportedFormat { format, .. }) => {
                assert!(format.contains("palette"), "{format}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = RgbImage::filled(16, 16, [7, 8, 9]);
        save_png(&path, &img).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_png(&path), Err(Error::CorruptFile { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_png("/nonexistent/dir/x.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/dir/x.png"));
    }

    #[test]
    fn palette_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("palette.csv");
        let p = Palette::from_colors(&[[1, 2, 3], [4, 5, 6]]).unwrap();
        write_palette_csv(&path, &p).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "label,r,g,b,name\n0,1,2,3,orientation_0\n1,4,5,6,orientation_1\n"
        );
        assert_eq!(read_palette_csv(&path).unwrap(), p);
    }
}
