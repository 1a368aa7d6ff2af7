//! 8-bit PNG and binary PGM/PPM images, and directories of video frames.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Png,
    Pgm,
    Ppm,
    Pnm,
}

fn kind_of(path: &Path) -> Option<Kind> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "png" => Some(Kind::Png),
        "pgm" => Some(Kind::Pgm),
        "ppm" => Some(Kind::Ppm),
        "pnm" => Some(Kind::Pnm),
        _ => None,
    }
}

fn unsupported(path: &Path) -> Error {
    Error::Argument(format!(
        "{}: unsupported image extension (use .png, .pgm, .ppm or .pnm)",
        path.display()
    ))
}

/// Builds an image from interleaved row-major samples scaled by `1/maxval`.
fn from_interleaved(h: usize, w: usize, c: usize, samples: &[u32], maxval: f64) -> Result<ImageBuffer> {
    ImageBuffer::from_fn(h, w, c, |y, x, k| {
        (samples[(y * w + x) * c + k] as f64 / maxval).clamp(0.0, 1.0)
    })
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn interleaved_u8(img: &ImageBuffer) -> Vec<u8> {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let mut out = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for k in 0..c {
                out.push(to_u8(img.get(y, x, k)));
            }
        }
    }
    out
}

/// Reads a PNG, PGM or PPM file, chosen by extension, into `[0, 1]` values.
///
/// Alpha is dropped; gray-with-alpha becomes one channel.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    match kind_of(path).ok_or_else(|| unsupported(path))? {
        Kind::Png => read_png(path),
        _ => read_pnm(path),
    }
}

/// Writes values clamped to `[0, 1]` as 8-bit samples. `.pgm` needs one
/// channel, `.ppm` three; `.png` and `.pnm` accept either.
pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let kind = kind_of(path).ok_or_else(|| unsupported(path))?;
    let want = match kind {
        Kind::Pgm => Some(1),
        Kind::Ppm => Some(3),
        _ => None,
    };
    if want.is_some_and(|c| c != img.channels()) {
        return Err(Error::Argument(format!(
            "{}: a {}-channel image cannot be stored in this format",
            path.display(),
            img.channels()
        )));
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    match kind {
        Kind::Png => {
            let mut enc = png::Encoder::new(&mut w, img.width() as u32, img.height() as u32);
            enc.set_color(if img.channels() == 3 { png::ColorType::Rgb } else { png::ColorType::Grayscale });
            enc.set_depth(png::BitDepth::Eight);
            let png_err = |e: png::EncodingError| Error::format(path, e.to_string());
            let mut writer = enc.write_header().map_err(png_err)?;
            writer.write_image_data(&interleaved_u8(img)).map_err(png_err)?;
            writer.finish().map_err(png_err)?;
        }
        _ => {
            let magic = if img.channels() == 3 { "P6" } else { "P5" };
            let header = format!("{magic}\n{} {}\n255\n", img.width(), img.height());
            w.write_all(header.as_bytes()).map_err(|e| Error::io(path, e))?;
            w.write_all(&interleaved_u8(img)).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_png(path: &Path) -> Result<ImageBuffer> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dec = png::Decoder::new(BufReader::new(f));
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let png_err = |e: png::DecodingError| Error::format(path, e.to_string());
    let mut reader = dec.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (h, w) = (info.height as usize, info.width as usize);
    let (stored, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        other => return Err(Error::format(path, format!("unsupported color type {other:?}"))),
    };
    let mut samples = Vec::with_capacity(h * w * keep);
    for y in 0..h {
        let row = &buf[y * info.line_size..y * info.line_size + w * stored];
        for px in row.chunks(stored) {
            samples.extend(px[..keep].iter().map(|&b| b as u32));
        }
    }
    from_interleaved(h, w, keep, &samples, 255.0)
}

/// Next header token, skipping whitespace and `#` comments.
fn pnm_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn read_pnm(path: &Path) -> Result<ImageBuffer> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::format(path, msg.to_string());
    let mut pos = 0;
    let channels = match pnm_token(&bytes, &mut pos).as_deref() {
        Some("P5") => 1,
        Some("P6") => 3,
        _ => return Err(bad("expected binary PGM (P5) or PPM (P6) magic")),
    };
    let mut num = |what: &str| -> Result<usize> {
        pnm_token(&bytes, &mut pos)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(&format!("missing or malformed {what}")))
    };
    let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if w == 0 || h == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("invalid dimensions or maxval"));
    }
    pos += 1; // single whitespace byte before the raster
    let width_bytes = if maxval < 256 { 1 } else { 2 };
    let need = h * w * channels * width_bytes;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| bad("raster shorter than the header promises"))?;
    let samples: Vec<u32> = if width_bytes == 1 {
        raster.iter().map(|&b| b as u32).collect()
    } else {
        raster.chunks(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as u32).collect()
    };
    from_interleaved(h, w, channels, &samples, maxval as f64)
}

/// Nearest-neighbor down-sampling keeping every `factor`-th row and column.
pub fn decimate(img: &ImageBuffer, factor: usize) -> Result<ImageBuffer> {
    if factor == 0 {
        return Err(Error::Argument("decimation factor must be positive".into()));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (h, w) = (img.height().div_ceil(factor), img.width().div_ceil(factor));
    ImageBuffer::from_fn(h, w, img.channels(), |y, x, c| img.get(y * factor, x * factor, c))
}

/// Reads every image in `dir` in file-name order, decimated by `factor`.
pub fn read_frames(dir: impl AsRef<Path>, factor: usize) -> Result<Vec<ImageBuffer>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && kind_of(p).is_some())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Argument(format!("{}: no image frames found", dir.display())));
    }
    paths
        .par_iter()
        .map(|p| decimate(&read_image(p)?, factor))
        .collect()
}

/// Writes `frame_00000.png`, `frame_00001.png`, … into `dir`.
pub fn write_frames(frames: &[ImageBuffer], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .iter()
        .enumerate()
        .try_for_each(|(k, f)| write_image(f, dir.join(format!("frame_{k:05}.png"))))
}
