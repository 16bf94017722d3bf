//! Geometric and photometric face normalization driven by eye coordinates.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// 8-bit grayscale raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Reads a binary 8-bit PGM (`P5`) file.
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if !bytes.starts_with(b"P5") {
        return Err(Error::BadFile {
            path: path.to_owned(),
            message: "not a binary PGM (P5) image".into(),
        });
    }
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm).map_err(
        |e| Error::BadFile {
            path: path.to_owned(),
            message: e.to_string(),
        },
    )?;
    let image::DynamicImage::ImageLuma8(luma) = decoded else {
        return Err(Error::BadFile {
            path: path.to_owned(),
            message: "PGM must have maxval 255".into(),
        });
    };
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.into_raw())
}

/// Writes a binary 8-bit PGM (`P5`) file.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Pixel coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Output raster layout for normalized faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationGeometry {
    pub out_width: usize,
    pub out_height: usize,
    pub target_left_eye: Point,
    pub target_right_eye: Point,
    pub hist_eq: bool,
}

impl Default for NormalizationGeometry {
    fn default() -> Self {
        NormalizationGeometry {
            out_width: 64,
            out_height: 80,
            target_left_eye: Point::new(20.0, 28.0),
            target_right_eye: Point::new(44.0, 28.0),
            hist_eq: true,
        }
    }
}

impl NormalizationGeometry {
    pub fn dim(&self) -> usize {
        self.out_width * self.out_height
    }

    pub fn validate(&self) -> Result<()> {
        let (l, r) = (self.target_left_eye, self.target_right_eye);
        let inside = |p: Point| {
            p.x >= 0.0
                && p.y >= 0.0
                && p.x <= (self.out_width as f64 - 1.0)
                && p.y <= (self.out_height as f64 - 1.0)
        };
        if self.out_width == 0 || self.out_height == 0 {
            return Err(Error::InvalidArgument("output size must be non-zero".into()));
        }
        if l == r {
            return Err(Error::InvalidArgument("target eyes coincide".into()));
        }
        if !inside(l) || !inside(r) {
            return Err(Error::InvalidArgument("target eyes outside the output raster".into()));
        }
        if l.y != r.y {
            return Err(Error::InvalidArgument("target eyes must share a row".into()));
        }
        Ok(())
    }
}

/// Inverse similarity map from output pixel coordinates into the source image,
/// written in complex form: `src = eye + ratio · (out − target_eye)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    origin_src: Point,
    origin_out: Point,
    ratio_re: f64,
    ratio_im: f64,
}

impl Similarity {
    pub fn from_eyes(left: Point, right: Point, geom: &NormalizationGeometry) -> Result<Self> {
        if left == right {
            return Err(Error::CoincidentEyes);
        }
        let (tl, tr) = (geom.target_left_eye, geom.target_right_eye);
        let (sx, sy) = (right.x - left.x, right.y - left.y);
        let (tx, ty) = (tr.x - tl.x, tr.y - tl.y);
        let den = tx * tx + ty * ty;
        Ok(Similarity {
            origin_src: left,
            origin_out: tl,
            ratio_re: (sx * tx + sy * ty) / den,
            ratio_im: (sy * tx - sx * ty) / den,
        })
    }

    /// Forward scale factor from source to output.
    pub fn scale(&self) -> f64 {
        1.0 / self.ratio_re.hypot(self.ratio_im)
    }

    /// Forward rotation (radians) from source to output.
    pub fn rotation(&self) -> f64 {
        -self.ratio_im.atan2(self.ratio_re)
    }

    #[inline]
    pub fn source_of(&self, out: Point) -> Point {
        let (dx, dy) = (out.x - self.origin_out.x, out.y - self.origin_out.y);
        Point {
            x: self.origin_src.x + self.ratio_re * dx - self.ratio_im * dy,
            y: self.origin_src.y + self.ratio_im * dx + self.ratio_re * dy,
        }
    }
}

/// Histogram equalization via the integer cdf remap
/// `round((cdf(v) − cdf_min) · 255 / (n − cdf_min))`. Constant images are returned unchanged.
pub fn equalize_histogram(img: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &p in &img.pixels {
        hist[p as usize] += 1;
    }
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let n = img.pixels.len() as u64;
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if n == cdf_min {
        return img.clone();
    }
    let den = n - cdf_min;
    let lut: Vec<u8> = cdf
        .iter()
        .map(|&c| {
            let num = c.saturating_sub(cdf_min) * 255;
            ((2 * num + den) / (2 * den)) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|&p| lut[p as usize]).collect(),
    }
}

/// Bilinear sample with edge replication.
#[inline]
pub fn sample_bilinear(img: &GrayImage, p: Point) -> f64 {
    let maxx = (img.width - 1) as f64;
    let maxy = (img.height - 1) as f64;
    let x = p.x.clamp(0.0, maxx);
    let y = p.y.clamp(0.0, maxy);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let v00 = f64::from(img.get(x0, y0));
    let v10 = f64::from(img.get(x1, y0));
    let v01 = f64::from(img.get(x0, y1));
    let v11 = f64::from(img.get(x1, y1));
    let top = v00 * (1.0 - fx) + v10 * fx;
    let bottom = v01 * (1.0 - fx) + v11 * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Warps `image` so the given eyes land on the geometry's target eyes and returns the
/// row-major output raster scaled to `[0, 1]`.
pub fn normalize_face<T: Real>(
    image: &GrayImage,
    left_eye: Point,
    right_eye: Point,
    geom: &NormalizationGeometry,
) -> Result<Vec<T>> {
    if image.width == 0 || image.height == 0 || image.pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    geom.validate()?;
    let warp = Similarity::from_eyes(left_eye, right_eye, geom)?;
    let equalized;
    let src = if geom.hist_eq {
        equalized = equalize_histogram(image);
        &equalized
    } else {
        image
    };
    let mut out = Vec::with_capacity(geom.dim());
    for v in 0..geom.out_height {
        for u in 0..geom.out_width {
            let p = warp.source_of(Point::new(u as f64, v as f64));
            let value = (sample_bilinear(src, p) / 255.0).clamp(0.0, 1.0);
            out.push(T::from_f64(value).expect("pixel fits scalar"));
        }
    }
    Ok(out)
}
