use std::io::Cursor;

use image::{ImageFormat, RgbImage};

use super::WorldModelError;

/// An 8-bit RGB image, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Frame({}x{})", self.width, self.height)
    }
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, WorldModelError> {
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(WorldModelError::Dimension(format!(
                "{width}x{height} RGB needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Frame {
            width,
            height,
            pixels,
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for v in 0..height {
            for u in 0..width {
                pixels.extend_from_slice(&f(u, v));
            }
        }
        Frame {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, u: u32, v: u32) -> [u8; 3] {
        let i = (v as usize * self.width as usize + u as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn to_png(&self) -> Vec<u8> {
        let img = RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("frame buffer length checked at construction");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .expect("png encoding into memory cannot fail");
        out.into_inner()
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, WorldModelError> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| WorldModelError::Protocol(format!("undecodable png: {e}")))?
            .to_rgb8();
        let (width, height) = img.dimensions();
        Ok(Frame {
            width,
            height,
            pixels: img.into_raw(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, WorldModelError> {
        let img = image::open(path)
            .map_err(|e| WorldModelError::Validation(format!("{}: {e}", path.display())))?
            .to_rgb8();
        let (width, height) = img.dimensions();
        Ok(Frame {
            width,
            height,
            pixels: img.into_raw(),
        })
    }

    /// Horizontal strip of equally sized frames.
    pub fn contact_sheet(frames: &[Frame]) -> Option<Frame> {
        let first = frames.first()?;
        let (w, h) = (first.width, first.height);
        if frames.iter().any(|f| f.width != w || f.height != h) {
            return None;
        }
        let total_w = w * frames.len() as u32;
        Some(Frame::from_fn(total_w, h, |u, v| {
            frames[(u / w) as usize].get(u % w, v)
        }))
    }
}
