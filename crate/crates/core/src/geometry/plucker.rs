use serde::{Deserialize, Serialize};

use super::{cross, decompose_pitch, dot, normalize, sin_cos_deg, CameraPose, GeometryError};

const WIRE_MAGIC: &[u8; 4] = b"PLK1";
const WIRE_HEADER_LEN: usize = 32;

/// Pinhole intrinsics in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntrinsics", into = "RawIntrinsics")]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Serialize, Deserialize)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    w: u32,
    h: u32,
}

impl TryFrom<RawIntrinsics> for Intrinsics {
    type Error = GeometryError;
    fn try_from(r: RawIntrinsics) -> Result<Self, Self::Error> {
        Intrinsics::new(r.fx, r.fy, r.cx, r.cy, r.w, r.h)
    }
}

impl From<Intrinsics> for RawIntrinsics {
    fn from(k: Intrinsics) -> Self {
        RawIntrinsics {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            w: k.width,
            h: k.height,
        }
    }
}

impl Intrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidIntrinsics(m));
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return bad(format!("focal lengths must be > 0 (fx={fx}, fy={fy})"));
        }
        if width == 0 || height == 0 {
            return bad(format!("image must be non-empty ({width}x{height})"));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return bad(format!("principal point ({cx}, {cy}) outside {width}x{height}"));
        }
        Ok(Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Square pixels, principal point at the image centre, `fov_deg` across
    /// the width.
    pub fn from_fov(width: u32, height: u32, fov_deg: f64) -> Result<Self, GeometryError> {
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "fov {fov_deg} outside (0, 180)"
            )));
        }
        let (s, c) = sin_cos_deg(fov_deg / 2.0);
        let f = (width as f64 / 2.0) * c / s;
        Intrinsics::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    /// `K⁻¹ (x, y, 1)ᵀ` for continuous image coordinates.
    pub fn unproject(&self, x: f64, y: f64) -> [f64; 3] {
        [(x - self.cx) / self.fx, (y - self.cy) / self.fy, 1.0]
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Unit ray direction through image point `(x, y)` for a camera at `pose`.
/// Pixel `(u, v)` is sampled at its centre `(u + 0.5, v + 0.5)` by callers.
pub fn ray_direction(k: &Intrinsics, pose: &CameraPose, x: f64, y: f64) -> [f64; 3] {
    normalize(pose.rotate(k.unproject(x, y)))
}

/// Per-pixel `(o × d, d)` ray coordinates, optionally with a broadcast
/// pitch channel.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerMap {
    height: u32,
    width: u32,
    channels: u8,
    pitch: Option<f64>,
    data: Vec<f64>,
}

impl PluckerMap {
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pitch(&self) -> Option<f64> {
        self.pitch
    }

    /// Row-major `h × w × channels` values.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, u: u32, v: u32) -> &[f64] {
        let c = self.channels as usize;
        let start = (v as usize * self.width as usize + u as usize) * c;
        &self.data[start..start + c]
    }

    pub fn moment(&self, u: u32, v: u32) -> [f64; 3] {
        let p = self.pixel(u, v);
        [p[0], p[1], p[2]]
    }

    pub fn direction(&self, u: u32, v: u32) -> [f64; 3] {
        let p = self.pixel(u, v);
        [p[3], p[4], p[5]]
    }

    /// Worst `|‖d‖ − 1|` and worst `|⟨m, d⟩|` over all pixels.
    pub fn invariant_errors(&self) -> (f64, f64) {
        let mut unit: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        for v in 0..self.height {
            for u in 0..self.width {
                let d = self.direction(u, v);
                unit = unit.max((dot(d, d).sqrt() - 1.0).abs());
                ortho = ortho.max(dot(self.moment(u, v), d).abs());
            }
        }
        (unit, ortho)
    }

    /// 32-byte header (`PLK1`, h, w, channels, pitch as f32, three zero
    /// words) followed by row-major little-endian f32 samples.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(WIRE_HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(WIRE_MAGIC);
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&(self.channels as u32).to_le_bytes());
        out.extend_from_slice(&(self.pitch.unwrap_or(0.0) as f32).to_le_bytes());
        out.extend_from_slice(&[0u8; 12]);
        for v in &self.data {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    /// Inverse of [`PluckerMap::to_wire`]; samples come back at f32 precision.
    pub fn from_wire(bytes: &[u8]) -> Result<Self, GeometryError> {
        let bad = |m: &str| GeometryError::Wire(m.to_string());
        if bytes.len() < WIRE_HEADER_LEN {
            return Err(bad("buffer shorter than header"));
        }
        if &bytes[0..4] != WIRE_MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap());
        let (height, width, channels) = (word(1), word(2), word(3));
        let pitch = f32::from_le_bytes(bytes[16..20].try_into().unwrap()) as f64;
        if word(5) != 0 || word(6) != 0 || word(7) != 0 {
            return Err(bad("reserved header words must be zero"));
        }
        if channels != 6 && channels != 7 {
            return Err(bad("channels must be 6 or 7"));
        }
        let count = height as usize * width as usize * channels as usize;
        if bytes.len() != WIRE_HEADER_LEN + count * 4 {
            return Err(bad("payload length does not match header"));
        }
        let data = bytes[WIRE_HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Ok(PluckerMap {
            height,
            width,
            channels: channels as u8,
            pitch: (channels == 7).then_some(pitch),
            data,
        })
    }
}

/// Six-channel map: `(t × d̂, d̂)` with `d = R K⁻¹ (u+½, v+½, 1)ᵀ`.
pub fn plucker_map(k: &Intrinsics, extrinsic: &CameraPose) -> PluckerMap {
    build(k, extrinsic, None)
}

/// Plücker map of the pitch-free component plus a constant pitch channel.
pub fn plucker_map_with_pitch(k: &Intrinsics, extrinsic: &CameraPose, pitch_deg: f64) -> PluckerMap {
    let horizontal = decompose_pitch(extrinsic, pitch_deg);
    build(k, &horizontal, Some(pitch_deg))
}

fn build(k: &Intrinsics, pose: &CameraPose, pitch: Option<f64>) -> PluckerMap {
    let channels: u8 = if pitch.is_some() { 7 } else { 6 };
    let origin = pose.translation();
    let mut data = Vec::with_capacity(k.pixel_count() * channels as usize);
    for v in 0..k.height {
        for u in 0..k.width {
            let d = ray_direction(k, pose, u as f64 + 0.5, v as f64 + 0.5);
            let m = cross(origin, d);
            data.extend_from_slice(&m);
            data.extend_from_slice(&d);
            if let Some(p) = pitch {
                data.push(p);
            }
        }
    }
    PluckerMap {
        height: k.height,
        width: k.width,
        channels,
        pitch,
        data,
    }
}
