use rayon::prelude::*;

use super::scene::{Scene, Shape};
use super::{Frame, WorldModelError};
use crate::geometry::{dot, ray_direction, CameraPose, Intrinsics};

/// Unit vector towards the light: up (−y), right and forward.
pub const LIGHT_DIRECTION: [f64; 3] = [
    0.577_350_269_189_625_8,
    -0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
];
pub const AMBIENT: f64 = 0.3;

const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Hit {
    Object { index: usize, normal: [f64; 3] },
    Ground,
    Background,
    /// Camera centre lies inside this object.
    Inside(usize),
}

/// Per-pixel nearest object index, `None` for ground or background.
pub fn render_hits(scene: &Scene, pose: &CameraPose, k: &Intrinsics) -> Vec<Option<usize>> {
    trace_all(scene, pose, k)
        .into_iter()
        .map(|h| match h {
            Hit::Object { index, .. } | Hit::Inside(index) => Some(index),
            Hit::Ground | Hit::Background => None,
        })
        .collect()
}

/// Lambert-shaded raycast through every pixel centre.
pub fn render(scene: &Scene, pose: &CameraPose, k: &Intrinsics) -> Frame {
    let pixels: Vec<u8> = trace_all(scene, pose, k)
        .into_iter()
        .flat_map(|h| shade(scene, h))
        .collect();
    Frame::new(k.width, k.height, pixels).expect("one rgb triple per pixel")
}

/// Fraction of pixels whose nearest hit is `object_id`.
pub fn visibility(
    scene: &Scene,
    pose: &CameraPose,
    k: &Intrinsics,
    object_id: &str,
) -> Result<f64, WorldModelError> {
    let index = scene
        .object_index(object_id)
        .ok_or_else(|| WorldModelError::Validation(format!("unknown object id {object_id:?}")))?;
    let hits = render_hits(scene, pose, k);
    let count = hits.iter().filter(|h| **h == Some(index)).count();
    Ok(count as f64 / hits.len() as f64)
}

fn trace_all(scene: &Scene, pose: &CameraPose, k: &Intrinsics) -> Vec<Hit> {
    let origin = pose.translation();
    let n = k.pixel_count();
    if let Some(index) = scene.objects.iter().position(|o| o.contains(origin)) {
        return vec![Hit::Inside(index); n];
    }
    let width = k.width as usize;
    (0..n)
        .into_par_iter()
        .with_min_len(width)
        .map(|i| {
            let (u, v) = (i % width, i / width);
            let dir = ray_direction(k, pose, u as f64 + 0.5, v as f64 + 0.5);
            trace(scene, origin, dir)
        })
        .collect()
}

fn trace(scene: &Scene, origin: [f64; 3], dir: [f64; 3]) -> Hit {
    let mut best = f64::INFINITY;
    let mut hit = Hit::Background;
    if dir[1] > EPS && origin[1] < scene.ground_level {
        best = (scene.ground_level - origin[1]) / dir[1];
        hit = Hit::Ground;
    }
    for (index, obj) in scene.objects.iter().enumerate() {
        let found = match obj.shape {
            Shape::Box { size } => intersect_box(origin, dir, obj.center, size),
            Shape::Sphere { radius } => intersect_sphere(origin, dir, obj.center, radius),
        };
        if let Some((t, normal)) = found {
            if t < best {
                best = t;
                hit = Hit::Object { index, normal };
            }
        }
    }
    hit
}

fn intersect_box(
    origin: [f64; 3],
    dir: [f64; 3],
    center: [f64; 3],
    size: [f64; 3],
) -> Option<(f64, [f64; 3])> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut near_axis = 0;
    for axis in 0..3 {
        let lo = center[axis] - size[axis] / 2.0;
        let hi = center[axis] + size[axis] / 2.0;
        if dir[axis].abs() < EPS {
            if origin[axis] < lo || origin[axis] > hi {
                return None;
            }
            continue;
        }
        let (mut t0, mut t1) = ((lo - origin[axis]) / dir[axis], (hi - origin[axis]) / dir[axis]);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            near_axis = axis;
        }
        t_far = t_far.min(t1);
    }
    if t_near > t_far || t_near <= EPS {
        return None;
    }
    let mut normal = [0.0; 3];
    normal[near_axis] = -dir[near_axis].signum();
    Some((t_near, normal))
}

fn intersect_sphere(
    origin: [f64; 3],
    dir: [f64; 3],
    center: [f64; 3],
    radius: f64,
) -> Option<(f64, [f64; 3])> {
    let oc = [origin[0] - center[0], origin[1] - center[1], origin[2] - center[2]];
    let b = dot(oc, dir);
    let c = dot(oc, oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    if t <= EPS {
        return None;
    }
    let p = [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
    let normal = [
        (p[0] - center[0]) / radius,
        (p[1] - center[1]) / radius,
        (p[2] - center[2]) / radius,
    ];
    Some((t, normal))
}

fn shade(scene: &Scene, hit: Hit) -> [u8; 3] {
    let (base, normal) = match hit {
        Hit::Background => return scene.background,
        Hit::Inside(index) => return scene.objects[index].color,
        Hit::Ground => (scene.ground, [0.0, -1.0, 0.0]),
        Hit::Object { index, normal } => (scene.objects[index].color, normal),
    };
    let factor = AMBIENT + (1.0 - AMBIENT) * dot(normal, LIGHT_DIRECTION).max(0.0);
    base.map(|c| (c as f64 * factor).round().min(255.0) as u8)
}
