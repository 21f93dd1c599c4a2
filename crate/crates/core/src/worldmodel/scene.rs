use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WorldModelError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    /// Axis-aligned box with full extents in meters.
    Box { size: [f64; 3] },
    Sphere { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    #[serde(flatten)]
    pub shape: Shape,
    pub center: [f64; 3],
    pub color: [u8; 3],
}

impl SceneObject {
    /// Half extents of the axis-aligned bounds.
    pub fn half_extents(&self) -> [f64; 3] {
        match self.shape {
            Shape::Box { size } => [size[0] / 2.0, size[1] / 2.0, size[2] / 2.0],
            Shape::Sphere { radius } => [radius; 3],
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        let c = self.center;
        match self.shape {
            Shape::Box { size } => (0..3).all(|i| (p[i] - c[i]).abs() < size[i] / 2.0),
            Shape::Sphere { radius } => {
                let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < radius * radius
            }
        }
    }
}

/// Ground-truth world in reference-camera coordinates (+y down). The ground
/// is the plane `y = ground_level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub ground: [u8; 3],
    pub background: [u8; 3],
    #[serde(default = "default_ground_level")]
    pub ground_level: f64,
}

fn default_ground_level() -> f64 {
    1.5
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            objects: Vec::new(),
            ground: [110, 100, 90],
            background: [170, 200, 235],
            ground_level: default_ground_level(),
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<(), WorldModelError> {
        let bad = |m: String| Err(WorldModelError::Validation(m));
        if !(self.ground_level.is_finite() && self.ground_level > 0.0) {
            return bad(format!("ground_level must be > 0, got {}", self.ground_level));
        }
        let mut seen = HashSet::new();
        for o in &self.objects {
            if !seen.insert(o.id.as_str()) {
                return bad(format!("duplicate object id {:?}", o.id));
            }
            let positive = match o.shape {
                Shape::Box { size } => size.iter().all(|s| s.is_finite() && *s > 0.0),
                Shape::Sphere { radius } => radius.is_finite() && radius > 0.0,
            };
            if !positive {
                return bad(format!("object {:?} has a non-positive size", o.id));
            }
            if o.center[1] + o.half_extents()[1] > self.ground_level + 1e-9 {
                return bad(format!("object {:?} extends below the ground plane", o.id));
            }
        }
        Ok(())
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, WorldModelError> {
        let scene: Scene = serde_json::from_str(text)
            .map_err(|e| WorldModelError::Validation(format!("scene: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, WorldModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WorldModelError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(id: &str, y: f64) -> SceneObject {
        SceneObject {
            id: id.into(),
            shape: Shape::Box { size: [1.0; 3] },
            center: [0.0, y, 2.0],
            color: [200, 30, 30],
        }
    }

    #[test]
    fn json_shape_is_tagged() {
        let scene = Scene {
            objects: vec![cube("a", 0.0)],
            ..Scene::default()
        };
        let text = scene.to_json();
        assert!(text.contains("\"shape\": \"box\""));
        assert_eq!(Scene::from_json(&text).unwrap(), scene);
    }

    #[test]
    fn validation_errors() {
        let dup = Scene {
            objects: vec![cube("a", 0.0), cube("a", 0.0)],
            ..Scene::default()
        };
        assert!(dup.validate().is_err());
        let sunk = Scene {
            objects: vec![cube("a", 1.4)],
            ..Scene::default()
        };
        assert!(sunk.validate().is_err());
        let mut flat = cube("a", 0.0);
        flat.shape = Shape::Sphere { radius: 0.0 };
        assert!(Scene {
            objects: vec![flat],
            ..Scene::default()
        }
        .validate()
        .is_err());
    }
}
