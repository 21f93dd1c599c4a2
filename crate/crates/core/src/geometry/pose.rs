use serde::{Deserialize, Serialize};

use super::{sin_cos_deg, Action, ActionKind, GeometryError, Trajectory};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Rigid transform `[R | t]` taking camera coordinates into the frame the
/// pose is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl Default for CameraPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl CameraPose {
    pub const fn identity() -> Self {
        CameraPose {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// Validating constructor: `R` must satisfy `RᵀR = I` and `det R = +1`
    /// within 1e-9.
    pub fn new(rotation: [[f64; 3]; 3], translation: [f64; 3]) -> Result<Self, GeometryError> {
        if rotation.iter().flatten().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let pose = CameraPose {
            rotation,
            translation,
        };
        let err = pose.orthonormality_error();
        if err > ORTHONORMAL_TOL {
            return Err(GeometryError::InvalidRotation(err));
        }
        Ok(pose)
    }

    pub fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rotation
    }

    pub fn translation(&self) -> [f64; 3] {
        self.translation
    }

    /// Max of `|RᵀR - I|` entries and `|det R - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = &self.rotation;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += r[k][i] * r[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        worst.max((det - 1.0).abs())
    }

    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]
    }

    pub fn transform_point(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.rotate(p);
        [
            q[0] + self.translation[0],
            q[1] + self.translation[1],
            q[2] + self.translation[2],
        ]
    }

    /// Camera forward axis (+z) expressed in the outer frame.
    pub fn forward(&self) -> [f64; 3] {
        [self.rotation[0][2], self.rotation[1][2], self.rotation[2][2]]
    }

    pub fn inverse(&self) -> CameraPose {
        let r = &self.rotation;
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let inv = CameraPose {
            rotation: rt,
            translation: [0.0; 3],
        };
        let t = inv.rotate(self.translation);
        CameraPose {
            rotation: rt,
            translation: [-t[0], -t[1], -t[2]],
        }
    }

    /// Largest absolute entry-wise difference of the 3×4 matrices.
    pub fn max_abs_diff(&self, other: &CameraPose) -> f64 {
        let rot = self
            .rotation
            .iter()
            .flatten()
            .zip(other.rotation.iter().flatten())
            .map(|(a, b)| (a - b).abs());
        let tr = self
            .translation
            .iter()
            .zip(other.translation.iter())
            .map(|(a, b)| (a - b).abs());
        rot.chain(tr).fold(0.0, f64::max)
    }

    /// Row-major 9 rotation entries followed by the 3 translation entries.
    pub fn to_row_major(&self) -> ([f64; 9], [f64; 3]) {
        let mut r = [0.0; 9];
        for (i, row) in self.rotation.iter().enumerate() {
            r[i * 3..i * 3 + 3].copy_from_slice(row);
        }
        (r, self.translation)
    }

    pub fn from_row_major(r: &[f64], t: &[f64]) -> Result<Self, GeometryError> {
        if r.len() != 9 || t.len() != 3 {
            return Err(GeometryError::InvalidRotation(f64::INFINITY));
        }
        let rotation = [[r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]];
        CameraPose::new(rotation, [t[0], t[1], t[2]])
    }
}

/// Apply `first`, then `second` expressed in `first`'s frame.
pub fn compose(first: &CameraPose, second: &CameraPose) -> CameraPose {
    let a = &first.rotation;
    let b = &second.rotation;
    let mut rotation = [[0.0; 3]; 3];
    for (i, row) in rotation.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    let t = first.rotate(second.translation);
    CameraPose {
        rotation,
        translation: [
            t[0] + first.translation[0],
            t[1] + first.translation[1],
            t[2] + first.translation[2],
        ],
    }
}

/// Rotation by `degrees` about −y, so positive angles turn the view left.
pub fn yaw_rotation(degrees: f64) -> CameraPose {
    let (s, c) = sin_cos_deg(degrees);
    CameraPose {
        rotation: [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]],
        translation: [0.0; 3],
    }
}

/// Rotation about the camera's local x axis:
/// rows `(1,0,0), (0,cos,−sin), (0,sin,cos)`, zero translation.
pub fn pitch_rotation(degrees: f64) -> CameraPose {
    let (s, c) = sin_cos_deg(degrees);
    CameraPose {
        rotation: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        translation: [0.0; 3],
    }
}

/// Relative transform produced by a single action.
pub fn pose_of_action(action: &Action) -> CameraPose {
    match action.kind() {
        ActionKind::MoveForward => CameraPose {
            rotation: CameraPose::identity().rotation,
            translation: [0.0, 0.0, action.magnitude()],
        },
        ActionKind::TurnLeft => yaw_rotation(action.magnitude()),
        ActionKind::TurnRight => yaw_rotation(-action.magnitude()),
    }
}

/// Per-step relative transforms `φ(a_i)`.
pub fn relative_poses(traj: &Trajectory) -> Vec<CameraPose> {
    traj.actions().iter().map(pose_of_action).collect()
}

/// Pose of frame `i` relative to the reference frame, for every prefix.
///
/// Because the action set only yaws and translates in the ground plane, the
/// accumulation is kept as (net yaw in degrees, planar position). Net yaw is
/// summed exactly, so a trajectory whose turns cancel lands on a bit-exact
/// identity rotation. Agrees with chained [`compose`] to ~1e-15.
pub fn cumulative_poses(traj: &Trajectory) -> Vec<CameraPose> {
    let mut yaw = 0.0_f64;
    let mut position = [0.0_f64; 3];
    traj.actions()
        .iter()
        .map(|a| {
            match a.kind() {
                ActionKind::MoveForward => {
                    let (s, c) = sin_cos_deg(yaw);
                    position[0] += -s * a.magnitude();
                    position[2] += c * a.magnitude();
                }
                _ => yaw += a.signed_yaw(),
            }
            let mut pose = yaw_rotation(yaw);
            pose.translation = position;
            pose
        })
        .collect()
}

/// Horizontal component `R_pitch(−θ)·E` of an extrinsic, so that
/// `compose(pitch_rotation(θ), T_horiz)` reconstructs `E`.
pub fn decompose_pitch(extrinsic: &CameraPose, degrees: f64) -> CameraPose {
    compose(&pitch_rotation(-degrees), extrinsic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(s: &str) -> Action {
        s.parse().unwrap()
    }

    #[test]
    fn forward_quarter_meter() {
        let p = pose_of_action(&act("F0.25"));
        assert_eq!(p.rotation, CameraPose::identity().rotation);
        assert_eq!(p.translation(), [0.0, 0.0, 0.25]);
    }

    #[test]
    fn turn_left_nine_degrees_entries() {
        // cos 9° and sin 9° from their Taylor series, independent of the
        // degree-trig helper.
        let x = 9.0 * std::f64::consts::PI / 180.0;
        let mut cos9 = 0.0;
        let mut sin9 = 0.0;
        let mut term_c = 1.0;
        let mut term_s = x;
        for n in 0..12 {
            cos9 += term_c;
            sin9 += term_s;
            let k = 2.0 * n as f64;
            term_c *= -x * x / ((k + 1.0) * (k + 2.0));
            term_s *= -x * x / ((k + 2.0) * (k + 3.0));
        }
        assert!((cos9 - 0.98769).abs() < 1e-5);
        let p = pose_of_action(&act("L9"));
        let r = p.rotation();
        assert!((r[0][0] - cos9).abs() < 1e-12);
        assert!((r[2][2] - cos9).abs() < 1e-12);
        assert!((r[2][0] - sin9).abs() < 1e-12);
        assert!((r[0][2] + sin9).abs() < 1e-12);
        assert_eq!(r[1], [0.0, 1.0, 0.0]);
        assert_eq!(p.translation(), [0.0; 3]);
        // looking left means forward gains a −x component
        assert!(p.forward()[0] < 0.0);
    }

    #[test]
    fn inverse_turns_cancel() {
        let p = compose(&pose_of_action(&act("L9")), &pose_of_action(&act("R9")));
        assert!(p.max_abs_diff(&CameraPose::identity()) < 1e-9);
    }

    #[test]
    fn compose_identity_law() {
        let p = compose(&pose_of_action(&act("L33")), &pose_of_action(&act("F1.5")));
        assert_eq!(compose(&p, &CameraPose::identity()), p);
        assert_eq!(compose(&CameraPose::identity(), &p), p);
    }

    #[test]
    fn two_forward_steps_half_meter() {
        let f = pose_of_action(&act("F0.25"));
        let p = compose(&f, &f);
        assert_eq!(p.translation(), [0.0, 0.0, 0.5]);
        assert_eq!(p.rotation, CameraPose::identity().rotation);
    }

    #[test]
    fn cumulative_empty_and_mixed() {
        assert!(cumulative_poses(&Trajectory::empty()).is_empty());
        let poses = cumulative_poses(&"F0.25|L9".parse().unwrap());
        assert_eq!(poses.len(), 2);
        assert_eq!(poses[1].translation(), poses[0].translation());
        assert!(poses[1].max_abs_diff(&{
            let mut y = yaw_rotation(9.0);
            y.translation = [0.0, 0.0, 0.25];
            y
        }) < 1e-12);
    }

    #[test]
    fn ten_left_turns_reach_ninety() {
        let traj: Trajectory = std::iter::repeat_n(act("L9"), 10).collect();
        let last = *cumulative_poses(&traj).last().unwrap();
        assert_eq!(last.translation(), [0.0; 3]);
        assert_eq!(last.rotation, yaw_rotation(90.0).rotation);
        assert_eq!(last.forward(), [-1.0, 0.0, 0.0]);

        let chained = relative_poses(&traj)
            .iter()
            .fold(CameraPose::identity(), |acc, p| compose(&acc, p));
        assert!(chained.max_abs_diff(&last) < 1e-9);
    }

    #[test]
    fn pitch_matrix_layout() {
        assert_eq!(pitch_rotation(0.0), CameraPose::identity());
        let p = pitch_rotation(90.0);
        assert_eq!(
            p.rotation,
            [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
        );
        let round = compose(&pitch_rotation(23.0), &pitch_rotation(-23.0));
        assert!(round.max_abs_diff(&CameraPose::identity()) < 1e-9);
    }

    #[test]
    fn decompose_pitch_cases() {
        let e = cumulative_poses(&"F0.5|L18|F0.25".parse().unwrap())[2];
        assert_eq!(decompose_pitch(&e, 0.0), e);
        let pure = pitch_rotation(17.0);
        assert!(decompose_pitch(&pure, 17.0).max_abs_diff(&CameraPose::identity()) < 1e-12);
    }

    #[test]
    fn validating_constructor() {
        assert!(CameraPose::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]], [0.0; 3])
            .is_err());
        assert!(CameraPose::new([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
            .is_err());
        assert!(CameraPose::new(*yaw_rotation(12.0).rotation(), [1.0, 2.0, 3.0]).is_ok());
        let inv = yaw_rotation(12.0).inverse();
        assert!(compose(&inv, &yaw_rotation(12.0)).max_abs_diff(&CameraPose::identity()) < 1e-12);
    }
}
