use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AnswerOutput, AnswerRequest, Answerer, Question, ScorePair, ScoreRequest, Scorer, ScoringError};
use crate::geometry::{cumulative_poses, CameraPose, Intrinsics, Trajectory};
use crate::worldmodel::{camera_pose, visibility, Scene};

/// Ground-truth scoring and answering parameters for one synthetic question.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub target_object_id: String,
    /// Visibility fraction at which a view counts as fully helpful.
    pub visibility_threshold_help: f64,
    /// Blend in `[0, 1]` between pure alignment (0) and alignment scaled by
    /// how much closer the camera is to the target than the reference (1).
    #[serde(default)]
    pub proximity_weight: f64,
    /// Option picked when no evidence view reveals the target.
    pub fallback_index: usize,
}

fn round_score(x: f64) -> u8 {
    (10.0 * x.clamp(0.0, 1.0)).round() as u8
}

/// Scores from geometry alone.
///
/// `s_help = round(10 · min(1, visibility / threshold))` and
/// `s_exp = round(10 · clamp(alignment))`, where alignment is the cosine
/// between the camera's heading and the bearing of the target centre, both
/// taken in the ground plane. Primitive actions never change elevation, so
/// the vertical angle to the target carries no signal about where to go.
pub fn oracle_score(
    spec: &OracleSpec,
    scene: &Scene,
    pose: &CameraPose,
    k: &Intrinsics,
    _question: &Question,
) -> Result<ScorePair, ScoringError> {
    let target = scene
        .object(&spec.target_object_id)
        .ok_or_else(|| ScoringError::Backend(format!("unknown target {:?}", spec.target_object_id)))?;
    let vis = visibility(scene, pose, k, &spec.target_object_id)
        .map_err(|e| ScoringError::Backend(e.to_string()))?;
    let s_help = round_score(vis / spec.visibility_threshold_help);

    let origin = pose.translation();
    let offset = [target.center[0] - origin[0], target.center[2] - origin[2]];
    let distance = offset[0].hypot(offset[1]);
    let f = pose.forward();
    let heading = f[0].hypot(f[2]);
    let alignment = if distance == 0.0 || heading == 0.0 {
        1.0
    } else {
        ((f[0] * offset[0] + f[2] * offset[1]) / (heading * distance)).max(0.0)
    };
    let reference_distance = target.center[0].hypot(target.center[2]);
    let closeness = if distance == 0.0 {
        1.0
    } else {
        (reference_distance / distance).min(1.0)
    };
    let w = spec.proximity_weight.clamp(0.0, 1.0);
    let s_exp = round_score(alignment * ((1.0 - w) + w * closeness));
    Ok(ScorePair::new(s_exp, s_help))
}

/// Whether any of `poses` sees the target at or above the help threshold.
fn revealed(spec: &OracleSpec, scene: &Scene, k: &Intrinsics, poses: &[CameraPose]) -> bool {
    poses.iter().any(|p| {
        visibility(scene, p, k, &spec.target_object_id)
            .map(|v| v >= spec.visibility_threshold_help)
            .unwrap_or(false)
    })
}

/// Correct option iff some evidence pose reveals the target, otherwise the
/// designated fallback.
pub fn oracle_answer(
    spec: &OracleSpec,
    scene: &Scene,
    k: &Intrinsics,
    question: &Question,
    evidence_poses: &[CameraPose],
) -> usize {
    match question.answer_index {
        Some(correct) if revealed(spec, scene, k, evidence_poses) => correct,
        _ => spec.fallback_index,
    }
}

fn terminal_camera(traj: &Trajectory, pitch_deg: f64) -> CameraPose {
    let horizontal = cumulative_poses(traj)
        .last()
        .copied()
        .unwrap_or_else(CameraPose::identity);
    camera_pose(&horizontal, pitch_deg)
}

/// [`oracle_score`] behind the [`Scorer`] interface. The candidate pose is
/// recovered from its trajectory; the frame is ignored.
#[derive(Clone, Debug)]
pub struct OracleScorer {
    pub spec: OracleSpec,
    pub scene: Arc<Scene>,
    pub intrinsics: Intrinsics,
    pub pitch_deg: f64,
}

impl Scorer for OracleScorer {
    fn name(&self) -> String {
        "oracle".to_string()
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScorePair, ScoringError> {
        let pose = terminal_camera(req.trajectory, self.pitch_deg);
        oracle_score(&self.spec, &self.scene, &pose, &self.intrinsics, req.question)
    }
}

#[derive(Clone, Debug)]
pub struct OracleAnswerer {
    pub spec: OracleSpec,
    pub scene: Arc<Scene>,
    pub intrinsics: Intrinsics,
    pub pitch_deg: f64,
}

impl Answerer for OracleAnswerer {
    fn name(&self) -> String {
        "oracle".to_string()
    }

    fn answer(&self, req: &AnswerRequest<'_>) -> Result<AnswerOutput, ScoringError> {
        let poses: Vec<CameraPose> = req
            .evidence
            .iter()
            .map(|e| terminal_camera(&e.trajectory, self.pitch_deg))
            .collect();
        let index = oracle_answer(&self.spec, &self.scene, &self.intrinsics, req.question, &poses);
        Ok(AnswerOutput {
            index,
            raw: format!("Answer: {}", Question::letter(index)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{yaw_rotation, Trajectory};
    use crate::scoring::Category;
    use crate::worldmodel::{SceneObject, Shape};

    fn scene() -> Scene {
        Scene {
            objects: vec![SceneObject {
                id: "target".into(),
                shape: Shape::Sphere { radius: 0.4 },
                center: [0.0, 0.0, 3.0],
                color: [0, 200, 0],
            }],
            ..Scene::default()
        }
    }

    fn spec() -> OracleSpec {
        OracleSpec {
            target_object_id: "target".into(),
            visibility_threshold_help: 0.02,
            proximity_weight: 0.0,
            fallback_index: 3,
        }
    }

    fn question() -> Question {
        Question {
            id: "q".into(),
            image: "q.png".into(),
            text: "which?".into(),
            choices: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            answer_index: Some(1),
            category: Category::Other,
        }
    }

    fn k() -> Intrinsics {
        Intrinsics::from_fov(64, 64, 60.0).unwrap()
    }

    #[test]
    fn visible_and_aligned_target() {
        let s = oracle_score(&spec(), &scene(), &CameraPose::identity(), &k(), &question()).unwrap();
        assert_eq!((s.s_exp, s.s_help), (10, 10));
    }

    #[test]
    fn target_at_right_angle() {
        // bearing 90°: cos 90° = 0 and the target is out of frame
        let s = oracle_score(&spec(), &scene(), &yaw_rotation(90.0), &k(), &question()).unwrap();
        assert_eq!((s.s_exp, s.s_help), (0, 0));
        let behind = oracle_score(&spec(), &scene(), &yaw_rotation(180.0), &k(), &question()).unwrap();
        assert_eq!((behind.s_exp, behind.s_help), (0, 0));
    }

    #[test]
    fn exploration_score_tracks_cosine() {
        for deg in [0.0, 9.0, 27.0, 45.0, 60.0, 84.0] {
            let s = oracle_score(&spec(), &scene(), &yaw_rotation(deg), &k(), &question()).unwrap();
            let expected = (10.0 * (deg as f64).to_radians().cos()).round() as u8;
            assert_eq!(s.s_exp, expected, "bearing {deg}");
        }
    }

    #[test]
    fn answers_follow_evidence() {
        let (sp, sc, q) = (spec(), scene(), question());
        assert_eq!(oracle_answer(&sp, &sc, &k(), &q, &[CameraPose::identity()]), 1);
        assert_eq!(oracle_answer(&sp, &sc, &k(), &q, &[]), 3);
        assert_eq!(oracle_answer(&sp, &sc, &k(), &q, &[yaw_rotation(120.0)]), 3);
    }

    #[test]
    fn scorer_uses_trajectory_pose() {
        let scorer = OracleScorer {
            spec: spec(),
            scene: Arc::new(scene()),
            intrinsics: k(),
            pitch_deg: 0.0,
        };
        let frame = crate::worldmodel::Frame::filled(64, 64, [0, 0, 0]);
        let traj: Trajectory = "L9|L9|L9|L9|L9|L9|L9|L9|L9|L9".parse().unwrap();
        let q = question();
        let s = scorer
            .score(&ScoreRequest {
                question: &q,
                trajectory: &traj,
                description: "",
                frame: &frame,
            })
            .unwrap();
        assert_eq!(s.s_exp, 0);
    }
}
