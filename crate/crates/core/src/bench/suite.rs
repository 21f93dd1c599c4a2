use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BenchError, DatasetRecord};
use crate::geometry::{cumulative_poses, Action, CameraPose, Intrinsics, Trajectory};
use crate::scoring::{Category, OracleSpec, Question};
use crate::search::{within_budget, SearchConfig};
use crate::worldmodel::{render, visibility, Scene, SceneObject, Shape};

/// Name of the question file written next to the per-case files.
pub const SUITE_FILE: &str = "suite.satq.jsonl";

/// Palette used for every object in the suite; names double as answers.
pub const COLOR_NAMES: [(&str, [u8; 3]); 10] = [
    ("red", [205, 45, 40]),
    ("green", [45, 165, 65]),
    ("blue", [45, 85, 210]),
    ("yellow", [230, 200, 45]),
    ("purple", [140, 65, 180]),
    ("orange", [240, 130, 35]),
    ("cyan", [45, 190, 200]),
    ("pink", [235, 125, 170]),
    ("white", [235, 235, 235]),
    ("brown", [125, 85, 45]),
];

const HIDDEN_LIMIT: f64 = 0.01;
const TARGET_ID: &str = "target";
const OCCLUDER_ID: &str = "occluder";

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    pub width: u32,
    pub height: u32,
    pub fov_deg: f64,
    pub visibility_threshold: f64,
    /// Forward steps (of `search.forward_step`) the revealing trajectory may
    /// take, inclusive.
    pub min_reveal_steps: usize,
    pub max_reveal_steps: usize,
    pub attempts_per_case: usize,
    pub search: SearchConfig,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            width: 64,
            height: 64,
            fov_deg: 60.0,
            visibility_threshold: 0.015,
            min_reveal_steps: 2,
            max_reveal_steps: 6,
            attempts_per_case: 200,
            search: SearchConfig::default(),
        }
    }
}

/// A hidden-object question over a generated scene: a target sits behind a
/// wide, low occluder and only shows over its top edge once the camera has
/// moved closer.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCase {
    pub id: String,
    pub scene: Scene,
    pub question: Question,
    pub oracle: OracleSpec,
    /// Action string that ends at a pose where the target is visible.
    pub revealing: Trajectory,
    pub occluder_id: String,
    pub distractors: Vec<String>,
    pub intrinsics: Intrinsics,
    pub pitch_deg: f64,
}

fn mm(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    mm(rng.random_range(lo..hi))
}

fn terminal_pose(traj: &Trajectory) -> CameraPose {
    cumulative_poses(traj)
        .last()
        .copied()
        .unwrap_or_else(CameraPose::identity)
}

fn boxed(id: &str, size: [f64; 3], center: [f64; 3], color: [u8; 3]) -> SceneObject {
    SceneObject {
        id: id.to_string(),
        shape: Shape::Box { size },
        center,
        color,
    }
}

fn overlaps(a: &SceneObject, b: &SceneObject, margin: f64) -> bool {
    let (ha, hb) = (a.half_extents(), b.half_extents());
    (0..3).all(|i| (a.center[i] - b.center[i]).abs() < ha[i] + hb[i] + margin)
}

struct Layout {
    scene: Scene,
    target_color: usize,
    occluder_color: usize,
    distractor_colors: Vec<usize>,
}

fn sample_layout(rng: &mut ChaCha8Rng) -> Layout {
    let scene_defaults = Scene::default();
    let ground = scene_defaults.ground_level;
    let mut palette: Vec<usize> = (0..COLOR_NAMES.len()).collect();
    palette.shuffle(rng);
    let occluder_color = palette[0];
    let target_color = palette[1];
    let n_distractors = rng.random_range(1..=3usize);
    let distractor_colors = palette[2..2 + n_distractors].to_vec();

    // a wide wall whose top edge sits a little below eye level (+y is down)
    let wall_width = uniform(rng, 2.6, 3.6);
    let wall_depth = uniform(rng, 0.2, 0.4);
    let wall_top = uniform(rng, 0.1, 0.3);
    let wall_near = uniform(rng, 1.8, 2.6);
    let wall_x = uniform(rng, -0.3, 0.3);
    let wall_height = ground - wall_top;
    let occluder = boxed(
        OCCLUDER_ID,
        [wall_width, wall_height, wall_depth],
        [wall_x, ground - wall_height / 2.0, mm(wall_near + wall_depth / 2.0)],
        COLOR_NAMES[occluder_color].1,
    );

    // the target is a shorter block standing on the ground behind the wall
    let target_width = uniform(rng, 0.3, 0.5);
    let target_depth = uniform(rng, 0.3, 0.5);
    let target_top = wall_top + uniform(rng, 0.05, 0.3);
    let target_height = mm(ground - target_top);
    let gap = uniform(rng, 0.2, 0.9);
    let lateral = uniform(rng, -0.7, 0.7);
    let target = boxed(
        TARGET_ID,
        [target_width, target_height, target_depth],
        [
            mm(wall_x + lateral),
            ground - target_height / 2.0,
            mm(wall_near + wall_depth + gap + target_depth / 2.0),
        ],
        COLOR_NAMES[target_color].1,
    );

    let mut objects = vec![occluder, target];
    for (i, &color) in distractor_colors.iter().enumerate() {
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let x = side * uniform(rng, wall_width / 2.0 + 0.3, wall_width / 2.0 + 1.4) + wall_x;
        let z = uniform(rng, 3.0, 5.5);
        let object = if rng.random_bool(0.5) {
            let r = uniform(rng, 0.15, 0.35);
            SceneObject {
                id: format!("distractor_{i}"),
                shape: Shape::Sphere { radius: r },
                center: [mm(x), ground - r, z],
                color: COLOR_NAMES[color].1,
            }
        } else {
            let s = uniform(rng, 0.25, 0.6);
            boxed(
                &format!("distractor_{i}"),
                [s, s, s],
                [mm(x), ground - s / 2.0, z],
                COLOR_NAMES[color].1,
            )
        };
        if objects.iter().all(|o| !overlaps(o, &object, 0.05)) {
            objects.push(object);
        }
    }
    let distractor_colors = objects[2..]
        .iter()
        .map(|o| {
            COLOR_NAMES
                .iter()
                .position(|c| c.1 == o.color)
                .expect("palette colour")
        })
        .collect();
    Layout {
        scene: Scene {
            objects,
            ..scene_defaults
        },
        target_color,
        occluder_color,
        distractor_colors,
    }
}

/// The shortest forward walk that exposes the target, provided the target
/// is hidden from the start and needs at least `min_reveal_steps` steps.
fn find_revealing(scene: &Scene, k: &Intrinsics, params: &SuiteParams) -> Option<Trajectory> {
    if visibility(scene, &CameraPose::identity(), k, TARGET_ID).ok()? >= HIDDEN_LIMIT {
        return None;
    }
    let step = Action::forward(params.search.forward_step).ok()?;
    let shortest = (1..=params.max_reveal_steps)
        .map(|m| Trajectory::empty().extended(step, m))
        .take_while(|t| within_budget(t, &params.search))
        .find(|t| {
            visibility(scene, &terminal_pose(t), k, TARGET_ID)
                .map(|v| v >= params.visibility_threshold)
                .unwrap_or(false)
        })?;
    (shortest.len() >= params.min_reveal_steps).then_some(shortest)
}

fn build_case(
    index: usize,
    rng: &mut ChaCha8Rng,
    k: Intrinsics,
    params: &SuiteParams,
) -> Option<SyntheticCase> {
    let layout = sample_layout(rng);
    let revealing = find_revealing(&layout.scene, &k, params)?;

    let mut options = vec![layout.target_color];
    options.extend(layout.distractor_colors.iter().copied());
    let mut rest: Vec<usize> = (0..COLOR_NAMES.len())
        .filter(|c| !options.contains(c) && *c != layout.occluder_color)
        .collect();
    rest.shuffle(rng);
    options.extend(rest);
    options.truncate(4);
    options.shuffle(rng);
    let answer_index = options
        .iter()
        .position(|&c| c == layout.target_color)
        .expect("target colour is an option");
    let fallback_index = rng.random_range(0..options.len());

    let id = format!("case_{index:04}");
    let question = Question {
        id: id.clone(),
        image: format!("{id}.png"),
        text: format!(
            "Which colored object is hidden behind the large {} box?",
            COLOR_NAMES[layout.occluder_color].0
        ),
        choices: options.iter().map(|&c| COLOR_NAMES[c].0.to_string()).collect(),
        answer_index: Some(answer_index),
        category: Category::Other,
    };
    let distractors = layout.scene.objects[2..].iter().map(|o| o.id.clone()).collect();
    Some(SyntheticCase {
        id,
        question,
        oracle: OracleSpec {
            target_object_id: TARGET_ID.to_string(),
            visibility_threshold_help: params.visibility_threshold,
            proximity_weight: 0.0,
            fallback_index,
        },
        revealing,
        occluder_id: OCCLUDER_ID.to_string(),
        distractors,
        intrinsics: k,
        pitch_deg: 0.0,
        scene: layout.scene,
    })
}

/// Deterministically generate `count` cases. Each case draws from its own
/// stream of the seeded generator, so case `i` does not depend on `count`.
pub fn generate_suite(seed: u64, count: usize) -> Result<Vec<SyntheticCase>, BenchError> {
    generate_suite_with(seed, count, &SuiteParams::default())
}

pub fn generate_suite_with(
    seed: u64,
    count: usize,
    params: &SuiteParams,
) -> Result<Vec<SyntheticCase>, BenchError> {
    if count == 0 {
        return Err(BenchError::Precondition("suite size must be at least 1".into()));
    }
    let k = Intrinsics::from_fov(params.width, params.height, params.fov_deg)
        .map_err(|e| BenchError::Precondition(e.to_string()))?;
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (0..params.attempts_per_case)
                .find_map(|_| build_case(i, &mut rng, k, params))
                .ok_or_else(|| {
                    BenchError::Generation(format!(
                        "case {i}: no valid layout after {} attempts",
                        params.attempts_per_case
                    ))
                })
        })
        .collect()
}

/// Re-verify a case's invariants from its scene alone.
pub fn check_case(case: &SyntheticCase, cfg: &SearchConfig) -> Result<(), String> {
    case.scene.validate().map_err(|e| e.to_string())?;
    case.question.validate().map_err(|e| e.to_string())?;
    let target = &case.oracle.target_object_id;
    let k = &case.intrinsics;
    let hidden = visibility(&case.scene, &CameraPose::identity(), k, target).map_err(|e| e.to_string())?;
    if hidden >= HIDDEN_LIMIT {
        return Err(format!("target visibility {hidden} from the reference pose"));
    }
    let shown = visibility(&case.scene, &terminal_pose(&case.revealing), k, target)
        .map_err(|e| e.to_string())?;
    if shown < case.oracle.visibility_threshold_help {
        return Err(format!(
            "target visibility {shown} after {} is below {}",
            case.revealing, case.oracle.visibility_threshold_help
        ));
    }
    if !within_budget(&case.revealing, cfg) {
        return Err(format!("revealing trajectory {} exceeds budgets", case.revealing));
    }
    if case.oracle.fallback_index >= case.question.choices.len() {
        return Err("fallback index out of range".into());
    }
    Ok(())
}

impl SyntheticCase {
    pub fn record(&self) -> DatasetRecord {
        DatasetRecord {
            id: self.id.clone(),
            image: self.question.image.clone(),
            question: self.question.text.clone(),
            answers: self.question.choices.clone(),
            correct_answer_index: self.question.answer_index,
            category: Some(self.question.category.as_str().to_string()),
            scene: Some(format!("{}.scene.json", self.id)),
            oracle: Some(self.oracle.clone()),
            revealing: Some(self.revealing.to_string()),
            intrinsics: Some(self.intrinsics),
            pitch_deg: Some(self.pitch_deg),
        }
    }

    pub fn reference_frame(&self) -> crate::worldmodel::Frame {
        render(&self.scene, &CameraPose::identity(), &self.intrinsics)
    }
}

/// Write `<id>.scene.json`, `<id>.png` per case and one [`SUITE_FILE`].
pub fn write_suite(cases: &[SyntheticCase], out_dir: &Path) -> Result<std::path::PathBuf, BenchError> {
    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| BenchError::io(&path, e))
    };
    let mut lines = String::new();
    for case in cases {
        let record = case.record();
        write(record.scene.as_deref().expect("suite records carry a scene"), case.scene.to_json().as_bytes())?;
        write(&record.image, &case.reference_frame().to_png())?;
        lines.push_str(&serde_json::to_string(&record).expect("record serializes"));
        lines.push('\n');
    }
    write(SUITE_FILE, lines.as_bytes())?;
    Ok(out_dir.join(SUITE_FILE))
}
