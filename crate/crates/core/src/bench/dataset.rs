use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::geometry::Intrinsics;
use crate::scoring::{Category, OracleSpec, Question};

pub const DATASET_EXTENSION: &str = "satq.jsonl";

/// One line of a `.satq.jsonl` file. The trailing optional fields are only
/// present on synthetic cases and drive the scene-backed backends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub image: String,
    pub question: String,
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_answer_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revealing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<Intrinsics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_deg: Option<f64>,
}

impl DatasetRecord {
    pub fn to_question(&self) -> Question {
        Question {
            id: self.id.clone(),
            image: self.image.clone(),
            text: self.question.clone(),
            choices: self.answers.clone(),
            answer_index: self.correct_answer_index,
            category: self
                .category
                .as_deref()
                .map(Category::from_tag)
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DatasetEntry {
    pub question: Question,
    pub record: DatasetRecord,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub entries: Vec<DatasetEntry>,
    /// Directory that image and scene paths are relative to.
    pub root: PathBuf,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }
}

/// Parse a line-delimited dataset; blank lines are skipped. Paths inside
/// records are resolved against the file's directory.
pub fn load_dataset(path: &Path) -> Result<Dataset, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let fault = |line: usize, message: String| BenchError::Record {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(line).map_err(|e| fault(line_no, e.to_string()))?;
        let question = record.to_question();
        question
            .validate()
            .map_err(|e| fault(line_no, e.to_string()))?;
        if !seen.insert(record.id.clone()) {
            return Err(fault(line_no, format!("duplicate id {:?}", record.id)));
        }
        if !root.join(&record.image).is_file() {
            return Err(fault(line_no, format!("image {:?} not found", record.image)));
        }
        if let Some(scene) = &record.scene {
            if !root.join(scene).is_file() {
                return Err(fault(line_no, format!("scene {scene:?} not found")));
            }
        }
        entries.push(DatasetEntry { question, record });
    }
    Ok(Dataset { entries, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodel::Frame;

    fn write_image(dir: &Path, name: &str) {
        std::fs::write(dir.join(name), Frame::filled(4, 4, [0, 0, 0]).to_png()).unwrap();
    }

    fn line(id: &str, answers: &str, category: &str) -> String {
        format!(
            r#"{{"id":"{id}","image":"a.png","question":"q?","answers":{answers},"correct_answer_index":0,"category":"{category}"}}"#
        )
    }

    #[test]
    fn loads_valid_records() {
        let dir = tempfile::tempdir().unwrap();
        write_image(dir.path(), "a.png");
        let body = [
            line("1", r#"["x","y"]"#, "EgoM"),
            line("2", r#"["x","y","z"]"#, "pers"),
            line("3", r#"["x","y","z","w"]"#, "ObjM"),
        ]
        .join("\n");
        let path = dir.path().join("d.satq.jsonl");
        std::fs::write(&path, body).unwrap();
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.entries[1].question.category, Category::Pers);
    }

    #[test]
    fn single_choice_names_line() {
        let dir = tempfile::tempdir().unwrap();
        write_image(dir.path(), "a.png");
        let body = [line("1", r#"["x","y"]"#, "EgoM"), line("2", r#"["x"]"#, "EgoM")].join("\n");
        let path = dir.path().join("d.satq.jsonl");
        std::fs::write(&path, body).unwrap();
        match load_dataset(&path) {
            Err(BenchError::Record { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_category_is_other() {
        let dir = tempfile::tempdir().unwrap();
        write_image(dir.path(), "a.png");
        let path = dir.path().join("d.satq.jsonl");
        std::fs::write(&path, line("1", r#"["x","y"]"#, "Counting")).unwrap();
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.entries[0].question.category, Category::Other);
    }

    #[test]
    fn duplicate_ids_and_missing_images_fail() {
        let dir = tempfile::tempdir().unwrap();
        write_image(dir.path(), "a.png");
        let path = dir.path().join("d.satq.jsonl");
        let dup = [line("1", r#"["x","y"]"#, "EgoM"), line("1", r#"["x","y"]"#, "EgoM")].join("\n");
        std::fs::write(&path, dup).unwrap();
        assert!(load_dataset(&path).is_err());
        std::fs::write(&path, line("1", r#"["x","y"]"#, "EgoM").replace("a.png", "b.png")).unwrap();
        assert!(load_dataset(&path).is_err());
    }
}
