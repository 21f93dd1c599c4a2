use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ScoringError;

/// Question family tags used to break accuracy down in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    EgoM,
    ObjM,
    EgoAct,
    GoalAim,
    Pers,
    Other,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::EgoM,
        Category::ObjM,
        Category::EgoAct,
        Category::GoalAim,
        Category::Pers,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::EgoM => "EgoM",
            Category::ObjM => "ObjM",
            Category::EgoAct => "EgoAct",
            Category::GoalAim => "GoalAim",
            Category::Pers => "Pers",
            Category::Other => "other",
        }
    }

    /// Unknown tags map to `Other`.
    pub fn from_tag(tag: &str) -> Self {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(tag))
            .unwrap_or(Category::Other)
    }
}

impl Default for Category {
    fn default() -> Self {
        Category::Other
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tag = String::deserialize(d)?;
        Ok(Category::from_tag(&tag))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    /// Path of the reference image, relative to the dataset's image root.
    pub image: String,
    pub text: String,
    pub choices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_index: Option<usize>,
    #[serde(default)]
    pub category: Category,
}

impl Question {
    pub fn validate(&self) -> Result<(), ScoringError> {
        let n = self.choices.len();
        if !(2..=5).contains(&n) {
            return Err(ScoringError::InvalidQuestion(format!(
                "{}: expected 2 to 5 choices, got {n}",
                self.id
            )));
        }
        if let Some(i) = self.answer_index {
            if i >= n {
                return Err(ScoringError::InvalidQuestion(format!(
                    "{}: answer index {i} out of range for {n} choices",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn letter(index: usize) -> char {
        (b'A' + index as u8) as char
    }

    /// `A. first\nB. second...`
    pub fn lettered_choices(&self) -> String {
        self.choices
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}. {c}", Self::letter(i)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
