use std::sync::LazyLock;

use regex::Regex;

use super::{ScorePair, ScoringError, SCORE_MAX};

static EXPLORATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)exploration\D*?(\d+)").unwrap());
static HELPFUL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?is)helpful\D*?(\d+)").unwrap());
static CHOICE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\(([A-Ea-e])\)|\b([A-E])\b").unwrap());

fn first_after(re: &Regex, text: &str, marker: &str) -> Result<u8, ScoringError> {
    let caps = re
        .captures(text)
        .ok_or_else(|| ScoringError::Parse(format!("no integer after {marker:?}")))?;
    // saturate long digit strings before clamping
    let value: u64 = caps[1].parse().unwrap_or(u64::MAX);
    Ok(value.min(SCORE_MAX as u64) as u8)
}

/// First integer after each of the markers `exploration` and `helpful`
/// (case-insensitive), clamped to `0..=10`.
pub fn parse_scores(text: &str) -> Result<ScorePair, ScoringError> {
    let s_exp = first_after(&EXPLORATION, text, "exploration")?;
    let s_help = first_after(&HELPFUL, text, "helpful")?;
    Ok(ScorePair {
        s_exp,
        s_help,
        raw: text.to_string(),
    })
}

/// Canonical reply layout that [`parse_scores`] reads back exactly.
pub fn format_scores(s_exp: u8, s_help: u8) -> String {
    format!("exploration: {s_exp}\nhelpful: {s_help}")
}

/// Choice letter `A`–`E`, bare uppercase or parenthesised in either case.
/// The last match wins so reasoning before the final answer is ignored.
pub fn parse_choice(text: &str, n_choices: usize) -> Result<usize, ScoringError> {
    let letter = CHOICE
        .captures_iter(text)
        .last()
        .and_then(|c| c.get(1).or_else(|| c.get(2)))
        .map(|m| m.as_str().to_ascii_uppercase())
        .ok_or_else(|| ScoringError::Parse(format!("no choice letter in {text:?}")))?;
    let index = (letter.as_bytes()[0] - b'A') as usize;
    if index >= n_choices {
        return Err(ScoringError::Parse(format!(
            "choice {letter} out of range for {n_choices} options"
        )));
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn score_examples() {
        let p = parse_scores("Exploration: 8, Helpful: 6").unwrap();
        assert_eq!((p.s_exp, p.s_help), (8, 6));
        let p = parse_scores("exploration score = 12\nhelpful: 3").unwrap();
        assert_eq!((p.s_exp, p.s_help), (10, 3));
        let p = parse_scores("exploration: 7\nhelpful: 9").unwrap();
        assert_eq!((p.s_exp, p.s_help), (7, 9));
        assert!(parse_scores("no numbers here").is_err());
        assert!(parse_scores("exploration: 4").is_err());
    }

    #[test]
    fn choice_examples() {
        assert_eq!(parse_choice("Answer: B", 4).unwrap(), 1);
        assert_eq!(parse_choice("the answer is (c)", 4).unwrap(), 2);
        assert!(parse_choice("E", 4).is_err());
        assert!(parse_choice("no idea", 4).is_err());
        assert_eq!(
            parse_choice("A seems plausible, but on reflection: D.", 4).unwrap(),
            3
        );
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(a in 0u8..=10, b in 0u8..=10) {
            let p = parse_scores(&format_scores(a, b)).unwrap();
            prop_assert_eq!((p.s_exp, p.s_help), (a, b));
        }
    }
}
