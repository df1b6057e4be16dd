use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::EnvironmentMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommandError {
    #[error("empty command")]
    Empty,
    #[error("no object matches `{text}` (known: {})", known.join(", "))]
    UnknownTarget { text: String, known: Vec<String> },
    #[error("`{text}` is ambiguous between {}", candidates.join(", "))]
    AmbiguousTarget {
        text: String,
        candidates: Vec<String>,
    },
}

/// A natural-language command resolved against an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub raw_text: String,
    pub target_name: String,
    /// Clock reading when the command was accepted (seconds).
    pub issued_at: f64,
}

impl Command {
    pub fn stamped(mut self, t: f64) -> Self {
        self.issued_at = t;
        self
    }
}

fn room_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(?:room(?:[\s\-_]*(?:number|num|no\.?|nr\.?|#))?(?:[\s\-_]*plate)?|rnp)[\s\-_#:.]*(\d+)\b",
        )
        .expect("room pattern compiles")
    })
}

#[derive(Debug, PartialEq)]
enum Token {
    Word(String),
    Number(u64),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Token>| {
        if cur.is_empty() {
            return;
        }
        if cur.chars().all(|c| c.is_ascii_digit()) {
            match cur.parse::<u64>() {
                Ok(n) => out.push(Token::Number(n)),
                Err(_) => out.push(Token::Word(std::mem::take(cur))),
            }
        } else {
            let mut w = cur.to_lowercase();
            // "stairs" and "stair" name the same thing
            if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") {
                w.pop();
            }
            out.push(Token::Word(w));
        }
        cur.clear();
    };
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            // split letter/digit boundaries so "rnp105" or "window02" tokenize apart
            if let Some(last) = cur.chars().last() {
                if last.is_ascii_digit() != ch.is_ascii_digit() {
                    flush(&mut cur, &mut out);
                }
            }
            cur.push(ch);
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}

enum NameMatch {
    Exact,
    Partial,
}

/// Matches an object's words as a contiguous run inside the command. A
/// trailing object number must agree when the command states one.
fn match_object(command: &[Token], object_name: &str) -> Option<NameMatch> {
    let name = tokenize(object_name);
    let (words, number) = match name.split_last() {
        Some((Token::Number(n), rest)) => (rest, Some(*n)),
        _ => (&name[..], None),
    };
    if words.is_empty() || words.len() > command.len() {
        return None;
    }
    let mut best = None;
    for start in 0..=command.len() - words.len() {
        if command[start..start + words.len()] != *words {
            continue;
        }
        let following = command.get(start + words.len());
        let m = match (number, following) {
            (Some(n), Some(Token::Number(k))) if *k == n => Some(NameMatch::Exact),
            (Some(_), Some(Token::Number(_))) => None,
            (Some(_), _) => Some(NameMatch::Partial),
            (None, Some(Token::Number(_))) => None,
            (None, _) => Some(NameMatch::Exact),
        };
        match m {
            Some(NameMatch::Exact) => return Some(NameMatch::Exact),
            Some(NameMatch::Partial) => best = Some(NameMatch::Partial),
            None => {}
        }
    }
    best
}

/// Resolves the target object named by `raw`.
pub fn parse_command(raw: &str, map: &EnvironmentMap) -> Result<Command, CommandError> {
    let text = raw.trim();
    if text.is_empty() {
        return Err(CommandError::Empty);
    }
    let resolved = |name: &str| Command {
        raw_text: raw.to_string(),
        target_name: name.to_string(),
        issued_at: 0.0,
    };
    let known = || map.objects.iter().map(|o| o.name.clone()).collect::<Vec<_>>();

    if let Some(caps) = room_pattern().captures(text) {
        let digits = caps[1].trim_start_matches('0');
        let name = format!("Room-number-plate-{digits}");
        return match map.object(&name) {
            Some(o) => Ok(resolved(&o.name)),
            None => Err(CommandError::UnknownTarget {
                text: text.to_string(),
                known: known(),
            }),
        };
    }

    let tokens = tokenize(text);
    let mut exact = Vec::new();
    let mut partial = Vec::new();
    for o in &map.objects {
        match match_object(&tokens, &o.name) {
            Some(NameMatch::Exact) => exact.push(o.name.clone()),
            Some(NameMatch::Partial) => partial.push(o.name.clone()),
            None => {}
        }
    }
    let candidates = if exact.is_empty() { partial } else { exact };
    match candidates.len() {
        0 => Err(CommandError::UnknownTarget {
            text: text.to_string(),
            known: known(),
        }),
        1 => Ok(resolved(&candidates[0])),
        _ => Err(CommandError::AmbiguousTarget {
            text: text.to_string(),
            candidates,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::builtin_environment;

    fn target(raw: &str, env: &str) -> Result<String, CommandError> {
        parse_command(raw, &builtin_environment(env).unwrap()).map(|c| c.target_name)
    }

    #[test]
    fn room_number_phrases() {
        assert_eq!(target("go to Room Number 101", "env_a").unwrap(), "Room-number-plate-101");
        assert_eq!(target("room 105 please", "env_a").unwrap(), "Room-number-plate-105");
        assert_eq!(target("RNP 108", "env_a").unwrap(), "Room-number-plate-108");
        assert_eq!(target("go to RNP105", "env_b").unwrap(), "Room-number-plate-105");
        assert_eq!(target("Room-number-plate-206", "env_c").unwrap(), "Room-number-plate-206");
    }

    #[test]
    fn named_objects() {
        assert_eq!(target("go to the window", "env_a").unwrap(), "Window");
        assert_eq!(target("Go to Window 02", "env_b").unwrap(), "Window 02");
        assert_eq!(target("window 2", "env_b").unwrap(), "Window 02");
        assert_eq!(target("go to stairs 02", "env_c").unwrap(), "Stairs 02");
        assert_eq!(target("head for the MAIN ENTRANCE", "env_c").unwrap(), "Main Entrance");
    }

    #[test]
    fn unknown_and_ambiguous() {
        assert!(matches!(target("go to nowhere", "env_a"), Err(CommandError::UnknownTarget { .. })));
        assert!(matches!(target("room 999", "env_a"), Err(CommandError::UnknownTarget { .. })));
        match target("go to the window", "env_b") {
            Err(CommandError::AmbiguousTarget { candidates, .. }) => {
                assert_eq!(candidates, vec!["Window 01".to_string(), "Window 02".to_string()])
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
        assert!(matches!(target("stairs", "env_c"), Err(CommandError::AmbiguousTarget { .. })));
        assert_eq!(target("   ", "env_a"), Err(CommandError::Empty));
    }
}
