//! The automaton file format:
//! `{"dim", "constants": {name: word}, "states", "initial", "final",
//! "transitions": [{"from", "to", "guard"}]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{guard::parse_guard, AutomatonError, ConstraintAutomaton, Transition};
use crate::tree::{ConstantSet, Word};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionFile {
    from: String,
    to: String,
    guard: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    dim: usize,
    #[serde(default)]
    constants: BTreeMap<String, String>,
    states: Vec<String>,
    initial: Vec<String>,
    #[serde(rename = "final")]
    finals: Vec<String>,
    transitions: Vec<TransitionFile>,
}

/// Parses an automaton; the constant set is closed under prefixes.
pub fn automaton_from_json(text: &str) -> Result<ConstraintAutomaton, AutomatonError> {
    let file: AutomatonFile =
        serde_json::from_str(text).map_err(|e| AutomatonError::Format(e.to_string()))?;
    let mut entries = Vec::new();
    for (name, value) in &file.constants {
        entries.push((name.clone(), value.parse::<Word>()?));
    }
    let constants = ConstantSet::closed(entries)?;
    let state = |name: &str| {
        file.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| AutomatonError::UnknownState(name.to_string()))
    };
    let initial = file.initial.iter().map(|s| state(s)).collect::<Result<Vec<_>, _>>()?;
    let finals = file.finals.iter().map(|s| state(s)).collect::<Result<Vec<_>, _>>()?;
    let mut transitions = Vec::new();
    for t in &file.transitions {
        transitions.push(Transition {
            from: state(&t.from)?,
            to: state(&t.to)?,
            guard: parse_guard(&t.guard, &constants)?,
        });
    }
    ConstraintAutomaton::new(file.dim, constants, file.states.clone(), initial, finals, transitions)
}

pub fn automaton_to_json(a: &ConstraintAutomaton) -> String {
    let file = AutomatonFile {
        dim: a.dim,
        constants: a.constants.entries().iter().map(|(n, w)| (n.clone(), w.to_string())).collect(),
        states: a.states.clone(),
        initial: a.initial.iter().map(|&q| a.states[q].clone()).collect(),
        finals: a.finals.iter().map(|&q| a.states[q].clone()).collect(),
        transitions: a
            .transitions
            .iter()
            .map(|t| TransitionFile {
                from: a.states[t.from].clone(),
                to: a.states[t.to].clone(),
                guard: t.guard.display(&a.constants).to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"dim": 1, "constants": {"c": "1.2"}, "states": ["q"], "initial": ["q"],
            "final": ["q"], "transitions": [{"from": "q", "to": "q", "guard": "pref(x1,y1) & !eq(x1,c)"}]}"#;
        let a = automaton_from_json(text).unwrap();
        assert_eq!(a.constants.len(), 3);
        let b = automaton_from_json(&automaton_to_json(&a)).unwrap();
        assert_eq!(a, b);
        assert!(automaton_from_json(r#"{"dim": 1}"#).is_err());
        let bad = text.replace("\"final\": [\"q\"]", "\"final\": [\"r\"]");
        assert!(matches!(automaton_from_json(&bad), Err(AutomatonError::UnknownState(_))));
    }
}
