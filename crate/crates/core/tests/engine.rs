use treeltl::automata::{automaton_from_json, ConstraintAutomaton};
use treeltl::engine::{certificate_from_json, certificate_to_json, check_certificate, is_empty};

fn automaton(dim: usize, constants: &str, transitions: &[(&str, &str, &str)]) -> ConstraintAutomaton {
    let mut states: Vec<&str> = vec!["q0"];
    for (f, t, _) in transitions {
        for s in [f, t] {
            if !states.contains(s) {
                states.push(s);
            }
        }
    }
    let ts: Vec<String> = transitions
        .iter()
        .map(|(f, t, g)| format!(r#"{{"from":"{f}","to":"{t}","guard":"{g}"}}"#))
        .collect();
    let names: Vec<String> = states.iter().map(|s| format!("\"{s}\"")).collect();
    let text = format!(
        r#"{{"dim":{dim},"constants":{{{constants}}},"states":[{}],"initial":["q0"],"final":["{}"],"transitions":[{}]}}"#,
        names.join(","),
        states.last().unwrap(),
        ts.join(",")
    );
    automaton_from_json(&text).unwrap()
}

fn nonempty(a: &ConstraintAutomaton) -> bool {
    let v = is_empty(a).unwrap();
    if let Some(cert) = &v.certificate {
        check_certificate(a, cert).unwrap();
        let back = certificate_from_json(a, &certificate_to_json(a, cert)).unwrap();
        assert_eq!(&back, cert);
    }
    v.nonempty
}

#[test]
fn strict_ascent_is_nonempty() {
    assert!(nonempty(&automaton(1, "", &[("q0", "q0", "pref(x1,y1) & !eq(x1,y1)")])));
}

#[test]
fn strict_descent_is_empty() {
    assert!(!nonempty(&automaton(1, "", &[("q0", "q0", "pref(y1,x1) & !eq(x1,y1)")])));
}

#[test]
fn bounded_ascent_is_empty() {
    let a = automaton(
        1,
        r#""one":"1","c":"1.2.3""#,
        &[
            ("q0", "q1", "eq(x1,one) & pref(x1,y1) & !eq(x1,y1) & pref(y1,c)"),
            ("q1", "q1", "pref(x1,y1) & !eq(x1,y1) & pref(y1,c)"),
        ],
    );
    assert!(!nonempty(&a));
}

#[test]
fn lex_ascent_below_constant_is_nonempty() {
    let a = automaton(1, r#""c":"2""#, &[("q0", "q0", "lex(x1,y1) & !eq(x1,y1) & lex(y1,c) & !eq(y1,c)")]);
    assert!(nonempty(&a));
}

#[test]
fn lex_descent_and_branching_two_dims() {
    let a = automaton(
        2,
        "",
        &[("q0", "q0", "lex(y1,x1) & !eq(x1,y1) & pref(x2,y2) & !eq(x2,y2) & !pref(y1,y2)")],
    );
    assert!(nonempty(&a));
}

#[test]
fn equal_forever_and_never_equal() {
    assert!(nonempty(&automaton(1, "", &[("q0", "q0", "eq(x1,y1)")])));
    assert!(!nonempty(&automaton(1, "", &[("q0", "q0", "!eq(x1,x1)")])));
}
