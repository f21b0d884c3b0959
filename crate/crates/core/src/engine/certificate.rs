//! Concrete lasso certificates: construction from a symbolic witness,
//! independent checking, and JSON exchange.

use serde::{Deserialize, Serialize};

use super::{EngineError, Witness};
use crate::automata::{check_run_reason, ConstraintAutomaton};
use crate::order_types::{
    mcat, realize, realize_extending, realize_with_gaps, regap, stretch_leq, stretch_upper_bound,
    Configuration,
};
use crate::tree::Word;

/// A prefix run from an initial configuration and a loop run whose first
/// configuration ends the prefix and is stretch-below its last. Repeating
/// the loop up to stretching yields an accepting run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub prefix_run: Vec<Configuration>,
    pub loop_run: Vec<Configuration>,
}

/// Checks a certificate without reference to how it was found.
pub fn check_certificate(a: &ConstraintAutomaton, cert: &Certificate) -> Result<(), String> {
    let Some(first) = cert.prefix_run.first() else { return Err("empty prefix".into()) };
    if !a.is_initial(first.state) {
        return Err("prefix does not start in an initial state".into());
    }
    check_run_reason(a, &cert.prefix_run).map_err(|e| format!("prefix: {e}"))?;
    if cert.loop_run.len() < 2 {
        return Err("loop needs at least one step".into());
    }
    check_run_reason(a, &cert.loop_run).map_err(|e| format!("loop: {e}"))?;
    let start = &cert.loop_run[0];
    if cert.prefix_run.last() != Some(start) {
        return Err("prefix does not end where the loop starts".into());
    }
    if !a.is_final(start.state) {
        return Err("loop does not start in an accepting state".into());
    }
    if !stretch_leq(start, cert.loop_run.last().expect("nonempty"), &a.constants) {
        return Err("loop start is not stretch-below the loop end".into());
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Keep the shape of the run and move its first configuration.
    Forward,
    /// Same, anchored at the last configuration.
    Backward,
}

/// Moves `run` so that its anchor configuration becomes `target`, which must
/// be stretch-above the anchor. Guards only see types, so the result is again
/// a run.
pub fn lift_run(
    a: &ConstraintAutomaton,
    run: &[Configuration],
    target: &Configuration,
    dir: Direction,
) -> Result<Vec<Configuration>, EngineError> {
    let c = &a.constants;
    let k = match dir {
        Direction::Forward => 0,
        Direction::Backward => run.len().checked_sub(1).ok_or_else(|| {
            EngineError::PreconditionViolated("empty run".into())
        })?,
    };
    if run.is_empty() {
        return Err(EngineError::PreconditionViolated("empty run".into()));
    }
    if !stretch_leq(&run[k], target, c) {
        return Err(EngineError::PreconditionViolated("target is not stretch-above the anchor".into()));
    }
    let n = a.dim;
    if n == 0 {
        return Ok(run.to_vec());
    }
    let all: Vec<Word> = run.iter().flat_map(|cfg| cfg.values.iter().cloned()).collect();
    let big = mcat(&all, n, c);
    let anchor: Vec<usize> = (k * n..(k + 1) * n).collect();
    let (sub, origin) = big.ty.project(&anchor, n);
    let tm = mcat(&target.values, n, c);
    if sub.nodes() != tm.ty.nodes() {
        return Err(EngineError::Internal("anchor type differs from target type".into()));
    }
    let mut anchors = vec![None; big.ty.len()];
    for (i, &o) in origin.iter().enumerate() {
        anchors[o] = Some(tm.words[i].clone());
    }
    let words = realize(&big.ty, &anchors, c, 0)?;
    let out: Vec<Configuration> = run
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let values = (0..n).map(|j| words[big.ty.node_of(i * n + j)].clone()).collect();
            Configuration::new(cfg.state, values)
        })
        .collect();
    if out[k] != *target {
        return Err(EngineError::Internal("lifted run misses the target".into()));
    }
    check_run_reason(a, &out).map_err(|e| EngineError::Internal(format!("lifted run invalid: {e}")))?;
    Ok(out)
}

fn prefix_run(a: &ConstraintAutomaton, w: &Witness, gap: usize) -> Result<Vec<Configuration>, EngineError> {
    let (n, c) = (a.dim, &a.constants);
    let start = if n == 0 { Vec::new() } else { realize_with_gaps(&w.seed.to_type(n, n), c, gap)? };
    let mut run = vec![Configuration::new(w.seed_state, start)];
    let known: Vec<usize> = (0..n).collect();
    for step in &w.prefix {
        let values = if n == 0 {
            Vec::new()
        } else {
            let cur = mcat(&run[run.len() - 1].values, n, c);
            regap(&mut run, &cur.words, gap, c);
            let all = realize_extending(&step.pair.to_type(n, 2 * n), &known, &run[run.len() - 1].values, c, gap)?;
            all[n..].to_vec()
        };
        run.push(Configuration::new(step.state, values));
    }
    Ok(run)
}

fn loop_run(a: &ConstraintAutomaton, w: &Witness, gap: usize) -> Result<Vec<Configuration>, EngineError> {
    let (n, c) = (a.dim, &a.constants);
    let start = if n == 0 { Vec::new() } else { realize_with_gaps(&w.junction.to_type(n, n), c, gap)? };
    let mut run = vec![Configuration::new(w.final_state, start)];
    let known: Vec<usize> = (0..2 * n).collect();
    for step in &w.lasso {
        let values = if n == 0 {
            Vec::new()
        } else {
            let ends: Vec<Word> = run[0].values.iter().chain(&run[run.len() - 1].values).cloned().collect();
            regap(&mut run, &mcat(&ends, n, c).words, gap, c);
            let ends: Vec<Word> = run[0].values.iter().chain(&run[run.len() - 1].values).cloned().collect();
            let all = realize_extending(&step.triple.to_type(n, 3 * n), &known, &ends, c, gap)?;
            all[2 * n..].to_vec()
        };
        run.push(Configuration::new(step.state, values));
    }
    Ok(run)
}

/// Builds a checked certificate from a symbolic witness. Also returns the
/// number of stretch-repair iterations.
pub(crate) fn build_certificate(
    a: &ConstraintAutomaton,
    w: &Witness,
) -> Result<(Certificate, usize), EngineError> {
    let gap = 2 * a.dim + 1;
    let prefix = prefix_run(a, w, gap)?;
    let cycle = loop_run(a, w, gap)?;
    let junction = stretch_upper_bound(&prefix[prefix.len() - 1], &cycle[0], &a.constants)?;
    let cycle = lift_run(a, &cycle, &junction, Direction::Forward)?;
    let (cycle, report) = super::stretchify(&cycle, &a.constants)?;
    if !report.progressed() {
        return Err(EngineError::Internal("stretch repair measure did not decrease".into()));
    }
    let prefix = lift_run(a, &prefix, &cycle[0], Direction::Backward)?;
    Ok((Certificate { prefix_run: prefix, loop_run: cycle }, report.iterations()))
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    state: String,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    prefix_run: Vec<ConfigJson>,
    loop_run: Vec<ConfigJson>,
}

fn to_json(a: &ConstraintAutomaton, run: &[Configuration]) -> Vec<ConfigJson> {
    run.iter()
        .map(|c| ConfigJson {
            state: a.states[c.state].clone(),
            values: c.values.iter().map(|w| w.to_string()).collect(),
        })
        .collect()
}

fn from_json(a: &ConstraintAutomaton, run: Vec<ConfigJson>) -> Result<Vec<Configuration>, String> {
    run.into_iter()
        .map(|c| {
            let state = a.state_index(&c.state).ok_or_else(|| format!("unknown state `{}`", c.state))?;
            let values = c
                .values
                .iter()
                .map(|v| v.parse::<Word>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            Ok(Configuration::new(state, values))
        })
        .collect()
}

pub fn certificate_to_json(a: &ConstraintAutomaton, cert: &Certificate) -> String {
    let j = CertificateJson { prefix_run: to_json(a, &cert.prefix_run), loop_run: to_json(a, &cert.loop_run) };
    serde_json::to_string_pretty(&j).expect("serializable")
}

pub fn certificate_from_json(a: &ConstraintAutomaton, text: &str) -> Result<Certificate, String> {
    let j: CertificateJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ok(Certificate { prefix_run: from_json(a, j.prefix_run)?, loop_run: from_json(a, j.loop_run)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_guard;
    use crate::automata::Transition;
    use crate::tree::ConstantSet;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn lift_keeps_runs_valid() {
        let c = ConstantSet::default();
        let g = parse_guard("pref(x1,y1) & !eq(x1,y1)", &c).unwrap();
        let a = ConstraintAutomaton::new(1, c, vec!["q".into()], vec![0], vec![0], vec![Transition { from: 0, to: 0, guard: g }])
            .unwrap();
        let run: Vec<Configuration> =
            ["1", "1.1", "1.1.1"].iter().map(|s| Configuration::new(0, vec![w(s)])).collect();
        let up = lift_run(&a, &run, &Configuration::new(0, vec![w("3.0.0")]), Direction::Forward).unwrap();
        assert_eq!(up[0].values[0], w("3.0.0"));
        let down = lift_run(&a, &run, &Configuration::new(0, vec![w("2.2.2.2")]), Direction::Backward).unwrap();
        assert_eq!(down[2].values[0], w("2.2.2.2"));
        assert!(lift_run(&a, &run, &Configuration::new(0, vec![w("eps")]), Direction::Forward).is_err());
    }
}
