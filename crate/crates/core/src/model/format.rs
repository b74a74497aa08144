//! Line-oriented text format for probabilistic automata.
//!
//! ```text
//! labels a b          # optional; labels are also declared by use
//! state s
//!   a -> s:1/2, t:1/2
//! state t
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Dist, Label, ModelError, Pa, Rational, StateId};

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

fn ident<T>(line: usize, tok: &str, make: fn(&str) -> Result<T, ModelError>) -> Result<T, ModelError> {
    make(tok).map_err(|_| parse_err(line, format!("invalid identifier `{tok}`")))
}

fn parse_entries(line: usize, text: &str) -> Result<Dist, ModelError> {
    let mut entries: Vec<(StateId, Rational)> = Vec::new();
    let mut total = Rational::zero();
    for raw in text.split(',') {
        let (state, weight) = raw
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("expected `state:weight`, found `{}`", raw.trim())))?;
        let state = ident(line, state.trim(), StateId::new)?;
        let weight: Rational = weight
            .trim()
            .parse()
            .map_err(|e| parse_err(line, format!("{e}")))?;
        if weight.is_negative() {
            return Err(parse_err(line, format!("negative weight for {state}")));
        }
        if entries.iter().any(|(s, _)| *s == state) {
            return Err(parse_err(line, format!("duplicate entry for {state}")));
        }
        total += &weight;
        entries.push((state, weight));
    }
    if !total.is_one() {
        return Err(ModelError::Sum { line, total });
    }
    Dist::new(entries).map_err(|e| parse_err(line, e.to_string()))
}

/// Parses the PA text format. States are declared by first use and kept in
/// lexicographic order; per-`(state, label)` transition lists keep source
/// order.
pub fn parse_pa(text: &str) -> Result<Pa, ModelError> {
    let mut states = BTreeSet::new();
    let mut labels = BTreeSet::new();
    let mut transitions: BTreeMap<(StateId, Label), Vec<Dist>> = BTreeMap::new();
    let mut current: Option<StateId> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some((lhs, rhs)) = content.split_once("->") {
            let source = current
                .clone()
                .ok_or_else(|| parse_err(line, "transition outside of a `state` block"))?;
            let label = ident(line, lhs.trim(), Label::new)?;
            let dist = parse_entries(line, rhs)?;
            states.extend(dist.support().cloned());
            labels.insert(label.clone());
            transitions.entry((source, label)).or_default().push(dist);
            continue;
        }
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("labels") => {
                let mut any = false;
                for tok in tokens {
                    labels.insert(ident(line, tok, Label::new)?);
                    any = true;
                }
                if !any {
                    return Err(parse_err(line, "`labels` needs at least one label"));
                }
            }
            Some("state") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| parse_err(line, "`state` needs a name"))?;
                if let Some(extra) = tokens.next() {
                    return Err(parse_err(line, format!("unexpected `{extra}` after state name")));
                }
                let s = ident(line, name, StateId::new)?;
                states.insert(s.clone());
                current = Some(s);
            }
            Some(other) => return Err(parse_err(line, format!("unexpected `{other}`"))),
            None => unreachable!(),
        }
    }

    if labels.is_empty() {
        return Err(parse_err(0, "empty label set"));
    }
    if states.is_empty() {
        return Err(parse_err(0, "no states declared"));
    }
    Pa::new(states, labels, transitions)
}

/// Canonical text form. A `labels` line is emitted only when some label has
/// no transition (otherwise labels are recovered from use).
pub fn serialize_pa(pa: &Pa) -> String {
    let used: BTreeSet<&Label> = pa.transition_map().keys().map(|(_, a)| a).collect();
    let mut out = String::new();
    if used.len() != pa.labels().len() {
        out.push_str("labels");
        for a in pa.labels() {
            let _ = write!(out, " {a}");
        }
        out.push('\n');
    }
    for s in pa.states() {
        let _ = writeln!(out, "state {s}");
        for a in pa.labels() {
            for d in pa.successors(s, a) {
                let entries: Vec<String> = d.iter().map(|(t, w)| format!("{t}:{w}")).collect();
                let _ = writeln!(out, "  {a} -> {}", entries.join(", "));
            }
        }
    }
    out
}
