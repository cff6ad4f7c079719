//! Line-oriented text format for POMDPs, PFAs, and strategies.
//!
//! Model grammar (one directive per line, `#` at line start comments):
//!
//! ```text
//! pomdp <name>            # or: pfa <name>
//! states: s0 s1 ...
//! actions: a b ...
//! obs: o1 o2 ...          # optional; omitted = fully observable
//! see s = o               # one per state when obs: is present
//! init s
//! final: s ...            # pfa only
//! trans s a -> t:0.5 u:0.5
//! reward s a = 1          # pomdp only; omitted rewards are 0
//! ```
//!
//! Transition rows must sum to 1 within tolerance. PFAs may omit
//! `(state, letter)` rows (the letter is then unavailable there);
//! POMDPs must declare every row. Since reduced models use `#` and `$`
//! as action names, `#` only starts a comment at the beginning of a
//! line.
//!
//! Strategy grammar:
//!
//! ```text
//! strategy <name>
//! memory: m0 m1 ...
//! init m0
//! act m -> a:0.5 b:0.5
//! update m o a -> m':1
//! ```
//!
//! Omitted `update` rows default to staying in the same memory element.
//! Probabilities are written with 12 significant digits, below every
//! tolerance in the crate, so serialization round-trips.

use std::collections::HashMap;

use crate::bits::Mask64;
use crate::error::{Error, Result};
use crate::model::{Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;
use crate::reductions::Pfa;

/// A parsed model document: either kind of automaton.
#[derive(Clone, Debug)]
pub enum ParsedModel<R: Real = f64> {
    Pomdp(Pomdp<R>),
    Pfa(Pfa<R>),
}

/// Pending rows collected during parsing: `(line, state, action, entries)`.
type TransRow<R> = (usize, usize, usize, Vec<(usize, R)>);
/// `(line, memory, entries)` for strategy action rows.
type ActRow<R> = (usize, usize, Vec<(usize, R)>);
/// `(line, memory, observation, action, entries)` for update rows.
type UpdateRow<R> = (usize, usize, usize, usize, Vec<(usize, R)>);

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_prob<R: Real>(line: usize, tok: &str) -> Result<R> {
    tok.parse::<f64>()
        .map(R::of)
        .map_err(|_| perr(line, format!("bad number `{}`", tok)))
}

struct NameTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NameTable {
    fn declare(line: usize, kind: &str, toks: &[&str]) -> Result<NameTable> {
        if toks.is_empty() {
            return Err(perr(line, format!("empty {} list", kind)));
        }
        let mut names = Vec::new();
        let mut index = HashMap::new();
        for &t in toks {
            if index.insert(t.to_string(), names.len()).is_some() {
                return Err(perr(line, format!("duplicate {} `{}`", kind, t)));
            }
            names.push(t.to_string());
        }
        Ok(NameTable { names, index })
    }

    fn resolve(&self, line: usize, kind: &str, tok: &str) -> Result<usize> {
        self.index
            .get(tok)
            .copied()
            .ok_or_else(|| perr(line, format!("unknown {} `{}`", kind, tok)))
    }
}

/// Parses a model document (header `pomdp` or `pfa`).
pub fn parse_model<R: Real>(text: &str) -> Result<ParsedModel<R>> {
    let mut kind: Option<(bool, String)> = None; // (is_pomdp, name)
    let mut states: Option<NameTable> = None;
    let mut actions: Option<NameTable> = None;
    let mut observations: Option<NameTable> = None;
    let mut sees: Vec<(usize, usize, usize)> = Vec::new(); // line, state, obs
    let mut init: Option<(usize, usize)> = None;
    let mut finals: Option<(usize, Vec<usize>)> = None;
    let mut trans: Vec<TransRow<R>> = Vec::new();
    let mut rewards: Vec<(usize, usize, usize, R)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let head = toks[0];

        if kind.is_none() {
            match head {
                "pomdp" | "pfa" => {
                    if toks.len() != 2 {
                        return Err(perr(ln, format!("expected `{} <name>`", head)));
                    }
                    kind = Some((head == "pomdp", toks[1].to_string()));
                    continue;
                }
                _ => return Err(perr(ln, "expected header `pomdp <name>` or `pfa <name>`")),
            }
        }
        let is_pomdp = kind.as_ref().unwrap().0;

        match head {
            "pomdp" | "pfa" => return Err(perr(ln, "duplicate header")),
            "states:" => {
                if states.is_some() {
                    return Err(perr(ln, "duplicate states declaration"));
                }
                states = Some(NameTable::declare(ln, "state", &toks[1..])?);
            }
            "actions:" => {
                if actions.is_some() {
                    return Err(perr(ln, "duplicate actions declaration"));
                }
                actions = Some(NameTable::declare(ln, "action", &toks[1..])?);
            }
            "obs:" => {
                if !is_pomdp {
                    return Err(perr(ln, "`obs:` is not allowed in a pfa"));
                }
                if observations.is_some() {
                    return Err(perr(ln, "duplicate obs declaration"));
                }
                observations = Some(NameTable::declare(ln, "observation", &toks[1..])?);
            }
            "see" => {
                if !is_pomdp {
                    return Err(perr(ln, "`see` is not allowed in a pfa"));
                }
                // see s = o
                if toks.len() != 4 || toks[2] != "=" {
                    return Err(perr(ln, "expected `see <state> = <observation>`"));
                }
                let st = states
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`see` before `states:`"))?
                    .resolve(ln, "state", toks[1])?;
                let ob = observations
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`see` before `obs:`"))?
                    .resolve(ln, "observation", toks[3])?;
                if sees.iter().any(|&(_, s, _)| s == st) {
                    return Err(perr(ln, format!("duplicate `see` for state `{}`", toks[1])));
                }
                sees.push((ln, st, ob));
            }
            "init" => {
                if toks.len() != 2 {
                    return Err(perr(ln, "expected `init <state>`"));
                }
                if init.is_some() {
                    return Err(perr(ln, "duplicate init declaration"));
                }
                let st = states
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`init` before `states:`"))?
                    .resolve(ln, "state", toks[1])?;
                init = Some((ln, st));
            }
            "final:" => {
                if is_pomdp {
                    return Err(perr(ln, "`final:` is only allowed in a pfa"));
                }
                if finals.is_some() {
                    return Err(perr(ln, "duplicate final declaration"));
                }
                let tbl = states
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`final:` before `states:`"))?;
                let mut fs = Vec::new();
                for &t in &toks[1..] {
                    fs.push(tbl.resolve(ln, "state", t)?);
                }
                finals = Some((ln, fs));
            }
            "trans" => {
                // trans s a -> t:p ...
                if toks.len() < 5 || toks[3] != "->" {
                    return Err(perr(ln, "expected `trans <state> <action> -> <state>:<p> ...`"));
                }
                let st = states
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`trans` before `states:`"))?;
                let ac = actions
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`trans` before `actions:`"))?;
                let s = st.resolve(ln, "state", toks[1])?;
                let a = ac.resolve(ln, "action", toks[2])?;
                if trans.iter().any(|&(_, s2, a2, _)| s2 == s && a2 == a) {
                    return Err(perr(
                        ln,
                        format!("duplicate transition row for `{} {}`", toks[1], toks[2]),
                    ));
                }
                let mut entries: Vec<(usize, R)> = Vec::new();
                for &t in &toks[4..] {
                    let (tgt, p) = t
                        .split_once(':')
                        .ok_or_else(|| perr(ln, format!("expected `<state>:<p>`, got `{}`", t)))?;
                    let tgt = st.resolve(ln, "state", tgt)?;
                    let p = parse_prob::<R>(ln, p)?;
                    entries.push((tgt, p));
                }
                let sum: R = entries.iter().map(|&(_, p)| p).fold(R::zero(), |a, b| a + b);
                if (sum - R::one()).abs() > R::sum_tolerance() {
                    return Err(perr(
                        ln,
                        format!("transition row sums to {} (expected 1)", sum),
                    ));
                }
                trans.push((ln, s, a, entries));
            }
            "reward" => {
                if !is_pomdp {
                    return Err(perr(ln, "`reward` is not allowed in a pfa"));
                }
                // reward s a = x
                if toks.len() != 5 || toks[3] != "=" {
                    return Err(perr(ln, "expected `reward <state> <action> = <x>`"));
                }
                let s = states
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`reward` before `states:`"))?
                    .resolve(ln, "state", toks[1])?;
                let a = actions
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`reward` before `actions:`"))?
                    .resolve(ln, "action", toks[2])?;
                if rewards.iter().any(|&(_, s2, a2, _)| s2 == s && a2 == a) {
                    return Err(perr(
                        ln,
                        format!("duplicate reward for `{} {}`", toks[1], toks[2]),
                    ));
                }
                let x = parse_prob::<R>(ln, toks[4])?;
                rewards.push((ln, s, a, x));
            }
            _ => return Err(perr(ln, format!("unknown directive `{}`", head))),
        }
    }

    let (is_pomdp, name) = kind.ok_or_else(|| perr(0, "empty document"))?;
    let states = states.ok_or_else(|| perr(0, "missing `states:`"))?;
    let actions = actions.ok_or_else(|| perr(0, "missing `actions:`"))?;
    let (_, initial) = init.ok_or_else(|| perr(0, "missing `init`"))?;
    let ns = states.names.len();
    let na = actions.names.len();
    if ns > crate::bits::MASK_CAPACITY || na > crate::bits::MASK_CAPACITY {
        return Err(Error::Capacity(format!(
            "at most {} states and actions supported",
            crate::bits::MASK_CAPACITY
        )));
    }

    if is_pomdp {
        let (obs_names, obs_of) = match observations {
            None => {
                if let Some(&(ln, _, _)) = sees.first() {
                    return Err(perr(ln, "`see` without `obs:` section"));
                }
                (states.names.clone(), (0..ns).collect::<Vec<_>>())
            }
            Some(tbl) => {
                let mut obs_of = vec![usize::MAX; ns];
                for &(_, s, o) in &sees {
                    obs_of[s] = o;
                }
                if let Some(s) = obs_of.iter().position(|&o| o == usize::MAX) {
                    return Err(perr(
                        0,
                        format!("state `{}` has no `see` line", states.names[s]),
                    ));
                }
                (tbl.names, obs_of)
            }
        };
        if let Some((ln, _)) = finals {
            return Err(perr(ln, "`final:` is only allowed in a pfa"));
        }
        let mut transition: Vec<Vec<Option<Distribution<R>>>> = vec![vec![None; na]; ns];
        for (ln, s, a, entries) in trans {
            let dist = Distribution::new(entries)
                .map_err(|e| perr(ln, format!("bad transition row: {}", e)))?;
            transition[s][a] = Some(dist);
        }
        let mut rows = Vec::with_capacity(ns);
        for (s, row) in transition.into_iter().enumerate() {
            let mut out = Vec::with_capacity(na);
            for (a, d) in row.into_iter().enumerate() {
                out.push(d.ok_or_else(|| {
                    Error::input(format!(
                        "missing transition row for `{} {}`",
                        states.names[s], actions.names[a]
                    ))
                })?);
            }
            rows.push(out);
        }
        let mut reward = vec![vec![R::zero(); na]; ns];
        for (ln, s, a, x) in rewards {
            if x < R::zero() || x > R::one() {
                return Err(perr(ln, format!("reward {} outside [0, 1]", x)));
            }
            reward[s][a] = x;
        }
        let model = Pomdp {
            name,
            states: states.names,
            actions: actions.names,
            observations: obs_names,
            obs_of,
            transition: rows,
            reward,
            initial,
        };
        let violations = crate::model::validate_pomdp(&model);
        if let Some(v) = violations.first() {
            return Err(Error::input(format!("invalid model: {}", v)));
        }
        Ok(ParsedModel::Pomdp(model))
    } else {
        let mut transition: Vec<Vec<Option<Distribution<R>>>> = vec![vec![None; na]; ns];
        for (ln, s, a, entries) in trans {
            let dist = Distribution::new(entries)
                .map_err(|e| perr(ln, format!("bad transition row: {}", e)))?;
            transition[s][a] = Some(dist);
        }
        let finals = finals
            .map(|(_, fs)| fs.into_iter().collect::<Mask64>())
            .unwrap_or(Mask64::EMPTY);
        Ok(ParsedModel::Pfa(Pfa {
            name,
            states: states.names,
            letters: actions.names,
            transition,
            initial,
            finals,
        }))
    }
}

/// Parses a document that must be a POMDP.
pub fn parse_pomdp<R: Real>(text: &str) -> Result<Pomdp<R>> {
    match parse_model(text)? {
        ParsedModel::Pomdp(m) => Ok(m),
        ParsedModel::Pfa(_) => Err(Error::input("expected a pomdp document, found a pfa")),
    }
}

/// Parses a document that must be a PFA.
pub fn parse_pfa<R: Real>(text: &str) -> Result<Pfa<R>> {
    match parse_model(text)? {
        ParsedModel::Pfa(p) => Ok(p),
        ParsedModel::Pomdp(_) => Err(Error::input("expected a pfa document, found a pomdp")),
    }
}

/// Formats a probability/reward with 12 significant digits and no
/// trailing zeros.
fn fmt_num<R: Real>(v: R) -> String {
    let x = v.as_f64();
    if x == 0.0 {
        return "0".into();
    }
    let decimals = {
        let mag = x.abs().log10().floor() as i32;
        (11 - mag).max(0) as usize
    };
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_dist<R: Real>(names: &[String], dist: &Distribution<R>) -> String {
    dist.entries()
        .iter()
        .map(|&(t, p)| format!("{}:{}", names[t], fmt_num(p)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes a POMDP; `parse_model` inverts this up to sub-tolerance
/// rounding of probabilities.
pub fn serialize_pomdp<R: Real>(model: &Pomdp<R>) -> String {
    let mut out = String::new();
    out.push_str(&format!("pomdp {}\n", model.name));
    out.push_str(&format!("states: {}\n", model.states.join(" ")));
    out.push_str(&format!("actions: {}\n", model.actions.join(" ")));
    out.push_str(&format!("obs: {}\n", model.observations.join(" ")));
    for (s, &o) in model.obs_of.iter().enumerate() {
        out.push_str(&format!("see {} = {}\n", model.states[s], model.observations[o]));
    }
    out.push_str(&format!("init {}\n", model.states[model.initial]));
    for (s, row) in model.transition.iter().enumerate() {
        for (a, dist) in row.iter().enumerate() {
            out.push_str(&format!(
                "trans {} {} -> {}\n",
                model.states[s],
                model.actions[a],
                fmt_dist(&model.states, dist)
            ));
        }
    }
    for (s, row) in model.reward.iter().enumerate() {
        for (a, &x) in row.iter().enumerate() {
            if x != R::zero() {
                out.push_str(&format!(
                    "reward {} {} = {}\n",
                    model.states[s],
                    model.actions[a],
                    fmt_num(x)
                ));
            }
        }
    }
    out
}

/// Serializes a PFA; `parse_model` inverts this.
pub fn serialize_pfa<R: Real>(pfa: &Pfa<R>) -> String {
    let mut out = String::new();
    out.push_str(&format!("pfa {}\n", pfa.name));
    out.push_str(&format!("states: {}\n", pfa.states.join(" ")));
    out.push_str(&format!("actions: {}\n", pfa.letters.join(" ")));
    out.push_str(&format!("init {}\n", pfa.states[pfa.initial]));
    if !pfa.finals.is_empty() {
        let fs: Vec<&str> = pfa.finals.iter().map(|s| pfa.states[s].as_str()).collect();
        out.push_str(&format!("final: {}\n", fs.join(" ")));
    }
    for (s, row) in pfa.transition.iter().enumerate() {
        for (x, dist) in row.iter().enumerate() {
            if let Some(dist) = dist {
                out.push_str(&format!(
                    "trans {} {} -> {}\n",
                    pfa.states[s],
                    pfa.letters[x],
                    fmt_dist(&pfa.states, dist)
                ));
            }
        }
    }
    out
}

/// Parses a strategy document against a model (for action/observation
/// names). Missing `update` rows default to keeping the current memory.
pub fn parse_strategy<R: Real>(text: &str, model: &Pomdp<R>) -> Result<FiniteStrategy<R>> {
    let na = model.action_count();
    let no = model.observation_count();
    let mut name: Option<String> = None;
    let mut memory: Option<NameTable> = None;
    let mut init: Option<usize> = None;
    let mut acts: Vec<ActRow<R>> = Vec::new();
    let mut updates: Vec<UpdateRow<R>> = Vec::new();

    let resolve_action = |ln: usize, tok: &str| -> Result<usize> {
        model
            .action_index(tok)
            .map_err(|_| perr(ln, format!("unknown action `{}`", tok)))
    };

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "strategy" => {
                if toks.len() != 2 || name.is_some() {
                    return Err(perr(ln, "expected a single `strategy <name>` header"));
                }
                name = Some(toks[1].to_string());
            }
            "memory:" => {
                if memory.is_some() {
                    return Err(perr(ln, "duplicate memory declaration"));
                }
                memory = Some(NameTable::declare(ln, "memory element", &toks[1..])?);
            }
            "init" => {
                if toks.len() != 2 || init.is_some() {
                    return Err(perr(ln, "expected a single `init <memory>`"));
                }
                let tbl = memory
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`init` before `memory:`"))?;
                init = Some(tbl.resolve(ln, "memory element", toks[1])?);
            }
            "act" => {
                // act m -> a:p ...
                if toks.len() < 4 || toks[2] != "->" {
                    return Err(perr(ln, "expected `act <memory> -> <action>:<p> ...`"));
                }
                let tbl = memory
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`act` before `memory:`"))?;
                let m = tbl.resolve(ln, "memory element", toks[1])?;
                if acts.iter().any(|&(_, m2, _)| m2 == m) {
                    return Err(perr(ln, format!("duplicate `act` for `{}`", toks[1])));
                }
                let mut entries = Vec::new();
                for &t in &toks[3..] {
                    let (atok, p) = t
                        .split_once(':')
                        .ok_or_else(|| perr(ln, format!("expected `<action>:<p>`, got `{}`", t)))?;
                    entries.push((resolve_action(ln, atok)?, parse_prob::<R>(ln, p)?));
                }
                acts.push((ln, m, entries));
            }
            "update" => {
                // update m o a -> m':p ...
                if toks.len() < 6 || toks[4] != "->" {
                    return Err(perr(
                        ln,
                        "expected `update <memory> <obs> <action> -> <memory>:<p> ...`",
                    ));
                }
                let tbl = memory
                    .as_ref()
                    .ok_or_else(|| perr(ln, "`update` before `memory:`"))?;
                let m = tbl.resolve(ln, "memory element", toks[1])?;
                let o = model
                    .observation_index(toks[2])
                    .map_err(|_| perr(ln, format!("unknown observation `{}`", toks[2])))?;
                let a = resolve_action(ln, toks[3])?;
                if updates.iter().any(|&(_, m2, o2, a2, _)| (m2, o2, a2) == (m, o, a)) {
                    return Err(perr(
                        ln,
                        format!("duplicate `update` for `{} {} {}`", toks[1], toks[2], toks[3]),
                    ));
                }
                let mut entries = Vec::new();
                for &t in &toks[5..] {
                    let (mtok, p) = t
                        .split_once(':')
                        .ok_or_else(|| perr(ln, format!("expected `<memory>:<p>`, got `{}`", t)))?;
                    entries.push((
                        tbl.resolve(ln, "memory element", mtok)?,
                        parse_prob::<R>(ln, p)?,
                    ));
                }
                updates.push((ln, m, o, a, entries));
            }
            other => return Err(perr(ln, format!("unknown directive `{}`", other))),
        }
    }

    let name = name.ok_or_else(|| perr(0, "missing `strategy` header"))?;
    let memory = memory.ok_or_else(|| perr(0, "missing `memory:`"))?;
    let initial_memory = init.ok_or_else(|| perr(0, "missing `init`"))?;
    let nm = memory.names.len();

    let mut next_action: Vec<Option<Distribution<R>>> = vec![None; nm];
    for (ln, m, entries) in acts {
        next_action[m] = Some(
            Distribution::new(entries).map_err(|e| perr(ln, format!("bad act row: {}", e)))?,
        );
    }
    let mut next_action_out = Vec::with_capacity(nm);
    for (m, d) in next_action.into_iter().enumerate() {
        next_action_out.push(d.ok_or_else(|| {
            Error::input(format!("missing `act` row for memory `{}`", memory.names[m]))
        })?);
    }

    let mut update: Vec<Vec<Vec<Distribution<R>>>> = (0..nm)
        .map(|m| vec![vec![Distribution::dirac(m); na]; no])
        .collect();
    for (ln, m, o, a, entries) in updates {
        update[m][o][a] = Distribution::new(entries)
            .map_err(|e| perr(ln, format!("bad update row: {}", e)))?;
    }

    let sigma = FiniteStrategy {
        name,
        memory: memory.names,
        initial_memory,
        next_action: next_action_out,
        update,
    };
    let violations = crate::model::validate_strategy(model, &sigma);
    if let Some(v) = violations.first() {
        return Err(Error::input(format!("invalid strategy: {}", v)));
    }
    Ok(sigma)
}

/// Serializes a strategy. Self-keeping update rows (Dirac on the same
/// memory element) are omitted; `parse_strategy` restores them.
pub fn serialize_strategy<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> String {
    let mut out = String::new();
    out.push_str(&format!("strategy {}\n", sigma.name));
    out.push_str(&format!("memory: {}\n", sigma.memory.join(" ")));
    out.push_str(&format!("init {}\n", sigma.memory[sigma.initial_memory]));
    for (m, dist) in sigma.next_action.iter().enumerate() {
        out.push_str(&format!(
            "act {} -> {}\n",
            sigma.memory[m],
            fmt_dist(&model.actions, dist)
        ));
    }
    for (m, per_obs) in sigma.update.iter().enumerate() {
        for (o, per_act) in per_obs.iter().enumerate() {
            for (a, dist) in per_act.iter().enumerate() {
                if dist.entries() == [(m, R::one())] {
                    continue;
                }
                out.push_str(&format!(
                    "update {} {} {} -> {}\n",
                    sigma.memory[m],
                    model.observations[o],
                    model.actions[a],
                    fmt_dist(&sigma.memory, dist)
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "pomdp one\nstates: s\nactions: a\ninit s\ntrans s a -> s:1\nreward s a = 1\n";

    #[test]
    fn minimal_round_trip() {
        let m: Pomdp<f64> = parse_pomdp(MINIMAL).unwrap();
        assert_eq!(m.state_count(), 1);
        assert_eq!(m.reward[0][0], 1.0);
        assert_eq!(m.observations, vec!["s".to_string()]);
        let text = serialize_pomdp(&m);
        let m2: Pomdp<f64> = parse_pomdp(&text).unwrap();
        assert_eq!(m2.states, m.states);
        assert_eq!(m2.transition[0][0].entries(), m.transition[0][0].entries());
    }

    #[test]
    fn bad_sum_names_line() {
        let text = "pomdp x\nstates: s t u\nactions: a\ninit s\ntrans s a -> t:0.5 u:0.4\n";
        let err = parse_pomdp::<f64>(text).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("0.9"), "message was: {}", message);
            }
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn unknown_identifier_names_line() {
        let text = "pomdp x\nstates: s\nactions: a\ninit s\ntrans s b -> s:1\n";
        let err = parse_pomdp::<f64>(text).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("unknown action"));
            }
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn duplicate_declaration_rejected() {
        let text = "pomdp x\nstates: s\nstates: t\nactions: a\ninit s\ntrans s a -> s:1\n";
        assert!(matches!(
            parse_pomdp::<f64>(text).unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
    }

    #[test]
    fn hash_action_survives_round_trip() {
        let pfa = crate::reductions::Pfa::<f64> {
            name: "p".into(),
            states: vec!["q".into()],
            letters: vec!["a".into()],
            transition: vec![vec![Some(Distribution::dirac(0))]],
            initial: 0,
            finals: Mask64::singleton(0),
        };
        let model = crate::reductions::reduce_value1(&pfa);
        let text = serialize_pomdp(&model);
        let m2: Pomdp<f64> = parse_pomdp(&text).unwrap();
        assert_eq!(m2.actions, vec!["a", "$", "#"]);
        assert_eq!(m2.state_count(), model.state_count());
    }

    #[test]
    fn pfa_round_trip() {
        let pfa = crate::reductions::tests::three_quarters_pfa();
        let text = serialize_pfa(&pfa);
        let p2: Pfa<f64> = parse_pfa(&text).unwrap();
        assert_eq!(p2.states, pfa.states);
        assert_eq!(p2.finals, pfa.finals);
        let d = p2.transition[0][0].as_ref().unwrap();
        assert!((d.prob(1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn strategy_round_trip() {
        let m: Pomdp<f64> = parse_pomdp(MINIMAL).unwrap();
        let sigma = crate::model::FiniteStrategy::uniform_memoryless(&m);
        let text = serialize_strategy(&m, &sigma);
        let s2 = parse_strategy(&text, &m).unwrap();
        assert_eq!(s2.memory, sigma.memory);
        assert_eq!(s2.initial_memory, sigma.initial_memory);
        assert_eq!(s2.next_action[0].entries(), sigma.next_action[0].entries());
        assert_eq!(s2.update[0][0][0].entries(), sigma.update[0][0][0].entries());
    }

    #[test]
    fn fmt_num_significant_digits() {
        assert_eq!(fmt_num(0.5_f64), "0.5");
        assert_eq!(fmt_num(1.0_f64), "1");
        assert_eq!(fmt_num(0.0_f64), "0");
        let third = fmt_num(1.0_f64 / 3.0);
        assert!(third.starts_with("0.333333333333"), "{}", third);
        let parsed: f64 = third.parse().unwrap();
        assert!((parsed - 1.0 / 3.0).abs() < 1e-12);
    }
}
