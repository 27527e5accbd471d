//! Strategy arguments: short forms, inline JSON, or `@file`.
//!
//! Rainmakers: `iid:P`, `revealed-uniform`, `playback:P1,P2,...`,
//! `gap-chaser`, `counter-forecast`.
//! Forecasters: `best-response`, `constant:D`, or a Markov table given as
//! JSON. A file may hold a spec, a bare policy, or a solver value table
//! whose `forecaster` key is used.

use std::fs;

use calgame::{Error, ForecasterSpec, MarkovPolicy, Prob, RainmakerSpec, Result};
use serde_json::Value;

fn load(arg: &str) -> Result<Option<Value>> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| Error::arg(format!("cannot read {path}: {e}")))?
    } else if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        return Ok(None);
    };
    let v = serde_json::from_str(&text).map_err(|e| Error::arg(format!("strategy JSON: {e}")))?;
    Ok(Some(v))
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('_', "-")
}

fn prob(s: &str) -> Result<Prob> {
    s.trim().parse()
}

pub fn rainmaker(arg: &str) -> Result<RainmakerSpec> {
    if let Some(v) = load(arg)? {
        return serde_json::from_value(v).map_err(|e| Error::arg(format!("rainmaker spec: {e}")));
    }
    let (head, tail) = match arg.split_once(':') {
        Some((h, t)) => (normalize(h), Some(t)),
        None => (normalize(arg), None),
    };
    let spec = match (head.as_str(), tail) {
        ("iid", Some(p)) => RainmakerSpec::Iid { p: prob(p)? },
        ("revealed-uniform" | "uniform", None) => RainmakerSpec::RevealedUniform,
        ("playback", Some(list)) => RainmakerSpec::Playback {
            probs: list.split(',').map(prob).collect::<Result<_>>()?,
        },
        ("gap-chaser", None) => RainmakerSpec::GapChaser,
        ("counter-forecast", None) => RainmakerSpec::CounterForecast,
        _ => {
            return Err(Error::arg(format!(
                "unknown rainmaker '{arg}' (iid:P, revealed-uniform, playback:P1,P2,..., gap-chaser, counter-forecast, JSON or @file)"
            )))
        }
    };
    Ok(spec)
}

pub fn forecaster(arg: &str) -> Result<ForecasterSpec> {
    if let Some(v) = load(arg)? {
        return forecaster_from_json(v);
    }
    let (head, tail) = match arg.split_once(':') {
        Some((h, t)) => (normalize(h), Some(t)),
        None => (normalize(arg), None),
    };
    match (head.as_str(), tail) {
        ("best-response" | "br", None) => Ok(ForecasterSpec::BestResponse),
        ("constant", Some(d)) => Ok(ForecasterSpec::Constant { d: prob(d)? }),
        _ => Err(Error::arg(format!(
            "unknown forecaster '{arg}' (best-response, constant:D, JSON or @file)"
        ))),
    }
}

fn forecaster_from_json(v: Value) -> Result<ForecasterSpec> {
    if v.get("kind").is_some() {
        return serde_json::from_value(v).map_err(|e| Error::arg(format!("forecaster spec: {e}")));
    }
    if let Some(inner) = v.get("forecaster") {
        return forecaster_from_json(inner.clone());
    }
    if v.get("entries").is_some() {
        let policy: MarkovPolicy =
            serde_json::from_value(v).map_err(|e| Error::arg(format!("markov policy: {e}")))?;
        return Ok(ForecasterSpec::MarkovTable(policy));
    }
    Err(Error::arg(
        "forecaster JSON needs a \"kind\", a \"forecaster\" key, or policy \"entries\"",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert!(matches!(rainmaker("iid:0.3").unwrap(), RainmakerSpec::Iid { .. }));
        assert_eq!(rainmaker("revealed_uniform").unwrap(), RainmakerSpec::RevealedUniform);
        match rainmaker("playback:1/2,0.25").unwrap() {
            RainmakerSpec::Playback { probs } => assert_eq!(probs.len(), 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(rainmaker("gap-chaser").unwrap(), RainmakerSpec::GapChaser);
        assert!(rainmaker("iid:1.5").is_err());
        assert!(rainmaker("nonsense").is_err());
        assert_eq!(forecaster("br").unwrap(), ForecasterSpec::BestResponse);
        assert!(matches!(forecaster("constant:1/2").unwrap(), ForecasterSpec::Constant { .. }));
        assert!(forecaster("constant").is_err());
    }

    #[test]
    fn json_forms() {
        let r = rainmaker(r#"{"kind": "iid", "params": {"p": 0.5}}"#).unwrap();
        assert!(matches!(r, RainmakerSpec::Iid { .. }));
        let f = forecaster(r#"{"forecaster": {"kind": "best_response"}}"#).unwrap();
        assert_eq!(f, ForecasterSpec::BestResponse);
        let f = forecaster(r#"{"grid": 1, "entries": []}"#).unwrap();
        assert!(matches!(f, ForecasterSpec::MarkovTable(_)));
        assert!(forecaster("@/nonexistent/file.json").is_err());
    }
}
