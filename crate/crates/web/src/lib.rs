//! Browser bindings: classify a language, decide pp-definability, and check
//! a Ramsey arrow. Each call returns a JSON string for the page to render.
//! Everything runs on the calling thread; wasm has no threads to spare.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use reducts::classifiers::{cameron_class, equality_csp, temporal_csp, thomas_class};
use reducts::definability::{decide_pp, DefinabilityCaps};
use reducts::ramsey::{arrows, parse_structure, ArrowCaps, ArrowQuery};
use reducts::{Base, Language};

fn caps() -> DefinabilityCaps {
    DefinabilityCaps {
        parallel: false,
        behavior_budget: 1_000_000,
        closure_steps: 20_000,
        ..DefinabilityCaps::default()
    }
}

/// `builtins` is a comma-separated list; `language` (JSON text) wins when non-empty.
fn language(base: &str, builtins: &str, language: &str) -> Result<Language, String> {
    if !language.trim().is_empty() {
        return Language::from_json_str(language).map_err(|e| e.to_string());
    }
    let base: Base = base.parse().map_err(|e: reducts::Error| e.to_string())?;
    let names: Vec<&str> = builtins
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err("no relations given".into());
    }
    Language::from_builtins(names.join("_"), base, &names).map_err(|e| e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, String> {
    serde_json::to_value(v).map_err(|e| e.to_string())
}

/// Every classifier that applies to the language's base.
pub fn classify_json(base: &str, builtins: &str, lang_text: &str) -> Result<String, String> {
    let lang = language(base, builtins, lang_text)?;
    let mut out = json!({ "language": lang.name, "base": lang.base });
    let err = |e: reducts::Error| e.to_string();
    match lang.base {
        Base::QOrder => {
            out["cameron"] = to_json(&cameron_class(&lang).map_err(err)?.verdict)?;
            out["csp"] = to_json(&temporal_csp(&lang, caps()).map_err(err)?)?;
        }
        Base::RandomGraph => {
            out["thomas"] = to_json(&thomas_class(&lang).map_err(err)?.verdict)?;
        }
        _ => {}
    }
    if let Ok(r) = equality_csp(&lang) {
        out["equality_csp"] = to_json(&r.verdict)?;
    }
    Ok(out.to_string())
}

/// Whether `target` (a built-in of the base) is pp-definable in the language.
pub fn define_json(
    base: &str,
    builtins: &str,
    lang_text: &str,
    target: &str,
) -> Result<String, String> {
    let lang = language(base, builtins, lang_text)?;
    let t = lang
        .resolve(target.trim())
        .ok_or_else(|| format!("unknown relation `{target}`"))?;
    let v = decide_pp(&t, &lang, caps()).map_err(|e| e.to_string())?;
    to_json(&v.to_json()).map(|j| j.to_string())
}

/// `S → (H)^P_k` for structures written `chain:N` or `graph:N:a-b,...`.
pub fn ramsey_json(s: &str, h: &str, p: &str, k: usize) -> Result<String, String> {
    let parse = |x: &str| parse_structure(x.trim()).map_err(|e| e.to_string());
    let q = ArrowQuery {
        s: parse(s)?,
        h: parse(h)?,
        p: parse(p)?,
        k,
    };
    let caps = ArrowCaps {
        parallel: false,
        max_copies: 21,
        max_nodes: 20_000_000,
        ..ArrowCaps::default()
    };
    let r = arrows(&q, &caps).map_err(|e| e.to_string())?;
    to_json(&r).map(|j| j.to_string())
}

#[wasm_bindgen]
pub fn classify(base: &str, builtins: &str, language: &str) -> Result<String, JsError> {
    classify_json(base, builtins, language).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn define(base: &str, builtins: &str, language: &str, target: &str) -> Result<String, JsError> {
    define_json(base, builtins, language, target).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ramsey(s: &str, h: &str, p: &str, k: usize) -> Result<String, JsError> {
    ramsey_json(s, h, p, k).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parsed(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn classify_betweenness() {
        let j = parsed(classify_json("q-order", "Betw", ""));
        assert_eq!(j["cameron"], "Betw");
        assert_eq!(j["csp"]["verdict"]["verdict"], "NPc");
        let j = parsed(classify_json("graph", "R3", ""));
        assert_eq!(j["thomas"], "Switch");
    }

    #[test]
    fn language_text_wins() {
        let text = r#"{"name":"L","base":"equality","relations":[{"builtin":"neq"}]}"#;
        let j = parsed(classify_json("q-order", "Betw", text));
        assert_eq!(j["equality_csp"], "P-injective");
    }

    #[test]
    fn define_neq() {
        let j = parsed(define_json("q-order", "Betw", "", "neq"));
        assert_eq!(j["verdict"], "Definable");
    }

    #[test]
    fn ramsey_six() {
        let j = parsed(ramsey_json("chain:6", "chain:3", "chain:2", 2));
        assert_eq!(j["holds"], true);
        assert!(ramsey_json("chain:6", "chain:3", "chain:2", 0).is_err());
        assert!(classify_json("nowhere", "Betw", "").is_err());
    }
}
