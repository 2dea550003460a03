use serde::{Deserialize, Serialize};

use super::{builtin_in, parse_qf_in, Relation};
use crate::error::{Error, Result};
use crate::typespace::{Base, Constants, TypeJson, TypeSpace};

/// A finite relational language over one base, optionally with constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub name: String,
    pub base: Base,
    pub constants: Constants,
    pub relations: Vec<Relation>,
}

impl Language {
    pub fn new(name: impl Into<String>, base: Base) -> Self {
        Language {
            name: name.into(),
            base,
            constants: Constants::none(),
            relations: Vec::new(),
        }
    }

    pub fn with_constants(mut self, constants: Constants) -> Result<Self> {
        constants.validate(self.base)?;
        if self
            .relations
            .iter()
            .any(|r| !r.constants().is_empty() && *r.constants() != constants)
        {
            return Err(Error::ConstantsMismatch);
        }
        self.constants = constants;
        Ok(self)
    }

    pub fn add(&mut self, r: Relation) -> Result<()> {
        if r.base() != self.base {
            return Err(Error::BaseMismatch {
                expected: self.base,
                found: r.base(),
            });
        }
        if !r.constants().is_empty() && *r.constants() != self.constants {
            return Err(Error::ConstantsMismatch);
        }
        if r.name.is_empty() || r.name == "=" {
            return Err(Error::InvalidArgument("relation needs a name".into()));
        }
        if self.get(&r.name).is_some() {
            return Err(Error::InvalidArgument(format!(
                "relation `{}` defined twice",
                r.name
            )));
        }
        self.relations.push(r);
        Ok(())
    }

    pub fn with(mut self, r: Relation) -> Result<Self> {
        self.add(r)?;
        Ok(self)
    }

    /// A language made of built-in relations over `base`.
    pub fn from_builtins(name: impl Into<String>, base: Base, names: &[&str]) -> Result<Self> {
        let mut lang = Language::new(name, base);
        for n in names {
            lang.add(builtin_in(n, base)?)?;
        }
        Ok(lang)
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Language relation, falling back to the built-ins of the base.
    pub fn resolve(&self, name: &str) -> Option<Relation> {
        self.get(name)
            .cloned()
            .or_else(|| builtin_in(name, self.base).ok())
    }

    pub fn max_arity(&self) -> usize {
        self.relations
            .iter()
            .map(Relation::arity)
            .max()
            .unwrap_or(0)
    }

    pub fn space(&self, arity: usize) -> TypeSpace {
        TypeSpace {
            base: self.base,
            arity,
            constants: self.constants.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: LanguageJson = serde_json::from_str(text)?;
        Language::from_json(&j)
    }

    pub fn from_json(j: &LanguageJson) -> Result<Self> {
        let mut lang = Language::new(j.name.clone(), j.base);
        if let Some(c) = &j.constants {
            lang = lang.with_constants(c.clone())?;
        }
        for entry in &j.relations {
            let r = entry.build(&lang)?;
            lang.add(r)?;
        }
        Ok(lang)
    }

    /// Serializes with explicit type lists, so the output needs no parser.
    pub fn to_json(&self) -> LanguageJson {
        LanguageJson {
            name: self.name.clone(),
            base: self.base,
            constants: (!self.constants.is_empty()).then(|| self.constants.clone()),
            relations: self
                .relations
                .iter()
                .map(|r| RelationEntry {
                    name: Some(r.name.clone()),
                    builtin: None,
                    vars: None,
                    formula: None,
                    arity: Some(r.arity()),
                    types: Some(
                        r.types
                            .iter()
                            .map(|t| TypeJson::from_type(self.base, t))
                            .collect(),
                    ),
                })
                .collect(),
        }
    }
}

/// Wire form of a language.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageJson {
    pub name: String,
    pub base: Base,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub relations: Vec<RelationEntry>,
}

/// One relation of a language file: a built-in, a quantifier-free
/// formula, or an explicit list of types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<TypeJson>>,
}

impl RelationEntry {
    fn build(&self, lang: &Language) -> Result<Relation> {
        match (&self.builtin, &self.formula, &self.types) {
            (Some(b), None, None) => {
                let name = self.name.clone().unwrap_or_else(|| b.clone());
                Ok(builtin_in(b, lang.base)?.renamed(name))
            }
            (None, Some(text), None) => {
                let name = self.name.clone().ok_or_else(|| {
                    Error::InvalidArgument("formula relation without a name".into())
                })?;
                let f = parse_qf_in(text, lang, self.vars.as_deref())?;
                f.normalize(name)
            }
            (None, None, Some(types)) => {
                let name = self.name.clone().ok_or_else(|| {
                    Error::InvalidArgument("type-list relation without a name".into())
                })?;
                let arity = self.arity.ok_or_else(|| {
                    Error::InvalidArgument(format!("relation `{name}` needs an arity"))
                })?;
                let parsed = types
                    .iter()
                    .map(|t| t.to_type(lang.base))
                    .collect::<Result<Vec<_>>>()?;
                // types may include the language constants as trailing points
                let with_constants = !lang.constants.is_empty()
                    && parsed
                        .first()
                        .is_some_and(|t| t.len() == arity + lang.constants.count());
                let space = if with_constants {
                    lang.space(arity)
                } else {
                    TypeSpace::new(lang.base, arity)
                };
                Relation::new(name, space, parsed.into_iter().collect())
            }
            _ => Err(Error::InvalidArgument(
                "relation entry needs exactly one of `builtin`, `formula`, `types`".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::builtin;

    #[test]
    fn load_language_from_json() {
        let text = r#"{
            "name": "mixed",
            "base": "q-order",
            "constants": {"count": 1},
            "relations": [
                {"builtin": "Betw"},
                {"name": "pos", "vars": ["x"], "formula": "0<x"},
                {"name": "B2", "vars": ["x","y","z"], "formula": "Betw(x,y,z) & x<y"},
                {"name": "lt2", "arity": 2, "types": [{"ranks": [0, 1]}]}
            ]
        }"#;
        let lang = Language::from_json_str(text).unwrap();
        assert_eq!(lang.relations.len(), 4);
        assert_eq!(lang.get("Betw").unwrap().len(), 2);
        assert_eq!(lang.get("pos").unwrap().constants().count(), 1);
        assert_eq!(lang.get("B2").unwrap().len(), 1);
        assert_eq!(lang.max_arity(), 3);
        let again = Language::from_json(&lang.to_json()).unwrap();
        assert_eq!(again, lang);
    }

    #[test]
    fn rejects_bad_languages() {
        let mut l = Language::new("g", Base::RandomGraph);
        assert!(matches!(
            l.add(builtin("Betw").unwrap()),
            Err(Error::BaseMismatch { .. })
        ));
        l.add(builtin("E").unwrap()).unwrap();
        assert!(l.add(builtin("E").unwrap()).is_err());
        assert!(Language::from_json_str(
            r#"{"name":"x","base":"q-order","relations":[{"name":"a"}]}"#
        )
        .is_err());
        assert!(Language::from_json_str("{").is_err());
    }
}
