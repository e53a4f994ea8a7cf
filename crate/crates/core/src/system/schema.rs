//! JSON input format for systems and targets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Dynamics, ListedControl, Problem, SystemKind, SystemSpec, TargetSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub label: String,
    pub value: Vec<f64>,
}

/// On-disk form of a [`Problem`]. `sigma` is given row by row (`n` rows of `m`
/// entries); `fields[k]` is the field of `controls[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub kind: SystemKind,
    pub n: usize,
    pub m: usize,
    pub state_vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<Vec<ControlDoc>>,
    pub u: String,
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_list: Option<Vec<String>>,
    pub base_point: Vec<f64>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parse a problem document. A top-level object with a `system` member (as
/// written in `report.json`) is accepted and its member is used.
pub fn parse_problem_json(text: &str, name: &str) -> Result<Problem> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let doc: ProblemDoc = match value.get("system") {
        Some(inner) if value.get("kind").is_none() => serde_json::from_value(inner.clone()).map_err(|e| Error::Json {
            line: 0,
            column: 0,
            message: format!("in `system`: {e}"),
        })?,
        _ => serde_json::from_str(text).map_err(json_error)?,
    };
    doc.to_problem(name)
}

impl ProblemDoc {
    pub fn to_problem(&self, name: &str) -> Result<Problem> {
        let n = self.n;
        if self.state_vars.len() != n {
            return Err(Error::schema(
                "state_vars",
                format!("expected {n} names, got {}", self.state_vars.len()),
            ));
        }
        crate::expr::validate_vars(&self.state_vars).map_err(|e| Error::schema("state_vars", e.to_string()))?;
        let vars: Arc<[String]> = self.state_vars.clone().into();
        let parse = |path: String, text: &str| -> Result<Expr> {
            Expr::parse(text, &vars).map_err(|e| Error::schema(path, e.to_string()))
        };
        let parse_vec = |path: &str, texts: &[String]| -> Result<Vec<Expr>> {
            if texts.len() != n {
                return Err(Error::schema(path, format!("expected {n} components, got {}", texts.len())));
            }
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| parse(format!("{path}[{i}]"), t))
                .collect()
        };
        let forbid = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::schema(field, format!("not allowed for kind {}", self.kind.name())))
            } else {
                Ok(())
            }
        };
        if self.m == 0 {
            return Err(Error::schema("m", "control dimension must be positive"));
        }
        let sigma_cols = |rows: &Option<Vec<Vec<String>>>| -> Result<Vec<Vec<Expr>>> {
            let rows = rows
                .as_ref()
                .ok_or_else(|| Error::schema("sigma", format!("required for kind {}", self.kind.name())))?;
            if rows.len() != n {
                return Err(Error::schema("sigma", format!("expected {n} rows, got {}", rows.len())));
            }
            let mut cols = vec![Vec::with_capacity(n); self.m];
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.m {
                    return Err(Error::schema(
                        format!("sigma[{i}]"),
                        format!("expected {} entries, got {}", self.m, row.len()),
                    ));
                }
                for (j, t) in row.iter().enumerate() {
                    cols[j].push(parse(format!("sigma[{i}][{j}]"), t)?);
                }
            }
            Ok(cols)
        };
        let system = match self.kind {
            SystemKind::Symmetric => {
                forbid("sigma0", self.sigma0.is_some())?;
                forbid("fields", self.fields.is_some())?;
                forbid("controls", self.controls.is_some())?;
                SystemSpec::symmetric(vars.clone(), sigma_cols(&self.sigma)?)?
            }
            SystemKind::Affine => {
                forbid("fields", self.fields.is_some())?;
                forbid("controls", self.controls.is_some())?;
                let drift = self
                    .sigma0
                    .as_ref()
                    .ok_or_else(|| Error::schema("sigma0", "required for kind affine"))?;
                SystemSpec::affine(vars.clone(), parse_vec("sigma0", drift)?, sigma_cols(&self.sigma)?)?
            }
            SystemKind::General => {
                forbid("sigma0", self.sigma0.is_some())?;
                forbid("sigma", self.sigma.is_some())?;
                let fields = self
                    .fields
                    .as_ref()
                    .ok_or_else(|| Error::schema("fields", "required for kind general"))?;
                let controls = self
                    .controls
                    .as_ref()
                    .ok_or_else(|| Error::schema("controls", "required for kind general"))?;
                if fields.len() != controls.len() {
                    return Err(Error::schema(
                        "fields",
                        format!("{} fields for {} controls", fields.len(), controls.len()),
                    ));
                }
                let listed = controls
                    .iter()
                    .zip(fields)
                    .enumerate()
                    .map(|(k, (c, f))| {
                        Ok(ListedControl {
                            label: c.label.clone(),
                            value: c.value.clone(),
                            field: parse_vec(&format!("fields[{k}]"), f)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SystemSpec::general(vars.clone(), self.m, listed)?
            }
        };
        let u = parse("u".into(), &self.u)?;
        let mut target = TargetSpec::new(u, self.level)?;
        if let Some(list) = &self.u_list {
            if list.is_empty() {
                return Err(Error::schema("u_list", "intersection list must be nonempty"));
            }
            target.intersection = list
                .iter()
                .enumerate()
                .map(|(i, t)| parse(format!("u_list[{i}]"), t))
                .collect::<Result<_>>()?;
        }
        if self.base_point.len() != n {
            return Err(Error::schema(
                "base_point",
                format!("expected {n} coordinates, got {}", self.base_point.len()),
            ));
        }
        if self.base_point.iter().any(|v| !v.is_finite()) {
            return Err(Error::schema("base_point", "coordinates must be finite"));
        }
        Ok(Problem {
            name: name.to_string(),
            system,
            target,
            base_point: self.base_point.clone(),
        })
    }

    pub fn from_problem(p: &Problem) -> ProblemDoc {
        let s = &p.system;
        let text = |v: &[Expr]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>();
        let rows = |cols: &[Vec<Expr>]| {
            (0..s.n())
                .map(|i| cols.iter().map(|c| c[i].to_string()).collect())
                .collect::<Vec<Vec<String>>>()
        };
        let (sigma0, sigma, fields, controls) = match s.dynamics() {
            Dynamics::Symmetric { sigma } => (None, Some(rows(sigma)), None, None),
            Dynamics::Affine { drift, sigma } => (Some(text(drift)), Some(rows(sigma)), None, None),
            Dynamics::General { controls } => (
                None,
                None,
                Some(controls.iter().map(|c| text(&c.field)).collect()),
                Some(
                    controls
                        .iter()
                        .map(|c| ControlDoc {
                            label: c.label.clone(),
                            value: c.value.clone(),
                        })
                        .collect(),
                ),
            ),
        };
        ProblemDoc {
            kind: s.kind(),
            n: s.n(),
            m: s.m(),
            state_vars: s.state_vars().to_vec(),
            sigma0,
            sigma,
            fields,
            controls,
            u: p.target.u.to_string(),
            level: p.target.level,
            u_list: if p.target.intersection.is_empty() {
                None
            } else {
                Some(text(&p.target.intersection))
            },
            base_point: p.base_point.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::load_registry;

    const HEIS: &str = r#"{
  "kind": "symmetric", "n": 3, "m": 2,
  "state_vars": ["x", "y", "z"],
  "sigma": [["1", "0"], ["0", "1"], ["y", "-x"]],
  "u": "(x^2+y^2+z^2)/2", "level": 0.5,
  "base_point": [0, 0, 1]
}"#;

    #[test]
    fn parses_symmetric_document() {
        let p = parse_problem_json(HEIS, "heis").unwrap();
        let r = load_registry("ex4").unwrap();
        assert_eq!(p.system, r.system);
        assert_eq!(p.base_point, r.base_point);
        assert_eq!(p.target.level, 0.5);
    }

    #[test]
    fn uppercase_kind_accepted() {
        let text = HEIS.replace("\"symmetric\"", "\"SYMMETRIC\"");
        assert!(parse_problem_json(&text, "h").is_ok());
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_problem_json("{\n  \"kind\": \"symmetric\",\n  \"n\": 3,,\n}", "bad").unwrap_err();
        match err {
            Error::Json { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = HEIS.replace("\"level\"", "\"lvl\": 1, \"level\"");
        assert!(matches!(parse_problem_json(&text, "h"), Err(Error::Json { .. })));
    }

    #[test]
    fn bad_expression_names_its_path() {
        let text = HEIS.replace("\"-x\"", "\"-w\"");
        match parse_problem_json(&text, "h").unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "sigma[2][1]"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn shape_checks() {
        let text = HEIS.replace("[\"y\", \"-x\"]", "[\"y\"]");
        assert!(matches!(parse_problem_json(&text, "h"), Err(Error::Schema { .. })));
        let text = HEIS.replace("[0, 0, 1]", "[0, 1]");
        assert!(matches!(parse_problem_json(&text, "h"), Err(Error::Schema { .. })));
        let text = HEIS.replace("\"symmetric\"", "\"affine\"");
        assert!(matches!(parse_problem_json(&text, "h"), Err(Error::Schema { .. })));
    }

    #[test]
    fn general_document() {
        let text = r#"{"kind": "general", "n": 1, "m": 1, "state_vars": ["x"],
            "fields": [["1"], ["-1"]],
            "controls": [{"label": "right", "value": [1]}, {"label": "left", "value": [-1]}],
            "u": "x", "level": 0, "base_point": [0]}"#;
        let p = parse_problem_json(text, "g").unwrap();
        assert_eq!(p.system.listed_controls().len(), 2);
        let dup = text.replace("\"left\"", "\"right\"");
        assert!(parse_problem_json(&dup, "g").is_err());
    }

    #[test]
    fn echo_round_trips_registry() {
        for name in crate::system::registry_names() {
            let p = load_registry(name).unwrap();
            let doc = ProblemDoc::from_problem(&p);
            let text = serde_json::to_string(&serde_json::json!({ "system": doc, "other": 1 })).unwrap();
            let q = parse_problem_json(&text, name).unwrap();
            assert_eq!(q.system, p.system, "{name}");
            assert_eq!(q.target.u, p.target.u, "{name}");
            assert_eq!(q.base_point, p.base_point);
        }
    }
}
