//! Model file format.
//!
//! A model is one JSON object:
//!
//! ```text
//! {"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]]}
//! ```
//!
//! with optional `name` and `description` strings. Matrices are row-major
//! nested arrays. Serialization is canonical: fixed key order, shortest
//! round-trip decimals, compact separators and a trailing newline.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Map, Value};

use super::{BackwardModel, ForwardModel, TimeDomain, REVERSE_TIME};
use crate::error::{Error, Result};

const FORWARD_REQUIRED: [&str; 5] = ["time_domain", "A", "B", "C", "D"];
const FORWARD_OPTIONAL: [&str; 2] = ["name", "description"];
const BACKWARD_REQUIRED: [&str; 6] = ["time_domain", "direction", "Abar", "Bbar", "Cbar", "Dbar"];

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct ForwardDoc<'a> {
    time_domain: TimeDomain,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<&'a str>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub(crate) struct BackwardDoc {
    time_domain: TimeDomain,
    direction: &'static str,
    #[serde(rename = "Abar")]
    abar: Vec<Vec<f64>>,
    #[serde(rename = "Bbar")]
    bbar: Vec<Vec<f64>>,
    #[serde(rename = "Cbar")]
    cbar: Vec<Vec<f64>>,
    #[serde(rename = "Dbar")]
    dbar: Vec<Vec<f64>>,
}

pub fn serialize_model(model: &ForwardModel) -> String {
    let doc = ForwardDoc {
        time_domain: model.time_domain,
        name: model.name.as_deref(),
        description: model.description.as_deref(),
        a: matrix_rows(&model.a),
        b: matrix_rows(&model.b),
        c: matrix_rows(&model.c),
        d: matrix_rows(&model.d),
    };
    let mut out = serde_json::to_string(&doc).expect("model document serializes");
    out.push('\n');
    out
}

pub fn serialize_backward_model(model: &BackwardModel) -> String {
    let mut out = serde_json::to_string(&backward_doc(model)).expect("model document serializes");
    out.push('\n');
    out
}

pub(crate) fn backward_doc(model: &BackwardModel) -> BackwardDoc {
    BackwardDoc {
        time_domain: model.time_domain,
        direction: REVERSE_TIME,
        abar: matrix_rows(&model.abar),
        bbar: matrix_rows(&model.bbar),
        cbar: matrix_rows(&model.cbar),
        dbar: matrix_rows(&model.dbar),
    }
}

pub fn parse_model(text: &[u8]) -> Result<ForwardModel> {
    let obj = parse_object(text)?;
    check_keys(&obj, &FORWARD_REQUIRED, &FORWARD_OPTIONAL)?;
    Ok(ForwardModel {
        time_domain: time_domain(&obj["time_domain"])?,
        a: matrix(&obj["A"], "A")?,
        b: matrix(&obj["B"], "B")?,
        c: matrix(&obj["C"], "C")?,
        d: matrix(&obj["D"], "D")?,
        name: opt_string(&obj, "name")?,
        description: opt_string(&obj, "description")?,
    })
}

pub fn parse_backward_model(text: &[u8]) -> Result<BackwardModel> {
    let obj = parse_object(text)?;
    check_keys(&obj, &BACKWARD_REQUIRED, &[])?;
    match obj["direction"].as_str() {
        Some(REVERSE_TIME) => {}
        _ => {
            return Err(Error::Schema(format!(
                "direction: expected \"{REVERSE_TIME}\", got {}",
                obj["direction"]
            )))
        }
    }
    Ok(BackwardModel {
        time_domain: time_domain(&obj["time_domain"])?,
        abar: matrix(&obj["Abar"], "Abar")?,
        bbar: matrix(&obj["Bbar"], "Bbar")?,
        cbar: matrix(&obj["Cbar"], "Cbar")?,
        dbar: matrix(&obj["Dbar"], "Dbar")?,
    })
}

fn parse_object(text: &[u8]) -> Result<Map<String, Value>> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let (line, column) = position(text, e.valid_up_to());
        Error::Parse {
            line,
            column,
            message: "invalid UTF-8".into(),
        }
    })?;
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    match value {
        Value::Object(map) => Ok(map),
        other => Err(Error::Schema(format!(
            "top level must be an object, got {}",
            kind(&other)
        ))),
    }
}

fn position(bytes: &[u8], offset: usize) -> (usize, usize) {
    let before = &bytes[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = offset
        - before
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |i| i + 1)
        + 1;
    (line, column)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn check_keys(obj: &Map<String, Value>, required: &[&str], optional: &[&str]) -> Result<()> {
    if let Some(missing) = required.iter().find(|k| !obj.contains_key(**k)) {
        return Err(Error::Schema(format!("missing key \"{missing}\"")));
    }
    if let Some(extra) = obj
        .keys()
        .find(|k| !required.contains(&k.as_str()) && !optional.contains(&k.as_str()))
    {
        return Err(Error::Schema(format!("unexpected key \"{extra}\"")));
    }
    Ok(())
}

fn time_domain(v: &Value) -> Result<TimeDomain> {
    match v.as_str() {
        Some("discrete") => Ok(TimeDomain::Discrete),
        Some("continuous") => Ok(TimeDomain::Continuous),
        _ => Err(Error::Schema(format!(
            "time_domain: expected one of \"discrete\", \"continuous\", got {v}"
        ))),
    }
}

fn opt_string(obj: &Map<String, Value>, key: &str) -> Result<Option<String>> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(Error::Schema(format!(
            "{key}: expected a string, got {}",
            kind(other)
        ))),
    }
}

fn matrix(v: &Value, key: &str) -> Result<DMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Schema(format!("{key}: expected an array of rows")))?;
    if rows.is_empty() {
        return Err(Error::Schema(format!("{key}: matrix has no rows")));
    }
    let mut data = Vec::new();
    let mut cols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Schema(format!("{key}: row {i} is not an array")))?;
        if row.is_empty() {
            return Err(Error::Schema(format!("{key}: row {i} is empty")));
        }
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Schema(format!(
                    "{key}: row {i} has {} entries, expected {c}",
                    row.len()
                )))
            }
            _ => {}
        }
        for (j, x) in row.iter().enumerate() {
            let x = x
                .as_f64()
                .ok_or_else(|| Error::Schema(format!("{key}: entry ({i}, {j}) is not a number")))?;
            data.push(x);
        }
    }
    Ok(DMatrix::from_row_slice(
        rows.len(),
        cols.unwrap_or(0),
        &data,
    ))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str =
        r#"{"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]]}"#;

    #[test]
    fn parses_minimal_document() {
        let m = parse_model(MINIMAL.as_bytes()).unwrap();
        assert_eq!(m.time_domain, TimeDomain::Discrete);
        assert_eq!((m.states(), m.inputs(), m.outputs()), (1, 1, 1));
        assert_eq!(m.a[(0, 0)], 0.5);
    }

    #[test]
    fn minimal_document_is_canonical() {
        let m = parse_model(MINIMAL.as_bytes()).unwrap();
        assert_eq!(serialize_model(&m), format!("{MINIMAL}\n"));
    }

    #[test]
    fn missing_key_is_named() {
        let text = r#"{"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"D":[[0.0]]}"#;
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::Schema(msg) => assert!(msg.contains("\"C\""), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_time_domain() {
        let text = MINIMAL.replace("discrete", "weekly");
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::Schema(msg) => assert!(msg.starts_with("time_domain"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn extra_key_rejected() {
        let text = MINIMAL.replace("\"A\"", "\"E\":1,\"A\"");
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::Schema(msg) => assert!(msg.contains("\"E\""), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_line() {
        let text = "{\n\"time_domain\": \"discrete\",\n\"A\": [[0.5]\n}";
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ragged_matrix_rejected() {
        let text = MINIMAL.replace("\"A\":[[0.5]]", "\"A\":[[0.5],[1.0,2.0]]");
        assert!(matches!(
            parse_model(text.as_bytes()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn optional_strings_round_trip() {
        let mut m = parse_model(MINIMAL.as_bytes()).unwrap();
        m.name = Some("scalar".into());
        m.description = Some("first-order lag".into());
        let text = serialize_model(&m);
        assert!(text.starts_with(r#"{"time_domain":"discrete","name":"scalar","description""#));
        assert_eq!(parse_model(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn backward_model_carries_direction() {
        let b = BackwardModel {
            time_domain: TimeDomain::Continuous,
            abar: DMatrix::from_element(1, 1, -1.0),
            bbar: DMatrix::from_element(1, 1, 2f64.sqrt()),
            cbar: DMatrix::from_element(1, 1, 1.0),
            dbar: DMatrix::from_element(1, 1, 0.0),
        };
        let text = serialize_backward_model(&b);
        assert!(text.contains(r#""direction":"reverse-time""#));
        assert_eq!(parse_backward_model(text.as_bytes()).unwrap(), b);
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(
            prop_oneof![prop::num::f64::NORMAL, prop::num::f64::SUBNORMAL, Just(0.0)],
            rows * cols,
        )
        .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
    }

    fn arb_model() -> impl Strategy<Value = ForwardModel> {
        (1usize..4, 1usize..3, 1usize..3, any::<bool>()).prop_flat_map(|(n, p, m, disc)| {
            (
                arb_matrix(n, n),
                arb_matrix(n, p),
                arb_matrix(m, n),
                arb_matrix(m, p),
            )
                .prop_map(move |(a, b, c, d)| {
                    let td = if disc {
                        TimeDomain::Discrete
                    } else {
                        TimeDomain::Continuous
                    };
                    ForwardModel::new(td, a, b, c, d)
                })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_identity(model in arb_model()) {
            let text = serialize_model(&model);
            let back = parse_model(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &model);
            prop_assert_eq!(serialize_model(&back), text);
        }
    }
}
