//! Typed accessors over a parsed JSON object, mapping shape problems onto
//! [`ScenarioError`] variants with the offending field name.

use serde_json::{Map, Value};

use super::error::{Result, ScenarioError};

pub(crate) type Object = Map<String, Value>;

pub(crate) fn parse_object(text: &str) -> Result<Object> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ScenarioError::MalformedDocument(e.to_string()))?;
    match value {
        Value::Object(map) => Ok(map),
        other => Err(ScenarioError::MalformedDocument(format!(
            "expected a JSON object, found {}",
            kind_of(&other)
        ))),
    }
}

fn kind_of(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::InvalidValue {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

pub(crate) fn required<'a>(obj: &'a Object, field: &str) -> Result<&'a Value> {
    match obj.get(field) {
        Some(Value::Null) | None => Err(ScenarioError::MissingField(field.to_owned())),
        Some(v) => Ok(v),
    }
}

pub(crate) fn optional<'a>(obj: &'a Object, field: &str) -> Option<&'a Value> {
    obj.get(field).filter(|v| !v.is_null())
}

pub(crate) fn as_f64(field: &str, v: &Value) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| invalid(field, format!("expected a number, found {}", kind_of(v))))?;
    if !x.is_finite() {
        return Err(invalid(field, "must be finite"));
    }
    Ok(x)
}

pub(crate) fn as_u64(field: &str, v: &Value) -> Result<u64> {
    if let Some(n) = v.as_u64() {
        return Ok(n);
    }
    // Accept integral floats such as `2.0`.
    match v.as_f64() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => Ok(x as u64),
        _ => Err(invalid(
            field,
            format!("expected a non-negative integer, found {v}"),
        )),
    }
}

pub(crate) fn as_str<'a>(field: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| invalid(field, format!("expected a string, found {}", kind_of(v))))
}

pub(crate) fn as_bool(field: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| invalid(field, format!("expected a boolean, found {}", kind_of(v))))
}

pub(crate) fn as_array<'a>(field: &str, v: &'a Value) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| invalid(field, format!("expected an array, found {}", kind_of(v))))
}

pub(crate) fn as_object<'a>(field: &str, v: &'a Value) -> Result<&'a Object> {
    v.as_object()
        .ok_or_else(|| invalid(field, format!("expected an object, found {}", kind_of(v))))
}

pub(crate) fn f64_or(obj: &Object, field: &str, default: f64) -> Result<f64> {
    optional(obj, field).map_or(Ok(default), |v| as_f64(field, v))
}

pub(crate) fn required_f64(obj: &Object, field: &str) -> Result<f64> {
    as_f64(field, required(obj, field)?)
}

pub(crate) fn non_negative(field: &str, x: f64) -> Result<f64> {
    if x < 0.0 {
        Err(invalid(field, format!("must be >= 0, got {x}")))
    } else {
        Ok(x)
    }
}

pub(crate) fn positive(field: &str, x: f64) -> Result<f64> {
    if x <= 0.0 {
        Err(invalid(field, format!("must be > 0, got {x}")))
    } else {
        Ok(x)
    }
}

pub(crate) fn invalid_value(field: &str, reason: impl Into<String>) -> ScenarioError {
    invalid(field, reason)
}
