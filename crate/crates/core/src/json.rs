//! JSON encodings shared by the library and the command-line tool.
//!
//! Rationals are `{"n": "<decimal>", "d": "<decimal>"}` with both parts as
//! strings so no consumer loses precision.

use serde_json::{json, Value};

use crate::series::{QSeries, Rational};

pub fn rational(r: &Rational) -> Value {
    json!({ "n": r.numer().to_string(), "d": r.denom().to_string() })
}

pub fn series(s: &QSeries<Rational>) -> Value {
    Value::Array(s.coeffs().iter().map(rational).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn rational_is_string_pair() {
        assert_eq!(rational(&rat(-6, 4)).to_string(), r#"{"d":"2","n":"-3"}"#);
    }
}
