//! Plain-text rendering of linear combinations.

use num_traits::{One, Signed, Zero};

use crate::series::Rational;

/// Renders `sum c_i * name_i`, e.g. `E4^3 - 728*Delta`. An empty name stands
/// for the constant 1. Zero coefficients are skipped; an empty sum is `0`.
pub fn linear_combination<S: AsRef<str>>(terms: &[(Rational, S)]) -> String {
    let mut out = String::new();
    for (c, name) in terms {
        if c.is_zero() {
            continue;
        }
        let name = name.as_ref();
        let body = if name.is_empty() {
            c.abs().to_string()
        } else if c.abs().is_one() {
            name.to_string()
        } else {
            format!("{}*{}", c.abs(), name)
        };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// `base` or `base^e`; exponent 0 gives the empty string.
pub fn power(base: &str, e: u32) -> String {
    match e {
        0 => String::new(),
        1 => base.to_string(),
        _ => format!("{base}^{e}"),
    }
}

/// Joins the non-empty factors with `*`.
pub fn product(factors: &[String]) -> String {
    factors
        .iter()
        .filter(|f| !f.is_empty())
        .cloned()
        .collect::<Vec<_>>()
        .join("*")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{int, rat};

    #[test]
    fn signs_and_units() {
        let t = vec![(int(1), "E4^3"), (int(-728), "Delta")];
        assert_eq!(linear_combination(&t), "E4^3 - 728*Delta");
        let t = vec![(rat(-1, 2), "E6"), (int(3), "")];
        assert_eq!(linear_combination(&t), "-1/2*E6 + 3");
        assert_eq!(linear_combination::<&str>(&[]), "0");
    }

    #[test]
    fn products() {
        assert_eq!(product(&[power("E4", 2), power("E6", 0), power("Delta", 1)]), "E4^2*Delta");
    }
}
