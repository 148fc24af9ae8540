//! Plain-text form format:
//!
//! ```text
//! form degree=2 ambient=4
//! 1 2  1.0
//! 3 4  1.0
//! ```
//!
//! Axes are one-based and strictly increasing; the coefficient is the last
//! field. Blank lines and `#` comments are ignored. Coefficients are written
//! in shortest round-trip notation, so parse(write(f)) reproduces every bit.

use super::{AlternatingForm, MultiIndex};
use crate::error::{Error, Result};

pub(super) fn write(form: &AlternatingForm) -> String {
    let mut out = format!("form degree={} ambient={}\n", form.degree, form.ambient);
    for (index, c) in form.terms() {
        let axes: Vec<String> = index.one_based().iter().map(|a| a.to_string()).collect();
        if axes.is_empty() {
            out.push_str(&format!("{c:?}\n"));
        } else {
            out.push_str(&format!("{}  {c:?}\n", axes.join(" ")));
        }
    }
    out
}

fn header_field(token: Option<&str>, key: &str, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| Error::parse(line, format!("header is missing `{key}=`")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=<n>`, found `{token}`")))?;
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("`{value}` is not a dimension")))
}

pub(super) fn parse(input: &str) -> Result<AlternatingForm> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input; expected `form degree=<n> ambient=<m>`"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("form") {
        return Err(Error::parse(hline, "header must start with `form`"));
    }
    let degree = header_field(tokens.next(), "degree", hline)?;
    let ambient = header_field(tokens.next(), "ambient", hline)?;
    if let Some(extra) = tokens.next() {
        return Err(Error::parse(
            hline,
            format!("unexpected header token `{extra}`"),
        ));
    }
    if degree > ambient {
        return Err(Error::parse(
            hline,
            format!("degree {degree} exceeds ambient dimension {ambient}"),
        ));
    }

    let mut form = AlternatingForm::zero(degree, ambient);
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != degree + 1 {
            return Err(Error::parse(
                line,
                format!(
                    "expected {} axes and a coefficient, found {} fields",
                    degree,
                    fields.len()
                ),
            ));
        }
        let (axes_txt, coeff_txt) = fields.split_at(degree);
        let axes = axes_txt
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("`{t}` is not an axis")))
            })
            .collect::<Result<Vec<_>>>()?;
        let index = MultiIndex::from_one_based(&axes, ambient)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let c: f64 = coeff_txt[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("`{}` is not a number", coeff_txt[0])))?;
        if !c.is_finite() {
            return Err(Error::parse(line, "coefficient must be finite"));
        }
        if form.coeffs.contains_key(&index) {
            return Err(Error::parse(line, format!("duplicate multi-index {index}")));
        }
        if c != 0.0 {
            form.coeffs.insert(index, c);
        }
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symplectic_text() {
        let form =
            AlternatingForm::from_terms(2, 4, [(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap();
        let txt = form.to_text();
        assert_eq!(txt, "form degree=2 ambient=4\n1 2  1.0\n3 4  1.0\n");
        assert_eq!(AlternatingForm::from_text(&txt).unwrap(), form);
    }

    #[test]
    fn decimal_inputs_round_trip_bit_exactly() {
        let src =
            "form degree=1 ambient=3\n1  0.1\n2  -1.2345678901234567e-3\n3  12345678901234567\n";
        let form = AlternatingForm::from_text(src).unwrap();
        let again = AlternatingForm::from_text(&form.to_text()).unwrap();
        for ((a, x), (b, y)) in form.terms().zip(again.terms()) {
            assert_eq!(a, b);
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(form.coefficient(&MultiIndex::new(vec![0], 3).unwrap()), 0.1);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("", 1),
            ("forms degree=1 ambient=2", 1),
            ("form degree=1 ambient=2\n\n1 2 3", 3),
            ("form degree=2 ambient=3\n2 1  1.0", 2),
            ("form degree=1 ambient=2\n# c\n1 x", 3),
            ("form degree=1 ambient=2\n1 1\n1 2", 3),
            ("form degree=3 ambient=2", 1),
        ];
        for (src, want) in cases {
            match AlternatingForm::from_text(src) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{src:?}"),
                other => panic!("{src:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn scalar_forms_have_no_axes() {
        let s = AlternatingForm::scalar(-2.5, 3);
        assert_eq!(AlternatingForm::from_text(&s.to_text()).unwrap(), s);
    }

    proptest! {
        #[test]
        fn text_round_trip(coeffs in proptest::collection::vec(any::<f64>().prop_filter("finite", |c| c.is_finite() && *c != 0.0), 10)) {
            // all 2-forms on R^5
            let mut terms = Vec::new();
            let mut k = 0;
            for i in 0..5 {
                for j in (i + 1)..5 {
                    terms.push((vec![i, j], coeffs[k]));
                    k += 1;
                }
            }
            let form = AlternatingForm::from_terms(2, 5, terms).unwrap();
            let back = AlternatingForm::from_text(&form.to_text()).unwrap();
            prop_assert_eq!(form.nnz(), back.nnz());
            for ((a, x), (b, y)) in form.terms().zip(back.terms()) {
                prop_assert_eq!(a, b);
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
