//! Curve-spec text format.
//!
//! ```text
//! curve affine
//! row 1 0
//! row 0 1
//! offset 0.5 0
//!
//! curve holomorphic
//! component 0 0  0 0  1 0     # z^2: (re, im) pairs, ascending powers
//!
//! curve exp
//!
//! curve composite
//! pre                         # optional, identity if absent
//! row 2 0
//! row 0 2
//! post                        # optional
//! row 1 0
//! row 0 1
//! row 0 0
//! core                        # the rest is a nested spec
//! curve exp
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::{AffineMap, CurveModel};
use crate::error::{Error, Result};

type Line<'a> = (usize, &'a str);

fn numbers(line: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|t| {
            let v: f64 = t
                .parse()
                .map_err(|_| Error::parse(line, format!("`{t}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, "values must be finite"))
            }
        })
        .collect()
}

/// Rows and an optional offset. Returns the map (`None` if no rows were
/// read) and the number of lines consumed.
fn parse_affine(lines: &[Line]) -> Result<(Option<AffineMap>, usize)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut offset: Option<(usize, Vec<f64>)> = None;
    let mut used = 0;
    for &(line, body) in lines {
        let mut fields = body.split_whitespace();
        match fields.next() {
            Some("row") => {
                if offset.is_some() {
                    return Err(Error::parse(line, "`row` after `offset`"));
                }
                let row = numbers(line, &fields.collect::<Vec<_>>())?;
                if row.is_empty() {
                    return Err(Error::parse(line, "empty row"));
                }
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::parse(
                            line,
                            format!("row has {} entries, expected {}", row.len(), first.len()),
                        ));
                    }
                }
                rows.push(row);
            }
            Some("offset") => {
                if offset.is_some() {
                    return Err(Error::parse(line, "duplicate `offset`"));
                }
                offset = Some((line, numbers(line, &fields.collect::<Vec<_>>())?));
            }
            _ => break,
        }
        used += 1;
    }
    if rows.is_empty() {
        return match offset {
            None => Ok((None, used)),
            Some((line, _)) => Err(Error::parse(line, "`offset` needs preceding `row` lines")),
        };
    }
    let (m, n) = (rows.len(), rows[0].len());
    let linear = DMatrix::from_row_iterator(m, n, rows.into_iter().flatten());
    let offset = match offset {
        Some((line, b)) if b.len() != m => {
            return Err(Error::parse(
                line,
                format!("offset has {} entries, the map has {} rows", b.len(), m),
            ))
        }
        Some((_, b)) => DVector::from_vec(b),
        None => DVector::zeros(m),
    };
    Ok((Some(AffineMap::new(linear, offset)?), used))
}

fn parse_lines(lines: &[Line], end_line: usize) -> Result<CurveModel> {
    let (hline, header) = *lines
        .first()
        .ok_or_else(|| Error::parse(end_line, "expected `curve <variant>`"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("curve") {
        return Err(Error::parse(hline, "header must start with `curve`"));
    }
    let variant = tokens
        .next()
        .ok_or_else(|| Error::parse(hline, "missing curve variant"))?;
    if let Some(extra) = tokens.next() {
        return Err(Error::parse(hline, format!("unexpected token `{extra}`")));
    }
    let body = &lines[1..];
    match variant {
        "affine" => {
            let (map, used) = parse_affine(body)?;
            if let Some(&(line, _)) = body.get(used) {
                return Err(Error::parse(line, "expected `row` or `offset`"));
            }
            let map =
                map.ok_or_else(|| Error::parse(hline, "an affine curve needs at least one `row`"))?;
            Ok(CurveModel::Affine(map))
        }
        "holomorphic" => {
            let mut components = Vec::new();
            for &(line, text) in body {
                let mut fields = text.split_whitespace();
                if fields.next() != Some("component") {
                    return Err(Error::parse(line, "expected `component`"));
                }
                let vals = numbers(line, &fields.collect::<Vec<_>>())?;
                if vals.is_empty() || vals.len() % 2 != 0 {
                    return Err(Error::parse(line, "coefficients come in (re, im) pairs"));
                }
                components.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
            }
            if components.is_empty() {
                return Err(Error::parse(
                    hline,
                    "a holomorphic curve needs a `component`",
                ));
            }
            CurveModel::holomorphic(components)
        }
        "exp" => {
            if let Some(&(line, _)) = body.first() {
                return Err(Error::parse(line, "`curve exp` takes no parameters"));
            }
            Ok(CurveModel::ComplexExp)
        }
        "composite" => {
            let mut pre = None;
            let mut post = None;
            let mut i = 0;
            while i < body.len() {
                let (line, text) = body[i];
                match text {
                    "pre" | "post" => {
                        let slot = if text == "pre" { &mut pre } else { &mut post };
                        if slot.is_some() {
                            return Err(Error::parse(line, format!("duplicate `{text}`")));
                        }
                        let (map, used) = parse_affine(&body[i + 1..])?;
                        *slot =
                            Some(map.ok_or_else(|| {
                                Error::parse(line, format!("`{text}` needs rows"))
                            })?);
                        i += 1 + used;
                    }
                    "core" => {
                        let core = parse_lines(&body[i + 1..], end_line)?;
                        let n = core.domain_dim();
                        let m = core.target_dim();
                        let pre: AffineMap = pre.unwrap_or_else(|| AffineMap::identity(n));
                        let post: AffineMap = post.unwrap_or_else(|| AffineMap::identity(m));
                        if pre.domain_dim() != n || pre.target_dim() != n {
                            return Err(Error::parse(
                                line,
                                format!(
                                    "pre-map is {}x{} but the core has domain dimension {}",
                                    pre.target_dim(),
                                    pre.domain_dim(),
                                    n
                                ),
                            ));
                        }
                        if post.domain_dim() != m {
                            return Err(Error::parse(
                                line,
                                format!(
                                    "post-map has domain dimension {} but the core has target dimension {}",
                                    post.domain_dim(),
                                    m
                                ),
                            ));
                        }
                        return CurveModel::composite(pre, core, post)
                            .map_err(|e| Error::parse(line, e.to_string()));
                    }
                    _ => return Err(Error::parse(line, "expected `pre`, `post` or `core`")),
                }
            }
            Err(Error::parse(end_line, "composite is missing its `core`"))
        }
        other => Err(Error::parse(
            hline,
            format!(
                "unknown curve variant `{other}` (expected affine, holomorphic, exp or composite)"
            ),
        )),
    }
}

pub(super) fn parse(input: &str) -> Result<CurveModel> {
    let lines: Vec<Line> = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let end_line = input.lines().count().max(1);
    parse_lines(&lines, end_line)
}

fn write_affine(out: &mut String, map: &AffineMap) {
    for r in 0..map.target_dim() {
        let row: Vec<String> = map.linear.row(r).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&format!("row {}\n", row.join(" ")));
    }
    if map.offset.iter().any(|&v| v != 0.0) {
        let b: Vec<String> = map.offset.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&format!("offset {}\n", b.join(" ")));
    }
}

pub(super) fn write(model: &CurveModel) -> String {
    let mut out = String::new();
    match model {
        CurveModel::Affine(map) => {
            out.push_str("curve affine\n");
            write_affine(&mut out, map);
        }
        CurveModel::HolomorphicPolynomial { components } => {
            out.push_str("curve holomorphic\n");
            for c in components {
                let pairs: Vec<String> =
                    c.iter().map(|z| format!("{:?} {:?}", z.re, z.im)).collect();
                out.push_str(&format!("component {}\n", pairs.join("  ")));
            }
        }
        CurveModel::ComplexExp => out.push_str("curve exp\n"),
        CurveModel::Composite { pre, core, post } => {
            out.push_str("curve composite\npre\n");
            write_affine(&mut out, pre);
            out.push_str("post\n");
            write_affine(&mut out, post);
            out.push_str("core\n");
            out.push_str(&write(core));
        }
    }
    out
}

impl CurveModel {
    pub fn from_spec(input: &str) -> Result<Self> {
        parse(input)
    }

    pub fn to_spec(&self) -> String {
        write(self)
    }
}
