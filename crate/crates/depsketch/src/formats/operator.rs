//! Line-oriented text encoding of sketch operators and matrix lists.
//!
//! Every line is `keyword value…`; `#` starts a comment. Floats are written
//! in shortest round-trip decimal, or as C99 hex floats (`0x1.8p+1`) when
//! [`FloatStyle::Hex`] is requested. The reader accepts both forms.

use std::fmt::Write as _;

use depsketch_core::transforms::SketchOperator;
use depsketch_core::Matrix;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FloatStyle {
    #[default]
    Decimal,
    Hex,
}

pub fn format_f64(x: f64, style: FloatStyle) -> String {
    match style {
        FloatStyle::Hex => hex_float(x),
        FloatStyle::Decimal if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&x.abs()) => {
            if x.is_nan() {
                "nan".into()
            } else {
                format!("{x}")
            }
        }
        FloatStyle::Decimal => format!("{x:e}"),
    }
}

fn hex_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{frac}p{e:+}")
}

pub fn parse_f64(token: &str) -> Result<f64> {
    let bad = || Error::parse("number", format!("cannot parse `{token}`"));
    let (neg, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token.strip_prefix('+').unwrap_or(token)),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return token.parse::<f64>().map_err(|_| bad());
    };
    let (mantissa, exp) = hex.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || digits.len() > 15 {
        return Err(bad());
    }
    let m = u64::from_str_radix(&digits, 16).map_err(|_| bad())? as f64;
    let v = ldexp(m, exp - 4 * frac.len() as i32);
    Ok(if neg { -v } else { v })
}

fn ldexp(mut m: f64, mut k: i32) -> f64 {
    while k > 1000 {
        m *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        m *= 2f64.powi(-1000);
        k += 1000;
    }
    m * 2f64.powi(k)
}

fn join(values: &[f64], style: FloatStyle) -> String {
    values.iter().map(|&v| format_f64(v, style)).collect::<Vec<_>>().join(" ")
}

pub fn write_operator(op: &SketchOperator, style: FloatStyle) -> String {
    let mut s = String::from("# depsketch operator\n");
    let f = |x: f64| format_f64(x, style);
    match op {
        SketchOperator::Dense { matrix, scale } => {
            let (r, c) = matrix.shape();
            let _ = writeln!(s, "kind dense\nscale {}\nshape {r} {c}", f(*scale));
            for i in 0..r {
                let _ = writeln!(s, "row {}", join(matrix.row(i), style));
            }
        }
        SketchOperator::PartialToeplitz { p, xi, rows, scale } => {
            let rows: Vec<String> = rows.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "kind partial_toeplitz\np {p}\nscale {}", f(*scale));
            let _ = writeln!(s, "xi {}\nrows {}", join(xi, style), rows.join(" "));
        }
        SketchOperator::CountSketch { n, p, d, indices, signs } => {
            let _ = writeln!(s, "kind countsketch\nn {n}\np {p}\nd {d}");
            for (j, (idx, sg)) in indices.iter().zip(signs).enumerate() {
                let cells: Vec<String> = idx.iter().zip(sg).map(|(r, v)| format!("{r}:{}", f(*v))).collect();
                let _ = writeln!(s, "col {j} {}", cells.join(" "));
            }
        }
    }
    s
}

struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
    what: &'static str,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, what: &'static str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let l = l.split_once('#').map_or(l, |(h, _)| h);
                let toks: Vec<&str> = l.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Lines { items, pos: 0, what }
    }

    fn err(&self, line: usize, msg: impl ToString) -> Error {
        Error::parse(format!("{} line {line}", self.what), msg)
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|(_, t)| t[0])
    }

    /// Next line, which must start with `key`; returns its values.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let Some((line, toks)) = self.items.get(self.pos).cloned() else {
            return Err(Error::parse(self.what, format!("missing `{key}`")));
        };
        if toks[0] != key {
            return Err(self.err(line, format!("expected `{key}`, found `{}`", toks[0])));
        }
        self.pos += 1;
        Ok((line, toks[1..].to_vec()))
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, vals) = self.expect(key)?;
        match vals.as_slice() {
            [v] => v.parse().map_err(|_| self.err(line, format!("bad value for `{key}`"))),
            _ => Err(self.err(line, format!("`{key}` takes one value"))),
        }
    }

    fn float(&mut self, key: &str) -> Result<f64> {
        let (line, vals) = self.expect(key)?;
        match vals.as_slice() {
            [v] => parse_f64(v).map_err(|e| self.err(line, e)),
            _ => Err(self.err(line, format!("`{key}` takes one value"))),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Vec<f64>> {
        let (line, vals) = self.expect(key)?;
        vals.iter().map(|v| parse_f64(v).map_err(|e| self.err(line, e))).collect()
    }

    fn done(&self) -> Result<()> {
        match self.items.get(self.pos) {
            Some((line, toks)) => Err(self.err(*line, format!("unexpected `{}`", toks[0]))),
            None => Ok(()),
        }
    }
}

pub fn parse_operator(text: &str) -> Result<SketchOperator> {
    let mut lines = Lines::new(text, "operator");
    let kind: String = lines.scalar("kind")?;
    let op = match kind.as_str() {
        "dense" => {
            let scale = lines.float("scale")?;
            let (line, shape) = lines.expect("shape")?;
            let dims: Vec<usize> = shape.iter().filter_map(|v| v.parse().ok()).collect();
            let [r, c] = dims[..] else {
                return Err(lines.err(line, "`shape` takes two integers"));
            };
            let mut data = Vec::with_capacity(r * c);
            for _ in 0..r {
                data.extend(lines.floats("row")?);
            }
            SketchOperator::Dense { matrix: Matrix::from_vec(r, c, data)?, scale }
        }
        "partial_toeplitz" => {
            let p = lines.scalar("p")?;
            let scale = lines.float("scale")?;
            let xi = lines.floats("xi")?;
            let (line, vals) = lines.expect("rows")?;
            let rows = vals
                .iter()
                .map(|v| v.parse().map_err(|_| lines.err(line, format!("bad row index `{v}`"))))
                .collect::<Result<Vec<usize>>>()?;
            SketchOperator::PartialToeplitz { p, xi, rows, scale }
        }
        "countsketch" => {
            let n = lines.scalar("n")?;
            let p: usize = lines.scalar("p")?;
            let d = lines.scalar("d")?;
            let (mut indices, mut signs) = (Vec::with_capacity(p), Vec::with_capacity(p));
            for j in 0..p {
                let (line, cells) = lines.expect("col")?;
                if cells.first().and_then(|c| c.parse::<usize>().ok()) != Some(j) {
                    return Err(lines.err(line, format!("expected column {j}")));
                }
                let (mut idx, mut sg) = (Vec::new(), Vec::new());
                for cell in &cells[1..] {
                    let (r, v) = cell.split_once(':').ok_or_else(|| lines.err(line, "cells are row:sign"))?;
                    idx.push(r.parse().map_err(|_| lines.err(line, format!("bad row `{r}`")))?);
                    sg.push(parse_f64(v).map_err(|e| lines.err(line, e))?);
                }
                indices.push(idx);
                signs.push(sg);
            }
            SketchOperator::CountSketch { n, p, d, indices, signs }
        }
        other => return Err(Error::parse("operator", format!("unknown kind `{other}`"))),
    };
    lines.done()?;
    op.validate()?;
    Ok(op)
}

/// Blocks of `matrix <rows> <cols>` followed by that many value lines.
pub fn write_matrices(ms: &[Matrix], style: FloatStyle) -> String {
    let mut s = String::new();
    for m in ms {
        let (r, c) = m.shape();
        let _ = writeln!(s, "matrix {r} {c}");
        for i in 0..r {
            let _ = writeln!(s, "{}", join(m.row(i), style));
        }
    }
    s
}

pub fn parse_matrices(text: &str) -> Result<Vec<Matrix>> {
    let mut lines = Lines::new(text, "matrix file");
    let mut out = Vec::new();
    while lines.peek_key().is_some() {
        let (line, dims) = lines.expect("matrix")?;
        let dims: Vec<usize> = dims.iter().filter_map(|v| v.parse().ok()).collect();
        let [r, c] = dims[..] else {
            return Err(lines.err(line, "`matrix` takes two integers"));
        };
        let mut data = Vec::with_capacity(r * c);
        for _ in 0..r {
            let Some((line, toks)) = lines.items.get(lines.pos).cloned() else {
                return Err(Error::parse("matrix file", "truncated matrix"));
            };
            lines.pos += 1;
            if toks.len() != c {
                return Err(lines.err(line, format!("expected {c} values, found {}", toks.len())));
            }
            for t in toks {
                data.push(parse_f64(t).map_err(|e| lines.err(line, e))?);
            }
        }
        out.push(Matrix::from_vec(r, c, data)?);
    }
    if out.is_empty() {
        return Err(Error::parse("matrix file", "no matrices"));
    }
    Ok(out)
}
