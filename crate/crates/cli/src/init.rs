//! Built-in initial data.
//!
//! Grammar: `constant`, `cos_x1(k)`, `cos_x2(k)`, `product(k,l)`, or
//! `sum:<term>,<term>,...` over the other forms. Everything is written in
//! unit-square coordinates, `cos_x1(k) = cos(kπx1)` and so on.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    Constant,
    CosX1(u32),
    CosX2(u32),
    Product(u32, u32),
}

fn cos_k(k: u32, x: f64) -> f64 {
    (k as f64 * PI * x).cos()
}

impl Term {
    fn eval(self, x1: f64, x2: f64) -> f64 {
        match self {
            Term::Constant => 1.0,
            Term::CosX1(k) => cos_k(k, x1),
            Term::CosX2(k) => cos_k(k, x2),
            Term::Product(k, l) => cos_k(k, x1) * cos_k(l, x2),
        }
    }

    fn eval1d(self, x: f64) -> Option<f64> {
        match self {
            Term::Constant => Some(1.0),
            Term::CosX1(k) => Some(cos_k(k, x)),
            Term::CosX2(_) | Term::Product(..) => None,
        }
    }
}

/// A parsed selector: a sum of one or more terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector(Vec<Term>);

fn parse_index(s: &str, text: &str) -> Result<u32, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("bad frequency {s:?} in {text:?}"))
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn parse_term(s: &str) -> Result<Term, String> {
    let s = s.trim();
    if s == "constant" {
        return Ok(Term::Constant);
    }
    if let Some(arg) = call(s, "cos_x1") {
        return Ok(Term::CosX1(parse_index(arg, s)?));
    }
    if let Some(arg) = call(s, "cos_x2") {
        return Ok(Term::CosX2(parse_index(arg, s)?));
    }
    if let Some(args) = call(s, "product") {
        let (k, l) = args
            .split_once(',')
            .ok_or_else(|| format!("product needs two frequencies in {s:?}"))?;
        return Ok(Term::Product(parse_index(k, s)?, parse_index(l, s)?));
    }
    Err(format!(
        "unknown initial data {s:?} (expected constant, cos_x1(k), cos_x2(k), product(k,l) or sum:...)"
    ))
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl Selector {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim().strip_prefix("sum:") {
            Some(list) => {
                let terms = split_top_level(list)
                    .into_iter()
                    .map(parse_term)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Selector(terms))
            }
            None => Ok(Selector(vec![parse_term(s)?])),
        }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.0.iter().map(|t| t.eval(x1, x2)).sum()
    }

    /// The selector as a function on the segment, if it does not vary in `x2`.
    pub fn as_1d(&self) -> Result<impl Fn(f64) -> f64 + '_, String> {
        if let Some(t) = self.0.iter().find(|t| t.eval1d(0.0).is_none()) {
            return Err(format!("{t:?} depends on x2 and has no meaning on the segment"));
        }
        Ok(move |x| self.0.iter().map(|t| t.eval1d(x).unwrap_or(0.0)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        let s = Selector::parse("sum:constant, cos_x1(2),cos_x2(1),product(3,4)").unwrap();
        assert_eq!(
            s.0,
            vec![Term::Constant, Term::CosX1(2), Term::CosX2(1), Term::Product(3, 4)]
        );
        assert_eq!(Selector::parse("product(1, 2)").unwrap().0, vec![Term::Product(1, 2)]);
        assert!((s.eval(0.0, 0.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "cos_x1", "cos_x1(-1)", "product(1)", "sum:constant,nope", "cos_x3(1)"] {
            assert!(Selector::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn one_dimensional_view() {
        let s = Selector::parse("sum:constant,cos_x1(1)").unwrap();
        let f = s.as_1d().unwrap();
        assert_eq!(f(0.0), 2.0);
        assert!(Selector::parse("cos_x2(1)").unwrap().as_1d().is_err());
    }
}
