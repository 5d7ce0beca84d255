//! Polynomial grammar: `+`/`-` separated terms, each a product of integer or
//! `a/b` coefficients and variables `x<i>` with optional `^e`. A `/` may also
//! follow a variable factor, dividing the term by an integer.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Monomial, Polynomial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'.' || bytes[i] == b'e' || bytes[i] == b'E') {
                    return Err(Error::NonRational { pos: start });
                }
                let v: BigInt = text[start..i].parse().unwrap();
                out.push((start, Tok::Int(v)));
            }
            b'.' => return Err(Error::NonRational { pos: i }),
            b'x' | b'X' => {
                let start = i;
                i += 1;
                let ds = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if ds == i {
                    return Err(Error::Syntax {
                        pos: start,
                        msg: "expected a variable index after 'x'".into(),
                    });
                }
                let idx: usize = text[ds..i].parse().map_err(|_| Error::Syntax {
                    pos: ds,
                    msg: "variable index too large".into(),
                })?;
                out.push((start, Tok::Var(idx)));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character '{ch}'"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Var(_)))
    }

    fn term(&mut self, coeff: &mut BigRational, exps: &mut [u32]) -> Result<()> {
        if !self.starts_factor() {
            return Err(self.err("expected a coefficient or a variable"));
        }
        loop {
            let at = self.offset();
            match self.peek().cloned() {
                Some(Tok::Int(v)) => {
                    self.pos += 1;
                    *coeff *= BigRational::from_integer(v);
                }
                Some(Tok::Var(i)) => {
                    self.pos += 1;
                    if i == 0 || i > self.n {
                        return Err(Error::VariableOutOfRange {
                            index: i,
                            n: self.n,
                        });
                    }
                    let mut e = 1u32;
                    if self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        if self.peek() == Some(&Tok::Minus) {
                            return Err(self.err("negative exponent"));
                        }
                        let v = self.expect_int("an exponent")?;
                        e = u32::try_from(v).map_err(|_| Error::Syntax {
                            pos: at,
                            msg: "exponent too large".into(),
                        })?;
                    }
                    exps[i - 1] = exps[i - 1].checked_add(e).ok_or(Error::Syntax {
                        pos: at,
                        msg: "exponent too large".into(),
                    })?;
                }
                _ => return Err(self.err("expected a coefficient or a variable")),
            }
            // optional divisor after any factor
            while self.peek() == Some(&Tok::Slash) {
                self.pos += 1;
                let d = self.expect_int("an integer divisor")?;
                if d.is_zero() {
                    return Err(Error::Syntax {
                        pos: self.toks[self.pos - 1].0,
                        msg: "division by zero".into(),
                    });
                }
                *coeff /= BigRational::from_integer(d);
            }
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    if !self.starts_factor() {
                        return Err(self.err("expected a factor after '*'"));
                    }
                }
                Some(Tok::Int(_)) | Some(Tok::Var(_)) => {}
                _ => return Ok(()),
            }
        }
    }
}

/// Parses `text` as a polynomial in `x1..xn`.
pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        n,
    };
    if p.toks.is_empty() {
        return Err(p.err("empty expression"));
    }
    let mut f = Polynomial::zero(n);
    let mut first = true;
    loop {
        let mut sign = BigRational::one();
        match p.peek() {
            Some(Tok::Plus) => p.pos += 1,
            Some(Tok::Minus) => {
                p.pos += 1;
                sign = -sign;
            }
            _ if !first => return Err(p.err("expected '+' or '-'")),
            _ => {}
        }
        first = false;
        let mut exps = vec![0u32; n];
        let mut coeff = sign;
        p.term(&mut coeff, &mut exps)?;
        f.add_term(Monomial(exps), coeff);
        if p.peek().is_none() {
            break;
        }
    }
    Ok(f)
}

/// Largest variable index used in `text` (0 if none); useful to pick `n`.
pub fn infer_arity(text: &str) -> Result<usize> {
    Ok(tokenize(text)?
        .into_iter()
        .filter_map(|(_, t)| if let Tok::Var(i) = t { Some(i) } else { None })
        .max()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_reported() {
        match parse_polynomial("x1 + * x2", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_polynomial("x1 + 1.5", 1) {
            Err(Error::NonRational { pos }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse_polynomial("x3", 2),
            Err(Error::VariableOutOfRange { index: 3, n: 2 })
        );
        assert!(matches!(
            parse_polynomial("x1 x", 1),
            Err(Error::Syntax { pos: 3, .. })
        ));
        assert!(parse_polynomial("", 1).is_err());
        assert!(parse_polynomial("x1 +", 1).is_err());
    }

    #[test]
    fn implicit_products_and_fractions() {
        let f = parse_polynomial("3/4 x1 x2^2 - 2x1", 2).unwrap();
        assert_eq!(f.to_string(), "3/4*x1*x2^2 - 2*x1");
        let g = parse_polynomial("x1/2 + x1*x1", 1).unwrap();
        assert_eq!(g.to_string(), "x1^2 + 1/2*x1");
        assert_eq!(parse_polynomial("x1 - x1", 1).unwrap(), Polynomial::zero(1));
    }

    #[test]
    fn arity_inference() {
        assert_eq!(infer_arity("x1^2*x3 - 1").unwrap(), 3);
        assert_eq!(infer_arity("7").unwrap(), 0);
    }
}
