//! Expressions such as `z^2 - 2`, `(z^2+1)/(z^2-1)` or `(1/2+i)*z^3 + 3z`.


use super::poly::Poly;
use super::RationalMap;
use crate::error::{Error, Result};
use crate::numerics::{parse_rational, GaussRat};

/// A quotient of polynomials during parsing.
#[derive(Clone)]
struct Frac(Poly, Poly);

impl Frac {
    fn poly(p: Poly) -> Self {
        Frac(p, Poly::one())
    }
    fn add(self, o: Frac) -> Frac {
        Frac(&(&self.0 * &o.1) + &(&o.0 * &self.1), &self.1 * &o.1)
    }
    fn sub(self, o: Frac) -> Frac {
        Frac(&(&self.0 * &o.1) - &(&o.0 * &self.1), &self.1 * &o.1)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac(&self.0 * &o.0, &self.1 * &o.1)
    }
    fn div(self, o: Frac) -> Result<Frac> {
        if o.0.is_zero() {
            return Err(Error::Parse("division by zero".into()));
        }
        Ok(Frac(&self.0 * &o.1, &self.1 * &o.0))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("map expression: {what} at byte {}", self.pos))
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = acc.div(self.unary()?)?;
                }
                // implicit product: 3z, 2(z+1), z(z-1)
                Some(c) if c == b'(' || c == b'z' || c == b'i' || c.is_ascii_digit() => {
                    acc = acc.mul(self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Frac(-&v.0, v.1))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.peek();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.err("expected a nonnegative integer exponent"))?;
            if k > 64 {
                return Err(self.err("exponent too large"));
            }
            let mut acc = Frac::poly(Poly::one());
            for _ in 0..k {
                acc = acc.mul(base.clone());
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Frac> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Frac::poly(Poly::z()))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Frac::poly(Poly::constant(GaussRat::i())))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let t = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                let q = parse_rational(t)?;
                Ok(Frac::poly(Poly::constant(GaussRat::real(q))))
            }
            _ => Err(self.err("expected a number, `z`, `i` or `(`")),
        }
    }
}

/// Parses a polynomial expression in `z`.
pub fn parse_poly(s: &str) -> Result<Poly> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let Frac(num, den) = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    if den.degree() > 0 {
        let g = Poly::gcd(&num, &den);
        if g.degree() < den.degree() {
            return Err(Error::Parse("expression is not a polynomial".into()));
        }
    }
    let (q, _) = num.div_rem(&den);
    Ok(q)
}

/// Parses a rational expression in `z` and reduces it to lowest terms.
pub fn parse_map(s: &str) -> Result<RationalMap> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let Frac(num, den) = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    if den.is_zero() {
        return Err(Error::Parse("map expression: zero denominator".into()));
    }
    let g = Poly::gcd(&num, &den);
    let (mut num, mut den) = if num.is_zero() { (num, Poly::one()) } else { (num.div_rem(&g).0, den.div_rem(&g).0) };
    // normalize so the denominator is monic
    let inv = den.lc().inv().expect("nonzero");
    num = num.scale(&inv);
    den = den.scale(&inv);
    RationalMap::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_map("z^2-2").unwrap().to_string(), "z^2 - 2");
        assert_eq!(parse_map("z*z - 2").unwrap(), parse_map("z^2-2").unwrap());
        let m = parse_map("(z^2+1)/(z^2-1)").unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(parse_map("(z^3-z)/(z^2-1)").unwrap_err(), Error::DegreeTooLow(1));
        assert!(parse_map("z^2 +").is_err());
        assert_eq!(parse_map("(1/2+i)z^2").unwrap().num().lc(), GaussRat::new(crate::numerics::rat(1, 2), crate::numerics::rat_int(1)));
    }
}
