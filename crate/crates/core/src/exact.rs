//! Exact arithmetic in Q and real quadratic fields Q(sqrt D), plus 2x2 linear algebra.
//!
//! A [`QuadNum`] is `a + b*sqrt(d)` with rational `a`, `b`. Rationals carry `d = 0`
//! and combine with any field; two irrational values must share `d`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("values from different fields: sqrt({0}) vs sqrt({1})")]
    MixedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("square root of {0} leaves the quadratic field")]
    NotSquare(String),
}

fn parse_err(input: &str, reason: impl Into<String>) -> ExactError {
    ExactError::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Largest `k` with `k*k | n`, and `n / k^2`.
fn split_square(n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        while rest % (p * p) == 0 {
            rest /= p * p;
            k *= p;
        }
        p += 1;
    }
    (k, rest)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `a + b*sqrt(d)`; canonical: `b == 0` iff `d == 0`, and `d` square-free, never 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: BigRational,
    b: BigRational,
    d: u64,
}

impl QuadNum {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Self {
        if d == 0 || b.is_zero() {
            return Self::rational(a);
        }
        let (k, rest) = split_square(d);
        let b = b * BigRational::from_integer(BigInt::from(k));
        if rest == 1 {
            return Self::rational(a + b);
        }
        QuadNum { a, b, d: rest }
    }

    /// Constructor for an already canonical radicand.
    fn canon(a: BigRational, b: BigRational, d: u64) -> Self {
        if d == 0 || b.is_zero() {
            return Self::rational(a);
        }
        QuadNum { a, b, d }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadNum {
            a,
            b: BigRational::zero(),
            d: 0,
        }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(ratio(n, d))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// `sqrt(n)` for a non-negative integer, reduced to `k*sqrt(d)`.
    pub fn sqrt_int(n: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), n)
    }

    /// Exact square root of a non-negative rational, possibly opening a new field.
    pub fn sqrt_rational(r: &BigRational) -> Result<Self, ExactError> {
        if r.is_negative() {
            return Err(ExactError::NotSquare(r.to_string()));
        }
        if r.is_zero() {
            return Ok(Self::zero());
        }
        // sqrt(p/q) = sqrt(p*q)/q
        let pq = r.numer() * r.denom();
        let root = pq.sqrt();
        if &root * &root == pq {
            return Ok(Self::rational(BigRational::new(root, r.denom().clone())));
        }
        let d = pq
            .to_u64()
            .ok_or_else(|| ExactError::NotSquare(r.to_string()))?;
        let inv_q = BigRational::new(BigInt::one(), r.denom().clone());
        Ok(Self::new(BigRational::zero(), inv_q, d))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Radicand; 0 for rationals.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    fn field_with(&self, other: &Self) -> Result<u64, ExactError> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(ExactError::MixedField(x, y)),
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, ExactError> {
        let d = self.field_with(o)?;
        if d == 0 {
            return Ok(Self::rational(&self.a + &o.a));
        }
        Ok(Self::canon(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, ExactError> {
        let d = self.field_with(o)?;
        if d == 0 {
            return Ok(Self::rational(&self.a - &o.a));
        }
        Ok(Self::canon(&self.a - &o.a, &self.b - &o.b, d))
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ExactError> {
        let d = self.field_with(o)?;
        match (self.d, o.d) {
            (0, 0) => return Ok(Self::rational(&self.a * &o.a)),
            (0, _) => return Ok(Self::canon(&self.a * &o.a, &self.a * &o.b, d)),
            (_, 0) => return Ok(Self::canon(&self.a * &o.a, &self.b * &o.a, d)),
            _ => {}
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Self::canon(a, b, d))
    }

    pub fn try_div(&self, o: &Self) -> Result<Self, ExactError> {
        self.field_with(o)?;
        self.try_mul(&o.recip()?)
    }

    /// Galois conjugate `a - b*sqrt(d)`.
    pub fn conj(&self) -> Self {
        QuadNum {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// Field norm `a^2 - d*b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d))
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::canon(&self.a / &n, -(&self.b / &n), self.d))
    }

    /// Sign as -1, 0 or 1, decided without floating point.
    pub fn signum(&self) -> i8 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn try_cmp(&self, o: &Self) -> Result<Ordering, ExactError> {
        Ok(match self.try_sub(o)?.signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    /// Nearest double, avoiding cancellation between `a` and `b*sqrt(d)`.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.d == 0 {
            return a;
        }
        let root = (self.d as f64).sqrt();
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        if sign_of(&self.a) * sign_of(&self.b) >= 0 {
            return a + b * root;
        }
        // a + b sqrt d = norm / (a - b sqrt d), and the denominator has no cancellation
        self.norm().to_f64().unwrap_or(f64::NAN) / (a - b * root)
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let mut k = self.a.floor().to_integer();
        if self.d != 0 {
            let r = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
            let s = r.floor().to_integer().sqrt();
            if self.b.is_positive() {
                k += s;
            } else {
                k -= s + BigInt::one();
            }
        }
        loop {
            let kq = Self::rational(BigRational::from_integer(k.clone()));
            if (self - &kq).is_negative() {
                k -= 1;
                continue;
            }
            let k1 = Self::rational(BigRational::from_integer(&k + 1));
            if !(self - &k1).is_negative() {
                k += 1;
                continue;
            }
            return k;
        }
    }

    /// `self mod m` in `[0, m)` for positive `m`, together with the quotient.
    pub fn rem_euclid(&self, m: &Self) -> (BigInt, Self) {
        let q = (self / m).floor();
        let r = self - &(m * &Self::rational(BigRational::from_integer(q.clone())));
        (q, r)
    }

    pub fn pow(&self, e: i32) -> Self {
        let base = if e < 0 {
            self.recip().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut acc = Self::one();
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &sq;
            }
            n >>= 1;
            if n > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Square root inside the current field, or opening one when `self` is rational.
    pub fn sqrt(&self) -> Result<Self, ExactError> {
        if self.is_negative() {
            return Err(ExactError::NotSquare(self.to_string()));
        }
        if self.d == 0 {
            return Self::sqrt_rational(&self.a);
        }
        // (x + y sqrt d)^2 = a + b sqrt d  =>  x^2 + d y^2 = a, 2xy = b.
        // x^2 = (a +- sqrt(norm)) / 2 with norm = a^2 - d b^2 a rational square.
        let n = Self::sqrt_rational(&self.norm())
            .ok()
            .filter(|q| q.is_rational())
            .ok_or_else(|| ExactError::NotSquare(self.to_string()))?;
        let two = ratio(2, 1);
        for cand in [(&self.a + n.a()) / &two, (&self.a - n.a()) / &two] {
            if cand.is_negative() || cand.is_zero() {
                continue;
            }
            if let Ok(x) = Self::sqrt_rational(&cand) {
                if !x.is_rational() {
                    continue;
                }
                let y = &self.b / (&two * x.a());
                let r = Self::new(x.a().clone(), y, self.d);
                if &(&r * &r) == self && !r.is_negative() {
                    return Ok(r);
                }
            }
        }
        // x = 0 case: a = d y^2
        let y2 = &self.a / BigRational::from_integer(BigInt::from(self.d));
        if self.b.is_zero() {
            if let Ok(y) = Self::sqrt_rational(&y2) {
                if y.is_rational() {
                    return Ok(Self::new(BigRational::zero(), y.a().clone(), self.d));
                }
            }
        }
        Err(ExactError::NotSquare(self.to_string()))
    }

    pub fn min(self, o: Self) -> Self {
        if o < self {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Self) -> Self {
        if o > self {
            o
        } else {
            self
        }
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

impl PartialOrd for QuadNum {
    /// `None` for values from different fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl From<i64> for QuadNum {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl From<BigRational> for QuadNum {
    fn from(r: BigRational) -> Self {
        Self::rational(r)
    }
}

impl Zero for QuadNum {
    fn zero() -> Self {
        QuadNum::zero()
    }
    fn is_zero(&self) -> bool {
        QuadNum::is_zero(self)
    }
}

impl One for QuadNum {
    fn one() -> Self {
        QuadNum::one()
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -&self
    }
}

// Operator impls panic on mixed fields, like integer overflow would; use the
// `try_*` methods where the field is not known in advance.
macro_rules! binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr<&QuadNum> for &QuadNum {
            type Output = QuadNum;
            fn $m(self, o: &QuadNum) -> QuadNum {
                self.$try(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum {
                (&self).$m(&o)
            }
        }
        impl $tr<&QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: &QuadNum) -> QuadNum {
                (&self).$m(o)
            }
        }
        impl $tr<QuadNum> for &QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl std::iter::Sum for QuadNum {
    fn sum<I: Iterator<Item = QuadNum>>(iter: I) -> Self {
        iter.fold(QuadNum::zero(), |acc, x| acc + x)
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 0 {
            return write!(f, "{}", fmt_ratio(&self.a));
        }
        let b = fmt_ratio(&self.b.abs());
        if self.a.is_zero() {
            let sign = if self.b.is_negative() { "-" } else { "" };
            return write!(f, "{sign}{b}*sqrt({})", self.d);
        }
        let op = if self.b.is_negative() { '-' } else { '+' };
        write!(f, "{}{op}{b}*sqrt({})", fmt_ratio(&self.a), self.d)
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for QuadNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for QuadNum {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, ExactError> {
        let mut p = Parser {
            src: s,
            toks: tokenize(s)?,
            pos: 0,
        };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(parse_err(s, "trailing input"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Sqrt,
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, ExactError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            let lit: String = cs[start..i].iter().collect();
            out.push(Tok::Num(decimal(&lit).ok_or_else(|| parse_err(s, "bad number"))?));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if cs[i..].iter().take(4).collect::<String>() == "sqrt" {
            out.push(Tok::Sqrt);
            i += 4;
        } else if c == '√' {
            out.push(Tok::Sqrt);
            i += 1;
        } else {
            return Err(parse_err(s, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn decimal(lit: &str) -> Option<BigRational> {
    let mut parts = lit.splitn(2, '.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, den))
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<QuadNum, ExactError> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v = v.try_add(&self.term()?)?;
            } else if self.eat('-') {
                v = v.try_sub(&self.term()?)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<QuadNum, ExactError> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v = v.try_mul(&self.unary()?)?;
            } else if self.eat('/') {
                let r = self.unary()?;
                v = v.try_div(&r)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<QuadNum, ExactError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<QuadNum, ExactError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(QuadNum::rational(r))
            }
            Some(Tok::Sqrt) => {
                self.pos += 1;
                if !self.eat('(') {
                    return Err(parse_err(self.src, "expected '(' after sqrt"));
                }
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(parse_err(self.src, "unbalanced parentheses"));
                }
                if !inner.is_rational() {
                    return Err(parse_err(self.src, "sqrt of an irrational value"));
                }
                QuadNum::sqrt_rational(inner.a())
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(parse_err(self.src, "unbalanced parentheses"));
                }
                Ok(v)
            }
            _ => Err(parse_err(self.src, "expected a number")),
        }
    }
}

/// One of the four open quadrants, named by coordinate signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignPair {
    PP,
    PM,
    MP,
    MM,
}

impl SignPair {
    pub const ALL: [SignPair; 4] = [SignPair::PP, SignPair::PM, SignPair::MP, SignPair::MM];

    pub fn from_signs(sx: i8, sy: i8) -> Option<Self> {
        match (sx, sy) {
            (1, 1) => Some(SignPair::PP),
            (1, -1) => Some(SignPair::PM),
            (-1, 1) => Some(SignPair::MP),
            (-1, -1) => Some(SignPair::MM),
            _ => None,
        }
    }

    pub fn sx(self) -> i8 {
        match self {
            SignPair::PP | SignPair::PM => 1,
            _ => -1,
        }
    }

    pub fn sy(self) -> i8 {
        match self {
            SignPair::PP | SignPair::MP => 1,
            _ => -1,
        }
    }

    /// Image under rotation by a quarter turn: `(sx, sy) -> (-sy, sx)`.
    pub fn rotate(self) -> Self {
        Self::from_signs(-self.sy(), self.sx()).unwrap()
    }

    pub fn negate(self) -> Self {
        Self::from_signs(-self.sx(), -self.sy()).unwrap()
    }
}

impl fmt::Display for SignPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignPair::PP => "++",
            SignPair::PM => "+-",
            SignPair::MP => "-+",
            SignPair::MM => "--",
        })
    }
}

impl FromStr for SignPair {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, ExactError> {
        match s.trim() {
            "++" => Ok(SignPair::PP),
            "+-" => Ok(SignPair::PM),
            "-+" => Ok(SignPair::MP),
            "--" => Ok(SignPair::MM),
            _ => Err(parse_err(s, "expected one of ++ +- -+ --")),
        }
    }
}

impl Serialize for SignPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct QVec2 {
    pub x: QuadNum,
    pub y: QuadNum,
}

impl QVec2 {
    pub fn new(x: QuadNum, y: QuadNum) -> Self {
        QVec2 { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        QVec2::new(x.into(), y.into())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn try_wedge(&self, o: &Self) -> Result<QuadNum, ExactError> {
        self.x.try_mul(&o.y)?.try_sub(&self.y.try_mul(&o.x)?)
    }

    pub fn try_dot(&self, o: &Self) -> Result<QuadNum, ExactError> {
        self.x.try_mul(&o.x)?.try_add(&self.y.try_mul(&o.y)?)
    }

    pub fn wedge(&self, o: &Self) -> QuadNum {
        self.try_wedge(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn dot(&self, o: &Self) -> QuadNum {
        self.try_dot(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn norm_sq(&self) -> QuadNum {
        self.dot(self)
    }

    /// Rotation by a quarter turn counterclockwise.
    pub fn rotate(&self) -> Self {
        QVec2::new(-&self.y, self.x.clone())
    }

    pub fn scale(&self, c: &QuadNum) -> Self {
        QVec2::new(&self.x * c, &self.y * c)
    }

    pub fn neg(&self) -> Self {
        QVec2::new(-&self.x, -&self.y)
    }

    pub fn add(&self, o: &Self) -> Self {
        QVec2::new(&self.x + &o.x, &self.y + &o.y)
    }

    /// Open quadrant containing the vector; `None` on an axis.
    pub fn quadrant(&self) -> Option<SignPair> {
        SignPair::from_signs(self.x.signum(), self.y.signum())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    /// The common field radicand of the components.
    pub fn field(&self) -> Result<u64, ExactError> {
        self.x.field_with(&self.y)
    }
}

impl fmt::Display for QVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl FromStr for QVec2 {
    type Err = ExactError;
    /// `"x, y"`, optionally parenthesized.
    fn from_str(s: &str) -> Result<Self, ExactError> {
        let t = s.trim();
        let t = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .filter(|inner| {
                // only strip when the outer parens match each other
                let mut depth = 0i32;
                inner.chars().all(|c| {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        _ => {}
                    }
                    depth >= 0
                })
            })
            .unwrap_or(t);
        let mut depth = 0i32;
        let mut split = None;
        for (i, c) in t.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    if split.is_some() {
                        return Err(parse_err(s, "expected exactly two components"));
                    }
                    split = Some(i);
                }
                _ => {}
            }
        }
        let i = split.ok_or_else(|| parse_err(s, "expected 'x, y'"))?;
        let v = QVec2::new(t[..i].parse()?, t[i + 1..].parse()?);
        v.field()?;
        Ok(v)
    }
}

/// Row-major 2x2 matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct QMat2 {
    pub m: [[QuadNum; 2]; 2],
}

impl QMat2 {
    pub fn new(a: QuadNum, b: QuadNum, c: QuadNum, d: QuadNum) -> Self {
        QMat2 { m: [[a, b], [c, d]] }
    }

    pub fn ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        QMat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        QMat2::ints(1, 0, 0, 1)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ExactError> {
        let e = |i: usize, j: usize| -> Result<QuadNum, ExactError> {
            self.m[i][0]
                .try_mul(&o.m[0][j])?
                .try_add(&self.m[i][1].try_mul(&o.m[1][j])?)
        };
        Ok(QMat2::new(e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?))
    }

    pub fn try_apply(&self, v: &QVec2) -> Result<QVec2, ExactError> {
        let x = self.m[0][0].try_mul(&v.x)?.try_add(&self.m[0][1].try_mul(&v.y)?)?;
        let y = self.m[1][0].try_mul(&v.x)?.try_add(&self.m[1][1].try_mul(&v.y)?)?;
        Ok(QVec2::new(x, y))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn apply(&self, v: &QVec2) -> QVec2 {
        self.try_apply(v).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn det(&self) -> QuadNum {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn trace(&self) -> QuadNum {
        &self.m[0][0] + &self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        QMat2::new(m[0][0].clone(), m[1][0].clone(), m[0][1].clone(), m[1][1].clone())
    }

    pub fn inverse(&self) -> Result<Self, ExactError> {
        let det = self.det();
        let inv = det.recip()?;
        let m = &self.m;
        Ok(QMat2::new(
            &m[1][1] * &inv,
            -(&m[0][1] * &inv),
            -(&m[1][0] * &inv),
            &m[0][0] * &inv,
        ))
    }

    pub fn inverse_transpose(&self) -> Result<Self, ExactError> {
        Ok(self.inverse()?.transpose())
    }
}

impl fmt::Display for QMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.m;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

/// `(lambda + sqrt(lambda^2 - 4)) / 2`, the expanding eigenvalue of a step.
pub fn omega(lambda: &QuadNum) -> Result<QuadNum, ExactError> {
    let disc = lambda * lambda - QuadNum::int(4);
    let root = disc.sqrt()?;
    lambda.try_add(&root)?.try_div(&QuadNum::int(2))
}

/// Rational shorthand used across the crate.
pub fn q(n: i64, d: i64) -> QuadNum {
    QuadNum::frac(n, d)
}
