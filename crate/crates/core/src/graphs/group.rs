//! Built-in discrete groups with canonical element encodings.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::QuadNum;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    /// Free abelian group of rank d.
    Zd(usize),
    /// Integers mod m.
    Cyclic(u64),
    /// Free group on k letters `a, b, c, ...`; capitals are inverses.
    Free(usize),
    /// Discrete Heisenberg group, `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupElem {
    Ints(Vec<i64>),
    /// Reduced word as (generator index, exponent sign) pairs.
    Word(Vec<(u8, i8)>),
    Heis(i64, i64, i64),
}

impl Group {
    pub fn identity(&self) -> GroupElem {
        match self {
            Group::Zd(d) => GroupElem::Ints(vec![0; *d]),
            Group::Cyclic(_) => GroupElem::Ints(vec![0]),
            Group::Free(_) => GroupElem::Word(Vec::new()),
            Group::Heisenberg => GroupElem::Heis(0, 0, 0),
        }
    }

    pub fn mul(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        match (self, x, y) {
            (Group::Zd(_), GroupElem::Ints(a), GroupElem::Ints(b)) => {
                GroupElem::Ints(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (Group::Cyclic(m), GroupElem::Ints(a), GroupElem::Ints(b)) => {
                GroupElem::Ints(vec![(a[0] + b[0]).rem_euclid(*m as i64)])
            }
            (Group::Free(_), GroupElem::Word(a), GroupElem::Word(b)) => {
                let mut out = a.clone();
                for &l in b {
                    if out.last() == Some(&(l.0, -l.1)) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                GroupElem::Word(out)
            }
            (Group::Heisenberg, &GroupElem::Heis(a, b, c), &GroupElem::Heis(p, q, r)) => {
                GroupElem::Heis(a + p, b + q, c + r + a * q)
            }
            _ => panic!("element does not belong to {self:?}"),
        }
    }

    pub fn inv(&self, x: &GroupElem) -> GroupElem {
        match (self, x) {
            (Group::Zd(_), GroupElem::Ints(a)) => GroupElem::Ints(a.iter().map(|v| -v).collect()),
            (Group::Cyclic(m), GroupElem::Ints(a)) => {
                GroupElem::Ints(vec![(-a[0]).rem_euclid(*m as i64)])
            }
            (Group::Free(_), GroupElem::Word(a)) => {
                GroupElem::Word(a.iter().rev().map(|&(g, s)| (g, -s)).collect())
            }
            // (a,b,c)^-1 = (-a, -b, -c + ab)
            (Group::Heisenberg, &GroupElem::Heis(a, b, c)) => GroupElem::Heis(-a, -b, a * b - c),
            _ => panic!("element does not belong to {self:?}"),
        }
    }

    pub fn product<'a, I: IntoIterator<Item = &'a GroupElem>>(&self, xs: I) -> GroupElem {
        xs.into_iter()
            .fold(self.identity(), |acc, x| self.mul(&acc, x))
    }

    /// Parses one element.
    pub fn parse_elem(&self, s: &str) -> Result<GroupElem> {
        let bad = |why: &str| Error::Parse(format!("element {s:?} of {self:?}: {why}"));
        let t = s.trim();
        let ints = |n: usize| -> Result<Vec<i64>> {
            let inner = t.trim_start_matches('(').trim_end_matches(')');
            let xs: Vec<i64> = inner
                .split(',')
                .map(|p| p.trim().trim_start_matches('+').parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("expected integers"))?;
            if xs.len() != n {
                return Err(bad(&format!("expected {n} coordinates")));
            }
            Ok(xs)
        };
        match self {
            Group::Zd(d) => Ok(GroupElem::Ints(ints(*d)?)),
            Group::Heisenberg if t.starts_with('(') => {
                let xs = ints(3)?;
                Ok(GroupElem::Heis(xs[0], xs[1], xs[2]))
            }
            Group::Heisenberg => {
                let mut acc = self.identity();
                for c in t.chars().filter(|c| !c.is_whitespace()) {
                    let g = match c {
                        'x' => GroupElem::Heis(1, 0, 0),
                        'X' => GroupElem::Heis(-1, 0, 0),
                        'y' => GroupElem::Heis(0, 1, 0),
                        'Y' => GroupElem::Heis(0, -1, 0),
                        'z' => GroupElem::Heis(0, 0, 1),
                        'Z' => GroupElem::Heis(0, 0, -1),
                        'e' => continue,
                        _ => return Err(bad("expected letters from xXyYzZ or a triple")),
                    };
                    acc = self.mul(&acc, &g);
                }
                Ok(acc)
            }
            Group::Cyclic(m) => {
                let k: i64 = t.trim_start_matches('+').parse().map_err(|_| bad("expected an integer"))?;
                Ok(GroupElem::Ints(vec![k.rem_euclid(*m as i64)]))
            }
            Group::Free(k) => {
                let mut letters = Vec::new();
                for c in t.chars().filter(|c| !c.is_whitespace()) {
                    // `e` is the identity unless it names the fifth generator
                    if c == 'e' && *k < 5 {
                        continue;
                    }
                    let lower = c.to_ascii_lowercase();
                    let idx = (lower as u8).wrapping_sub(b'a');
                    if !c.is_ascii_alphabetic() || idx as usize >= *k {
                        return Err(bad("letter outside the generating set"));
                    }
                    letters.push((idx, if c.is_ascii_lowercase() { 1 } else { -1 }));
                }
                Ok(letters.iter().fold(self.identity(), |acc, &l| {
                    self.mul(&acc, &GroupElem::Word(vec![l]))
                }))
            }
        }
    }

    /// Parses a generator tuple; elements are separated by `;`, or by `,`
    /// when elements are single integers or words.
    pub fn parse_tuple(&self, s: &str) -> Result<Vec<GroupElem>> {
        let scalar = matches!(self, Group::Zd(1) | Group::Cyclic(_) | Group::Free(_))
            || (matches!(self, Group::Heisenberg) && !s.contains('('));
        let parts: Vec<&str> = if s.contains(';') || !scalar {
            s.split(';').collect()
        } else {
            s.split(',').collect()
        };
        let parts: Vec<&str> = if parts.len() == 1 && !scalar {
            split_tuples(s)
        } else {
            parts
        };
        parts
            .into_iter()
            .filter(|p| !p.trim().is_empty())
            .map(|p| self.parse_elem(p))
            .collect()
    }

    /// Positive characters are determined by their values on a basis:
    /// `Zd` takes d values, `Free` takes k, `Heisenberg` takes the values on x and y.
    pub fn character(&self, values: &[QuadNum], g: &GroupElem) -> Result<QuadNum> {
        let need = match self {
            Group::Zd(d) => *d,
            Group::Free(k) => *k,
            Group::Heisenberg => 2,
            Group::Cyclic(_) => 0,
        };
        if values.len() != need {
            return Err(Error::InvalidParameter(format!(
                "{self:?} needs {need} character values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_positive()) {
            return Err(Error::InvalidParameter(format!(
                "character values must be positive, got {v}"
            )));
        }
        let pw = |t: &QuadNum, k: i64| t.pow(k as i32);
        Ok(match g {
            GroupElem::Ints(xs) if need > 0 => xs
                .iter()
                .zip(values)
                .fold(QuadNum::one(), |acc, (&k, t)| acc * pw(t, k)),
            GroupElem::Ints(_) => QuadNum::one(),
            GroupElem::Word(ls) => ls
                .iter()
                .fold(QuadNum::one(), |acc, &(i, s)| acc * pw(&values[i as usize], s as i64)),
            &GroupElem::Heis(a, b, _) => pw(&values[0], a) * pw(&values[1], b),
        })
    }
}

fn split_tuples(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl std::str::FromStr for Group {
    type Err = Error;
    /// `z`, `z2`, `zd:3`, `cyclic:5`, `free:2`, `heisenberg`.
    fn from_str(s: &str) -> Result<Group> {
        let t = s.trim().to_ascii_lowercase();
        let num = |x: &str| {
            x.parse::<u64>()
                .map_err(|_| Error::Parse(format!("group {s:?}: bad size")))
        };
        match t.as_str() {
            "z" => Ok(Group::Zd(1)),
            "heisenberg" | "heis" | "h3" => Ok(Group::Heisenberg),
            _ => {
                if let Some(d) = t.strip_prefix("zd:") {
                    Ok(Group::Zd(num(d)? as usize))
                } else if let Some(m) = t.strip_prefix("cyclic:") {
                    let m = num(m)?;
                    if m == 0 {
                        return Err(Error::Parse("cyclic group of order 0".into()));
                    }
                    Ok(Group::Cyclic(m))
                } else if let Some(k) = t.strip_prefix("free:") {
                    Ok(Group::Free(num(k)? as usize))
                } else if let Some(d) = t.strip_prefix('z') {
                    Ok(Group::Zd(num(d)? as usize))
                } else {
                    Err(Error::Parse(format!("unknown group {s:?}")))
                }
            }
        }
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElem::Ints(xs) if xs.len() == 1 => write!(f, "{}", xs[0]),
            GroupElem::Ints(xs) => {
                let parts: Vec<String> = xs.iter().map(i64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            GroupElem::Word(ls) if ls.is_empty() => f.write_str("e"),
            GroupElem::Word(ls) => {
                for &(i, s) in ls {
                    let c = (b'a' + i) as char;
                    write!(f, "{}", if s > 0 { c } else { c.to_ascii_uppercase() })?;
                }
                Ok(())
            }
            GroupElem::Heis(a, b, c) => write!(f, "({a},{b},{c})"),
        }
    }
}
