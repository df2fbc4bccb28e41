//! The free group on `h`, `v`: reduced words, the representation `rho`, the
//! automorphisms `gamma`, `bar`, `delta`, and the sign action on quadrants.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{QMat2, QuadNum, SignPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    H,
    Hi,
    V,
    Vi,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::H, Letter::Hi, Letter::V, Letter::Vi];

    pub fn inv(self) -> Letter {
        match self {
            Letter::H => Letter::Hi,
            Letter::Hi => Letter::H,
            Letter::V => Letter::Vi,
            Letter::Vi => Letter::V,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Letter::H | Letter::Hi)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Letter::H | Letter::V)
    }

    /// Exponent sign: +1 for `h`, `v`; -1 for the inverses.
    pub fn power(self) -> i64 {
        if self.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn matrix(self, lambda: &QuadNum) -> QMat2 {
        let z = QuadNum::zero();
        let o = QuadNum::one();
        match self {
            Letter::H => QMat2::new(o.clone(), lambda.clone(), z, o),
            Letter::Hi => QMat2::new(o.clone(), -lambda, z, o),
            Letter::V => QMat2::new(o.clone(), z, lambda.clone(), o),
            Letter::Vi => QMat2::new(o.clone(), z, -lambda, o),
        }
    }

    /// Image of a sign pair under this generator.
    pub fn sign_act(self, s: SignPair) -> SignPair {
        use SignPair::*;
        match (self, s) {
            (Letter::H, PP | MP) => PP,
            (Letter::H, MM | PM) => MM,
            (Letter::Hi, PP | MP) => MP,
            (Letter::Hi, MM | PM) => PM,
            (Letter::V, PP | PM) => PP,
            (Letter::V, MM | MP) => MM,
            (Letter::Vi, PP | PM) => PM,
            (Letter::Vi, MM | MP) => MP,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::H => "h",
            Letter::Hi => "h^-1",
            Letter::V => "v",
            Letter::Vi => "v^-1",
        })
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Freely reduced word, stored leftmost letter first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Word) -> Word {
        Word::reduce(self.0.iter().chain(o.0.iter()).copied())
    }

    pub fn inv(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, k: usize) -> Word {
        Word::reduce(std::iter::repeat(self.0.iter().copied()).take(k).flatten())
    }

    /// `rho_lambda(g)`; requires `lambda >= 2`.
    pub fn rho(&self, lambda: &QuadNum) -> Result<QMat2> {
        check_lambda(lambda)?;
        let mut m = QMat2::identity();
        for l in &self.0 {
            m = m.try_mul(&l.matrix(lambda))?;
        }
        Ok(m)
    }

    pub fn apply(&self, a: Automorphism) -> Word {
        Word::reduce(self.0.iter().map(|&l| a.on_letter(l)))
    }

    /// Composite sign action; the rightmost letter acts first.
    pub fn sign_act(&self, s: SignPair) -> SignPair {
        self.0.iter().rev().fold(s, |acc, l| l.sign_act(acc))
    }
}

pub fn check_lambda(lambda: &QuadNum) -> Result<()> {
    if (lambda - &QuadNum::int(2)).is_negative() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be at least 2, got {lambda}"
        )));
    }
    Ok(())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for Word {
    type Err = Error;
    /// Accepts `h v^-1 h`, `hv^-1h`, `h^3`, `H` / `V` for inverses, and `e`.
    fn from_str(s: &str) -> Result<Word> {
        let bad = |why: &str| Error::Parse(format!("word {s:?}: {why}"));
        let cs: Vec<char> = s.chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < cs.len() {
            let c = cs[i];
            i += 1;
            let base = match c {
                c if c.is_whitespace() || c == '*' || c == '.' => continue,
                'e' | '1' => continue,
                'h' => Letter::H,
                'v' => Letter::V,
                'H' => Letter::Hi,
                'V' => Letter::Vi,
                _ => return Err(bad(&format!("unexpected {c:?}"))),
            };
            let mut exp: i64 = 1;
            if i < cs.len() && cs[i] == '^' {
                i += 1;
                let start = i;
                if i < cs.len() && (cs[i] == '-' || cs[i] == '+') {
                    i += 1;
                }
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = cs[start..i].iter().collect();
                exp = lit.parse().map_err(|_| bad("bad exponent"))?;
            } else if cs[i..].starts_with(&['⁻', '¹']) {
                i += 2;
                exp = -1;
            }
            let l = if exp < 0 { base.inv() } else { base };
            letters.extend(std::iter::repeat(l).take(exp.unsigned_abs() as usize));
        }
        Ok(Word::reduce(letters))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Automorphism {
    /// `h -> v^-1`, `v -> h^-1`
    Gamma,
    /// `h <-> v`
    Bar,
    /// `h -> h^-1`, `v -> v^-1`
    Delta,
}

impl Automorphism {
    pub fn on_letter(self, l: Letter) -> Letter {
        use Letter::*;
        match (self, l) {
            (Automorphism::Gamma, H) => Vi,
            (Automorphism::Gamma, V) => Hi,
            (Automorphism::Gamma, Hi) => V,
            (Automorphism::Gamma, Vi) => H,
            (Automorphism::Bar, H) => V,
            (Automorphism::Bar, V) => H,
            (Automorphism::Bar, Hi) => Vi,
            (Automorphism::Bar, Vi) => Hi,
            (Automorphism::Delta, l) => l.inv(),
        }
    }
}

impl FromStr for Automorphism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" | "γ" => Ok(Automorphism::Gamma),
            "bar" => Ok(Automorphism::Bar),
            "delta" | "δ" => Ok(Automorphism::Delta),
            _ => Err(Error::Parse(format!("unknown automorphism {s:?}"))),
        }
    }
}

/// A geodesic ray from the identity, stored by its increments
/// `x_n = g_n g_{n-1}^-1`, so that `g_n = x_n ... x_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GeodesicRay {
    increments: Vec<Letter>,
}

impl GeodesicRay {
    pub fn new(increments: Vec<Letter>) -> Result<Self> {
        for (i, w) in increments.windows(2).enumerate() {
            if w[1] == w[0].inv() {
                return Err(Error::NotGeodesic(i + 1));
            }
        }
        Ok(GeodesicRay { increments })
    }

    pub fn increments(&self) -> &[Letter] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// `g_n`; `g_0 = e`.
    pub fn g(&self, n: usize) -> Word {
        Word(self.increments[..n].iter().rev().copied().collect())
    }

    pub fn push(&mut self, l: Letter) -> Result<()> {
        if self.increments.last() == Some(&l.inv()) {
            return Err(Error::NotGeodesic(self.increments.len()));
        }
        self.increments.push(l);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, QVec2};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("h h^-1"), Word::identity());
        assert_eq!(w("h v^-1 h").len(), 3);
        assert_eq!(w("v h h^-1 v"), w("v^2"));
        assert_eq!(w("hVh").to_string(), "h v^-1 h");
    }

    #[test]
    fn rho_examples() {
        let lam = q(7, 3);
        assert_eq!(w("h").rho(&lam).unwrap(), Letter::H.matrix(&lam));
        assert_eq!(Word::identity().rho(&lam).unwrap(), QMat2::identity());
        assert_eq!(w("h v^-1").rho(&QuadNum::int(2)).unwrap(), QMat2::ints(-3, 2, -2, 1));
        assert!(w("h").rho(&q(3, 2)).is_err());
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(w("h").apply(Automorphism::Gamma), w("v^-1"));
        assert_eq!(w("h v").apply(Automorphism::Bar), w("v h"));
        assert_eq!(w("h v^-1").apply(Automorphism::Delta), w("h^-1 v"));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(w("h").sign_act(SignPair::MP), SignPair::PP);
        for s in SignPair::ALL {
            assert_eq!(Word::identity().sign_act(s), s);
        }
        assert_eq!(w("v^-1").sign_act(SignPair::PP), SignPair::PM);
    }

    #[test]
    fn geodesic_rejects_backtrack() {
        assert_eq!(
            GeodesicRay::new(vec![Letter::H, Letter::V, Letter::Vi]),
            Err(Error::NotGeodesic(2))
        );
        let r = GeodesicRay::new(vec![Letter::V, Letter::H, Letter::H]).unwrap();
        assert_eq!(r.g(3), w("h h v"));
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..4, 0..=max)
            .prop_map(|ix| Word::reduce(ix.into_iter().map(|i| Letter::ALL[i])))
    }

    fn lambda_strategy() -> impl Strategy<Value = QuadNum> {
        prop_oneof![
            Just(QuadNum::int(2)),
            Just(q(5, 2)),
            Just(QuadNum::int(3)),
            Just("3/2*sqrt(2)".parse().unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn rho_is_homomorphism(a in word_strategy(12), b in word_strategy(12), lam in lambda_strategy()) {
            let lhs = a.mul(&b).rho(&lam).unwrap();
            let rhs = a.rho(&lam).unwrap().mul(&b.rho(&lam).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn gamma_is_inverse_transpose(g in word_strategy(12), lam in lambda_strategy()) {
            let m = g.rho(&lam).unwrap();
            prop_assert_eq!(g.apply(Automorphism::Gamma).rho(&lam).unwrap(), m.inverse_transpose().unwrap());
            prop_assert_eq!(m.det(), QuadNum::one());
        }

        #[test]
        fn bar_is_coordinate_swap(g in word_strategy(10), lam in lambda_strategy()) {
            let swap = QMat2::ints(0, 1, 1, 0);
            let m = g.rho(&lam).unwrap();
            prop_assert_eq!(g.apply(Automorphism::Bar).rho(&lam).unwrap(), swap.mul(&m).mul(&swap));
        }

        #[test]
        fn automorphisms_are_involutions(g in word_strategy(16)) {
            for a in [Automorphism::Gamma, Automorphism::Bar, Automorphism::Delta] {
                prop_assert_eq!(g.apply(a).apply(a), g.clone());
            }
        }

        #[test]
        fn words_round_trip(g in word_strategy(16)) {
            prop_assert_eq!(g.to_string().parse::<Word>().unwrap(), g.clone());
            prop_assert_eq!(g.mul(&g.inv()), Word::identity());
        }

        #[test]
        fn sign_table_matches_matrices(
            gen in 0usize..4, sx in prop::bool::ANY, sy in prop::bool::ANY,
            num in 1i64..400, den in 1i64..400, lam in lambda_strategy()
        ) {
            let l = Letter::ALL[gen];
            let x = if sx { num } else { -num };
            let y = if sy { den } else { -den };
            let v = QVec2::ints(x, y);
            let img = l.matrix(&lam).apply(&v);
            prop_assume!(img.norm_sq() > v.norm_sq());
            let s = v.quadrant().unwrap();
            prop_assert_eq!(img.quadrant(), Some(l.sign_act(s)));
        }
    }
}
