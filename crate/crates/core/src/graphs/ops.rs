use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::QuadNum;
use crate::freegrp::{Automorphism, Letter, Word};

use super::{ball, RibbonGraph, Side, Vertex};

/// A function on vertices that can be evaluated pointwise.
pub trait VertexFun: Send + Sync {
    fn eval(&self, v: &Vertex) -> Result<QuadNum>;
}

/// Closure-backed vertex function.
pub struct Oracle<F>(pub F);

impl<F> VertexFun for Oracle<F>
where
    F: Fn(&Vertex) -> Result<QuadNum> + Send + Sync,
{
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        (self.0)(v)
    }
}

/// Finitely supported function; zero values are never stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SparseFun(BTreeMap<Vertex, QuadNum>);

impl SparseFun {
    pub fn new() -> Self {
        SparseFun(BTreeMap::new())
    }

    pub fn unit(v: Vertex) -> Self {
        let mut f = SparseFun::new();
        f.add_at(v, &QuadNum::one());
        f
    }

    pub fn get(&self, v: &Vertex) -> QuadNum {
        self.0.get(v).cloned().unwrap_or_else(QuadNum::zero)
    }

    pub fn add_at(&mut self, v: Vertex, c: &QuadNum) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(v) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vertex, &QuadNum)> {
        self.0.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vertex> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &SparseFun) -> SparseFun {
        let mut out = self.clone();
        for (v, c) in o.iter() {
            out.add_at(v.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &SparseFun) -> SparseFun {
        self.add(&o.scale(&QuadNum::int(-1)))
    }

    pub fn scale(&self, c: &QuadNum) -> SparseFun {
        if c.is_zero() {
            return SparseFun::new();
        }
        SparseFun(self.0.iter().map(|(v, x)| (v.clone(), x * c)).collect())
    }
}

impl FromIterator<(Vertex, QuadNum)> for SparseFun {
    fn from_iter<I: IntoIterator<Item = (Vertex, QuadNum)>>(iter: I) -> Self {
        let mut f = SparseFun::new();
        for (v, c) in iter {
            f.add_at(v, &c);
        }
        f
    }
}

impl fmt::Debug for SparseFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.0.iter().map(|(k, v)| (k.to_string(), v.to_string())))
            .finish()
    }
}

impl VertexFun for SparseFun {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        Ok(self.get(v))
    }
}

/// `(A x)(v) = sum over edges at v of x(neighbor)`.
pub fn adjacency(g: &dyn RibbonGraph, x: &SparseFun) -> SparseFun {
    let mut out = SparseFun::new();
    for (v, c) in x.iter() {
        for w in g.neighbors(v) {
            out.add_at(w, c);
        }
    }
    out
}

/// Restriction to one side of the bipartition.
pub fn project(g: &dyn RibbonGraph, x: &SparseFun, side: Side) -> SparseFun {
    x.iter()
        .filter(|(v, _)| g.side(v) == side)
        .map(|(v, c)| (v.clone(), c.clone()))
        .collect()
}

/// `H^{+-1}` adds `+-` the neighbor sums to A-values; `V^{+-1}` does the same on B.
pub fn upsilon_letter(g: &dyn RibbonGraph, l: Letter, x: &SparseFun) -> SparseFun {
    let target = if l.is_horizontal() { Side::A } else { Side::B };
    let k = QuadNum::int(l.power());
    let mut out = x.clone();
    for (v, c) in x.iter() {
        if g.side(v) == target {
            continue;
        }
        let kc = c * &k;
        for w in g.neighbors(v) {
            out.add_at(w, &kc);
        }
    }
    out
}

/// `Upsilon^g(x)`; the rightmost letter of `g` acts first.
pub fn upsilon(g: &dyn RibbonGraph, word: &Word, x: &SparseFun) -> SparseFun {
    word.letters()
        .iter()
        .rev()
        .fold(x.clone(), |acc, &l| upsilon_letter(g, l, &acc))
}

pub fn pairing(f: &dyn VertexFun, x: &SparseFun) -> Result<QuadNum> {
    let mut acc = QuadNum::zero();
    for (v, c) in x.iter() {
        acc = acc.try_add(&f.eval(v)?.try_mul(c)?)?;
    }
    Ok(acc)
}

/// `Upsilon^g(f)(v) = <f, Upsilon^{gamma(g^-1)}(e_v)>`, touching only the `|g|`-ball.
pub fn upsilon_eval(g: &dyn RibbonGraph, word: &Word, f: &dyn VertexFun, v: &Vertex) -> Result<QuadNum> {
    let dual = word.inv().apply(Automorphism::Gamma);
    pairing(f, &upsilon(g, &dual, &SparseFun::unit(v.clone())))
}

/// Perturbed action: `H_y(z) = H(z) + pi_A(y)`, `H^-1_y(z) = H^-1(z) - pi_A(y)`,
/// and the same for `V` with `pi_B`.
pub fn chi(g: &dyn RibbonGraph, y: &SparseFun, word: &Word, z: &SparseFun) -> SparseFun {
    let ya = project(g, y, Side::A);
    let yb = project(g, y, Side::B);
    word.letters().iter().rev().fold(z.clone(), |acc, &l| {
        let shift = if l.is_horizontal() { &ya } else { &yb };
        let moved = upsilon_letter(g, l, &acc);
        if l.is_positive() {
            moved.add(shift)
        } else {
            moved.sub(shift)
        }
    })
}

/// Values of an oracle on a ball, updated in place by generators. Each letter
/// shrinks the radius on which the values are exact by one.
pub struct Window<'g> {
    graph: &'g dyn RibbonGraph,
    dist: BTreeMap<Vertex, u32>,
    values: BTreeMap<Vertex, QuadNum>,
    valid: u32,
}

impl<'g> Window<'g> {
    pub fn new(graph: &'g dyn RibbonGraph, center: &Vertex, radius: u32, f: &dyn VertexFun) -> Result<Self> {
        let dist = ball(graph, center, radius);
        let values = dist
            .keys()
            .map(|v| Ok((v.clone(), f.eval(v)?)))
            .collect::<Result<_>>()?;
        Ok(Window {
            graph,
            dist,
            values,
            valid: radius,
        })
    }

    pub fn valid_radius(&self) -> u32 {
        self.valid
    }

    pub fn get(&self, v: &Vertex) -> Option<&QuadNum> {
        match self.dist.get(v) {
            Some(&d) if d <= self.valid => self.values.get(v),
            _ => None,
        }
    }

    pub fn apply(&mut self, l: Letter) -> Result<()> {
        if self.valid == 0 {
            return Err(Error::OutOfDomain("window exhausted".into()));
        }
        let target = if l.is_horizontal() { Side::A } else { Side::B };
        let k = QuadNum::int(l.power());
        let mut next = BTreeMap::new();
        for (v, &d) in &self.dist {
            if d >= self.valid {
                continue;
            }
            let mut val = self.values[v].clone();
            if self.graph.side(v) == target {
                let mut s = QuadNum::zero();
                for w in self.graph.neighbors(v) {
                    s = s.try_add(&self.values[&w])?;
                }
                val = val.try_add(&s.try_mul(&k)?)?;
            }
            next.insert(v.clone(), val);
        }
        self.values = next;
        self.valid -= 1;
        Ok(())
    }

    /// Vertices at which values are currently exact.
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.dist
            .iter()
            .filter(|(_, &d)| d <= self.valid)
            .map(|(v, _)| v)
    }
}
