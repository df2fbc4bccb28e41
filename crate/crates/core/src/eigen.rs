//! Closed-form positive eigenfunctions of the adjacency operator and exact
//! verification of the eigen-relation on balls.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::QuadNum;
use crate::graphs::{
    ball, GraphRef, Group, GroupElem, LineGraph, RegularTree, RibbonGraph, Side, SkewGraph, Tripod,
    Vertex, VertexFun,
};

/// Which closed-form family to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    GzConstant,
    GzExponential { t: QuadNum },
    Tripod { t: QuadNum },
    NTreeConstant { n: u8 },
    /// `q^{-h(v)}` for the Busemann function `h` of the end `0101...`.
    NTreeHorocyclic { n: u8, q: QuadNum },
    Character {
        group: Group,
        generators: Vec<GroupElem>,
        values: Vec<QuadNum>,
    },
}

#[derive(Clone)]
pub struct EigenFamily {
    pub id: String,
    pub params: Vec<(String, QuadNum)>,
    pub lambda: QuadNum,
    pub graph: GraphRef,
    pub oracle: Arc<dyn VertexFun>,
}

impl fmt::Debug for EigenFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenFamily")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl EigenFamily {
    pub fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        self.oracle.eval(v)
    }

    /// Rescales the oracle; the eigenvalue is unchanged.
    pub fn scaled(&self, c: QuadNum) -> Result<EigenFamily> {
        if !c.is_positive() {
            return Err(Error::InvalidParameter(format!("scale {c} must be positive")));
        }
        let mut out = self.clone();
        out.oracle = Arc::new(Scaled {
            inner: self.oracle.clone(),
            c,
        });
        Ok(out)
    }

    pub fn verify(&self, radius: u32) -> Result<EigenReport> {
        verify_eigen(self.graph.as_ref(), self.oracle.as_ref(), &self.lambda, radius)
    }
}

struct Scaled {
    inner: Arc<dyn VertexFun>,
    c: QuadNum,
}

impl VertexFun for Scaled {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        Ok(self.inner.eval(v)?.try_mul(&self.c)?)
    }
}

struct Constant(QuadNum);

impl VertexFun for Constant {
    fn eval(&self, _: &Vertex) -> Result<QuadNum> {
        Ok(self.0.clone())
    }
}

/// Integer powers of a fixed base, memoized; oracles on trees hit the same
/// few exponents millions of times.
struct Powers {
    base: QuadNum,
    table: RwLock<HashMap<i32, QuadNum>>,
}

impl Powers {
    fn new(base: QuadNum) -> Self {
        Powers {
            base,
            table: RwLock::new(HashMap::new()),
        }
    }

    fn get(&self, e: i64) -> Result<QuadNum> {
        let e = i32::try_from(e).map_err(|_| Error::OutOfDomain(format!("exponent {e} out of range")))?;
        if let Some(x) = self.table.read().unwrap().get(&e) {
            return Ok(x.clone());
        }
        let x = self.base.pow(e);
        self.table.write().unwrap().insert(e, x.clone());
        Ok(x)
    }
}

struct LinePower(Powers);

impl VertexFun for LinePower {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        match v {
            Vertex::Line(n) => self.0.get(*n),
            _ => Err(foreign(v)),
        }
    }
}

struct TripodFun {
    t: Powers,
    a: QuadNum,
}

impl VertexFun for TripodFun {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        let &Vertex::Star { ray, depth } = v else {
            return Err(foreign(v));
        };
        let j = depth as i64;
        let decay = self.t.get(-j)?;
        if ray == 0 {
            let one = QuadNum::one();
            Ok(&self.a * &self.t.get(j)? + &(&one - &self.a) * &decay)
        } else {
            Ok(decay)
        }
    }
}

struct Horocyclic {
    q: Powers,
}

impl VertexFun for Horocyclic {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        let Vertex::Tree(w) = v else {
            return Err(foreign(v));
        };
        let common = w
            .iter()
            .enumerate()
            .take_while(|&(i, &d)| d as usize == i % 2)
            .count();
        let h = w.len() as i64 - 2 * common as i64;
        self.q.get(-h)
    }
}

struct CharacterFun {
    group: Group,
    values: Vec<QuadNum>,
    /// `delta / lambda`, the B-side factor.
    b_factor: QuadNum,
}

impl VertexFun for CharacterFun {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        let Vertex::Skew { side, g } = v else {
            return Err(foreign(v));
        };
        let inv = self.group.character(&self.values, g)?.recip()?;
        match side {
            Side::A => Ok(inv),
            Side::B => Ok(inv.try_mul(&self.b_factor)?),
        }
    }
}

fn foreign(v: &Vertex) -> Error {
    Error::OutOfDomain(format!("{v} is not in the family's graph"))
}

fn need_positive(name: &str, x: &QuadNum) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

pub fn family_eigen(kind: &FamilyKind) -> Result<EigenFamily> {
    let fam = |id: &str, params: Vec<(&str, QuadNum)>, lambda, graph: GraphRef, oracle: Arc<dyn VertexFun>| {
        EigenFamily {
            id: id.into(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            lambda,
            graph,
            oracle,
        }
    };
    Ok(match kind {
        FamilyKind::GzConstant => fam(
            "gz_constant",
            vec![],
            QuadNum::int(2),
            Arc::new(LineGraph),
            Arc::new(Constant(QuadNum::one())),
        ),
        FamilyKind::GzExponential { t } => {
            need_positive("t", t)?;
            let lambda = t.try_add(&t.recip()?)?;
            fam(
                "gz_exponential",
                vec![("t", t.clone())],
                lambda,
                Arc::new(LineGraph),
                Arc::new(LinePower(Powers::new(t.clone()))),
            )
        }
        FamilyKind::Tripod { t } => {
            need_positive("t", t)?;
            let t2 = t.try_mul(t)?;
            if t2 < QuadNum::int(2) {
                return Err(Error::InvalidParameter(format!(
                    "tripod needs t >= sqrt(2), got {t}"
                )));
            }
            let ti = t.recip()?;
            let a = t
                .try_sub(&ti.try_mul(&QuadNum::int(2))?)?
                .try_div(&t.try_sub(&ti)?)?;
            fam(
                "tripod",
                vec![("t", t.clone()), ("a", a.clone())],
                t.try_add(&ti)?,
                Arc::new(Tripod),
                Arc::new(TripodFun {
                    t: Powers::new(t.clone()),
                    a,
                }),
            )
        }
        FamilyKind::NTreeConstant { n } => fam(
            "ntree_constant",
            vec![("n", QuadNum::int(*n as i64))],
            QuadNum::int(*n as i64),
            Arc::new(RegularTree::new(*n)?),
            Arc::new(Constant(QuadNum::one())),
        ),
        FamilyKind::NTreeHorocyclic { n, q } => {
            need_positive("q", q)?;
            let tree = RegularTree::new(*n)?;
            let lambda = q.try_add(&QuadNum::int(*n as i64 - 1).try_div(q)?)?;
            fam(
                "ntree_horocyclic",
                vec![("n", QuadNum::int(*n as i64)), ("q", q.clone())],
                lambda,
                Arc::new(tree),
                Arc::new(Horocyclic {
                    q: Powers::new(q.clone()),
                }),
            )
        }
        FamilyKind::Character {
            group,
            generators,
            values,
        } => return character_eigen(group, generators, values),
    })
}

/// Lift of a positive character: `chi(g)^{-1}` on `a_g`, the `1/lambda`-average
/// of the neighbors on `b_g`, with `lambda = sqrt(delta * epsilon)`.
pub fn character_eigen(group: &Group, generators: &[GroupElem], values: &[QuadNum]) -> Result<EigenFamily> {
    let skew = SkewGraph::new(group.clone(), generators.to_vec())?;
    let mut delta = QuadNum::zero();
    let mut eps = QuadNum::zero();
    for eta in &skew.eta {
        let c = group.character(values, eta)?;
        delta = delta.try_add(&c.recip()?)?;
        eps = eps.try_add(&c)?;
    }
    let product = delta.try_mul(&eps)?;
    let lambda = product.sqrt().map_err(|_| {
        Error::InvalidParameter(format!(
            "eigenvalue sqrt({product}) is not in a quadratic field"
        ))
    })?;
    let b_factor = delta.try_div(&lambda).map_err(|_| {
        Error::InvalidParameter(format!(
            "character values and eigenvalue {lambda} live in different quadratic fields"
        ))
    })?;
    let mut params = vec![
        ("delta".to_string(), delta),
        ("epsilon".to_string(), eps),
    ];
    params.extend(
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("chi{}", i + 1), v.clone())),
    );
    Ok(EigenFamily {
        id: "character".into(),
        params,
        lambda,
        graph: Arc::new(skew),
        oracle: Arc::new(CharacterFun {
            group: group.clone(),
            values: values.to_vec(),
            b_factor,
        }),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub radius: u32,
    pub checked: usize,
    /// Largest `|A f - lambda f|` on the ball.
    pub max_residual: QuadNum,
    /// Vertices with nonzero residual, at most a handful.
    pub violations: Vec<(Vertex, QuadNum)>,
    /// First vertex where the function is not strictly positive.
    pub nonpositive: Option<Vertex>,
}

impl EigenReport {
    pub fn is_exact(&self) -> bool {
        self.max_residual.is_zero()
    }
}

const MAX_VIOLATIONS: usize = 16;

struct Tally {
    checked: usize,
    max: QuadNum,
    violations: Vec<(Vertex, QuadNum)>,
    nonpositive: Option<Vertex>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            max: QuadNum::zero(),
            violations: Vec::new(),
            nonpositive: None,
        }
    }

    fn value(&mut self, v: &Vertex, x: &QuadNum) {
        if self.nonpositive.is_none() && !x.is_positive() {
            self.nonpositive = Some(v.clone());
        }
    }

    fn residual(&mut self, v: &Vertex, r: QuadNum) -> Result<()> {
        self.checked += 1;
        if r.is_zero() {
            return Ok(());
        }
        let r = r.abs();
        if r.try_cmp(&self.max)?.is_gt() {
            self.max = r.clone();
        }
        if self.violations.len() < MAX_VIOLATIONS {
            self.violations.push((v.clone(), r));
        }
        Ok(())
    }

    fn merge(&mut self, o: Tally) -> Result<()> {
        self.checked += o.checked;
        if o.max.try_cmp(&self.max)?.is_gt() {
            self.max = o.max;
        }
        for v in o.violations {
            if self.violations.len() < MAX_VIOLATIONS {
                self.violations.push(v);
            }
        }
        if self.nonpositive.is_none() {
            self.nonpositive = o.nonpositive;
        }
        Ok(())
    }
}

/// Exact residual of `A f = lambda f` on every vertex of the `r`-ball about the root.
pub fn verify_eigen(g: &dyn RibbonGraph, f: &dyn VertexFun, lambda: &QuadNum, r: u32) -> Result<EigenReport> {
    let tally = if g.is_tree() {
        verify_tree(g, f, lambda, r)?
    } else {
        verify_ball(g, f, lambda, r)?
    };
    Ok(EigenReport {
        radius: r,
        checked: tally.checked,
        max_residual: tally.max,
        violations: tally.violations,
        nonpositive: tally.nonpositive,
    })
}

fn verify_ball(g: &dyn RibbonGraph, f: &dyn VertexFun, lambda: &QuadNum, r: u32) -> Result<Tally> {
    let dist = ball(g, &g.root(), r + 1);
    let mut values = BTreeMap::new();
    let mut tally = Tally::new();
    for v in dist.keys() {
        let x = f.eval(v)?;
        tally.value(v, &x);
        values.insert(v.clone(), x);
    }
    for (v, &d) in &dist {
        if d > r {
            continue;
        }
        let mut s = QuadNum::zero();
        for w in g.neighbors(v) {
            s = s.try_add(&values[&w])?;
        }
        tally.residual(v, s.try_sub(&values[v].try_mul(lambda)?)?)?;
    }
    Ok(tally)
}

/// Depth-first walk of a tree ball; every vertex is evaluated once and nothing
/// beyond the current path is stored. Subtrees of the root run in parallel.
fn verify_tree(g: &dyn RibbonGraph, f: &dyn VertexFun, lambda: &QuadNum, r: u32) -> Result<Tally> {
    let root = g.root();
    let root_val = f.eval(&root)?;
    let mut tally = Tally::new();
    tally.value(&root, &root_val);
    let kids: Vec<(Vertex, QuadNum)> = g
        .neighbors(&root)
        .into_iter()
        .map(|w| Ok((w.clone(), f.eval(&w)?)))
        .collect::<Result<_>>()?;
    for (w, x) in &kids {
        tally.value(w, x);
    }
    let mut s = QuadNum::zero();
    for (_, x) in &kids {
        s = s.try_add(x)?;
    }
    tally.residual(&root, s.try_sub(&root_val.try_mul(lambda)?)?)?;
    if r == 0 {
        return Ok(tally);
    }
    let parts: Vec<Result<Tally>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kids
            .iter()
            .map(|(v, x)| {
                let (root, root_val) = (&root, &root_val);
                scope.spawn(move || walk_subtree(g, f, lambda, r, v, x, root, root_val))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("walker panicked")).collect()
    });
    for p in parts {
        tally.merge(p?)?;
    }
    Ok(tally)
}

#[allow(clippy::too_many_arguments)]
fn walk_subtree(
    g: &dyn RibbonGraph,
    f: &dyn VertexFun,
    lambda: &QuadNum,
    r: u32,
    start: &Vertex,
    start_val: &QuadNum,
    parent: &Vertex,
    parent_val: &QuadNum,
) -> Result<Tally> {
    let mut tally = Tally::new();
    // (vertex, its value, parent, parent value, depth)
    let mut stack = vec![(start.clone(), start_val.clone(), parent.clone(), parent_val.clone(), 1u32)];
    while let Some((v, x, p, px, d)) = stack.pop() {
        let mut s = px;
        for w in g.neighbors(&v) {
            if w == p {
                continue;
            }
            let y = f.eval(&w)?;
            s = s.try_add(&y)?;
            tally.value(&w, &y);
            if d < r {
                stack.push((w, y, v.clone(), x.clone(), d + 1));
            }
        }
        tally.residual(&v, s.try_sub(&x.try_mul(lambda)?)?)?;
    }
    Ok(tally)
}

/// `w(v_j) / w(v_1)` along a spoke, from `w_j = lambda w_{j-1} - w_{j-2}`, `w_0 = 0`.
pub fn spoke_profile(lambda: &QuadNum, k: usize) -> Result<Vec<QuadNum>> {
    crate::freegrp::check_lambda(lambda)?;
    let mut out = Vec::with_capacity(k);
    let (mut prev, mut cur) = (QuadNum::zero(), QuadNum::one());
    for _ in 0..k {
        out.push(cur.clone());
        let next = lambda.try_mul(&cur)?.try_sub(&prev)?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(out)
}

/// `(lambda - sqrt(lambda^2 - 4)) / 2`, the smallest neighbor ratio allowed away from spokes.
pub fn spoke_threshold(lambda: f64) -> f64 {
    (lambda - (lambda * lambda - 4.0).max(0.0).sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use crate::graphs::SparseFun;

    fn sqrt2() -> QuadNum {
        QuadNum::sqrt_int(2)
    }

    fn builtins() -> Vec<EigenFamily> {
        let z = Group::Zd(1);
        let h = Group::Heisenberg;
        vec![
            family_eigen(&FamilyKind::GzConstant).unwrap(),
            family_eigen(&FamilyKind::GzExponential { t: QuadNum::int(2) }).unwrap(),
            family_eigen(&FamilyKind::Tripod { t: sqrt2() }).unwrap(),
            family_eigen(&FamilyKind::Tripod { t: QuadNum::int(2) }).unwrap(),
            family_eigen(&FamilyKind::NTreeConstant { n: 3 }).unwrap(),
            family_eigen(&FamilyKind::NTreeHorocyclic { n: 3, q: q(3, 2) }).unwrap(),
            character_eigen(&z, &z.parse_tuple("1,-1").unwrap(), &[QuadNum::int(2)]).unwrap(),
            character_eigen(&h, &h.parse_tuple("x,X,y,Y").unwrap(), &[QuadNum::int(4), QuadNum::one()])
                .unwrap(),
        ]
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(family_eigen(&FamilyKind::GzConstant).unwrap().lambda, QuadNum::int(2));
        let e = family_eigen(&FamilyKind::GzExponential { t: QuadNum::int(2) }).unwrap();
        assert_eq!(e.lambda, q(5, 2));
        assert_eq!(e.eval(&Vertex::Line(-3)).unwrap(), q(1, 8));
        let tri = family_eigen(&FamilyKind::Tripod { t: sqrt2() }).unwrap();
        assert_eq!(tri.lambda, &q(3, 2) * &sqrt2());
        assert!(family_eigen(&FamilyKind::Tripod { t: q(7, 5) }).is_err());
        let tri2 = family_eigen(&FamilyKind::Tripod { t: QuadNum::int(2) }).unwrap();
        assert_eq!(tri2.params[1].1, q(2, 3));
    }

    #[test]
    fn tripod_at_spectral_radius_is_square_summable() {
        let tri = family_eigen(&FamilyKind::Tripod { t: sqrt2() }).unwrap();
        assert!(tri.params[1].1.is_zero());
        let mut total = QuadNum::zero();
        for depth in 0..40u32 {
            for ray in 0..3u8 {
                if depth == 0 && ray > 0 {
                    continue;
                }
                let x = tri.eval(&Vertex::Star { ray, depth }).unwrap();
                total = &total + &(&x * &x);
            }
        }
        assert!((total.to_f64() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn residuals_vanish() {
        for fam in builtins() {
            let r = if fam.id == "character" { 8 } else { 12 };
            let rep = fam.verify(r).unwrap();
            assert!(rep.is_exact(), "{} residual {:?}", fam.id, rep.violations);
            assert!(rep.nonpositive.is_none(), "{}", fam.id);
        }
    }

    #[test]
    fn perturbation_is_local() {
        let g = LineGraph;
        let bump = Vertex::Line(3);
        let f = crate::graphs::Oracle(move |v: &Vertex| {
            Ok(if *v == Vertex::Line(3) { QuadNum::int(2) } else { QuadNum::one() })
        });
        let rep = verify_eigen(&g, &f, &QuadNum::int(2), 6).unwrap();
        let bad: Vec<i64> = rep
            .violations
            .iter()
            .map(|(v, _)| match v {
                Vertex::Line(n) => *n,
                _ => unreachable!(),
            })
            .collect();
        let mut bad = bad;
        bad.sort();
        assert_eq!(bad, vec![2, 3, 4]);
        let _ = bump;
        // the ball walker and the tree walker agree
        let t = verify_ball(&g, &f, &QuadNum::int(2), 6).unwrap();
        assert_eq!(t.checked, rep.checked);
    }

    #[test]
    fn spokes() {
        let p = spoke_profile(&QuadNum::int(2), 6).unwrap();
        assert_eq!(p, (1..=6).map(QuadNum::int).collect::<Vec<_>>());
        assert_eq!(spoke_profile(&q(5, 2), 3).unwrap(), vec![QuadNum::one(), q(5, 2), q(21, 4)]);
        assert!(spoke_profile(&q(3, 2), 3).is_err());
        // a spoke glued to the constant function: values j on the spoke
        let lam = QuadNum::int(2);
        let prof = spoke_profile(&lam, 10).unwrap();
        for j in 2..prof.len() {
            assert_eq!(prof[j], &(&lam * &prof[j - 1]) - &prof[j - 2]);
        }
    }

    #[test]
    fn characters() {
        let z = Group::Zd(1);
        let gens = z.parse_tuple("1,-1").unwrap();
        let one = character_eigen(&z, &gens, &[QuadNum::one()]).unwrap();
        assert_eq!(one.lambda, QuadNum::int(2));
        // (1 + t) / sqrt(t) at t = 2
        let two = character_eigen(&z, &gens, &[QuadNum::int(2)]).unwrap();
        assert_eq!(two.lambda, &q(3, 2) * &sqrt2());
        let h = Group::Heisenberg;
        let hg = h.parse_tuple("x,X,y,Y").unwrap();
        let triv = character_eigen(&h, &hg, &[QuadNum::one(), QuadNum::one()]).unwrap();
        assert_eq!(triv.lambda, QuadNum::int(4));
        let skewed = character_eigen(&h, &hg, &[QuadNum::int(4), QuadNum::one()]).unwrap();
        assert_eq!(skewed.lambda, &QuadNum::sqrt_int(91) * &q(1, 2));
        assert!(character_eigen(&z, &gens, &[QuadNum::int(-2)]).is_err());
        let f2 = Group::Free(2);
        let fg = f2.parse_tuple("a,b,B,A").unwrap();
        let fam = character_eigen(&f2, &fg, &[QuadNum::int(3), q(1, 2)]).unwrap();
        assert!(fam.verify(6).unwrap().is_exact());
    }

    #[test]
    fn tree_eigenvalues_respect_spectral_radius() {
        for (n, qv) in [(3u8, q(1, 1)), (3, q(3, 2)), (4, QuadNum::sqrt_int(3)), (5, q(7, 3))] {
            let fam = family_eigen(&FamilyKind::NTreeHorocyclic { n, q: qv }).unwrap();
            let bound = 2.0 * ((n - 1) as f64).sqrt();
            assert!(fam.lambda.to_f64() >= bound - 1e-12);
            assert!(fam.verify(8).unwrap().is_exact());
        }
    }

    #[test]
    fn neighbor_ratios_clear_spoke_threshold() {
        for fam in builtins() {
            let g = fam.graph.as_ref();
            let thr = spoke_threshold(fam.lambda.to_f64());
            for v in ball(g, &g.root(), 5).into_keys() {
                let x = fam.eval(&v).unwrap().to_f64();
                for w in g.neighbors(&v) {
                    let y = fam.eval(&w).unwrap().to_f64();
                    assert!(y / x >= thr - 1e-12, "{} at {v}->{w}", fam.id);
                }
            }
        }
    }

    #[test]
    fn finite_support_is_never_an_eigenfunction() {
        let f = SparseFun::unit(Vertex::Line(0));
        let rep = verify_eigen(&LineGraph, &f, &QuadNum::int(2), 3).unwrap();
        assert!(!rep.is_exact());
    }
}
