//! Invariant measures through their cohomology classes: planes `P_f`,
//! survivor and decay checks, transverse measures of intervals and the
//! boundary map of the conjugacy between two surfaces.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::dynamics::{Branch, Flow, HPoint};
use crate::eigen::EigenFamily;
use crate::error::{Error, Result};
use crate::exact::{QMat2, QVec2, QuadNum, SignPair};
use crate::freegrp::Letter;
use crate::graphs::{
    ball, pairing, Edge, GraphRef, Group, RibbonGraph, Side, SparseFun, Vertex, VertexFun, Window,
};
use crate::renorm::{critical_times, sign_sequence, ShrinkData};

/// `P_f(x, y)`: `x f` on A-vertices, `y f` on B-vertices.
#[derive(Clone)]
pub struct Plane {
    graph: GraphRef,
    f: Arc<dyn VertexFun>,
    v: QVec2,
}

impl fmt::Debug for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plane({})", self.v)
    }
}

impl VertexFun for Plane {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        let c = match self.graph.side(v) {
            Side::A => &self.v.x,
            Side::B => &self.v.y,
        };
        if c.is_zero() {
            return Ok(QuadNum::zero());
        }
        Ok(self.f.eval(v)?.try_mul(c)?)
    }
}

pub fn plane_point(graph: GraphRef, f: Arc<dyn VertexFun>, v: &QVec2) -> Plane {
    Plane {
        graph,
        f,
        v: v.clone(),
    }
}

/// `(A^2 - I) f`, evaluated pointwise.
pub struct AdjSquareMinusOne {
    pub graph: GraphRef,
    pub f: Arc<dyn VertexFun>,
}

impl VertexFun for AdjSquareMinusOne {
    fn eval(&self, v: &Vertex) -> Result<QuadNum> {
        let mut acc = self.f.eval(v)?.try_mul(&QuadNum::int(-1))?;
        for w in self.graph.neighbors(v) {
            for u in self.graph.neighbors(&w) {
                acc = acc.try_add(&self.f.eval(&u)?)?;
            }
        }
        Ok(acc)
    }
}

/// A vertex where `Upsilon^{g_n} f` leaves the quadrant `Q_{s_n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub vertex: Vertex,
    pub value: QuadNum,
    pub sign: SignPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivorReport {
    pub depth: usize,
    pub checked: usize,
    pub witness: Option<Witness>,
}

impl SurvivorReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// `Upsilon^{g_n}(f)(v)` for `n = 0..=depth`. Since `g_n = x_n g_{n-1}`, each
/// increment acts on the previous function, so one window serves all `n`.
pub fn upsilon_prefix_values(
    g: &dyn RibbonGraph,
    f: &dyn VertexFun,
    ray: &[Letter],
    depth: usize,
    v: &Vertex,
) -> Result<Vec<QuadNum>> {
    check_depth(ray, depth)?;
    let mut win = Window::new(g, v, depth as u32, f)?;
    let mut out = vec![win.get(v).expect("center").clone()];
    for &l in &ray[..depth] {
        win.apply(l)?;
        out.push(win.get(v).expect("center").clone());
    }
    Ok(out)
}

fn check_depth(ray: &[Letter], depth: usize) -> Result<()> {
    if depth > ray.len() {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} exceeds the {} known increments",
            ray.len()
        )));
    }
    Ok(())
}

fn sign_ok(value: &QuadNum, s: SignPair, side: Side) -> bool {
    let want = match side {
        Side::A => s.sx(),
        Side::B => s.sy(),
    };
    value.is_zero() || value.signum() == want
}

/// Checks `Upsilon^{g_n}(f) in cl(Q_{s_n})` for `n <= depth` on the ball of
/// the given radius; the first violation (smallest `n`) is the witness.
pub fn survivor_check_signs(
    g: &dyn RibbonGraph,
    f: &dyn VertexFun,
    ray: &[Letter],
    signs: &[SignPair],
    depth: usize,
    center: &Vertex,
    radius: u32,
) -> Result<SurvivorReport> {
    check_depth(ray, depth)?;
    if signs.len() <= depth {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} exceeds the {} known signs",
            signs.len()
        )));
    }
    let mut win = Window::new(g, center, radius + depth as u32, f)?;
    let inside: Vec<Vertex> = ball(g, center, radius).into_keys().collect();
    for n in 0..=depth {
        if n > 0 {
            win.apply(ray[n - 1])?;
        }
        for v in &inside {
            let value = win.get(v).expect("inside the valid radius");
            if !sign_ok(value, signs[n], g.side(v)) {
                return Ok(SurvivorReport {
                    depth,
                    checked: inside.len(),
                    witness: Some(Witness {
                        n,
                        vertex: v.clone(),
                        value: value.clone(),
                        sign: signs[n],
                    }),
                });
            }
        }
    }
    Ok(SurvivorReport {
        depth,
        checked: inside.len(),
        witness: None,
    })
}

pub fn survivor_check(
    g: &dyn RibbonGraph,
    f: &dyn VertexFun,
    data: &ShrinkData,
    depth: usize,
    center: &Vertex,
    radius: u32,
) -> Result<SurvivorReport> {
    let signs = sign_sequence(data)?;
    survivor_check_signs(g, f, &data.ray, &signs, depth, center, radius)
}

/// Vertices within `radius` of `center`.
pub fn window(g: &dyn RibbonGraph, center: &Vertex, radius: u32) -> Vec<Vertex> {
    ball(g, center, radius).into_keys().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub vertex: Vertex,
    /// `|Upsilon^{g_n}(f)(v)|`, `n = 0..=depth`.
    pub values: Vec<QuadNum>,
    pub nonincreasing: bool,
    pub critical: Vec<usize>,
    /// First critical time with value at most half the initial one.
    pub halving_time: Option<usize>,
}

pub fn decay_profile(
    g: &dyn RibbonGraph,
    f: &dyn VertexFun,
    v: &Vertex,
    data: &ShrinkData,
    depth: usize,
) -> Result<DecayProfile> {
    let values: Vec<QuadNum> = upsilon_prefix_values(g, f, &data.ray, depth, v)?
        .into_iter()
        .map(|x| x.abs())
        .collect();
    let nonincreasing = values.windows(2).all(|p| p[1] <= p[0]);
    let critical: Vec<usize> = critical_times(data)?
        .into_iter()
        .filter(|&n| n <= depth)
        .collect();
    let half = values[0].try_div(&QuadNum::int(2))?;
    let halving_time = critical.iter().copied().find(|&n| values[n] <= half);
    Ok(DecayProfile {
        vertex: v.clone(),
        values,
        nonincreasing,
        critical,
        halving_time,
    })
}

/// First `i` with `rho^{g_i} v` outside the closed quadrant `cl(Q_{s_i})`.
pub fn quadrant_exit(lambda: &QuadNum, ray: &[Letter], signs: &[SignPair], v: &QVec2) -> Result<Option<usize>> {
    let mut m = QMat2::identity();
    for (i, s) in signs.iter().enumerate() {
        let img = m.try_apply(v)?;
        let bad = |c: &QuadNum, want: i8| !c.is_zero() && c.signum() != want;
        if bad(&img.x, s.sx()) || bad(&img.y, s.sy()) {
            return Ok(Some(i));
        }
        if i < ray.len() {
            m = ray[i].matrix(lambda).try_mul(&m)?;
        } else {
            break;
        }
    }
    Ok(None)
}

/// Integer intersection vector of a path with the cylinders, built from the
/// closed form `dx / w(b) - dy / w(a)`; pairs with any vertex function.
type Cocycle = SparseFun;

/// Transverse measures of intervals of the circles in a fixed direction.
pub struct MeasureEngine<'f> {
    flow: &'f mut Flow<QuadNum>,
    f: Arc<dyn VertexFun>,
    depth: usize,
    max_pieces: usize,
    cells: BTreeMap<Edge, Vec<MeasuredCell>>,
}

/// A depth-`K` coding cell `[lo, hi)` of `I_e` (offsets) and its measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredCell {
    pub lo: QuadNum,
    pub hi: QuadNum,
    pub measure: QuadNum,
}

/// A measurement and a bound on its error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub value: QuadNum,
    pub error: QuadNum,
}

struct Piece {
    l0: QuadNum,
    len: QuadNum,
    a: Vertex,
    t: QuadNum,
    path: Cocycle,
}

impl<'f> MeasureEngine<'f> {
    pub fn new(flow: &'f mut Flow<QuadNum>, f: Arc<dyn VertexFun>, depth: usize) -> Self {
        MeasureEngine {
            flow,
            f,
            depth,
            max_pieces: 200_000,
            cells: BTreeMap::new(),
        }
    }

    pub fn with_max_pieces(mut self, n: usize) -> Self {
        self.max_pieces = n;
        self
    }

    /// Integral of the B-part of the form along `H_a` from the origin to `x`
    /// (any real `x`, winding included).
    fn horizontal(&mut self, a: &Vertex, x: &QuadNum) -> Result<Cocycle> {
        let c = self.flow.circle(a)?;
        let g = self.flow.surface().graph.clone();
        let (k, r) = x.rem_euclid(&c.length);
        let mut out = SparseFun::new();
        if k != BigInt::from(0) {
            let kq = QuadNum::from(BigRational::from_integer(k));
            for e in &c.edges {
                out.add_at(g.beta(e), &kq);
            }
        }
        for (i, e) in c.edges.iter().enumerate() {
            let end = c.starts[i].try_add(&c.widths[i])?;
            if end <= r {
                out.add_at(g.beta(e), &QuadNum::one());
            } else {
                if c.starts[i] < r {
                    let frac = r.try_sub(&c.starts[i])?.try_div(&c.widths[i])?;
                    out.add_at(g.beta(e), &frac);
                }
                break;
            }
        }
        Ok(out)
    }

    fn horizontal_diff(&mut self, a: &Vertex, x1: &QuadNum, x2: &QuadNum) -> Result<Cocycle> {
        Ok(self.horizontal(a, x2)?.sub(&self.horizontal(a, x1)?))
    }

    fn cells_of(&mut self, e: &Edge) -> Result<Vec<MeasuredCell>> {
        if let Some(c) = self.cells.get(e) {
            return Ok(c.clone());
        }
        let g = self.flow.surface().graph.clone();
        let slope = self.flow.slope().clone();
        let home = self.flow.circle(&e.a)?;
        let start = home.starts[e.slot].clone();
        let width = home.widths[e.slot].clone();
        let end = start.try_add(&width)?;
        // cut points (circle coordinates on H_{alpha(e)}) with the form's
        // integral along their trajectory up to the corner they reach
        let mut cuts: Vec<(QuadNum, Cocycle)> = vec![(start.clone(), SparseFun::new()), (end.clone(), SparseFun::new())];
        let mut pieces = vec![Piece {
            l0: start.clone(),
            len: width,
            a: e.a.clone(),
            t: start.clone(),
            path: SparseFun::new(),
        }];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(pieces.len());
            for p in pieces {
                let here = HPoint {
                    a: p.a.clone(),
                    t: p.t.clone(),
                };
                let (edge, off) = self.flow.resolve(&here, Branch::Right)?;
                let n = g.north(&edge);
                let c = self.flow.circle(&n.a)?;
                let s = c.starts[n.slot].try_add(&off)?;
                let top = s.try_add(&slope.try_mul(&c.height)?)?;
                let mut path = p.path.add(&self.horizontal_diff(&n.a, &s, &top)?);
                path.add_at(n.a.clone(), &QuadNum::int(-1));
                // slot boundaries strictly inside [top, top + len)
                let stop = top.try_add(&p.len)?;
                let mut inner = Vec::new();
                let (k0, _) = top.rem_euclid(&c.length);
                let mut m = QuadNum::from(BigRational::from_integer(k0));
                'outer: loop {
                    let base = m.try_mul(&c.length)?;
                    for st in &c.starts {
                        let b = base.try_add(st)?;
                        if b >= stop {
                            break 'outer;
                        }
                        if b > top {
                            inner.push(b);
                        }
                    }
                    m = m.try_add(&QuadNum::one())?;
                }
                let mut left = (p.l0.clone(), top.clone(), path);
                for b in inner {
                    let shift = b.try_sub(&left.1)?;
                    let c0 = left.0.try_add(&shift)?;
                    let at_cut = left
                        .2
                        .add(&self.horizontal_diff(&n.a, &left.1, &b)?)
                        .sub(&self.horizontal_diff(&e.a, &left.0, &c0)?);
                    cuts.push((c0.clone(), at_cut.clone()));
                    next.push(Piece {
                        l0: left.0.clone(),
                        len: shift,
                        a: n.a.clone(),
                        t: left.1.rem_euclid(&c.length).1,
                        path: left.2,
                    });
                    left = (c0, b, at_cut);
                }
                let len = p.l0.try_add(&p.len)?.try_sub(&left.0)?;
                next.push(Piece {
                    l0: left.0,
                    len,
                    a: n.a.clone(),
                    t: left.1.rem_euclid(&c.length).1,
                    path: left.2,
                });
            }
            if next.len() > self.max_pieces {
                return Err(Error::Budget(format!(
                    "more than {} pieces while refining {e}",
                    self.max_pieces
                )));
            }
            pieces = next;
        }
        cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("one field"));
        cuts.dedup_by(|x, y| x.0 == y.0);
        let mut cells = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (p, ip) = &w[0];
            let (q, iq) = &w[1];
            let class = iq.sub(ip).add(&self.horizontal_diff(&e.a, p, q)?);
            let measure = pair_integral(self.f.as_ref(), &class)?.abs();
            cells.push(MeasuredCell {
                lo: p.try_sub(&start)?,
                hi: q.try_sub(&start)?,
                measure,
            });
        }
        self.cells.insert(e.clone(), cells.clone());
        Ok(cells)
    }

    /// Depth-`K` cells of `I_e`.
    pub fn cells(&mut self, e: &Edge) -> Result<Vec<MeasuredCell>> {
        self.cells_of(e)
    }

    /// Measure of `[lo, hi]` (offsets in `I_e`): full cells inside, plus the
    /// cells meeting it partially as the error bound.
    pub fn edge_segment(&mut self, e: &Edge, lo: &QuadNum, hi: &QuadNum) -> Result<Measured> {
        let mut value = QuadNum::zero();
        let mut error = QuadNum::zero();
        if hi <= lo {
            return Ok(Measured { value, error });
        }
        for c in self.cells_of(e)? {
            if c.hi <= *lo || c.lo >= *hi {
                continue;
            }
            if c.lo >= *lo && c.hi <= *hi {
                value = value.try_add(&c.measure)?;
            } else {
                error = error.try_add(&c.measure)?;
            }
        }
        Ok(Measured { value, error })
    }

    /// `mu([0, t])` for the initial segment of `I_e`.
    pub fn transversal_measure(&mut self, e: &Edge, t: &QuadNum) -> Result<Measured> {
        let w = self.flow.surface().width(e)?;
        if t.is_negative() || *t > w {
            return Err(Error::InvalidParameter(format!("{t} is outside I_{e}")));
        }
        self.edge_segment(e, &QuadNum::zero(), t)
    }

    /// Measure of the arc of `H_a` from `from` of length `len`, winding as
    /// often as needed.
    pub fn arc(&mut self, a: &Vertex, from: &QuadNum, len: &QuadNum) -> Result<Measured> {
        let c = self.flow.circle(a)?;
        let mut value = QuadNum::zero();
        let mut error = QuadNum::zero();
        let stop = from.try_add(len)?;
        let (k0, _) = from.rem_euclid(&c.length);
        let mut m = QuadNum::from(BigRational::from_integer(k0));
        'outer: loop {
            let base = m.try_mul(&c.length)?;
            for (i, e) in c.edges.iter().enumerate() {
                let s = base.try_add(&c.starts[i])?;
                if s >= stop {
                    break 'outer;
                }
                let t = s.try_add(&c.widths[i])?;
                if t <= *from {
                    continue;
                }
                let lo = from.clone().max(s.clone()).try_sub(&s)?;
                let hi = stop.clone().min(t).try_sub(&s)?;
                let part = self.edge_segment(e, &lo, &hi)?;
                value = value.try_add(&part.value)?;
                error = error.try_add(&part.error)?;
            }
            m = m.try_add(&QuadNum::one())?;
        }
        Ok(Measured { value, error })
    }

    pub fn flow(&mut self) -> &mut Flow<QuadNum> {
        self.flow
    }
}

/// `<f, Z>` for an integer cocycle; non-integer coefficients mean the path
/// was not closed relative to the corners.
fn pair_integral(f: &dyn VertexFun, class: &Cocycle) -> Result<QuadNum> {
    for (v, c) in class.iter() {
        if !c.is_rational() || !c.a().is_integer() {
            return Err(Error::InvalidParameter(format!(
                "cell class has non-integer coefficient {c} at {v}"
            )));
        }
    }
    pairing(f, class)
}

/// A point on the boundary of `R_e`: bottom and top at horizontal offset,
/// left and right side at height.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundaryPoint {
    Bottom { edge: Edge, x: QuadNum },
    Top { edge: Edge, x: QuadNum },
    Left { edge: Edge, y: QuadNum },
    Right { edge: Edge, y: QuadNum },
}

impl BoundaryPoint {
    pub fn edge(&self) -> &Edge {
        match self {
            BoundaryPoint::Bottom { edge, .. }
            | BoundaryPoint::Top { edge, .. }
            | BoundaryPoint::Left { edge, .. }
            | BoundaryPoint::Right { edge, .. } => edge,
        }
    }
}

/// Image of a boundary point of `R_e` in `S(G, w_1)` under the conjugacy to
/// `S(G, w_2)`, as the same kind of boundary point of `R_e` there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugatePoint {
    pub point: BoundaryPoint,
    pub error: QuadNum,
}

/// `f = P_{w_2}(theta_2)` measured in direction `theta_1` on `S(G, w_1)`;
/// the coordinate of the image is the measure of the initial segment divided
/// by `|y_2|` (horizontal sides) or `|x_2|` (vertical sides).
pub fn conjugate_boundary_point(
    engine: &mut MeasureEngine<'_>,
    theta2: &QVec2,
    p: &BoundaryPoint,
) -> Result<ConjugatePoint> {
    let g = engine.flow().surface().graph.clone();
    let scale = |m: Measured, by: &QuadNum| -> Result<(QuadNum, QuadNum)> {
        let d = by.abs();
        if d.is_zero() {
            return Err(Error::InvalidParameter("direction is parallel to the side".into()));
        }
        Ok((m.value.try_div(&d)?, m.error.try_div(&d)?))
    };
    match p {
        BoundaryPoint::Bottom { edge, x } => {
            let below = g.north_inv(edge);
            let (x2, err) = scale(engine.transversal_measure(&below, x)?, &theta2.y)?;
            Ok(ConjugatePoint {
                point: BoundaryPoint::Bottom { edge: edge.clone(), x: x2 },
                error: err,
            })
        }
        BoundaryPoint::Top { edge, x } => {
            let (x2, err) = scale(engine.transversal_measure(edge, x)?, &theta2.y)?;
            Ok(ConjugatePoint {
                point: BoundaryPoint::Top { edge: edge.clone(), x: x2 },
                error: err,
            })
        }
        BoundaryPoint::Right { edge, y } => {
            let left = BoundaryPoint::Left {
                edge: g.east(edge),
                y: y.clone(),
            };
            let img = conjugate_boundary_point(engine, theta2, &left)?;
            let BoundaryPoint::Left { y, .. } = img.point else {
                unreachable!()
            };
            Ok(ConjugatePoint {
                point: BoundaryPoint::Right { edge: edge.clone(), y },
                error: img.error,
            })
        }
        BoundaryPoint::Left { edge, y } => {
            // slide the segment from the bottom-left corner up to height y
            // along the flow onto the top circle of the cylinder
            let flow = engine.flow();
            let circle = flow.circle(&edge.a)?;
            let h = circle.height.clone();
            if y.is_negative() || *y > h {
                return Err(Error::InvalidParameter(format!("{y} is outside the side of R_{edge}")));
            }
            let u = flow.slope().clone();
            if u.is_zero() {
                return Err(Error::InvalidParameter("vertical flow is parallel to the side".into()));
            }
            let corner = circle.starts[edge.slot].try_add(&u.try_mul(&h)?)?;
            let len = y.try_mul(&u.abs())?;
            let from = if u.is_positive() { corner.try_sub(&len)? } else { corner };
            let (y2, err) = scale(engine.arc(&edge.a, &from, &len)?, &theta2.x)?;
            Ok(ConjugatePoint {
                point: BoundaryPoint::Left { edge: edge.clone(), y: y2 },
                error: err,
            })
        }
    }
}

/// `f(b_g) chi(g)` over the B-vertices of a ball, which is constant for the
/// measure class of a Maharam measure.
pub fn maharam_check(
    fam: &EigenFamily,
    group: &Group,
    chi: &[QuadNum],
    theta: &QVec2,
    radius: u32,
) -> Result<(bool, Vec<QuadNum>)> {
    let g = fam.graph.as_ref();
    let f = plane_point(fam.graph.clone(), fam.oracle.clone(), theta);
    let mut seen = Vec::new();
    for v in ball(g, &g.root(), radius).into_keys() {
        let Vertex::Skew { side: Side::B, g: elem } = &v else {
            continue;
        };
        seen.push(f.eval(&v)?.try_mul(&group.character(chi, elem)?)?);
    }
    if seen.is_empty() {
        return Err(Error::InvalidParameter(format!("{} is not a skew graph", fam.graph.name())));
    }
    let constant = seen.windows(2).all(|p| p[0] == p[1]);
    Ok((constant, seen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{character_eigen, family_eigen, FamilyKind};
    use crate::exact::q;
    use crate::freegrp::Word;
    use crate::graphs::upsilon_eval;
    use crate::renorm::{direction_from_sequence, shrinking_sequence, Direction, RaySpec};
    use crate::surface::Surface;

    fn theta_of(lambda: &QuadNum) -> QVec2 {
        let spec: RaySpec = "(h^-1 v^-1)".parse().unwrap();
        let Direction::Exact(t) = direction_from_sequence(lambda, &spec).unwrap() else {
            panic!()
        };
        t
    }

    struct Pair {
        w1: EigenFamily,
        w2: EigenFamily,
        theta1: QVec2,
        theta2: QVec2,
    }

    impl Pair {
        fn new(k1: FamilyKind, k2: FamilyKind) -> Pair {
            let w1 = family_eigen(&k1).unwrap();
            let w2 = family_eigen(&k2).unwrap();
            let theta1 = theta_of(&w1.lambda);
            let theta2 = theta_of(&w2.lambda);
            Pair { w1, w2, theta1, theta2 }
        }

        fn survivor(&self, theta2: &QVec2) -> Plane {
            plane_point(self.w2.graph.clone(), self.w2.oracle.clone(), theta2)
        }

        fn data(&self, n: usize) -> ShrinkData {
            shrinking_sequence(&self.w1.lambda, &self.theta1, n).unwrap()
        }
    }

    fn gz_pair() -> Pair {
        Pair::new(FamilyKind::GzConstant, FamilyKind::GzExponential { t: QuadNum::int(2) })
    }

    fn tripod_pair() -> Pair {
        Pair::new(
            FamilyKind::Tripod { t: QuadNum::int(2) },
            FamilyKind::Tripod { t: QuadNum::int(3) },
        )
    }

    #[test]
    fn plane_examples() {
        let fam = family_eigen(&FamilyKind::Tripod { t: QuadNum::int(2) }).unwrap();
        let g = fam.graph.clone();
        let id = plane_point(g.clone(), fam.oracle.clone(), &QVec2::ints(1, 1));
        let bonly = plane_point(g.clone(), fam.oracle.clone(), &QVec2::ints(0, 1));
        for v in window(g.as_ref(), &g.root(), 3) {
            assert_eq!(id.eval(&v).unwrap(), fam.eval(&v).unwrap());
            let want = if g.side(&v) == Side::B { fam.eval(&v).unwrap() } else { QuadNum::zero() };
            assert_eq!(bonly.eval(&v).unwrap(), want);
        }
        // Upsilon^g(P_f(v)) = P_f(rho^g v)
        let v = QVec2::new(q(3, 2), q(-1, 5));
        let p = plane_point(g.clone(), fam.oracle.clone(), &v);
        for word in ["h", "v^-1 h", "h v h^-1 v^-1 v^-1"] {
            let word: Word = word.parse().unwrap();
            let img = word.rho(&fam.lambda).unwrap().apply(&v);
            let moved = plane_point(g.clone(), fam.oracle.clone(), &img);
            for u in window(g.as_ref(), &g.root(), 2) {
                assert_eq!(upsilon_eval(g.as_ref(), &word, &p, &u).unwrap(), moved.eval(&u).unwrap());
            }
        }
    }

    #[test]
    fn matched_planes_survive() {
        for pair in [gz_pair(), tripod_pair()] {
            let data = pair.data(12);
            assert_eq!(data.ray, shrinking_sequence(&pair.w2.lambda, &pair.theta2, 12).unwrap().ray);
            let g = pair.w2.graph.as_ref();
            let f = pair.survivor(&pair.theta2);
            let rep = survivor_check(g, &f, &data, 12, &g.root(), 12).unwrap();
            assert!(rep.passed(), "{:?}", rep.witness);
            let bumped = QVec2::new(pair.theta2.x.clone(), &pair.theta2.y + &(&pair.theta2.x * &q(1, 1000)));
            let rep = survivor_check(g, &pair.survivor(&bumped), &data, 12, &g.root(), 12).unwrap();
            let w = rep.witness.expect("perturbed plane must fail");
            assert!(w.n <= 12);
        }
    }

    #[test]
    fn survivor_cone() {
        let pair = gz_pair();
        let data = pair.data(10);
        let g = pair.w2.graph.clone();
        let f1 = Arc::new(pair.survivor(&pair.theta2));
        // 2^-n has the same eigenvalue as 2^n
        let mirror = family_eigen(&FamilyKind::GzExponential { t: q(1, 2) }).unwrap();
        assert_eq!(mirror.lambda, pair.w2.lambda);
        let f2 = Arc::new(plane_point(g.clone(), mirror.oracle.clone(), &pair.theta2));
        let sum = crate::graphs::Oracle({
            let (f1, f2) = (f1.clone(), f2.clone());
            move |v: &Vertex| Ok(f1.eval(v)?.try_mul(&q(3, 2))? + f2.eval(v)?)
        });
        let root = g.root();
        assert!(survivor_check(g.as_ref(), &sum, &data, 10, &root, 8).unwrap().passed());
        let a2 = AdjSquareMinusOne { graph: g.clone(), f: f1.clone() };
        assert!(survivor_check(g.as_ref(), &a2, &data, 10, &root, 6).unwrap().passed());
        // constant positive function, direction in Q_{++}: n = 0 passes
        let one = crate::graphs::Oracle(|_: &Vertex| Ok(QuadNum::one()));
        assert!(survivor_check(g.as_ref(), &one, &data, 0, &root, 4).unwrap().passed());
    }

    #[test]
    fn quadrant_sequence_is_unique() {
        let pair = gz_pair();
        let data = pair.data(16);
        let signs = sign_sequence(&data).unwrap();
        let lambda = &pair.w1.lambda;
        assert_eq!(quadrant_exit(lambda, &data.ray, &signs, &pair.theta1).unwrap(), None);
        for eps in [q(1, 100), q(-1, 1000), q(1, 10_000)] {
            let v = QVec2::new(pair.theta1.x.clone(), &pair.theta1.y + &eps);
            assert!(quadrant_exit(lambda, &data.ray, &signs, &v).unwrap().is_some());
        }
    }

    #[test]
    fn decay_is_monotone_and_halves() {
        for pair in [gz_pair(), tripod_pair()] {
            let data = pair.data(12);
            let g = pair.w2.graph.as_ref();
            let f = pair.survivor(&pair.theta2);
            for v in window(g, &g.root(), 3).into_iter().take(20) {
                let prof = decay_profile(g, &f, &v, &data, 12).unwrap();
                assert_eq!(prof.values[0], f.eval(&v).unwrap().abs());
                assert!(prof.nonincreasing, "{:?}", prof.values);
                assert!(prof.halving_time.is_some());
            }
        }
    }

    fn engine_parts(pair: &Pair) -> (Surface, Arc<dyn VertexFun>) {
        let s = Surface::from_family(&pair.w1);
        let f: Arc<dyn VertexFun> = Arc::new(pair.survivor(&pair.theta2));
        (s, f)
    }

    #[test]
    fn transversal_measure_properties() {
        let pair = gz_pair();
        let (s, f) = engine_parts(&pair);
        let mut flow = Flow::<QuadNum>::new(&s, &pair.theta1, 100_000).unwrap();
        let e = Edge { a: Vertex::Line(0), slot: 0 };
        let b = s.g().beta(&e);
        let mut prev_err: Option<QuadNum> = None;
        for k in [0, 2, 4, 6, 8] {
            let mut eng = MeasureEngine::new(&mut flow, f.clone(), k);
            let full = eng.transversal_measure(&e, &QuadNum::one()).unwrap();
            assert_eq!(full.value, f.eval(&b).unwrap().abs());
            assert!(full.error.is_zero());
            let half = eng.transversal_measure(&e, &q(1, 2)).unwrap();
            if let Some(p) = &prev_err {
                assert!(half.error <= *p);
            }
            prev_err = Some(half.error.clone());
            // additivity and monotonicity
            let rest = eng.edge_segment(&e, &q(1, 2), &QuadNum::one()).unwrap();
            let lo = &half.value + &rest.value;
            let hi = &lo + &(&half.error + &rest.error);
            assert!(lo <= full.value && full.value <= hi);
            let less = eng.transversal_measure(&e, &q(1, 3)).unwrap();
            assert!(less.value <= half.value);
        }
        // full circle
        let mut eng = MeasureEngine::new(&mut flow, f.clone(), 5);
        let a = Vertex::Line(2);
        let total = eng.arc(&a, &QuadNum::zero(), &QuadNum::int(2)).unwrap();
        let want: QuadNum = s
            .layout(&a)
            .unwrap()
            .iter()
            .map(|sl| f.eval(&s.g().beta(&sl.edge)).unwrap().abs())
            .sum();
        assert_eq!(total.value, want);
    }

    #[test]
    fn lebesgue_measure_is_length() {
        let pair = tripod_pair();
        let s = Surface::from_family(&pair.w1);
        let f: Arc<dyn VertexFun> = Arc::new(plane_point(pair.w1.graph.clone(), pair.w1.oracle.clone(), &pair.theta1));
        let mut flow = Flow::<QuadNum>::new(&s, &pair.theta1, 100_000).unwrap();
        let mut eng = MeasureEngine::new(&mut flow, f, 6);
        let e = Edge { a: s.g().root(), slot: 1 };
        let w = s.width(&e).unwrap();
        for t in [q(1, 3), q(1, 2), q(3, 4)] {
            let t = &t * &w;
            let m = eng.transversal_measure(&e, &t).unwrap();
            let exact = &t * &pair.theta1.y.abs();
            assert!(m.value <= exact && exact <= &m.value + &m.error);
        }
        // every cell is measured by its Lebesgue length
        for c in eng.cells(&e).unwrap() {
            assert_eq!(c.measure, &(&c.hi - &c.lo) * &pair.theta1.y.abs());
        }
    }

    #[test]
    fn conjugacy_endpoints() {
        for pair in [gz_pair(), tripod_pair()] {
            let (s, f) = engine_parts(&pair);
            let mut flow = Flow::<QuadNum>::new(&s, &pair.theta1, 100_000).unwrap();
            let mut eng = MeasureEngine::new(&mut flow, f, 8);
            let g = s.graph.clone();
            let e = Edge { a: g.root(), slot: 0 };
            let w1 = s.width(&e).unwrap();
            let w2 = pair.w2.eval(&g.beta(&e)).unwrap();
            let zero = conjugate_boundary_point(&mut eng, &pair.theta2, &BoundaryPoint::Bottom { edge: e.clone(), x: QuadNum::zero() }).unwrap();
            assert_eq!(zero.point, BoundaryPoint::Bottom { edge: e.clone(), x: QuadNum::zero() });
            let full = conjugate_boundary_point(&mut eng, &pair.theta2, &BoundaryPoint::Bottom { edge: e.clone(), x: w1.clone() }).unwrap();
            assert_eq!(full.point, BoundaryPoint::Bottom { edge: e.clone(), x: w2.clone() });
            // vertical sides: the full side maps to the full side
            let h1 = s.height(&e).unwrap();
            let h2 = pair.w2.eval(&e.a).unwrap();
            let side = conjugate_boundary_point(&mut eng, &pair.theta2, &BoundaryPoint::Left { edge: e.clone(), y: h1.clone() }).unwrap();
            let BoundaryPoint::Left { y, .. } = &side.point else { panic!() };
            assert!(y <= &h2 && &h2 <= &(y + &side.error), "{y} {h2} {}", side.error);
            // top of R_e agrees with the bottom of R_{N(e)}
            let x = &w1 * &q(2, 5);
            let top = conjugate_boundary_point(&mut eng, &pair.theta2, &BoundaryPoint::Top { edge: e.clone(), x: x.clone() }).unwrap();
            let bottom = conjugate_boundary_point(&mut eng, &pair.theta2, &BoundaryPoint::Bottom { edge: g.north(&e), x }).unwrap();
            let (BoundaryPoint::Top { x: a, .. }, BoundaryPoint::Bottom { x: b, .. }) = (&top.point, &bottom.point) else { panic!() };
            assert_eq!(a, b);
        }
    }

    #[test]
    fn equal_weights_give_identity() {
        let pair = gz_pair();
        let s = Surface::from_family(&pair.w1);
        let f: Arc<dyn VertexFun> = Arc::new(plane_point(pair.w1.graph.clone(), pair.w1.oracle.clone(), &pair.theta1));
        let mut flow = Flow::<QuadNum>::new(&s, &pair.theta1, 100_000).unwrap();
        let mut eng = MeasureEngine::new(&mut flow, f, 6);
        let e = Edge { a: Vertex::Line(0), slot: 1 };
        for x in [q(1, 7), q(1, 2), q(9, 10)] {
            let img = conjugate_boundary_point(&mut eng, &pair.theta1, &BoundaryPoint::Top { edge: e.clone(), x: x.clone() }).unwrap();
            let BoundaryPoint::Top { x: got, .. } = img.point else { panic!() };
            let err = img.error;
            assert!(got <= x && x <= &got + &err);
        }
    }

    #[test]
    fn maharam_classes_are_equivariant() {
        let z = Group::Zd(1);
        let gens = z.parse_tuple("1,-1").unwrap();
        let chi = [QuadNum::int(4)];
        let fam = character_eigen(&z, &gens, &chi).unwrap();
        let theta = theta_of(&fam.lambda);
        let (ok, vals) = maharam_check(&fam, &z, &chi, &theta, 6).unwrap();
        assert!(ok && vals.len() > 3);
        let (ok, _) = maharam_check(&fam, &z, &[QuadNum::int(3)], &theta, 6).unwrap();
        assert!(!ok);
    }
}
