//! Straight-line flow on `S(G, w)`, its first return `T = R^{x/y} o S` to the
//! horizontal circles `H_a`, skew rotations, and orbit coding.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{QVec2, QuadNum};
use crate::graphs::{Edge, Group, GroupElem, Side, Vertex};
use crate::surface::Surface;

/// Circle coordinates: exact quadratic numbers or compensated doubles.
pub trait Coord: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn from_quad(x: &QuadNum) -> Result<Self>;
    fn from_int(n: i64) -> Self;
    fn add(&self, o: &Self) -> Result<Self>;
    fn sub(&self, o: &Self) -> Result<Self>;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn div(&self, o: &Self) -> Result<Self>;
    fn compare(&self, o: &Self) -> Result<Ordering>;
    fn floor(&self) -> Result<i64>;
    fn signum(&self) -> i8;
    fn to_f64(&self) -> f64;

    fn zero() -> Self {
        Self::from_int(0)
    }

    fn lt(&self, o: &Self) -> Result<bool> {
        Ok(self.compare(o)? == Ordering::Less)
    }

    /// `self mod m` in `[0, m)` for `m > 0`.
    fn wrap(&self, m: &Self) -> Result<Self> {
        let k = self.div(m)?.floor()?;
        let mut r = self.sub(&m.mul(&Self::from_int(k))?)?;
        if r.signum() < 0 {
            r = r.add(m)?;
        }
        if r.compare(m)? != Ordering::Less {
            r = r.sub(m)?;
        }
        Ok(r)
    }
}

impl Coord for QuadNum {
    fn from_quad(x: &QuadNum) -> Result<Self> {
        Ok(x.clone())
    }

    fn from_int(n: i64) -> Self {
        QuadNum::int(n)
    }

    fn add(&self, o: &Self) -> Result<Self> {
        Ok(self.try_add(o)?)
    }

    fn sub(&self, o: &Self) -> Result<Self> {
        Ok(self.try_sub(o)?)
    }

    fn mul(&self, o: &Self) -> Result<Self> {
        Ok(self.try_mul(o)?)
    }

    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.try_div(o)?)
    }

    fn compare(&self, o: &Self) -> Result<Ordering> {
        Ok(self.try_cmp(o)?)
    }

    fn floor(&self) -> Result<i64> {
        QuadNum::floor(self)
            .to_i64()
            .ok_or_else(|| Error::InvalidParameter(format!("{self} is out of range")))
    }

    fn signum(&self) -> i8 {
        QuadNum::signum(self)
    }

    fn to_f64(&self) -> f64 {
        QuadNum::to_f64(self)
    }

    fn wrap(&self, m: &Self) -> Result<Self> {
        Ok(self.rem_euclid(m).1)
    }
}

/// Double-double number `hi + lo`, roughly 106 bits of mantissa.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn plus(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }

    pub fn times(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        Dd::norm(p, e)
    }

    pub fn over(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.plus(o.times(Dd::new(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.plus(o.times(Dd::new(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::norm(q1, q2).plus(Dd::new(q3))
    }

    fn from_rational(r: &BigRational) -> Result<Dd> {
        let hi = r.to_f64().filter(|x| x.is_finite()).ok_or_else(|| {
            Error::InvalidParameter(format!("{r} does not fit a double"))
        })?;
        let rest = r - BigRational::from_float(hi).expect("finite");
        Ok(Dd::norm(hi, rest.to_f64().unwrap_or(0.0)))
    }

    fn sqrt_int(d: u64) -> Dd {
        let df = d as f64;
        let s = df.sqrt();
        // one Newton correction against the exact residual
        let resid = s.mul_add(-s, df);
        Dd::norm(s, resid / (2.0 * s))
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e}, {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi)
    }
}

impl Coord for Dd {
    fn from_quad(x: &QuadNum) -> Result<Self> {
        let a = Dd::from_rational(x.a())?;
        if x.d() == 0 || x.b().is_zero() {
            return Ok(a);
        }
        let b = Dd::from_rational(x.b())?;
        Ok(a.plus(b.times(Dd::sqrt_int(x.d()))))
    }

    fn from_int(n: i64) -> Self {
        let hi = n as f64;
        Dd::norm(hi, (n - hi as i64) as f64)
    }

    fn add(&self, o: &Self) -> Result<Self> {
        Ok(self.plus(*o))
    }

    fn sub(&self, o: &Self) -> Result<Self> {
        Ok(self.plus(o.neg()))
    }

    fn mul(&self, o: &Self) -> Result<Self> {
        Ok(self.times(*o))
    }

    fn div(&self, o: &Self) -> Result<Self> {
        if o.hi == 0.0 {
            return Err(Error::InvalidParameter("division by zero".into()));
        }
        Ok(self.over(*o))
    }

    fn compare(&self, o: &Self) -> Result<Ordering> {
        let c = self.hi.partial_cmp(&o.hi).and_then(|c| match c {
            Ordering::Equal => self.lo.partial_cmp(&o.lo),
            c => Some(c),
        });
        c.ok_or_else(|| Error::InvalidParameter("NaN coordinate".into()))
    }

    fn floor(&self) -> Result<i64> {
        let f = self.hi.floor();
        let k = if f == self.hi { f + self.lo.floor() } else { f };
        if !k.is_finite() || k.abs() > 9.0e15 {
            return Err(Error::InvalidParameter(format!("{self} is out of range")));
        }
        Ok(k as i64)
    }

    fn signum(&self) -> i8 {
        let s = if self.hi != 0.0 { self.hi } else { self.lo };
        if s > 0.0 {
            1
        } else if s < 0.0 {
            -1
        } else {
            0
        }
    }

    fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }
}

/// A point on the circle `H_a`, `0 <= t < lambda w(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint<C> {
    pub a: Vertex,
    pub t: C,
}

/// A point of the closed rectangle `R_edge` in local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint<C> {
    pub edge: Edge,
    pub x: C,
    pub y: C,
}

/// Result of following the flow up to the next horizontal edge.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowHit<C> {
    Edge(HPoint<C>),
    /// The trajectory ends in a corner; `left` continues the points just left
    /// of it (ending at the right end of `I_left`), `right` those just right of
    /// it (starting at the left end of `I_right`).
    Singular {
        point: HPoint<C>,
        left: Edge,
        right: Edge,
    },
}

impl<C> FlowHit<C> {
    /// The continuation matching the half-open convention of `T`.
    pub fn right_point(&self) -> &HPoint<C> {
        match self {
            FlowHit::Edge(p) => p,
            FlowHit::Singular { point, .. } => point,
        }
    }
}

/// Which one-sided limit to use for points on interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// Half-open `[left, right)`.
    #[default]
    Right,
    Left,
    /// Refuse to resolve endpoints.
    Strict,
}

/// Layout of one circle in coordinate type `C`.
#[derive(Debug)]
pub struct Circle<C> {
    pub edges: Vec<Edge>,
    pub starts: Vec<C>,
    pub widths: Vec<C>,
    pub length: C,
    pub height: C,
}

impl<C: Coord> Circle<C> {
    /// Slot containing `t`, with a flag set when `t` is a slot start.
    fn locate(&self, t: &C) -> Result<(usize, bool)> {
        // last start <= t
        let mut lo = 0;
        let mut hi = self.starts.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.starts[mid].compare(t)? == Ordering::Greater {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let on_start = self.starts[lo] == *t;
        Ok((lo, on_start))
    }
}

/// Flow in a fixed direction `theta = (x, y)`, `y > 0`, on a surface, with a
/// cache of circle layouts limited to `budget` circles.
pub struct Flow<C: Coord> {
    surface: Surface,
    theta: QVec2,
    dx_sign: i8,
    slope: C,
    budget: usize,
    circles: BTreeMap<Vertex, Arc<Circle<C>>>,
}

impl<C: Coord> fmt::Debug for Flow<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flow")
            .field("surface", &self.surface)
            .field("theta", &self.theta.to_string())
            .field("circles", &self.circles.len())
            .finish()
    }
}

impl<C: Coord> Flow<C> {
    pub fn new(surface: &Surface, theta: &QVec2, budget: usize) -> Result<Self> {
        if !theta.y.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "direction {theta} must have positive y-component"
            )));
        }
        let slope = C::from_quad(&theta.x.try_div(&theta.y)?)?;
        Ok(Flow {
            surface: surface.clone(),
            theta: theta.clone(),
            dx_sign: theta.x.signum(),
            slope,
            budget,
            circles: BTreeMap::new(),
        })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn theta(&self) -> &QVec2 {
        &self.theta
    }

    /// `x / y`.
    pub fn slope(&self) -> &C {
        &self.slope
    }

    pub fn expanded(&self) -> usize {
        self.circles.len()
    }

    pub fn circle(&mut self, a: &Vertex) -> Result<Arc<Circle<C>>> {
        if let Some(c) = self.circles.get(a) {
            return Ok(c.clone());
        }
        if self.circles.len() >= self.budget {
            return Err(Error::OrbitEscapedBudget {
                budget: self.budget,
            });
        }
        let slots = self.surface.layout(a)?;
        let circle = Circle {
            edges: slots.iter().map(|s| s.edge.clone()).collect(),
            starts: slots.iter().map(|s| C::from_quad(&s.start)).collect::<Result<_>>()?,
            widths: slots.iter().map(|s| C::from_quad(&s.width)).collect::<Result<_>>()?,
            length: C::from_quad(&self.surface.circle_length(a)?)?,
            height: C::from_quad(&self.surface.w.eval(a)?)?,
        };
        let circle = Arc::new(circle);
        self.circles.insert(a.clone(), circle.clone());
        Ok(circle)
    }

    /// The edge `e` with `p in I_e`, and the offset of `p` in it.
    pub fn resolve(&mut self, p: &HPoint<C>, branch: Branch) -> Result<(Edge, C)> {
        let c = self.circle(&p.a)?;
        if p.t.signum() < 0 || !p.t.lt(&c.length)? {
            return Err(Error::InvalidParameter(format!("{} is off the circle of {}", p.t, p.a)));
        }
        let (k, on_start) = c.locate(&p.t)?;
        if on_start {
            match branch {
                Branch::Right => {}
                Branch::Strict => return Err(Error::SingularHit { step: 0 }),
                Branch::Left => {
                    let j = (k + c.edges.len() - 1) % c.edges.len();
                    return Ok((c.edges[j].clone(), c.widths[j].clone()));
                }
            }
        }
        Ok((c.edges[k].clone(), p.t.sub(&c.starts[k])?))
    }

    /// The point at `offset` along `I_e`.
    pub fn place(&mut self, e: &Edge, offset: &C) -> Result<HPoint<C>> {
        let c = self.circle(&e.a)?;
        let t = c.starts[e.slot].add(offset)?.wrap(&c.length)?;
        Ok(HPoint { a: e.a.clone(), t })
    }

    /// `S`: `I_e -> I_{N(e)}` preserving offsets.
    pub fn s_map(&mut self, p: &HPoint<C>, branch: Branch) -> Result<HPoint<C>> {
        let (e, off) = self.resolve(p, branch)?;
        let n = self.surface.g().north(&e);
        self.place(&n, &off)
    }

    /// `R^{x/y}` on `H_a`: rotation by `(x/y) w(a)`.
    pub fn rotate(&mut self, p: &HPoint<C>) -> Result<HPoint<C>> {
        let c = self.circle(&p.a)?;
        let t = p.t.add(&self.slope.mul(&c.height)?)?.wrap(&c.length)?;
        Ok(HPoint { a: p.a.clone(), t })
    }

    /// `T = R^{x/y} o S`.
    pub fn iet_step(&mut self, p: &HPoint<C>) -> Result<HPoint<C>> {
        self.step_with(p, Branch::Right)
    }

    pub fn step_with(&mut self, p: &HPoint<C>, branch: Branch) -> Result<HPoint<C>> {
        let s = self.s_map(p, branch)?;
        self.rotate(&s)
    }

    /// Where the trajectory leaving `p` upward starts: the bottom of `R_{N(e)}`.
    pub fn enter(&mut self, p: &HPoint<C>) -> Result<SurfacePoint<C>> {
        let (e, off) = self.resolve(p, Branch::Right)?;
        Ok(SurfacePoint {
            edge: self.surface.g().north(&e),
            x: off,
            y: C::zero(),
        })
    }

    /// Follow the flow from `p` until it meets a horizontal edge, crossing the
    /// vertical gluings `E` on the way.
    pub fn flow_to_next_edge(&mut self, p: &SurfacePoint<C>) -> Result<FlowHit<C>> {
        let g = self.surface.graph.clone();
        let c = self.circle(&p.edge.a)?;
        let h = c.height.clone();
        let (mut e, mut x, mut y) = (p.edge.clone(), p.x.clone(), p.y.clone());
        let width = |e: &Edge| c.widths[e.slot].clone();
        if y.signum() < 0 || h.lt(&y)? || x.signum() < 0 || width(&e).lt(&x)? {
            return Err(Error::InvalidParameter(format!("point outside R_{e}")));
        }
        // each pass crosses one rectangle, so the pass count is bounded by the
        // horizontal travel over the narrowest width
        loop {
            let w = width(&e);
            let x_top = x.add(&self.slope.mul(&h.sub(&y)?)?)?;
            if self.dx_sign > 0 && w.lt(&x_top)? {
                y = y.add(&w.sub(&x)?.div(&self.slope)?)?;
                e = g.east(&e);
                x = C::zero();
                continue;
            }
            if self.dx_sign < 0 && x_top.signum() < 0 {
                y = y.add(&x.div(&self.slope)?.mul(&C::from_int(-1))?)?;
                e = g.east_inv(&e);
                x = width(&e);
                continue;
            }
            let t = c.starts[e.slot].add(&x_top)?.wrap(&c.length)?;
            let point = HPoint { a: e.a.clone(), t };
            return Ok(if x_top == w {
                FlowHit::Singular {
                    point,
                    left: e.clone(),
                    right: g.east(&e),
                }
            } else if x_top.signum() == 0 {
                FlowHit::Singular {
                    point,
                    left: g.east_inv(&e),
                    right: e,
                }
            } else {
                FlowHit::Edge(point)
            });
        }
    }

    /// `T` computed geometrically.
    pub fn flow_step(&mut self, p: &HPoint<C>) -> Result<FlowHit<C>> {
        let sp = self.enter(p)?;
        self.flow_to_next_edge(&sp)
    }

    /// `p, T p, ..., T^{k-1} p`.
    pub fn orbit(&mut self, p: &HPoint<C>, k: usize) -> Result<Vec<HPoint<C>>> {
        let mut out = Vec::with_capacity(k);
        let mut cur = p.clone();
        for _ in 0..k {
            let next = self.iet_step(&cur)?;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Edges `e_n` with `T^n p in I_{e_n}`, `n < k`. With `Branch::Strict` an
    /// orbit through an interval endpoint is an error.
    pub fn code_orbit(&mut self, p: &HPoint<C>, k: usize, branch: Branch) -> Result<Vec<Edge>> {
        let mut out = Vec::with_capacity(k);
        let mut cur = p.clone();
        for step in 0..k {
            let (e, _) = self.resolve(&cur, branch).map_err(|err| match err {
                Error::SingularHit { .. } => Error::SingularHit { step },
                other => other,
            })?;
            out.push(e);
            if step + 1 < k {
                cur = self.step_with(&cur, if branch == Branch::Strict { Branch::Right } else { branch })?;
            }
        }
        Ok(out)
    }
}

/// A cell `{a} x [lo, hi)` of some circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell<C> {
    pub a: Vertex,
    pub lo: C,
    pub hi: C,
}

/// Visits of an orbit to each cell.
pub fn occupation_stats<C: Coord>(orbit: &[HPoint<C>], cells: &[Cell<C>]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; cells.len()];
    for p in orbit {
        for (i, c) in cells.iter().enumerate() {
            if c.a == p.a && c.lo.compare(&p.t)? != Ordering::Greater && p.t.lt(&c.hi)? {
                counts[i] += 1;
            }
        }
    }
    Ok(counts)
}

/// `(x, g) -> (x + alpha mod 1, psi(x) g)` with `psi = gamma_i` on `[(i-1)/n, i/n)`.
#[derive(Debug, Clone)]
pub struct SkewRotation<C> {
    pub group: Group,
    pub generators: Vec<GroupElem>,
    pub alpha: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewState<C> {
    pub x: C,
    pub g: GroupElem,
}

impl<C: Coord> SkewRotation<C> {
    pub fn new(group: Group, generators: Vec<GroupElem>, alpha: &QuadNum) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("empty generator tuple".into()));
        }
        if alpha.is_negative() || *alpha >= QuadNum::one() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} is not in [0, 1)")));
        }
        let total = group.product(generators.iter().rev());
        if total != group.identity() {
            return Err(Error::InvalidParameter(format!(
                "generator product gamma_n ... gamma_1 = {total} is not the identity"
            )));
        }
        Ok(SkewRotation {
            group,
            generators,
            alpha: C::from_quad(alpha)?,
        })
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    /// Index `i - 1` of the interval containing `x`.
    pub fn interval(&self, x: &C) -> Result<usize> {
        let i = x.mul(&C::from_int(self.n() as i64))?.floor()?;
        Ok(i.clamp(0, self.n() as i64 - 1) as usize)
    }

    pub fn step(&self, s: &SkewState<C>) -> Result<SkewState<C>> {
        let i = self.interval(&s.x)?;
        Ok(SkewState {
            x: s.x.add(&self.alpha)?.wrap(&C::from_int(1))?,
            g: self.group.mul(&self.generators[i], &s.g),
        })
    }

    pub fn orbit(&self, s: &SkewState<C>, k: usize) -> Result<Vec<SkewState<C>>> {
        let mut out = Vec::with_capacity(k);
        let mut cur = s.clone();
        for _ in 0..k {
            let next = self.step(&cur)?;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }
}

/// The skew state `(x, g)` seen on the circle of `a_g` in the skew graph with
/// `w = 1/n` on A-vertices, flowing in the direction `(alpha - 1/n, 1/n)`.
pub fn skew_to_surface<C: Coord>(s: &SkewState<C>) -> HPoint<C> {
    HPoint {
        a: Vertex::Skew {
            side: Side::A,
            g: s.g.clone(),
        },
        t: s.x.clone(),
    }
}

/// Integer coordinate `k` of a `Z`-skew state on the staircase with `w = 1`:
/// `(x, k) -> (a_{2k}, 2x)`.
pub fn z_skew_to_staircase<C: Coord>(s: &SkewState<C>) -> Result<HPoint<C>> {
    let GroupElem::Ints(v) = &s.g else {
        return Err(Error::InvalidParameter("not a Z element".into()));
    };
    if v.len() != 1 {
        return Err(Error::InvalidParameter("not a Z element".into()));
    }
    Ok(HPoint {
        a: Vertex::Line(2 * v[0]),
        t: s.x.mul(&C::from_int(2))?,
    })
}

/// Running summary of an orbit, for CSV logs.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRow {
    pub step: usize,
    pub vertex: String,
    pub edge: String,
    pub coordinate: String,
}

pub fn orbit_rows<C: Coord>(flow: &mut Flow<C>, orbit: &[HPoint<C>]) -> Result<Vec<OrbitRow>> {
    orbit
        .iter()
        .enumerate()
        .map(|(step, p)| {
            let (e, _) = flow.resolve(p, Branch::Right)?;
            Ok(OrbitRow {
                step,
                vertex: p.a.to_string(),
                edge: e.to_string(),
                coordinate: p.t.to_string(),
            })
        })
        .collect()
}

/// `max |a - b|` between an exact and a float orbit on the same circles;
/// `None` if the orbits visit different circles.
pub fn orbit_distance(exact: &[HPoint<QuadNum>], float: &[HPoint<Dd>]) -> Option<f64> {
    let mut worst = 0.0f64;
    for (p, q) in exact.iter().zip(float) {
        if p.a != q.a {
            return None;
        }
        worst = worst.max((p.t.to_f64() - q.t.to_f64()).abs());
    }
    Some(worst)
}
