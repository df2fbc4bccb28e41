//! The translation surface glued from rectangles `R_e`, one per edge, with the
//! relative homology classes of its edges and the boundary growth of cylinder
//! neighborhoods.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::Serialize;

use crate::eigen::EigenFamily;
use crate::error::{Error, Result};
use crate::exact::QuadNum;
use crate::freegrp::{Letter, Word};
use crate::graphs::{ball, pairing, Edge, GraphRef, RibbonGraph, Side, SparseFun, Vertex, VertexFun};

/// `S(G, w)`: `R_e` has width `w(beta(e))` and height `w(alpha(e))`; its right
/// side is glued to the left side of `R_{E(e)}` and its top to the bottom of `R_{N(e)}`.
#[derive(Clone)]
pub struct Surface {
    pub graph: GraphRef,
    pub w: Arc<dyn VertexFun>,
    pub lambda: QuadNum,
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Surface")
            .field("graph", &self.graph.name())
            .field("lambda", &self.lambda)
            .finish()
    }
}

/// One interval `I_e` (the top side of `R_e`) of the circle `H_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub edge: Edge,
    pub start: QuadNum,
    pub width: QuadNum,
}

impl Surface {
    pub fn new(graph: GraphRef, w: Arc<dyn VertexFun>, lambda: QuadNum) -> Self {
        Surface { graph, w, lambda }
    }

    pub fn from_family(fam: &EigenFamily) -> Self {
        Surface::new(fam.graph.clone(), fam.oracle.clone(), fam.lambda.clone())
    }

    pub fn g(&self) -> &dyn RibbonGraph {
        self.graph.as_ref()
    }

    pub fn width(&self, e: &Edge) -> Result<QuadNum> {
        self.w.eval(&self.g().beta(e))
    }

    pub fn height(&self, e: &Edge) -> Result<QuadNum> {
        self.w.eval(&e.a)
    }

    pub fn circle_length(&self, a: &Vertex) -> Result<QuadNum> {
        Ok(self.lambda.try_mul(&self.w.eval(a)?)?)
    }

    /// `sum_{e in alpha^-1(a)} w(beta(e)) == lambda w(a)`.
    pub fn circle_identity(&self, a: &Vertex) -> Result<bool> {
        let total = self.layout(a)?.iter().try_fold(QuadNum::zero(), |acc, s| acc.try_add(&s.width))?;
        Ok(total == self.circle_length(a)?)
    }

    /// The intervals of `H_a` in `E`-order, starting at slot 0.
    pub fn layout(&self, a: &Vertex) -> Result<Vec<Slot>> {
        let g = self.g();
        if g.side(a) != Side::A {
            return Err(Error::InvalidParameter(format!("{a} is not an A-vertex")));
        }
        let mut start = QuadNum::zero();
        let mut out = Vec::with_capacity(g.degree(a));
        for edge in g.edges_at(a) {
            let width = self.width(&edge)?;
            let next = start.try_add(&width)?;
            out.push(Slot { edge, start, width });
            start = next;
        }
        Ok(out)
    }
}

/// Basis of relative homology: the top side of `R_e` oriented rightward, or
/// the left side of `R_e` oriented upward.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeClass {
    Horiz(Edge),
    Vert(Edge),
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeClass::Horiz(e) => write!(f, "H[{e}]"),
            EdgeClass::Vert(e) => write!(f, "V[{e}]"),
        }
    }
}

/// Finitely supported integer combination of edge classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomologyVec(BTreeMap<EdgeClass, i64>);

impl HomologyVec {
    pub fn new() -> Self {
        HomologyVec::default()
    }

    pub fn single(c: EdgeClass) -> Self {
        let mut h = HomologyVec::new();
        h.add(c, 1);
        h
    }

    pub fn add(&mut self, c: EdgeClass, k: i64) {
        if k == 0 {
            return;
        }
        let slot = self.0.entry(c.clone()).or_insert(0);
        *slot += k;
        if *slot == 0 {
            self.0.remove(&c);
        }
    }

    pub fn plus(&self, o: &HomologyVec) -> HomologyVec {
        let mut out = self.clone();
        for (c, &k) in &o.0 {
            out.add(c.clone(), k);
        }
        out
    }

    pub fn scale(&self, k: i64) -> HomologyVec {
        let mut out = HomologyVec::new();
        for (c, &j) in &self.0 {
            out.add(c.clone(), j * k);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeClass, &i64)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Counterclockwise boundary of `R_e`.
    pub fn rectangle_boundary(g: &dyn RibbonGraph, e: &Edge) -> HomologyVec {
        let mut h = HomologyVec::new();
        h.add(EdgeClass::Horiz(g.north_inv(e)), 1);
        h.add(EdgeClass::Vert(g.east(e)), 1);
        h.add(EdgeClass::Horiz(e.clone()), -1);
        h.add(EdgeClass::Vert(e.clone()), -1);
        h
    }
}

/// Intersection numbers with the cylinder cores: a rightward top side of
/// `R_e` gives `+e_{beta(e)}`, an upward left side gives `-e_{alpha(e)}`.
pub fn z_class(g: &dyn RibbonGraph, h: &HomologyVec) -> SparseFun {
    let mut out = SparseFun::new();
    for (c, &k) in h.iter() {
        match c {
            EdgeClass::Horiz(e) => out.add_at(g.beta(e), &QuadNum::int(k)),
            EdgeClass::Vert(e) => out.add_at(e.a.clone(), &QuadNum::int(-k)),
        }
    }
    out
}

/// `Xi(f)(h) = <f, Z(h)>`.
pub fn xi_pair(g: &dyn RibbonGraph, f: &dyn VertexFun, h: &HomologyVec) -> Result<QuadNum> {
    pairing(f, &z_class(g, h))
}

/// Core of a horizontal cylinder as its top circle, or of a vertical cylinder
/// as the union of the left sides of its rectangles.
pub fn cylinder_class(g: &dyn RibbonGraph, v: &Vertex) -> HomologyVec {
    let mut h = HomologyVec::new();
    for e in g.edges_at(v) {
        let c = match g.side(v) {
            Side::A => EdgeClass::Horiz(e),
            Side::B => EdgeClass::Vert(e),
        };
        h.add(c, 1);
    }
    h
}

fn phi_letter(g: &dyn RibbonGraph, l: Letter, h: &HomologyVec) -> HomologyVec {
    let k = l.power();
    let mut out = h.clone();
    for (c, &j) in h.iter() {
        match (c, l.is_horizontal()) {
            (EdgeClass::Vert(e), true) => out = out.plus(&cylinder_class(g, &e.a).scale(k * j)),
            (EdgeClass::Horiz(e), false) => out = out.plus(&cylinder_class(g, &g.beta(e)).scale(k * j)),
            _ => {}
        }
    }
    out
}

/// Action of the affine automorphism `Phi^g` on homology; the rightmost letter acts first.
/// `Phi^{h^k}` adds `k` copies of `cyl_a` to vertical classes crossing `cyl_a`;
/// `Phi^{v^k}` does the same for horizontal classes and vertical cylinders.
pub fn phi_homology(g: &dyn RibbonGraph, word: &Word, h: &HomologyVec) -> HomologyVec {
    word.letters()
        .iter()
        .rev()
        .fold(h.clone(), |acc, &l| phi_letter(g, l, &acc))
}

#[derive(Debug, Clone, Serialize)]
pub struct Growth {
    /// Boundary length of `X_n`, the union of cylinders over the `n`-th layer.
    pub ell: Vec<QuadNum>,
    /// Longest rectangle side in the decomposition of `X_n`.
    pub widest: Vec<QuadNum>,
    pub layer_sizes: Vec<usize>,
    /// Length of boundary shared by two cylinders of `W_n = V_{n+1} - V_{n-1}`,
    /// counted from both sides.
    pub shared: Vec<QuadNum>,
    /// `sum_{v in W_n} w(v) (c_v - 2)`, where `c_v` counts crossings of `cyl_v` through `boundary X_n`.
    pub excess: Vec<QuadNum>,
}

impl Growth {
    /// `lambda l_n - l_{n-1} - l_{n+1}` for `n >= 1`.
    pub fn slack(&self, lambda: &QuadNum) -> Result<Vec<QuadNum>> {
        (1..self.ell.len().saturating_sub(1))
            .map(|n| {
                Ok(lambda
                    .try_mul(&self.ell[n])?
                    .try_sub(&self.ell[n - 1])?
                    .try_sub(&self.ell[n + 1])?)
            })
            .collect()
    }

    /// What the slack should be: `shared_n + lambda * excess_n`, for `n >= 1`.
    pub fn predicted_slack(&self, lambda: &QuadNum) -> Result<Vec<QuadNum>> {
        (1..self.ell.len().saturating_sub(1))
            .map(|n| Ok(self.shared[n].try_add(&lambda.try_mul(&self.excess[n])?)?))
            .collect()
    }
}

/// The cylinders glued to the two long sides of each rectangle of `cyl_v`,
/// with the length of the glued segment.
fn glued_sides(s: &Surface, v: &Vertex) -> Result<Vec<(Vertex, QuadNum)>> {
    let g = s.g();
    let mut out = Vec::new();
    for e in g.edges_at(v) {
        match g.side(v) {
            Side::A => {
                let len = s.width(&e)?;
                out.push((g.north(&e).a, len.clone()));
                out.push((g.north_inv(&e).a, len));
            }
            Side::B => {
                let len = s.height(&e)?;
                out.push((g.beta(&g.east(&e)), len.clone()));
                out.push((g.beta(&g.east_inv(&e)), len));
            }
        }
    }
    Ok(out)
}

/// Layers `V_0 = {root}`, `V_n = N(V_{n-1})`, and for each `n <= n_max` the
/// boundary length of `X_n = union of cyl_v, v in V_n`, with the terms that
/// account for `l_{n+1} < lambda l_n - l_{n-1}`.
pub fn ball_growth(s: &Surface, root: &Vertex, n_max: usize) -> Result<Growth> {
    let g = s.g();
    if g.side(root) != Side::A {
        return Err(Error::InvalidParameter(format!("{root} is not an A-vertex")));
    }
    let mut layers: Vec<BTreeSet<Vertex>> = vec![BTreeSet::from([root.clone()])];
    for n in 0..=n_max {
        let next = layers[n].iter().flat_map(|v| g.neighbors(v)).collect();
        layers.push(next);
    }
    let empty = BTreeSet::new();
    let mut out = Growth {
        ell: Vec::new(),
        widest: Vec::new(),
        layer_sizes: Vec::new(),
        shared: Vec::new(),
        excess: Vec::new(),
    };
    for n in 0..=n_max {
        let layer = &layers[n];
        let mut ell = QuadNum::zero();
        let mut widest = QuadNum::zero();
        for v in layer {
            for (u, len) in glued_sides(s, v)? {
                if !layer.contains(&u) {
                    ell = ell.try_add(&len)?;
                }
            }
            for e in g.edges_at(v) {
                for x in [s.height(&e)?, s.width(&e)?] {
                    if x.try_cmp(&widest)?.is_gt() {
                        widest = x;
                    }
                }
            }
        }
        let below = if n == 0 { &empty } else { &layers[n - 1] };
        let fresh: BTreeSet<&Vertex> = layers[n + 1].iter().filter(|v| !below.contains(*v)).collect();
        let mut shared = QuadNum::zero();
        let mut excess = QuadNum::zero();
        for &v in &fresh {
            for (u, len) in glued_sides(s, v)? {
                if fresh.contains(&u) {
                    shared = shared.try_add(&len)?;
                }
            }
            let inside: Vec<bool> = g.neighbors(v).iter().map(|u| layer.contains(u)).collect();
            let crossings = (0..inside.len())
                .filter(|&i| inside[i] != inside[(i + 1) % inside.len()])
                .count() as i64;
            excess = excess.try_add(&s.w.eval(v)?.try_mul(&QuadNum::int(crossings - 2))?)?;
        }
        out.ell.push(ell);
        out.widest.push(widest);
        out.layer_sizes.push(layer.len());
        out.shared.push(shared);
        out.excess.push(excess);
    }
    Ok(out)
}

/// SVG of the cylinders over the `radius`-ball: one row per A-vertex, each
/// rectangle labelled by its edge and by the edge glued to its top.
pub fn render_svg(s: &Surface, radius: u32) -> Result<String> {
    let g = s.g();
    let rows: Vec<Vertex> = ball(g, &g.root(), radius)
        .into_iter()
        .filter(|(v, _)| g.side(v) == Side::A)
        .map(|(v, _)| v)
        .collect();
    let scale = 60.0;
    let mut body = String::new();
    let mut y = 10.0;
    let mut max_x: f64 = 0.0;
    for a in &rows {
        let h = s.w.eval(a)?.to_f64() * scale;
        let mut x = 10.0;
        writeln!(body, r#"<text x="2" y="{:.2}" font-size="10">{a}</text>"#, y + h / 2.0).unwrap();
        x += 40.0;
        for slot in s.layout(a)? {
            let wd = slot.width.to_f64() * scale;
            writeln!(
                body,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{wd:.2}" height="{h:.2}" fill="none" stroke="black"/>"#
            )
            .unwrap();
            let top = g.north(&slot.edge);
            writeln!(
                body,
                r#"<text x="{:.2}" y="{:.2}" font-size="9">{}</text><text x="{:.2}" y="{:.2}" font-size="7" fill="gray">N:{}</text>"#,
                x + 3.0,
                y + h / 2.0,
                slot.edge,
                x + 3.0,
                y + 9.0,
                top
            )
            .unwrap();
            x += wd;
        }
        max_x = max_x.max(x);
        y += h + 12.0;
    }
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n{body}</svg>\n",
        max_x + 10.0,
        y
    ))
}
