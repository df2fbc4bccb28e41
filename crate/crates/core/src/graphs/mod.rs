//! Bipartite ribbon graphs, finite or generated on demand, and the operator
//! calculus on vertex functions.

mod group;
mod ops;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use group::{Group, GroupElem};
pub use ops::{
    adjacency, chi, pairing, project, upsilon, upsilon_eval, upsilon_letter, Oracle, SparseFun,
    VertexFun, Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Vertex {
    /// Integer `n` on the line; even integers are on side A.
    Line(i64),
    /// Tripod: the center has depth 0; ray in {0,1,2}.
    Star { ray: u8, depth: u32 },
    /// Regular tree as reduced words over involutions `0..n`.
    Tree(Vec<u8>),
    Skew { side: Side, g: GroupElem },
    /// Explicitly listed graphs.
    Id(u32),
}

impl Vertex {
    pub fn center() -> Vertex {
        Vertex::Star { ray: 0, depth: 0 }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Line(n) => write!(f, "{n}"),
            Vertex::Star { depth: 0, .. } => f.write_str("c"),
            Vertex::Star { ray, depth } => write!(f, "r{ray}.{depth}"),
            Vertex::Tree(w) if w.is_empty() => f.write_str("t:e"),
            Vertex::Tree(w) => {
                let s: String = w.iter().map(|d| char::from(b'0' + d)).collect();
                write!(f, "t:{s}")
            }
            Vertex::Skew { side: Side::A, g } => write!(f, "a{g}"),
            Vertex::Skew { side: Side::B, g } => write!(f, "b{g}"),
            Vertex::Id(i) => write!(f, "#{i}"),
        }
    }
}

/// One slot in a vertex's cyclic order: the neighbor, and the slot index of
/// the same edge at the neighbor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Port {
    pub to: Vertex,
    pub back: usize,
}

/// An edge, named by its A-endpoint and its slot there.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub a: Vertex,
    pub slot: usize,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, self.slot)
    }
}

pub trait RibbonGraph: Send + Sync + fmt::Debug {
    fn side(&self, v: &Vertex) -> Side;
    /// Incident edges of `v` in cyclic order.
    fn ports(&self, v: &Vertex) -> Vec<Port>;
    /// A distinguished A-vertex.
    fn root(&self) -> Vertex;
    fn max_valence(&self) -> usize;
    fn name(&self) -> String;
    /// Trees admit traversal without a visited set.
    fn is_tree(&self) -> bool {
        false
    }

    fn degree(&self, v: &Vertex) -> usize {
        self.ports(v).len()
    }

    /// `beta(e)`, the B-endpoint.
    fn beta(&self, e: &Edge) -> Vertex {
        self.ports(&e.a)[e.slot].to.clone()
    }

    /// Successor in the cyclic order at the A-endpoint.
    fn east(&self, e: &Edge) -> Edge {
        let d = self.degree(&e.a);
        Edge {
            a: e.a.clone(),
            slot: (e.slot + 1) % d,
        }
    }

    fn east_inv(&self, e: &Edge) -> Edge {
        let d = self.degree(&e.a);
        Edge {
            a: e.a.clone(),
            slot: (e.slot + d - 1) % d,
        }
    }

    /// Successor in the cyclic order at the B-endpoint.
    fn north(&self, e: &Edge) -> Edge {
        let p = &self.ports(&e.a)[e.slot];
        let bp = self.ports(&p.to);
        let next = &bp[(p.back + 1) % bp.len()];
        Edge {
            a: next.to.clone(),
            slot: next.back,
        }
    }

    fn north_inv(&self, e: &Edge) -> Edge {
        let p = &self.ports(&e.a)[e.slot];
        let bp = self.ports(&p.to);
        let prev = &bp[(p.back + bp.len() - 1) % bp.len()];
        Edge {
            a: prev.to.clone(),
            slot: prev.back,
        }
    }

    /// Edges at `v` in cyclic order, each named from its A-endpoint.
    fn edges_at(&self, v: &Vertex) -> Vec<Edge> {
        match self.side(v) {
            Side::A => (0..self.degree(v))
                .map(|slot| Edge {
                    a: v.clone(),
                    slot,
                })
                .collect(),
            Side::B => self
                .ports(v)
                .into_iter()
                .map(|p| Edge {
                    a: p.to,
                    slot: p.back,
                })
                .collect(),
        }
    }

    fn neighbors(&self, v: &Vertex) -> Vec<Vertex> {
        self.ports(v).into_iter().map(|p| p.to).collect()
    }
}

pub type GraphRef = Arc<dyn RibbonGraph>;

/// Vertices within graph distance `r` of `center`, with distances.
pub fn ball(g: &dyn RibbonGraph, center: &Vertex, r: u32) -> BTreeMap<Vertex, u32> {
    let mut dist = BTreeMap::new();
    dist.insert(center.clone(), 0);
    let mut queue = VecDeque::from([center.clone()]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == r {
            continue;
        }
        for w in g.neighbors(&v) {
            if !dist.contains_key(&w) {
                dist.insert(w.clone(), d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The bi-infinite path: the graph of the staircase.
#[derive(Debug, Clone, Copy, Default)]
pub struct LineGraph;

impl RibbonGraph for LineGraph {
    fn side(&self, v: &Vertex) -> Side {
        match v {
            Vertex::Line(n) if n.rem_euclid(2) == 0 => Side::A,
            Vertex::Line(_) => Side::B,
            _ => panic!("{v} is not a vertex of the line"),
        }
    }

    fn ports(&self, v: &Vertex) -> Vec<Port> {
        let Vertex::Line(n) = *v else {
            panic!("{v} is not a vertex of the line")
        };
        let (first, second) = match self.side(v) {
            Side::A => (n + 1, n - 1),
            Side::B => (n - 1, n + 1),
        };
        vec![
            Port {
                to: Vertex::Line(first),
                back: 0,
            },
            Port {
                to: Vertex::Line(second),
                back: 1,
            },
        ]
    }

    fn root(&self) -> Vertex {
        Vertex::Line(0)
    }

    fn max_valence(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        "gz".into()
    }

    fn is_tree(&self) -> bool {
        true
    }
}

/// Three rays glued at a center vertex on side A.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tripod;

impl Tripod {
    fn at(ray: u8, depth: u32) -> Vertex {
        if depth == 0 {
            Vertex::center()
        } else {
            Vertex::Star { ray, depth }
        }
    }
}

impl RibbonGraph for Tripod {
    fn side(&self, v: &Vertex) -> Side {
        match v {
            Vertex::Star { depth, .. } if depth % 2 == 0 => Side::A,
            Vertex::Star { .. } => Side::B,
            _ => panic!("{v} is not a vertex of the tripod"),
        }
    }

    fn ports(&self, v: &Vertex) -> Vec<Port> {
        let Vertex::Star { ray, depth } = *v else {
            panic!("{v} is not a vertex of the tripod")
        };
        if depth == 0 {
            return (0..3)
                .map(|r| Port {
                    to: Tripod::at(r, 1),
                    back: 0,
                })
                .collect();
        }
        // slot 0 points toward the center, slot 1 away from it
        let inward = Port {
            to: Tripod::at(ray, depth - 1),
            back: if depth == 1 { ray as usize } else { 1 },
        };
        let outward = Port {
            to: Tripod::at(ray, depth + 1),
            back: 0,
        };
        vec![inward, outward]
    }

    fn root(&self) -> Vertex {
        Vertex::center()
    }

    fn max_valence(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        "tripod".into()
    }

    fn is_tree(&self) -> bool {
        true
    }
}

/// The regular tree of valence `n`, as the Cayley graph of the free product of
/// `n` groups of order two.
#[derive(Debug, Clone, Copy)]
pub struct RegularTree {
    pub n: u8,
}

impl RegularTree {
    pub fn new(n: u8) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "tree valence must be at least 2, got {n}"
            )));
        }
        Ok(RegularTree { n })
    }
}

impl RibbonGraph for RegularTree {
    fn side(&self, v: &Vertex) -> Side {
        match v {
            Vertex::Tree(w) if w.len() % 2 == 0 => Side::A,
            Vertex::Tree(_) => Side::B,
            _ => panic!("{v} is not a vertex of the tree"),
        }
    }

    fn ports(&self, v: &Vertex) -> Vec<Port> {
        let Vertex::Tree(w) = v else {
            panic!("{v} is not a vertex of the tree")
        };
        (0..self.n)
            .map(|i| {
                let mut u = w.clone();
                if u.last() == Some(&i) {
                    u.pop();
                } else {
                    u.push(i);
                }
                Port {
                    to: Vertex::Tree(u),
                    back: i as usize,
                }
            })
            .collect()
    }

    fn root(&self) -> Vertex {
        Vertex::Tree(Vec::new())
    }

    fn max_valence(&self) -> usize {
        self.n as usize
    }

    fn name(&self) -> String {
        format!("ntree({})", self.n)
    }

    fn is_tree(&self) -> bool {
        true
    }
}

/// The graph of a skew rotation: A-vertices `a_g`, B-vertices `b_g`, with
/// `a_g ~ b_{g'}` through slot `i` iff `g = eta_i g'`.
#[derive(Debug, Clone)]
pub struct SkewGraph {
    pub group: Group,
    pub generators: Vec<GroupElem>,
    /// `eta_1 = e`, `eta_i = gamma_{i-1} ... gamma_1`.
    pub eta: Vec<GroupElem>,
    eta_inv: Vec<GroupElem>,
}

impl SkewGraph {
    pub fn new(group: Group, generators: Vec<GroupElem>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("empty generator tuple".into()));
        }
        let mut eta = vec![group.identity()];
        for gen in &generators[..generators.len() - 1] {
            let next = group.mul(gen, eta.last().unwrap());
            eta.push(next);
        }
        let total = group.mul(generators.last().unwrap(), eta.last().unwrap());
        if total != group.identity() {
            return Err(Error::InvalidParameter(format!(
                "generator product gamma_n ... gamma_1 = {total} is not the identity"
            )));
        }
        let eta_inv = eta.iter().map(|x| group.inv(x)).collect();
        Ok(SkewGraph {
            group,
            generators,
            eta,
            eta_inv,
        })
    }

    pub fn a(&self, g: GroupElem) -> Vertex {
        Vertex::Skew { side: Side::A, g }
    }

    pub fn b(&self, g: GroupElem) -> Vertex {
        Vertex::Skew { side: Side::B, g }
    }
}

impl RibbonGraph for SkewGraph {
    fn side(&self, v: &Vertex) -> Side {
        match v {
            Vertex::Skew { side, .. } => *side,
            _ => panic!("{v} is not a vertex of the skew graph"),
        }
    }

    fn ports(&self, v: &Vertex) -> Vec<Port> {
        let Vertex::Skew { side, g } = v else {
            panic!("{v} is not a vertex of the skew graph")
        };
        match side {
            Side::A => self
                .eta_inv
                .iter()
                .enumerate()
                .map(|(i, ei)| Port {
                    to: self.b(self.group.mul(ei, g)),
                    back: i,
                })
                .collect(),
            Side::B => self
                .eta
                .iter()
                .enumerate()
                .map(|(i, e)| Port {
                    to: self.a(self.group.mul(e, g)),
                    back: i,
                })
                .collect(),
        }
    }

    fn root(&self) -> Vertex {
        self.a(self.group.identity())
    }

    fn max_valence(&self) -> usize {
        self.eta.len()
    }

    fn name(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        format!("skew({:?}; {})", self.group, gens.join(";"))
    }
}

/// A finite ribbon graph given by explicit cyclic orders.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    sides: BTreeMap<u32, Side>,
    ports: BTreeMap<u32, Vec<Port>>,
    root: u32,
}

impl FiniteGraph {
    /// Builds the graph from `(a, b)` edges; the cyclic order at each vertex is
    /// the order in which its edges are listed.
    pub fn from_edges(sides: &BTreeMap<u32, Side>, edges: &[(u32, u32)]) -> Result<Self> {
        let mut ports: BTreeMap<u32, Vec<Port>> = sides.keys().map(|&v| (v, Vec::new())).collect();
        for &(a, b) in edges {
            if sides.get(&a) != Some(&Side::A) || sides.get(&b) != Some(&Side::B) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) does not join side A to side B"
                )));
            }
            let ia = ports[&a].len();
            let ib = ports[&b].len();
            ports.get_mut(&a).unwrap().push(Port {
                to: Vertex::Id(b),
                back: ib,
            });
            ports.get_mut(&b).unwrap().push(Port {
                to: Vertex::Id(a),
                back: ia,
            });
        }
        let root = *sides
            .iter()
            .find(|(_, s)| **s == Side::A)
            .ok_or_else(|| Error::InvalidParameter("no vertex on side A".into()))?
            .0;
        let g = FiniteGraph {
            sides: sides.clone(),
            ports,
            root,
        };
        let reach = ball(&g, &Vertex::Id(root), u32::MAX);
        if reach.len() != g.sides.len() {
            return Err(Error::InvalidParameter("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.sides.keys().map(|&v| Vertex::Id(v))
    }
}

impl RibbonGraph for FiniteGraph {
    fn side(&self, v: &Vertex) -> Side {
        match v {
            Vertex::Id(i) => self.sides[i],
            _ => panic!("{v} is not a vertex of this graph"),
        }
    }

    fn ports(&self, v: &Vertex) -> Vec<Port> {
        match v {
            Vertex::Id(i) => self.ports[i].clone(),
            _ => panic!("{v} is not a vertex of this graph"),
        }
    }

    fn root(&self) -> Vertex {
        Vertex::Id(self.root)
    }

    fn max_valence(&self) -> usize {
        self.ports.values().map(Vec::len).max().unwrap_or(0)
    }

    fn name(&self) -> String {
        format!("finite({} vertices)", self.sides.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    Gz,
    Tripod,
    NTree(u8),
    Skew { group: Group, generators: Vec<GroupElem> },
}

pub fn make_family(spec: &FamilySpec) -> Result<GraphRef> {
    Ok(match spec {
        FamilySpec::Gz => Arc::new(LineGraph),
        FamilySpec::Tripod => Arc::new(Tripod),
        FamilySpec::NTree(n) => Arc::new(RegularTree::new(*n)?),
        FamilySpec::Skew { group, generators } => {
            Arc::new(SkewGraph::new(group.clone(), generators.clone())?)
        }
    })
}

/// Checks the ribbon axioms on the `r`-ball: ports are mutually consistent,
/// edges join opposite sides, and `E`, `N` cycle through each endpoint's edges.
pub fn check_ribbon(g: &dyn RibbonGraph, r: u32) -> Result<()> {
    let fail = |m: String| Err(Error::InvalidParameter(m));
    for v in ball(g, &g.root(), r).into_keys() {
        let ps = g.ports(&v);
        if ps.len() > g.max_valence() {
            return fail(format!("{v} exceeds the declared valence"));
        }
        for (i, p) in ps.iter().enumerate() {
            if g.side(&p.to) == g.side(&v) {
                return fail(format!("edge {v}-{} joins one side", p.to));
            }
            let q = &g.ports(&p.to)[p.back];
            if q.to != v || q.back != i {
                return fail(format!("port {i} of {v} is not reciprocated"));
            }
        }
        let at: BTreeSet<Edge> = g.edges_at(&v).into_iter().collect();
        let start = g.edges_at(&v)[0].clone();
        let step = |e: &Edge| match g.side(&v) {
            Side::A => g.east(e),
            Side::B => g.north(e),
        };
        let mut orbit = BTreeSet::new();
        let mut e = start.clone();
        loop {
            orbit.insert(e.clone());
            e = step(&e);
            if e == start {
                break;
            }
            if orbit.len() > ps.len() {
                return fail(format!("cyclic order at {v} does not close"));
            }
        }
        if orbit != at {
            return fail(format!("cyclic order at {v} misses edges"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_neighbors() {
        let g = LineGraph;
        let ns: BTreeSet<Vertex> = g.neighbors(&Vertex::Line(0)).into_iter().collect();
        assert_eq!(ns, BTreeSet::from([Vertex::Line(-1), Vertex::Line(1)]));
        let e = Edge {
            a: Vertex::Line(0),
            slot: 0,
        };
        assert_eq!(g.east(&e).slot, 1);
        assert_eq!(g.east(&g.east(&e)), e);
    }

    #[test]
    fn tree_valence() {
        let g = RegularTree::new(3).unwrap();
        for v in ball(&g, &g.root(), 4).keys() {
            assert_eq!(g.degree(v), 3);
        }
        assert_eq!(ball(&g, &g.root(), 4).len(), 1 + 3 + 6 + 12 + 24);
    }

    #[test]
    fn ribbon_axioms() {
        check_ribbon(&LineGraph, 6).unwrap();
        check_ribbon(&Tripod, 6).unwrap();
        check_ribbon(&RegularTree::new(3).unwrap(), 5).unwrap();
        let h = Group::Heisenberg;
        let gens = h.parse_tuple("x,X,y,Y").unwrap();
        check_ribbon(&SkewGraph::new(h, gens).unwrap(), 3).unwrap();
        let f = Group::Free(2);
        let gens = f.parse_tuple("a,b,B,A").unwrap();
        check_ribbon(&SkewGraph::new(f, gens).unwrap(), 3).unwrap();
    }

    #[test]
    fn skew_z_is_the_line() {
        let z = Group::Zd(1);
        let s = SkewGraph::new(z.clone(), z.parse_tuple("1,-1").unwrap()).unwrap();
        let to_line = |v: &Vertex| match v {
            Vertex::Skew { side, g: GroupElem::Ints(k) } => {
                Vertex::Line(2 * k[0] + if *side == Side::A { 0 } else { 1 })
            }
            _ => unreachable!(),
        };
        for v in ball(&s, &s.root(), 8).keys() {
            let ps: Vec<Port> = s
                .ports(v)
                .into_iter()
                .map(|p| Port {
                    to: to_line(&p.to),
                    back: p.back,
                })
                .collect();
            assert_eq!(ps, LineGraph.ports(&to_line(v)), "at {v}");
        }
    }

    #[test]
    fn bad_generators() {
        let z = Group::Zd(1);
        assert!(SkewGraph::new(z.clone(), z.parse_tuple("1,1").unwrap()).is_err());
        let c = Group::Cyclic(4);
        assert!(SkewGraph::new(c.clone(), c.parse_tuple("1,3").unwrap()).is_ok());
    }

    #[test]
    fn finite_graphs() {
        let sides = BTreeMap::from([(0, Side::A), (1, Side::B), (2, Side::A), (3, Side::B)]);
        let g = FiniteGraph::from_edges(&sides, &[(0, 1), (0, 3), (2, 1), (2, 3), (0, 1)]).unwrap();
        check_ribbon(&g, 4).unwrap();
        assert_eq!(g.degree(&Vertex::Id(0)), 3);
        assert!(FiniteGraph::from_edges(&sides, &[(0, 1)]).is_err());
        assert!(FiniteGraph::from_edges(&sides, &[(1, 0)]).is_err());
    }
}
