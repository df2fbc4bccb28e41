//! Renormalization of infinite interval exchange transformations built from
//! bipartite ribbon graphs and positive eigenfunctions of the adjacency operator.

pub mod error;
pub mod eigen;
pub mod exact;
pub mod freegrp;
pub mod graphs;
pub mod dynamics;
pub mod measures;
pub mod renorm;
pub mod surface;

pub use error::{Error, Result};
pub use exact::{ExactError, QMat2, QVec2, QuadNum, SignPair};
pub use freegrp::{Automorphism, GeodesicRay, Letter, Word};
pub use graphs::{Edge, GraphRef, RibbonGraph, Side, SparseFun, Vertex, VertexFun};
pub use eigen::{family_eigen, EigenFamily, FamilyKind};
pub use surface::Surface;
pub use dynamics::{Coord, Dd, Flow, FlowHit, HPoint, SkewRotation, SkewState, SurfacePoint};
pub use measures::{plane_point, MeasureEngine, Plane};
pub use renorm::{shrinking_sequence, ShrinkData};
