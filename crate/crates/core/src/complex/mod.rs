//! Complex-analytic primitives: expressions, holomorphic functions, planar
//! domains, polylines, contour quadrature, meshes and homology bases.

pub mod domain;
pub mod expr;
pub mod func;
pub mod homology;
pub mod mesh;
pub mod path;
pub mod quadrature;
pub mod sampling;
pub mod winding;

pub use domain::{BoundaryCurve, BoundaryKind, Domain};
pub use expr::Expr;
pub use func::{derivative_at, FnSpec, HolomorphicFn};
pub use homology::HomologyBasis;
pub use mesh::{build_mesh, build_mesh_level, path_integrate, Mesh, VertexFlag};
pub use path::PathPolyline;
pub use quadrature::{contour_integrate, Integral, QuadOptions, VectorForm};
pub use winding::{argument_winding, winding_number};
