//! Set representations: boxes, H-polytopes, their unions, affine maps and grids.

mod affine;
mod fm;
mod grid;
mod polytope;
mod rect;
mod region;

pub use affine::AffineMap;
pub use grid::{CellId, CellSet, Grid, MAX_DIM};
pub use polytope::ConvexPolytope;
pub use rect::HyperRect;
pub use region::{contains, intersect, occupied_cells, region_volume, transform_region, Region};

pub(crate) use grid::for_each_cell;
pub(crate) use region::poly_cells;

/// Geometric tolerance for membership and cell occupancy.
pub const GEOM_TOL: f64 = 1e-7;
/// Determinant magnitude below which a map counts as singular.
pub const DET_TOL: f64 = 1e-9;
