//! Direction grids, exact shapes and the body types built on them.

mod body;
mod grid;
mod shape;

pub use body::{gauge, minkowski_sum, radial_sum, star_minkowski, CoStar, ConvexBody, Radial, StarBody};
pub use grid::{DirectionGrid, GridKind, Stencil};
pub use shape::{ConvexShape, Core, FourierStar, StarShape};
pub(crate) use shape::polygon_area;
