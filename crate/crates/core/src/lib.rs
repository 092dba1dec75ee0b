//! Symmetric convex bodies under the linear group: John and Löwner ellipsoids,
//! slicing maps into `GL(n)/O(n)`, orbit-space distances, and a planar toy
//! action showing what goes wrong for slices that are not small.

pub mod body;
pub mod demo;
pub mod directions;
pub mod ellipsoid;
pub mod error;
pub mod group;
pub mod linalg;
pub mod optim;
pub mod orbit;
pub mod random;
pub mod slice;

pub use body::{hausdorff, Rep, SymBody};
pub use directions::{Direction, DirectionGrid};
pub use ellipsoid::{john, lowner, mvee_centered, Ellipsoid, MveeOptions, MveeReport};
pub use error::{GeomError, Result};
pub use group::GroupElem;
pub use slice::{john_position, lowner_position, polar_decompose, slicing_map_john, PosDef};
