//! Geometry of XOR relay coding in a circular cell: which exchange flows a
//! central relay can combine, how large such combinations can get under
//! different node layouts, and what that is worth in transmission slots.
//!
//! Modules, roughly bottom-up:
//!
//! - [`geometry`]: points, distances, the connectivity predicate, hulls.
//! - [`topology`]: cells and their generators (grids, random layouts).
//! - [`coding`]: validity of flow combinations and the exact search for the
//!   maximum coding number.
//! - [`bounds`]: closed-form upper bounds and constructive lower bounds.
//! - [`rates`]: throughput of plain relaying versus coded relaying.
//! - [`scheduler`]: packet grouping under a combination-size cap.
//! - [`experiments`]: reproducible batch runs emitting CSV.
//! - [`cli`]: the `nc-geom` binary.

mod bits;

pub mod bounds;
pub mod cli;
pub mod coding;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod rates;
pub mod scheduler;
pub mod topology;

pub use error::{Error, Result};
