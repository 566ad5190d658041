//! Discrete metric spaces and grid-discretized conformal Riemannian
//! metrics, with the operations built on their shortest-path structure.

mod grid;
mod ops;
mod space;

pub use grid::{
    default_stencil, load_grid, save_grid, stencil_calibration, Calibration, GridDomain,
    GridFile, GridMetric,
};
pub use ops::{
    busemann, center_of_mass, mcshane_extend, mcshane_extend_naive, separated_net,
    straighten_via_net, BusemannValue, McShaneExtension, PartialFunction, Straightened,
};
pub use space::{
    dijkstra_field, multi_dijkstra, AdjGraph, DenseMetric, FiniteMetricSpace, Neighbors, Space,
};
