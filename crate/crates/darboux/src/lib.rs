//! Flow-based differentiation of fiber-bundle maps over trivialized
//! principal bundles, with concrete matrix Lie groups.
//!
//! The base manifold is a chart domain (an open box in R^n), the principal
//! bundle is `U x G` for a matrix group `G`, and associated bundles are
//! realized through their identity-frame fiber coordinates. The central
//! operation differentiates a bundle map `h` along a right-invariant
//! vector field by flowing the frame and the canonically lifted argument,
//! dividing in the associated bundle, and reading the velocity through an
//! equivariant fiber form; see [`calculus`].
//!
//! Everything is generic over the scalar via [`scalar::Real`] with `f64`
//! as the default type parameter; [`Matrix`] and [`Vector`] are the
//! concrete `f64` aliases used by most call sites.
//!
//! Module layout:
//! - [`scalar`], [`tol`], [`error`]: scalar abstraction, tolerances, errors.
//! - [`fd`], [`rng`]: central-difference stencils and seeded sampling.
//! - [`group`]: matrix Lie groups, exp/log, representations.
//! - [`chart`]: chart domains, vector fields, RK4 flows, variational lifts.
//! - [`natural`]: natural bundles over a chart and their canonical flows.
//! - [`principal`]: the trivialized principal bundle, invariant fields,
//!   connections, division.
//! - [`assoc`]: associated fiber spaces, equivariant forms, bundle maps.
//! - [`calculus`]: the derivative and its Leibniz-type calculus.

pub mod assoc;
pub mod calculus;
pub mod chart;
pub mod error;
pub mod fd;
pub mod group;
pub mod natural;
pub mod principal;
pub mod rng;
pub mod scalar;
pub mod tol;

pub use assoc::{
    assoc_divide, star_omega, unvec_matrix, vec_matrix, vertical_from_section, BundleMap,
    EquivariantForm, EquivariantMap, GSpace, Section,
};
pub use calculus::{
    ad_inverse_transport, algebra_act_map, chain_rhs, compose_natural, compose_natural_module,
    covariant_lie,
    darboux_lie_at, darboux_lie_at_frame, darboux_lie_direct, exterior_covariant,
    interior_product, lie_map, lie_module_map, module_act_section, pair_into_product, postcompose,
    split_pair, tensor_map, vertical_lie_conjugation, vertical_lie_generic, vertical_lie_module,
    wedge, ModuleMap,
};
pub use chart::{flow, lie_bracket, tangent_flow, tangent_flow_multi, Chart, ChartMap, FlowConfig, VectorField};
pub use error::{Error, Result};
pub use fd::{FdConfig, FdScheme};
pub use group::{AlgebraElement, GroupElement, GroupName, LieGroup, Representation};
pub use natural::{
    canonical_flow, eval_natural_map, FiberData, FiberPoint, NaturalBundleKind, NaturalImage,
    NaturalMap,
};
pub use principal::{
    connection_difference, divide, flow_invariant, horizontal_lift, ConnectionForm,
    InvariantVectorField, PrincipalPoint,
};
pub use rng::SplitMix64;
pub use scalar::Real;

/// Dense `f64` matrix, the concrete matrix type of the default scalar.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Dense `f64` vector, the concrete vector type of the default scalar.
pub type Vector = nalgebra::DVector<f64>;
