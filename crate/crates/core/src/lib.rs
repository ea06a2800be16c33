pub mod dynamics;
pub mod geometric_model;
pub mod graphs;
pub mod maps;
pub mod nielsen;
pub mod splitting;
pub mod stallings;
pub mod strata;

/// Default scalar for Perron-Frobenius numerics.
pub type Real = f64;
/// Single-precision scalar for the same numerics.
pub type Real32 = f32;
