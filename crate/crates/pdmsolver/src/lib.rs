//! Construction and numerical verification of the exactly-solvable
//! families of the one-dimensional Schrodinger equation with a
//! position-dependent mass.
//!
//! The linear equation
//!
//! ```text
//! psi'' - (d ln m/dx) psi' + (2 m(x)/hbar^2) [E - V(x)] psi = 0
//! ```
//!
//! is reduced, through the log-derivative substitution
//! `psi = psi0 exp(int u)`, to the Riccati equation
//! `u' = a(x) + b(x) u - u^2` with `a = 2m(V - E)/hbar^2` and
//! `b = d ln m/dx`. Each solution family pins a particular solution `u_p`
//! and the consistency condition between `m`, `V` and `E` that makes it
//! exact; the remaining freedom is a Bernoulli equation solved by
//! quadrature. Every constructed bundle is adjudicated numerically:
//! Riccati and Schrodinger residuals plus an independent Runge-Kutta
//! initial-value oracle.
//!
//! Modules:
//! - [`expr`]: the closed-form input language (parse, evaluate,
//!   differentiate, simplify).
//! - [`grid`]: uniform grids, cumulative Simpson quadrature, high-order
//!   finite differences, the RK4 oracle.
//! - [`pdm`]: kinetic-ordering effective potential, Riccati coefficients,
//!   the log-derivative transform in both directions, residual norms.
//! - [`families`]: the solution families and the shared
//!   particular-solution + Bernoulli engine.
//! - [`verify`]: verification reports, printed-formula cross-checks, the
//!   energy-dependent norm, parameter sweeps.
//! - [`cli`]: the command-line surface (solve / verify / invert / sweep /
//!   catalog) with CSV and JSON emission.

pub mod cli;
pub mod expr;
pub mod families;
pub mod grid;
pub mod pdm;
pub mod verify;
