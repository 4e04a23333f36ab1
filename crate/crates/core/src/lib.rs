//! Hilbert-Kunz functions and multiplicities of binomial hypersurfaces over
//! prime fields.
//!
//! For `f = [2] + [1]` in `F_p[x_1, …, x_m]` and `q = p^n`, the Hilbert-Kunz
//! function is the length of `F_p[x]/(x_1^q, …, x_m^q, f)`. Three independent
//! engines compute it: a closed-form iterative formula ([`closedform`]), a
//! count of monomials failing the membership criterion ([`keycheck`]), and a
//! weighted union-find over the relation graph ([`oracle`]).

pub mod algebra;
pub mod classify;
pub mod closedform;
pub mod engines;
pub mod error;
pub mod keycheck;
pub mod mmax;
pub mod multiplicity;
pub mod num_str;
pub mod oracle;

pub use algebra::{deglex_compare, normalize, parse_binomial, Binomial, ExponentVector, PrimePower, Term};
pub use classify::{classify, Classification};
pub use engines::{hk, Budgets, Engine, HkOptions, HkReport};
pub use error::{Error, Result};
