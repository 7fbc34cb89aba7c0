//! Numerical kernels shared by the candidates and the weight solve.

pub mod kmeans;
pub mod lp;
pub mod nelder_mead;
pub mod pinball;

pub use kmeans::{kmeans, nearest, KMeansResult};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus};
pub use nelder_mead::{golden_section, nelder_mead, nelder_mead_with, NelderMeadOptions, NelderMeadResult};
pub use pinball::{fit_pinball_linear, Penalty};
