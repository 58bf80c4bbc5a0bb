//! Generalized secant method for simple complex roots of `f(z) = 0`.
//!
//! Starting from `k + 1` approximations, each step interpolates `f` at the
//! last `k + 1` iterates with a Newton-form polynomial `p` and takes
//!
//! ```text
//! z_{n+1} = z_n - f(z_n) / p'(z_n)
//! ```
//!
//! Only one new evaluation of `f` is needed per step, and the order of
//! convergence `s_k` is the positive root of `s^{k+1} = 1 + s + ... + s^k`,
//! which increases from the golden ratio (`k = 1`, the secant method) to 2.
//!
//! Modules:
//!
//! * [`expr`]: complex expression parser/evaluator and the built-in problems.
//! * [`divdiff`]: divided-difference tables over the iterate window.
//! * [`solver`]: bootstrap, iteration, stopping rules and traces.
//! * [`order`]: theoretical order `s_k`, error constant `L`, empirical estimators.
//! * [`report`]: per-iteration diagnostics and CSV/JSONL/text rendering.
//! * [`cli`]: the `gensecant` command-line front end.

pub mod cli;
pub mod divdiff;
pub mod expr;
pub mod order;
pub mod report;
pub mod solver;

pub use num_complex::Complex64;

pub use divdiff::{DivDiffError, DividedDifferenceTable};
pub use expr::{builtin_problems, lookup, parse, Expression, ParseError, Problem};
pub use order::{order_of_method, OrderInfo};
pub use report::{build_report, IterationRecord};
pub use solver::{iterate, solve, Objective, SolverConfig, SolverTrace, Status, Z1Policy};
