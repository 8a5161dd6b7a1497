//! Preference-based multi-objective Bayesian optimisation.
//!
//! Two ways to steer expensive multi-objective minimisation towards a
//! decision-maker's reference point:
//!
//! * **mono-surrogate** — scalarise observed objective vectors with the
//!   achievement scalarising function (ASF) and model the scalar values
//!   with a single Gaussian process, maximising the closed-form expected
//!   improvement;
//! * **multi-surrogate** — model each objective with its own Gaussian
//!   process. The ASF of independent Gaussian posteriors is a
//!   max-of-Gaussians with a known non-Gaussian density; candidates are
//!   scored by fitting a Gumbel to samples of that density and taking a
//!   Monte-Carlo expected improvement, or by a Laplace approximation at its
//!   mode and the closed form.
//!
//! [`problems`] supplies DTLZ benchmarks with analytic bounds and front
//! samplers, [`driver`] runs the optimisation loops, and [`metrics`]
//! measures convergence towards the front point nearest the reference
//! point.
//!
//! Built with the `parallel` feature (default) the fitness loops, restart
//! searches and model training fan out over rayon; runs stay
//! bit-reproducible either way because every random draw happens before
//! work is distributed.

pub mod acquisition;
pub mod asf_dist;
pub mod driver;
pub mod ga;
pub mod gp;
pub mod metrics;
mod opt;
pub mod par;
pub mod problems;
pub mod scalarize;
pub mod stats;
