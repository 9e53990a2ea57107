//! Scaling exponents, the KPZ relation and its first-passage reduction.

mod exponent;
mod first_passage;
mod formulas;
mod fractal;
mod quads;
mod quantum;

pub use exponent::{euclidean_exponent, ExponentFit, ScalePoint, MIN_HITS};
pub use first_passage::{first_passage_many, first_passage_oracle, FirstPassage};
pub use formulas::{beta_of_x, drift, kpz_formula, kpz_inverse, Coupling};
pub use fractal::FractalSet;
pub use quads::count_quadrangulations;
pub use quantum::{quantum_ball, quantum_exponent, QuantumBall, QuantumConfig, RootMode};
