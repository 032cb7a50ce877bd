//! Exact symbolic calculus for lattice (l,q)-deformed Grassmann and boson
//! fields: R-matrices, normal ordering, Berezin integration, Pfaffians and
//! n=2 quantum-group covariance checks.

pub mod berezin;
pub mod coeff;
pub mod covariance;
pub mod exprio;
pub mod fieldalg;
pub mod report;
pub mod rmatrix;
pub mod scalar;

#[cfg(test)]
mod proptests;

pub use berezin::{BerezinError, EpsilonQuery, QuadraticForm};
pub use coeff::{CoeffError, LaurentPoly, Monomial, ParamContext, ParamSym, Universe};
pub use covariance::{CovarianceError, MixedElement, QGen, QPoly, QWord, RelationSet};
pub use exprio::{parse, parse_coeff, ExprAst, ParseError};
pub use fieldalg::{AlgebraElement, FieldAlgebra, FieldSpec, GenKind, Generator, Statistics, Strategy, Word};
pub use report::{VerificationReport, Witness};
pub use rmatrix::{TensorOp, Variant};
pub use scalar::{rational, Scalar};

/// Arbitrary precision rational scalar.
pub type Rational = num_rational::BigRational;
/// Exact coefficient polynomial.
pub type CoeffPoly = LaurentPoly<Rational>;
/// Floating point coefficient polynomial.
pub type FloatPoly = LaurentPoly<f64>;
/// Exact sparse operator.
pub type RatOp = TensorOp<Rational>;
/// Exact field algebra.
pub type RatAlgebra = FieldAlgebra<Rational>;
/// Exact algebra element.
pub type RatElement = AlgebraElement<Rational>;
/// Exact quantum matrix polynomial.
pub type RatQPoly = QPoly<Rational>;
