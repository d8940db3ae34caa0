//! Exact and certified real arithmetic.
//!
//! [`Dyadic`] numbers are exact; [`BallReal`] encloses a real number in
//! `[mid - rad, mid + rad]`. Elementary functions return balls whose radius
//! accounts for both truncation and input uncertainty.

mod ball;
mod complex;
mod directed;
mod dyadic;
mod elementary;
mod rational;

pub use ball::BallReal;
pub use complex::{dist_upper, ComplexBall};
pub use directed::{Direction, DirectedReal};
pub use dyadic::{Dyadic, Round};
pub use elementary::{exp_point, ln2, log_point, sqrt_point, sqrt_rational};
pub use rational::{format_rational, parse_rational, rat, rat_int, rational_text, GaussRat};
pub(crate) use rational::q_to_f64;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Encloses `e^x` with radius at most `2^-prec + e^(mid+rad) * rad`.
pub fn ball_exp(x: &BallReal, prec: i64) -> crate::Result<BallReal> {
    x.exp(prec)
}

/// Encloses `log x`; fails unless the ball is certifiably positive.
pub fn ball_log(x: &BallReal, prec: i64) -> crate::Result<BallReal> {
    x.log(prec)
}
