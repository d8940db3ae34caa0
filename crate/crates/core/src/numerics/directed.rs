use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Approximations increase toward the value.
    Lower,
    /// Approximations decrease toward the value.
    Upper,
}

/// A real known through a monotone sequence of one-sided approximations.
///
/// A lower-semicomputable number is an increasing sequence of lower bounds;
/// an upper one is a decreasing sequence of upper bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedReal {
    pub direction: Direction,
    terms: Vec<Dyadic>,
}

impl DirectedReal {
    pub fn new(direction: Direction) -> Self {
        DirectedReal { direction, terms: Vec::new() }
    }

    pub fn from_terms(direction: Direction, terms: Vec<Dyadic>) -> Result<Self> {
        let mut r = DirectedReal::new(direction);
        for t in terms {
            r.push(t)?;
        }
        Ok(r)
    }

    pub fn push(&mut self, t: Dyadic) -> Result<()> {
        if let Some(last) = self.terms.last() {
            let ok = match self.direction {
                Direction::Lower => *last <= t,
                Direction::Upper => *last >= t,
            };
            if !ok {
                return Err(Error::MonotonicityViolation);
            }
        }
        self.terms.push(t);
        Ok(())
    }

    /// Best bound so far.
    pub fn current(&self) -> Option<&Dyadic> {
        self.terms.last()
    }

    pub fn terms(&self) -> &[Dyadic] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
