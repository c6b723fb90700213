//! Exact spectra on a disk.
//!
//! Separation of variables with `ψ = (u(r) e^{imθ}, i v(r) e^{i(m+1)θ})`
//! turns `H_M ψ = λ ψ` into
//!
//! ```text
//! u' − (m/r) u     = −(λ + m_c) v
//! v' + ((m+1)/r) v =  (λ − m_c) u
//! ```
//!
//! with `m_c = 0` inside and `m_c = M` outside. Interior solutions are
//! `u = J_m(|λ| r)`, `v = sgn(λ) J_{m+1}(|λ| r)`; the bag condition `P₋ψ = 0`
//! reads `u(R) = v(R)`.

mod mode;
mod quadform;
mod secular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mode::{normalize_mode, DiskMode, RadialState};
pub use quadform::{
    quadratic_form_identity, random_test_field, QuadFormReport, QuadratureSpec, TestField,
};
pub use secular::{
    eigenvalue_finite_near, eigenvalues_infinite, infinite_roots_upto, secular_finite,
    secular_finite_normalized, secular_infinite,
};

/// Which half of the spectrum a search runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s.trim() {
            "+" | "plus" | "pos" => Ok(Sign::Plus),
            "-" | "minus" | "neg" => Ok(Sign::Minus),
            other => Err(Error::InvalidArgument(format!("sign must be + or -, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mass {
    Infinite,
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskProblem {
    pub radius: f64,
    pub m: i32,
    pub mass: Mass,
}

impl DiskProblem {
    pub fn new(radius: f64, m: i32, mass: Mass) -> Result<DiskProblem> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if let Mass::Finite(mm) = mass {
            if !(mm > 0.0) || !mm.is_finite() {
                return Err(Error::InvalidArgument(format!("mass must be positive, got {mm}")));
            }
        }
        if m.abs() > crate::bessel::MAX_ORDER - 1 {
            return Err(Error::OutOfEnvelope(format!("angular index {m} too large")));
        }
        Ok(DiskProblem { radius, m, mass })
    }

    pub fn infinite(radius: f64, m: i32) -> Result<DiskProblem> {
        DiskProblem::new(radius, m, Mass::Infinite)
    }

    pub fn finite(radius: f64, m: i32, mass: f64) -> Result<DiskProblem> {
        DiskProblem::new(radius, m, Mass::Finite(mass))
    }
}
