//! Shared domain parameters: the thickness parameter and domain tags.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plate thickness, which doubles as the anisotropy parameter of the
/// rescaled operator on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::invalid(
                "eps",
                format!("must be positive and finite, got {value}"),
            ));
        }
        Ok(Epsilon(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Epsilon::new(value).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which domain a sampled field lives on.
///
/// `Reference` is the fixed unit square `(0,1)²`. `Physical(eps)` is the thin
/// plate `(0,1) × (0,eps)`; node `(i, j)` of a physical field sits at
/// `(i/(nx1-1), eps * j/(nx2-1))`, the image of the reference node under
/// `(x1, x2) ↦ (x1, eps * x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainTag {
    Reference,
    Physical(Epsilon),
}

impl DomainTag {
    pub fn epsilon(self) -> Option<Epsilon> {
        match self {
            DomainTag::Reference => None,
            DomainTag::Physical(eps) => Some(eps),
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainTag::Reference => f.write_str("reference"),
            DomainTag::Physical(eps) => write!(f, "physical({eps})"),
        }
    }
}
