//! Conversions between the Hilbert-space, Bloch-sphere, action–angle and
//! spherical descriptions of a single qubit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Normalization deviation tolerated on input states.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Amplitude modulus below which the relative phase is treated as undefined.
pub const POLE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StateError {
    #[error("state is not normalized: |a1|^2 + |a2|^2 = {0}")]
    NotNormalized(f64),
    #[error("relative phase Phi is undefined at the pole (|a{which}| = {modulus:e})")]
    Pole { which: u8, modulus: f64 },
    #[error("action I = {0} outside the open interval (-1, 1)")]
    ActionOutOfRange(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    pub a1: Complex64,
    pub a2: Complex64,
}

impl QubitAmplitudes {
    pub fn new(a1: Complex64, a2: Complex64) -> Result<Self, StateError> {
        let s = Self { a1, a2 };
        s.check_normalized()?;
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn check_normalized(&self) -> Result<(), StateError> {
        let n = self.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(n));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Action `I` and (unwrapped) angle `Phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAnglePoint {
    pub action: f64,
    pub angle: f64,
}

impl ActionAnglePoint {
    pub fn new(action: f64, angle: f64) -> Result<Self, StateError> {
        if !action.is_finite() || !angle.is_finite() {
            return Err(StateError::NonFinite);
        }
        if action.abs() >= 1.0 {
            return Err(StateError::ActionOutOfRange(action));
        }
        Ok(Self { action, angle })
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Bloch vector `(<sx>, <sy>, <sz>)` of a normalized state.
pub fn hopf_map(state: &QubitAmplitudes) -> Result<BlochVector, StateError> {
    state.check_normalized()?;
    let c = state.a1.conj() * state.a2;
    Ok(BlochVector {
        x: 2.0 * c.re,
        y: 2.0 * c.im,
        z: state.a1.norm_sqr() - state.a2.norm_sqr(),
    })
}

pub fn to_action_angle(state: &QubitAmplitudes) -> Result<ActionAnglePoint, StateError> {
    state.check_normalized()?;
    let (m1, m2) = (state.a1.norm(), state.a2.norm());
    if m1 <= POLE_THRESHOLD {
        return Err(StateError::Pole {
            which: 1,
            modulus: m1,
        });
    }
    if m2 <= POLE_THRESHOLD {
        return Err(StateError::Pole {
            which: 2,
            modulus: m2,
        });
    }
    Ok(ActionAnglePoint {
        action: state.a1.norm_sqr() - state.a2.norm_sqr(),
        angle: wrap_angle(state.a1.arg() - state.a2.arg()),
    })
}

/// Inverse of [`to_action_angle`] in the gauge `arg(a2) = 0`.
pub fn from_action_angle(p: &ActionAnglePoint) -> Result<QubitAmplitudes, StateError> {
    if !p.action.is_finite() || !p.angle.is_finite() {
        return Err(StateError::NonFinite);
    }
    if p.action.abs() >= 1.0 {
        return Err(StateError::ActionOutOfRange(p.action));
    }
    let r1 = ((1.0 + p.action) / 2.0).sqrt();
    let r2 = ((1.0 - p.action) / 2.0).sqrt();
    Ok(QubitAmplitudes {
        a1: Complex64::from_polar(r1, p.angle),
        a2: Complex64::new(r2, 0.0),
    })
}

/// `(theta, Phi)` with `I = cos(theta)`.
pub fn spherical_from_action(p: &ActionAnglePoint) -> Result<(f64, f64), StateError> {
    if p.action.abs() >= 1.0 || !p.action.is_finite() {
        return Err(StateError::ActionOutOfRange(p.action));
    }
    Ok((p.action.acos(), p.angle))
}
