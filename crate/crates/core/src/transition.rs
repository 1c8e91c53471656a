//! The piecewise-quartic transition profile `eta` and its band structure.
//!
//! ```text
//! eta(z) = -5 delta / 8                                              z <= delta/4
//!          -32 z^4/delta^3 + 48 z^3/delta^2 - 24 z^2/delta + 5 z - delta   delta/4 <= z <= delta/2
//!          z - delta                                                  z >= delta/2
//! ```
//!
//! `eta` is C² with `0 <= eta' <= 1` and `0 <= eta'' <= 6 / delta`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transition width `delta` and front extinction time `t_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams<T> {
    delta: T,
    t_star: T,
}

impl<T: Real> ProfileParams<T> {
    /// Requires `t_star > 0` and `0 < delta < 2 sqrt(6 t_star)`.
    pub fn new(delta: T, t_star: T) -> Result<Self> {
        if !(delta.is_finite() && t_star.is_finite()) || t_star <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "t_star must be positive, got {t_star}"
            )));
        }
        let cap = T::lit(2.0) * (T::lit(6.0) * t_star).sqrt();
        if delta <= T::zero() || delta >= cap {
            return Err(Error::InvalidParams(format!(
                "delta must lie in (0, {cap}), got {delta}"
            )));
        }
        Ok(Self { delta, t_star })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn t_star(&self) -> T {
        self.t_star
    }

    /// Drift `delta t / (4 t_star)` added to the super-profile.
    pub fn drift(&self, t: T) -> T {
        self.delta * t / (T::lit(4.0) * self.t_star)
    }

    /// Zero of `eta'''` inside the quartic branch, `3 delta / 8`.
    pub fn inflection(&self) -> T {
        T::lit(0.375) * self.delta
    }

    /// Right end of the band `(delta/4, z_b]` on which `eta' <= a_delta < 1`:
    /// `z_b = 3 delta/8 + (delta/8) sqrt(1 - delta^2 / (24 t_star))`.
    pub fn band_end(&self) -> T {
        let root = (T::one() - self.delta * self.delta / (T::lit(24.0) * self.t_star)).sqrt();
        self.inflection() + T::lit(0.125) * self.delta * root
    }

    /// `a_delta = eta'(band_end)`.
    pub fn band_bound(&self) -> T {
        eta_d1(self, self.band_end())
    }

    fn quarter(&self) -> T {
        T::lit(0.25) * self.delta
    }

    fn half(&self) -> T {
        T::lit(0.5) * self.delta
    }
}

/// Which piece of `eta` a point falls in. Junction points belong to the
/// quartic piece, which agrees with both neighbours there up to second order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Flat,
    Quartic,
    Linear,
}

pub fn branch<T: Real>(pp: &ProfileParams<T>, z: T) -> Branch {
    if z < pp.quarter() {
        Branch::Flat
    } else if z > pp.half() {
        Branch::Linear
    } else {
        Branch::Quartic
    }
}

pub fn eta<T: Real>(pp: &ProfileParams<T>, z: T) -> T {
    let d = pp.delta;
    match branch(pp, z) {
        Branch::Flat => -T::lit(0.625) * d,
        Branch::Linear => z - d,
        Branch::Quartic => eta_quartic(d, z),
    }
}

/// The quartic polynomial itself, evaluated without branch selection.
pub fn eta_quartic<T: Real>(d: T, z: T) -> T {
    let s = z / d;
    // Horner in z/delta: delta (-32 s^4 + 48 s^3 - 24 s^2 + 5 s - 1)
    d * ((((-T::lit(32.0) * s + T::lit(48.0)) * s - T::lit(24.0)) * s + T::lit(5.0)) * s - T::one())
}

/// `eta'`; the quartic piece is `(16/delta^2) (z - delta/4)^2 (5 - 8 z/delta)`.
pub fn eta_d1<T: Real>(pp: &ProfileParams<T>, z: T) -> T {
    let d = pp.delta;
    match branch(pp, z) {
        Branch::Flat => T::zero(),
        Branch::Linear => T::one(),
        Branch::Quartic => {
            let q = z - pp.quarter();
            T::lit(16.0) / (d * d) * q * q * (T::lit(5.0) - T::lit(8.0) * z / d)
        }
    }
}

/// `eta''`; the quartic piece is `(192/delta^2) (z - delta/4) (1 - 2 z/delta)`.
pub fn eta_d2<T: Real>(pp: &ProfileParams<T>, z: T) -> T {
    let d = pp.delta;
    match branch(pp, z) {
        Branch::Flat | Branch::Linear => T::zero(),
        Branch::Quartic => {
            T::lit(192.0) / (d * d) * (z - pp.quarter()) * (T::one() - T::lit(2.0) * z / d)
        }
    }
}

/// `eta'''`; the quartic piece is `(96/delta^3) (3 delta - 8 z)`.
///
/// Undefined at `delta/4` and `delta/2`, where it jumps.
pub fn eta_d3<T: Real>(pp: &ProfileParams<T>, z: T) -> Result<T> {
    let d = pp.delta;
    let tol = T::lit(4.0) * T::epsilon() * d;
    if (z - pp.quarter()).abs() <= tol || (z - pp.half()).abs() <= tol {
        return Err(Error::JunctionPoint { z: z.as_f64() });
    }
    Ok(match branch(pp, z) {
        Branch::Flat | Branch::Linear => T::zero(),
        Branch::Quartic => T::lit(96.0) / (d * d * d) * (T::lit(3.0) * d - T::lit(8.0) * z),
    })
}
