//! Physical constants (CODATA 2018) and unit helpers. Everything internal is SI,
//! with frequencies as angular frequencies in rad/s.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// 1 Debye in C·m.
pub const DEBYE: f64 = 3.335_640_951e-30;

/// Mass of a CaF molecule (40Ca + 19F).
pub const CAF_MASS: f64 = (40.078 + 18.998_403_163) * ATOMIC_MASS_UNIT;

pub const MICRO: f64 = 1e-6;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Ordinary frequency in GHz to angular frequency in rad/s.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

pub fn um(x: f64) -> f64 {
    x * 1e-6
}
