// SPDX-License-Identifier: MIT OR Apache-2.0

//! Overflow-safe complex numbers stored as log-magnitude and phase.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Div, Mul};

/// A complex number `exp(log_mag) * exp(i * phase)`.
///
/// Phases are kept in `(-pi, pi]`. Products of real numbers therefore keep a
/// phase of exactly `0` or `pi`, and [`LogComplex::to_complex`] maps those back
/// to real values with no spurious imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

fn wrap_phase(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        phase: 0.0,
    };
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        LogComplex {
            log_mag,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        let phase = if z.im == 0.0 {
            if z.re > 0.0 {
                0.0
            } else {
                PI
            }
        } else {
            z.im.atan2(z.re)
        };
        LogComplex {
            log_mag: z.norm().ln(),
            phase,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let r = self.log_mag.exp();
        if self.phase == 0.0 {
            Complex64::new(r, 0.0)
        } else if self.phase == PI {
            Complex64::new(-r, 0.0)
        } else {
            Complex64::from_polar(r, self.phase)
        }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }

    pub fn recip(&self) -> Self {
        Self::new(-self.log_mag, -self.phase)
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogComplex) -> LogComplex {
        self * rhs.recip()
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        LogComplex::from_complex(z)
    }
}
