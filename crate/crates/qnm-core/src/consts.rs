//! SI constants.

use core::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability, H/m (CODATA 2018).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

/// Angular frequency (rad/s) of a vacuum wavelength (m). Works for complex wavelengths too.
pub fn omega_from_wavelength(lambda: crate::C64) -> crate::C64 {
    crate::C64::new(2.0 * PI * C0, 0.0) / lambda
}

/// Complex vacuum wavelength of a complex angular frequency.
pub fn wavelength_from_omega(omega: crate::C64) -> crate::C64 {
    crate::C64::new(2.0 * PI * C0, 0.0) / omega
}
