//! Permittivity laws evaluated at complex frequency.
//!
//! Sign convention throughout the crate: fields vary as exp(-iωt), so
//! decaying modes have Im ω < 0 and lossy media have Im ε > 0 on the real axis.

use crate::{Error, Result, C64};

const POLE_TOL: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialModel {
    NonDispersive { eps_r: C64, mu_r: C64 },
    /// ε(ω) = ε∞ − ε∞ωp²/(ω² + iωγ)
    Drude { eps_inf: f64, omega_p: f64, gamma: f64 },
    /// ε(ω) = ε∞ − ε∞ωp²/(ω² − ω0² + iωγ)
    Lorentz { eps_inf: f64, omega_p: f64, omega_0: f64, gamma: f64 },
}

impl MaterialModel {
    pub const VACUUM: MaterialModel = MaterialModel::NonDispersive {
        eps_r: C64::new(1.0, 0.0),
        mu_r: C64::new(1.0, 0.0),
    };

    pub fn dielectric(eps_r: f64) -> Self {
        MaterialModel::NonDispersive { eps_r: C64::new(eps_r, 0.0), mu_r: C64::new(1.0, 0.0) }
    }

    /// Drude silver used for the 40 nm sphere. ωp and γ were tuned so that the
    /// dipolar TM mode of that sphere sits at λ̃ ≈ 390 + 32i nm with ε∞ = 3.7.
    pub fn silver_arc10() -> Self {
        MaterialModel::Drude { eps_inf: 3.7, omega_p: 6.5811e15, gamma: 2.7372e14 }
    }

    pub fn is_dispersive(&self) -> bool {
        !matches!(self, MaterialModel::NonDispersive { .. })
    }

    /// Checks the physical-parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MaterialModel::NonDispersive { eps_r, mu_r } => {
                eps_r.re.is_finite() && eps_r.im.is_finite() && mu_r.re.is_finite() && mu_r.im.is_finite()
            }
            MaterialModel::Drude { eps_inf, omega_p, gamma } => {
                eps_inf >= 1.0 && omega_p >= 0.0 && gamma >= 0.0
            }
            MaterialModel::Lorentz { eps_inf, omega_p, omega_0, gamma } => {
                eps_inf >= 1.0 && omega_p >= 0.0 && omega_0 >= 0.0 && gamma >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("material parameters out of range"))
        }
    }

    /// Returns (ε∞, ωp, ω0, γ) for the dispersive models.
    fn lorentz_params(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            MaterialModel::NonDispersive { .. } => None,
            MaterialModel::Drude { eps_inf, omega_p, gamma } => Some((eps_inf, omega_p, 0.0, gamma)),
            MaterialModel::Lorentz { eps_inf, omega_p, omega_0, gamma } => {
                Some((eps_inf, omega_p, omega_0, gamma))
            }
        }
    }

    /// Relative permittivity ε(ω).
    pub fn permittivity(&self, omega: C64) -> Result<C64> {
        match self.lorentz_params() {
            None => match *self {
                MaterialModel::NonDispersive { eps_r, .. } => Ok(eps_r),
                _ => unreachable!(),
            },
            Some((einf, wp, w0, g)) => {
                let den = omega * omega - w0 * w0 + C64::i() * omega * g;
                if den.norm() < POLE_TOL {
                    return Err(Error::EvaluationAtMaterialPole);
                }
                Ok(einf - einf * wp * wp / den)
            }
        }
    }

    /// ∂(ωε)/∂ω, relative to ε0.
    pub fn d_omega_eps(&self, omega: C64) -> Result<C64> {
        match self.lorentz_params() {
            None => self.permittivity(omega),
            Some((einf, wp, w0, g)) => {
                let den = omega * omega - w0 * w0 + C64::i() * omega * g;
                if den.norm() < POLE_TOL {
                    return Err(Error::EvaluationAtMaterialPole);
                }
                let eps = einf - einf * wp * wp / den;
                let dden = 2.0 * omega + C64::i() * g;
                Ok(eps + omega * einf * wp * wp * dden / (den * den))
            }
        }
    }

    /// Relative permeability.
    pub fn permeability(&self, _omega: C64) -> Result<C64> {
        Ok(match *self {
            MaterialModel::NonDispersive { mu_r, .. } => mu_r,
            _ => C64::new(1.0, 0.0),
        })
    }

    /// ∂(ωμ)/∂ω, relative to μ0. No built-in model has magnetic dispersion.
    pub fn d_omega_mu(&self, omega: C64) -> Result<C64> {
        self.permeability(omega)
    }

    /// Refractive index √(εμ) on the principal branch.
    pub fn index(&self, omega: C64) -> Result<C64> {
        Ok((self.permittivity(omega)? * self.permeability(omega)?).sqrt())
    }
}
