//! Non-fatal conditions reported alongside results.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Free energy went up between two damped fixed-point iterates.
    FreeEnergyIncrease { iteration: usize, increase: f64 },
    /// `W` has a negative Fourier mode and `‖W‖∞ ≥ 1/β`: uniqueness of the
    /// stationary state is not guaranteed.
    UniquenessNotGuaranteed { min_fourier_mode: f64, w_sup: f64 },
    /// Silverman bandwidth degenerated; the grid spacing was used instead.
    BandwidthFallback { bandwidth: f64 },
    /// Mass outside the truncated line interval was dropped when wrapping.
    TruncationMassLoss { lost: f64 },
    /// CLT horizon is short compared with the relaxation time.
    ShortHorizon { t: f64 },
    /// Densities were clipped at zero during a PDE evolution.
    Clipped { count: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::FreeEnergyIncrease {
                iteration,
                increase,
            } => {
                write!(
                    f,
                    "free energy increased by {increase:e} at iteration {iteration}"
                )
            }
            Warning::UniquenessNotGuaranteed {
                min_fourier_mode,
                w_sup,
            } => write!(
                f,
                "W is not H-stable (min mode {min_fourier_mode:e}) and ‖W‖∞ = {w_sup} ≥ 1/β"
            ),
            Warning::BandwidthFallback { bandwidth } => {
                write!(f, "degenerate sample; using fixed bandwidth {bandwidth}")
            }
            Warning::TruncationMassLoss { lost } => write!(f, "wrapping lost {lost:e} of mass"),
            Warning::ShortHorizon { t } => write!(f, "CLT horizon t = {t} may be too short"),
            Warning::Clipped { count } => write!(f, "{count} negative density values clipped"),
        }
    }
}
