use std::f64::consts::{LN_2, PI};

use super::kernel::{sech, KernelKind, KernelSpec};
use crate::error::{Error, Result};

/// Half-width of the lambda window used for numeric spectra.
pub const QUADRATURE_HALF_WIDTH: f64 = 40.0;
/// Trapezoid step used for numeric spectra.
pub const QUADRATURE_STEP: f64 = 0.01;

/// Spectrum values below this are flushed to zero.
const RHO_FLOOR: f64 = 1e-300;

/// Spectrum `rho(omega)` of the kernel signature.
///
/// Closed forms are used for chi-square, intersection and Jensen-Shannon;
/// the Hein–Bousquet family falls back to [`spectrum_quadrature`]. The
/// Hellinger spectrum is a Dirac delta and cannot be sampled.
pub fn spectrum(spec: &KernelSpec, omega: f64) -> Result<f64> {
    let rho = match spec.kind() {
        KernelKind::Hellinger => return Err(Error::NoSampledSpectrum("hellinger")),
        KernelKind::ChiSquare => sech(PI * omega),
        KernelKind::Intersection => 2.0 / (PI * (1.0 + 4.0 * omega * omega)),
        KernelKind::JensenShannon => {
            2.0 / (2.0 * LN_2) * sech(PI * omega) / (1.0 + 4.0 * omega * omega)
        }
        KernelKind::HeinBousquet => {
            spectrum_quadrature(spec, omega, QUADRATURE_HALF_WIDTH, QUADRATURE_STEP)
        }
    };
    Ok(flush(rho))
}

/// Inverse Fourier transform of the signature by the trapezoid rule over
/// `[-half_width, half_width]`.
///
/// The signature of a symmetric kernel is even, so only the cosine part of
/// the transform survives and the integral is folded onto `lambda >= 0`.
pub fn spectrum_quadrature(spec: &KernelSpec, omega: f64, half_width: f64, step: f64) -> f64 {
    let steps = (half_width / step).round() as usize;
    let h = half_width / steps as f64;
    let mut acc = 0.5 * spec.signature(0.0);
    for i in 1..steps {
        let lambda = i as f64 * h;
        acc += (omega * lambda).cos() * spec.signature(lambda);
    }
    acc += 0.5 * (omega * half_width).cos() * spec.signature(half_width);
    // 2x for the folded half, 1/(2 pi) normalisation.
    flush(acc * h / PI).max(0.0)
}

fn flush(rho: f64) -> f64 {
    if rho.abs() < RHO_FLOOR {
        0.0
    } else {
        rho
    }
}
