//! Two-pure-state qubit algebra.
//!
//! The pair is parameterized by the overlap angle θ (|⟨ψ₁|ψ₂⟩| = cos θ) and a
//! relative phase φ. In the basis {|ψ₁⟩, |aux⟩}, with |aux⟩ the unit vector
//! orthogonal to |ψ₁⟩ in their common plane,
//!
//! ```text
//! |ψ₂⟩ = e^{iφ} cos θ |ψ₁⟩ + sin θ |aux⟩.
//! ```
//!
//! Every closed form here (difference spectrum ±sinθ, even-mixture spectrum
//! (1±cosθ)/2, trace distance 2sinθ, mixture entropy H((1+cosθ)/2)) is paired
//! with a brute-force 2×2 eigen-oracle so the identities stay executable
//! checks rather than definitions.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

use crate::numeric::{binary_entropy_raw, xlog2x};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("theta = {0} outside [0, pi/2]")]
    ThetaOutOfRange(f64),
    #[error("phi = {0} outside [0, 2*pi)")]
    PhiOutOfRange(f64),
}

/// A pair of pure qubit states with overlap cos θ and relative phase φ.
///
/// All spectral quantities downstream depend only on θ; φ is kept so phase
/// invariance can be tested instead of assumed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatePair {
    theta: f64,
    phi: f64,
}

impl StatePair {
    /// Requires θ ∈ [0, π/2] and φ ∈ [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self, StateError> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(StateError::ThetaOutOfRange(theta));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(StateError::PhiOutOfRange(phi));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// |⟨ψ₁|ψ₂⟩| = cos θ, exact by construction.
    pub fn overlap(&self) -> f64 {
        self.theta.cos()
    }
}

/// A 2×2 complex Hermitian matrix: real diagonal (d0, d1) plus the upper
/// off-diagonal entry off_re + i·off_im. Hermiticity is structural.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hermitian2 {
    pub d0: f64,
    pub d1: f64,
    pub off_re: f64,
    pub off_im: f64,
}

impl Hermitian2 {
    pub fn trace(&self) -> f64 {
        self.d0 + self.d1
    }

    pub fn det(&self) -> f64 {
        self.d0 * self.d1 - (self.off_re * self.off_re + self.off_im * self.off_im)
    }

    pub fn sub(&self, other: &Hermitian2) -> Hermitian2 {
        Hermitian2 {
            d0: self.d0 - other.d0,
            d1: self.d1 - other.d1,
            off_re: self.off_re - other.off_re,
            off_im: self.off_im - other.off_im,
        }
    }

    /// True when the matrix is a valid density matrix: trace 1 within the
    /// algebraic tolerance and both eigenvalues ≥ −1e-12.
    pub fn is_density(&self) -> bool {
        let (hi, lo) = eig2(self);
        (self.trace() - 1.0).abs() <= tol::ALGEBRAIC
            && lo >= -tol::ALGEBRAIC
            && hi >= -tol::ALGEBRAIC
    }
}

/// Spectrum of the even mixture (ρ̂₁ + ρ̂₂)/2: eigenvalues c = (1+cosθ)/2 and
/// 1 − c, which sum to 1 exactly (the subtraction 1 − c is lossless for
/// c ∈ [1/2, 1]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureSpectrum {
    pub c: f64,
    pub one_minus_c: f64,
}

/// Projectors |ψ₁⟩⟨ψ₁| and |ψ₂⟩⟨ψ₂| in the {|ψ₁⟩, |aux⟩} basis.
pub fn build_density_pair(pair: &StatePair) -> (Hermitian2, Hermitian2) {
    let (s, c) = pair.theta.sin_cos();
    let rho1 = Hermitian2 { d0: 1.0, d1: 0.0, off_re: 0.0, off_im: 0.0 };
    let rho2 = Hermitian2 {
        d0: c * c,
        d1: s * s,
        off_re: pair.phi.cos() * c * s,
        off_im: pair.phi.sin() * c * s,
    };
    (rho1, rho2)
}

/// The even mixture (ρ̂₁ + ρ̂₂)/2.
pub fn even_mixture(pair: &StatePair) -> Hermitian2 {
    let (r1, r2) = build_density_pair(pair);
    Hermitian2 {
        d0: 0.5 * (r1.d0 + r2.d0),
        d1: 0.5 * (r1.d1 + r2.d1),
        off_re: 0.5 * (r1.off_re + r2.off_re),
        off_im: 0.5 * (r1.off_im + r2.off_im),
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix, descending. Direct quadratic
/// formula on the characteristic polynomial; serves as the brute-force
/// oracle for every closed-form spectrum in this module.
pub fn eig2(h: &Hermitian2) -> (f64, f64) {
    let mean = 0.5 * (h.d0 + h.d1);
    let half_gap = 0.5 * (h.d0 - h.d1);
    let radius =
        (half_gap * half_gap + h.off_re * h.off_re + h.off_im * h.off_im).sqrt();
    (mean + radius, mean - radius)
}

/// Trace distance ‖ρ̂₁ − ρ̂₂‖₁ = 2 sin θ, closed form.
pub fn trace_distance_closed(theta: f64) -> f64 {
    2.0 * theta.sin()
}

/// Trace distance as the sum of absolute eigenvalues of the difference
/// matrix; independent of the closed form.
pub fn trace_distance_oracle(rho1: &Hermitian2, rho2: &Hermitian2) -> f64 {
    let (hi, lo) = eig2(&rho1.sub(rho2));
    hi.abs() + lo.abs()
}

/// Closed-form spectrum of the even mixture.
pub fn mixture_spectrum(theta: f64) -> MixtureSpectrum {
    let c = (1.0 + theta.cos()) / 2.0;
    MixtureSpectrum { c, one_minus_c: 1.0 - c }
}

/// Von Neumann entropy of the even mixture in bits: H((1+cosθ)/2).
pub fn von_neumann_entropy_even_mixture(theta: f64) -> f64 {
    binary_entropy_raw(mixture_spectrum(theta).c)
}

/// Entropy from the eigen-oracle: −Σ λ log₂ λ over the eigenvalues of the
/// actual mixture matrix, with 0·log0 ≡ 0.
pub fn von_neumann_entropy_oracle(pair: &StatePair) -> f64 {
    let (hi, lo) = eig2(&even_mixture(pair));
    -xlog2x(hi) - xlog2x(lo)
}

/// The orthogonality lemma as a runnable check: the mixture spectrum is even
/// (c = 1/2) precisely when the states are orthogonal (θ = π/2). Returns the
/// truth of that biconditional at tolerances 1e-12 on c and 1e-9 on θ.
pub fn check_orthogonality_lemma(theta: f64) -> bool {
    let c_is_half = (mixture_spectrum(theta).c - 0.5).abs() <= tol::ALGEBRAIC;
    let orthogonal = (theta - FRAC_PI_2).abs() <= 1e-9;
    c_is_half == orthogonal
}
