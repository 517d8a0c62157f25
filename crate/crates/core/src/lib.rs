//! Thermodynamics of discriminating two pure qubit states.
//!
//! A demon that tells two non-orthogonal states |ψ₁⟩, |ψ₂⟩ apart can run an
//! ideal-gas cycle that extracts work from a single heat bath. Capping the
//! extracted work at zero caps the demon's accuracy; this crate computes that
//! cap and checks it against the quantum-information optimum.
//!
//! - [`qstate`]: 2×2 density-matrix algebra for the state pair, closed-form
//!   spectra plus brute-force eigen-oracles.
//! - [`bounds`]: binary entropy, its inversion, and the three accuracy bounds
//!   δ_th, δ_QI, δ_Hol.
//! - [`cycle`]: closed-form per-step work ledger for the demon cycle and the
//!   second-law margin.
//! - [`gassim`]: Monte Carlo / quadrature simulator that re-derives every work
//!   value from particle bookkeeping alone.
//! - [`cli`]: the `qsd-thermo` command-line front end.

pub mod bounds;
pub mod cli;
pub mod cycle;
pub mod gassim;
pub mod qstate;

mod numeric;

/// Numeric tolerances shared by the library, its tests, and the CLI gates.
pub mod tol {
    /// Double-precision algebraic identities: traces, spectra, ledger sums.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Residual |H(p) − h| accepted by the bisection solvers.
    pub const SOLVER_RESIDUAL: f64 = 1e-12;
    /// Iteration cap for the bisection solvers.
    pub const SOLVER_MAX_ITER: u32 = 200;
    /// Agreement required between the two independent bound-solver routes.
    pub const BOUND_CROSS_CHECK: f64 = 1e-10;
    /// Relative agreement of deterministic quadrature against closed forms.
    pub const QUADRATURE_REL: f64 = 1e-3;
    /// Half-width of the "marginal" band when classifying the second-law
    /// margin, in units of N·k_B·T.
    pub const SECOND_LAW_BAND: f64 = 1e-10;
}
