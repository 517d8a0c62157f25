//! Monte Carlo / quadrature simulator of the demon-driven gas cycle.
//!
//! The gas is represented by region populations rather than trajectories:
//! the cycle is quasistatic and isothermal, so per-region counts fully
//! determine every work integral (pressure is n·k_B·T/V_region throughout).
//! Each run samples the demon's measurement records and the φ-basis collapse
//! counts, locates the pressure-balance wall positions from the actual
//! counts, and integrates each sub-gas's work with midpoint quadrature. The
//! result is an estimate of every closed form in [`crate::cycle`] that
//! shares no code path with it.
//!
//! Expected-count mode replaces every random draw with its expectation
//! (non-integer counts allowed), leaving pure quadrature error; this is the
//! deterministic oracle the tests lean on.
//!
//! A note on small-δ runs: the sampled wall positions sit where the work is
//! stationary, so count fluctuations contribute at second order and the
//! cycle picks up ~k_B·T/2 of real fluctuation work that the
//! thermodynamic-limit formulas lack. At δ near 0 (or θ near π/2 for the
//! collapse step) that bias is comparable to the 3-standard-error band, and
//! a sampled run may honestly fail its tolerance gate. Interior parameters
//! are first-order dominated and safely inside the band.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Uniform};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use thiserror::Error;

use crate::cycle::{self, CycleParams};
use crate::tol;

/// RNG substream per randomized stage, in fixed order, so adding a
/// diagnostic that draws from one stage never perturbs the others.
pub const STREAM_MEASUREMENT: u64 = 1;
pub const STREAM_COLLAPSE: u64 = 2;
pub const STREAM_PLACEMENT: u64 = 3;

#[derive(Debug, Error)]
pub enum GasSimError {
    #[error("wall_substeps = {0} below the minimum of 16")]
    TooFewSubsteps(u32),
    #[error("no RNG seeds given")]
    NoSeeds,
    #[error("sampled mode needs an even integer particle count >= 2, got {0}")]
    BadParticleCount(f64),
    #[error("nonpositive volume (from {v_from} to {v_to}) with {n} particles")]
    BadVolume { v_from: f64, v_to: f64, n: f64 },
    #[error("wall has no particles on either side (trapped {trapped}, driving {driving})")]
    DegenerateWall { trapped: f64, driving: f64 },
    #[error("population has no wall positions; locate the wall equilibrium first")]
    WallsNotSet,
    #[error("wall positions cross: x = {x} exceeds 1 - y = {one_minus_y}")]
    CrossedWalls { x: f64, one_minus_y: f64 },
    #[error("step {step}: {source}")]
    AtStep {
        step: u32,
        #[source]
        source: Box<GasSimError>,
    },
}

fn at_step(step: u32) -> impl Fn(GasSimError) -> GasSimError {
    move |source| GasSimError::AtStep { step, source: Box::new(source) }
}

/// True internal state of a particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum GasLabel {
    Psi1,
    Psi2,
    Phi1,
    Phi2,
}

/// What the shared demon memory says about a particle. A single record per
/// particle drives both walls, which is what makes the two demons'
/// measurements mutually consistent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MemoryRecord {
    None,
    One,
    Two,
}

/// Gas populations at one stage of the cycle: particle counts per
/// (true label, memory record) cell, plus the wall positions as volume
/// fractions once step 2 has equilibrated. Counts are f64 so expected-count
/// mode can hold non-integer occupancies.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState {
    counts: BTreeMap<(GasLabel, MemoryRecord), f64>,
    /// x: fraction of the total volume left of the first (red) wall
    red_wall: Option<f64>,
    /// y: fraction of the total volume right of the second (blue) wall
    blue_wall: Option<f64>,
}

impl PopulationState {
    /// Post-measurement populations: ψ-labeled particles carrying record
    /// 1 or 2. `cor` counts are correct records, `mis` counts mistaken ones.
    pub fn post_measurement(cor1: f64, mis1: f64, cor2: f64, mis2: f64) -> Self {
        let mut counts = BTreeMap::new();
        counts.insert((GasLabel::Psi1, MemoryRecord::One), cor1);
        counts.insert((GasLabel::Psi1, MemoryRecord::Two), mis1);
        counts.insert((GasLabel::Psi2, MemoryRecord::Two), cor2);
        counts.insert((GasLabel::Psi2, MemoryRecord::One), mis2);
        debug_assert!(counts.values().all(|&n| n >= 0.0));
        Self { counts, red_wall: None, blue_wall: None }
    }

    /// Post-collapse populations: φ-labeled particles, memory already reset.
    pub fn post_collapse(n_phi1: f64, n_phi2: f64) -> Self {
        let mut counts = BTreeMap::new();
        counts.insert((GasLabel::Phi1, MemoryRecord::None), n_phi1);
        counts.insert((GasLabel::Phi2, MemoryRecord::None), n_phi2);
        debug_assert!(n_phi1 >= 0.0 && n_phi2 >= 0.0);
        Self { counts, red_wall: None, blue_wall: None }
    }

    pub fn count(&self, label: GasLabel, record: MemoryRecord) -> f64 {
        self.counts.get(&(label, record)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }

    pub fn cells(&self) -> impl Iterator<Item = (GasLabel, MemoryRecord, f64)> + '_ {
        self.counts.iter().map(|(&(l, r), &n)| (l, r, n))
    }

    pub fn with_walls(mut self, x: f64, y: f64) -> Self {
        self.red_wall = Some(x);
        self.blue_wall = Some(y);
        self
    }

    /// (x, y) wall fractions, present only after equilibration.
    pub fn walls(&self) -> Option<(f64, f64)> {
        self.red_wall.zip(self.blue_wall)
    }
}

/// One simulation request.
#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    params: CycleParams,
    wall_substeps: u32,
    seeds: Vec<u64>,
    sample_measurements: bool,
}

impl SimConfig {
    pub fn new(
        params: CycleParams,
        wall_substeps: u32,
        seeds: Vec<u64>,
        sample_measurements: bool,
    ) -> Result<Self, GasSimError> {
        if wall_substeps < 16 {
            return Err(GasSimError::TooFewSubsteps(wall_substeps));
        }
        if seeds.is_empty() {
            return Err(GasSimError::NoSeeds);
        }
        let n = params.n_particles();
        // sampled counts feed binomial draws over per-gas halves, so N must
        // split into two integer halves
        if sample_measurements && (n.fract() != 0.0 || n < 2.0 || (n / 2.0).fract() != 0.0) {
            return Err(GasSimError::BadParticleCount(n));
        }
        Ok(Self { params, wall_substeps, seeds, sample_measurements })
    }

    pub fn params(&self) -> &CycleParams {
        &self.params
    }

    pub fn wall_substeps(&self) -> u32 {
        self.wall_substeps
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn sample_measurements(&self) -> bool {
        self.sample_measurements
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Measurement outcomes for one seed: each of the N/2 ψ₁ particles gets
/// record 1 with probability (1+δ)/2 (else record 2), independently;
/// symmetric for ψ₂. The per-species mistake counts are binomial draws,
/// which is distribution-identical to per-particle Bernoulli trials.
pub fn sample_measurements(params: &CycleParams, seed: u64) -> PopulationState {
    let mut rng = stream_rng(seed, STREAM_MEASUREMENT);
    let half = params.n_particles() / 2.0;
    let p_mistake = (1.0 - params.delta().get()) / 2.0;
    let binom = Binomial::new(half as u64, p_mistake).expect("validated probability");
    let mis1 = binom.sample(&mut rng) as f64;
    let mis2 = binom.sample(&mut rng) as f64;
    PopulationState::post_measurement(half - mis1, mis1, half - mis2, mis2)
}

/// Expected-count counterpart: the four (label, record) cells hold exactly
/// (1±δ)·N/4 particles, fractional values allowed.
pub fn expected_measurements(params: &CycleParams) -> PopulationState {
    let quarter = params.n_particles() / 4.0;
    let delta = params.delta().get();
    let cor = (1.0 + delta) * quarter;
    let mis = (1.0 - delta) * quarter;
    PopulationState::post_measurement(cor, mis, cor, mis)
}

/// Pressure-balance positions of the two walls from actual counts.
///
/// The red wall is squeezed between the mistaken ψ₁ particles trapped to its
/// left and the correctly recorded ψ₂ particles driving from its right, so
/// it stops at x = n_trapped/(n_trapped + n_driving); the blue wall is the
/// mirror image. With expected counts both reduce to (1−δ)/2.
pub fn find_wall_equilibrium(pop: &PopulationState) -> Result<(f64, f64), GasSimError> {
    let mis1 = pop.count(GasLabel::Psi1, MemoryRecord::Two);
    let cor2 = pop.count(GasLabel::Psi2, MemoryRecord::Two);
    let mis2 = pop.count(GasLabel::Psi2, MemoryRecord::One);
    let cor1 = pop.count(GasLabel::Psi1, MemoryRecord::One);
    if mis1 + cor2 <= 0.0 {
        return Err(GasSimError::DegenerateWall { trapped: mis1, driving: cor2 });
    }
    if mis2 + cor1 <= 0.0 {
        return Err(GasSimError::DegenerateWall { trapped: mis2, driving: cor1 });
    }
    Ok((mis1 / (mis1 + cor2), mis2 / (mis2 + cor1)))
}

/// Midpoint-rule quadrature of −n·k_B·T ∫ dv/v from `v_from` to `v_to`.
/// Signed panels handle compression (v_to < v_from) with no special case.
/// An empty portion (n = 0) does no work regardless of volumes.
pub fn isothermal_work(
    n: f64,
    kbt: f64,
    v_from: f64,
    v_to: f64,
    substeps: u32,
) -> Result<f64, GasSimError> {
    if n == 0.0 {
        return Ok(0.0);
    }
    if !(v_from > 0.0 && v_to > 0.0) {
        return Err(GasSimError::BadVolume { v_from, v_to, n });
    }
    if v_from == v_to {
        return Ok(0.0);
    }
    let h = (v_to - v_from) / substeps as f64;
    let sum: f64 = (0..substeps).map(|i| h / (v_from + (i as f64 + 0.5) * h)).sum();
    Ok(-n * kbt * sum)
}

/// Worst-case magnitude of the midpoint-rule error of [`isothermal_work`]:
/// |E| ≤ n·k_B·T·|Δv|·h²·max|f''|/24 with f = 1/v, taking f'' at the smaller
/// volume. Pessimistic but cheap, and it shrinks as substeps⁻².
pub fn quadrature_error_bound(n: f64, kbt: f64, v_from: f64, v_to: f64, substeps: u32) -> f64 {
    if n == 0.0 || v_from == v_to {
        return 0.0;
    }
    let span = (v_to - v_from).abs();
    let h = span / substeps as f64;
    let v_min = v_from.min(v_to);
    n * kbt * span * h * h / (12.0 * v_min * v_min * v_min)
}

/// One per-step comparison between the simulated mean and the analytic
/// value. `tolerance` is 3 standard errors plus the quadrature error bound
/// plus a 1e-12·N·k_B·T floor; `rel_dev` is relative to the analytic value,
/// or to N·k_B·T·ln2 when the analytic value is exactly zero.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepEstimate {
    pub step: u32,
    pub sim_mean: f64,
    pub sim_stderr: f64,
    pub analytic: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Same comparison for the cycle total.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TotalEstimate {
    pub sim_mean: f64,
    pub sim_stderr: f64,
    pub analytic: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Measured wall-equilibrium fractions against the expected (1−δ)/2.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EquilibriumEstimate {
    pub x_mean: f64,
    pub x_stderr: f64,
    pub y_mean: f64,
    pub y_stderr: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub steps: Vec<StepEstimate>,
    pub equilibrium: EquilibriumEstimate,
    pub totals: TotalEstimate,
    pub passed: bool,
}

struct SeedRun {
    works: [f64; 5],
    total: f64,
    x: f64,
    y: f64,
    bounds: [f64; 5],
}

fn run_one_seed(config: &SimConfig, seed: u64) -> Result<SeedRun, GasSimError> {
    let p = config.params();
    let n = p.n_particles();
    let kbt = p.boltzmann() * p.temperature();
    let v = p.volume();
    let s = config.wall_substeps();
    let half = n / 2.0;

    // step 1: both label gases double their volume, V/4 -> V/2 each
    let w1 = isothermal_work(half, kbt, v / 4.0, v / 2.0, s).map_err(at_step(1))?
        + isothermal_work(half, kbt, v / 4.0, v / 2.0, s).map_err(at_step(1))?;
    let b1 = 2.0 * quadrature_error_bound(half, kbt, v / 4.0, v / 2.0, s);

    // step 2: measure, equilibrate the walls, integrate the four sub-gases
    let pop = if config.sample_measurements() {
        sample_measurements(p, seed)
    } else {
        expected_measurements(p)
    };
    let (x, y) = find_wall_equilibrium(&pop).map_err(at_step(2))?;
    let mis1 = pop.count(GasLabel::Psi1, MemoryRecord::Two);
    let cor2 = pop.count(GasLabel::Psi2, MemoryRecord::Two);
    let mis2 = pop.count(GasLabel::Psi2, MemoryRecord::One);
    let cor1 = pop.count(GasLabel::Psi1, MemoryRecord::One);
    let legs = [
        (mis1, x * v),
        (cor2, (1.0 - x) * v),
        (mis2, y * v),
        (cor1, (1.0 - y) * v),
    ];
    let mut w2 = 0.0;
    let mut b2 = 0.0;
    for (count, v_end) in legs {
        w2 += isothermal_work(count, kbt, v / 2.0, v_end, s).map_err(at_step(2))?;
        b2 += quadrature_error_bound(count, kbt, v / 2.0, v_end, s);
    }

    // the measurement/reset bracket is reversible: exactly zero work, an
    // assumption of the model rather than an estimate
    let bracket = 0.0;

    // step 3: collapse to the φ basis, then both membranes sweep V -> V/2
    let c = crate::qstate::mixture_spectrum(p.theta()).c;
    let n_phi1 = if config.sample_measurements() {
        let mut rng = stream_rng(seed, STREAM_COLLAPSE);
        Binomial::new(n as u64, c).expect("validated probability").sample(&mut rng) as f64
    } else {
        c * n
    };
    let n_phi2 = n - n_phi1;
    let w3 = isothermal_work(n_phi1, kbt, v, v / 2.0, s).map_err(at_step(3))?
        + isothermal_work(n_phi2, kbt, v, v / 2.0, s).map_err(at_step(3))?;
    let b3 = quadrature_error_bound(n_phi1, kbt, v, v / 2.0, s)
        + quadrature_error_bound(n_phi2, kbt, v, v / 2.0, s);

    // step 4: compress each portion to the initial pressure; the endpoint
    // volumes use the sampled counts so the run stays internally consistent
    let v1_end = n_phi1 * v / (2.0 * n);
    let v2_end = n_phi2 * v / (2.0 * n);
    let w4 = isothermal_work(n_phi1, kbt, v / 2.0, v1_end, s).map_err(at_step(4))?
        + isothermal_work(n_phi2, kbt, v / 2.0, v2_end, s).map_err(at_step(4))?;
    let b4 = quadrature_error_bound(n_phi1, kbt, v / 2.0, v1_end, s)
        + quadrature_error_bound(n_phi2, kbt, v / 2.0, v2_end, s);

    // step 5: quasistatic relabeling unitaries, no work
    let w5 = 0.0;

    let works = [w1, w2, w3, w4, w5];
    let total = w1 + w2 + w3 + w4 + w5 + bracket + bracket;
    Ok(SeedRun { works, total, x, y, bounds: [b1, b2, b3, b4, 0.0] })
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

fn relative_deviation(abs_dev: f64, analytic: f64, scale: f64) -> f64 {
    if analytic != 0.0 {
        abs_dev / analytic.abs()
    } else if abs_dev == 0.0 {
        0.0
    } else {
        abs_dev / (scale * LN_2)
    }
}

/// Runs the full cycle once per seed and compares against the analytic
/// ledger. Per-step tolerances are 3 standard errors plus the worst
/// per-seed quadrature bound plus a 1e-12·N·k_B·T floor; wall fractions get
/// 3 standard errors plus 1e-12. `passed` is the conjunction of every gate.
pub fn simulate_cycle(config: &SimConfig) -> Result<SimReport, GasSimError> {
    let runs: Vec<SeedRun> = config
        .seeds()
        .iter()
        .map(|&seed| run_one_seed(config, seed))
        .collect::<Result<_, _>>()?;

    let params = config.params();
    let ledger = cycle::ledger(params);
    let analytic_steps = [ledger.w1, ledger.w2, ledger.w3, ledger.w4, ledger.w5];
    let scale = params.work_scale();
    let floor = tol::ALGEBRAIC * scale;

    let steps = (0..5)
        .map(|i| {
            let per_seed: Vec<f64> = runs.iter().map(|r| r.works[i]).collect();
            let (sim_mean, sim_stderr) = mean_stderr(&per_seed);
            let quad = runs.iter().map(|r| r.bounds[i]).fold(0.0, f64::max);
            let analytic = analytic_steps[i];
            let abs_dev = (sim_mean - analytic).abs();
            let tolerance = 3.0 * sim_stderr + quad + floor;
            StepEstimate {
                step: i as u32 + 1,
                sim_mean,
                sim_stderr,
                analytic,
                abs_dev,
                rel_dev: relative_deviation(abs_dev, analytic, scale),
                tolerance,
                pass: abs_dev <= tolerance,
            }
        })
        .collect::<Vec<_>>();

    let per_seed_totals: Vec<f64> = runs.iter().map(|r| r.total).collect();
    let (total_mean, total_stderr) = mean_stderr(&per_seed_totals);
    let total_quad = runs
        .iter()
        .map(|r| r.bounds.iter().sum::<f64>())
        .fold(0.0, f64::max);
    let total_abs_dev = (total_mean - ledger.total).abs();
    let total_tolerance = 3.0 * total_stderr + total_quad + floor;
    let totals = TotalEstimate {
        sim_mean: total_mean,
        sim_stderr: total_stderr,
        analytic: ledger.total,
        abs_dev: total_abs_dev,
        rel_dev: relative_deviation(total_abs_dev, ledger.total, scale),
        tolerance: total_tolerance,
        pass: total_abs_dev <= total_tolerance,
    };

    let (x_mean, x_stderr) = mean_stderr(&runs.iter().map(|r| r.x).collect::<Vec<_>>());
    let (y_mean, y_stderr) = mean_stderr(&runs.iter().map(|r| r.y).collect::<Vec<_>>());
    let expected = cycle::equilibrium_fraction(params.delta());
    let equilibrium = EquilibriumEstimate {
        x_mean,
        x_stderr,
        y_mean,
        y_stderr,
        expected,
        pass: (x_mean - expected).abs() <= 3.0 * x_stderr + tol::ALGEBRAIC
            && (y_mean - expected).abs() <= 3.0 * y_stderr + tol::ALGEBRAIC,
    };

    let passed = steps.iter().all(|s| s.pass) && totals.pass && equilibrium.pass;
    Ok(SimReport { config: config.clone(), steps, equilibrium, totals, passed })
}

/// Composition of one cylinder region by post-measurement record.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionComposition {
    pub region: &'static str,
    pub record_one: f64,
    pub record_two: f64,
    pub fraction_record_one: f64,
    /// |fraction − 1/2|
    pub deviation: f64,
    /// binomial standard error of the fraction; 0 in expected mode
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub regions: Vec<RegionComposition>,
    pub max_deviation: f64,
}

/// Checks that the post-step-2 gas is an even record-1/record-2 mixture in
/// each of the three cylinder regions [0, x], [x, 1−y], [1−y, 1].
///
/// Trapped particles stay in their end regions; free particles spread over
/// their accessible span, either in expectation (`placement_seed = None`) or
/// by per-particle uniform placement with the given seed. Regions with no
/// particles (e.g. the end regions at δ = 1) are skipped.
pub fn homogeneity_check(
    pop: &PopulationState,
    placement_seed: Option<u64>,
) -> Result<HomogeneityReport, GasSimError> {
    let (x, y) = pop.walls().ok_or(GasSimError::WallsNotSet)?;
    let right_edge = 1.0 - y;
    if x > right_edge {
        return Err(GasSimError::CrossedWalls { x, one_minus_y: right_edge });
    }
    let mis1 = pop.count(GasLabel::Psi1, MemoryRecord::Two);
    let cor2 = pop.count(GasLabel::Psi2, MemoryRecord::Two);
    let mis2 = pop.count(GasLabel::Psi2, MemoryRecord::One);
    let cor1 = pop.count(GasLabel::Psi1, MemoryRecord::One);

    // split each free population across the regions its span covers:
    // cor1 (record 1) roams [0, 1−y]; cor2 (record 2) roams [x, 1]
    let (cor1_left, cor1_mid, cor2_mid, cor2_right) = match placement_seed {
        None => {
            let cor1_left = if cor1 > 0.0 { cor1 * (x / right_edge) } else { 0.0 };
            let cor2_right = if cor2 > 0.0 { cor2 * (y / (1.0 - x)) } else { 0.0 };
            (cor1_left, cor1 - cor1_left, cor2 - cor2_right, cor2_right)
        }
        Some(seed) => {
            if cor1.fract() != 0.0 || cor2.fract() != 0.0 {
                return Err(GasSimError::BadParticleCount(cor1.min(cor2)));
            }
            let mut rng = stream_rng(seed, STREAM_PLACEMENT);
            let unit = Uniform::new(0.0f64, 1.0).expect("unit interval");
            let mut cor1_left = 0.0;
            for _ in 0..cor1 as u64 {
                if unit.sample(&mut rng) * right_edge < x {
                    cor1_left += 1.0;
                }
            }
            let mut cor2_right = 0.0;
            for _ in 0..cor2 as u64 {
                if x + unit.sample(&mut rng) * (1.0 - x) > right_edge {
                    cor2_right += 1.0;
                }
            }
            (cor1_left, cor1 - cor1_left, cor2 - cor2_right, cor2_right)
        }
    };

    let raw = [
        ("left", cor1_left, mis1),
        ("middle", cor1_mid, cor2_mid),
        ("right", mis2, cor2_right),
    ];
    let sampled = placement_seed.is_some();
    let mut regions = Vec::new();
    for (region, record_one, record_two) in raw {
        let total = record_one + record_two;
        if total <= 0.0 {
            continue;
        }
        let fraction_record_one = record_one / total;
        regions.push(RegionComposition {
            region,
            record_one,
            record_two,
            fraction_record_one,
            deviation: (fraction_record_one - 0.5).abs(),
            stderr: if sampled { 0.5 / total.sqrt() } else { 0.0 },
        });
    }
    let max_deviation = regions.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(HomogeneityReport { regions, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Accuracy;
    use approx::assert_relative_eq;

    fn params(theta: f64, delta: f64, n: f64) -> CycleParams {
        CycleParams::new(n, 1.0, 1.0, 1.0, theta, Accuracy::new(delta).unwrap()).unwrap()
    }

    fn config(theta: f64, delta: f64, n: f64, seeds: Vec<u64>, sampled: bool) -> SimConfig {
        SimConfig::new(params(theta, delta, n), 4096, seeds, sampled).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = params(0.5, 0.5, 1000.0);
        assert!(matches!(
            SimConfig::new(p, 8, vec![1], true),
            Err(GasSimError::TooFewSubsteps(8))
        ));
        assert!(matches!(SimConfig::new(p, 64, vec![], true), Err(GasSimError::NoSeeds)));
        let odd = params(0.5, 0.5, 101.0);
        assert!(matches!(
            SimConfig::new(odd, 64, vec![1], true),
            Err(GasSimError::BadParticleCount(_))
        ));
        let fractional = params(0.5, 0.5, 100.5);
        assert!(SimConfig::new(fractional, 64, vec![1], true).is_err());
        // expected-count mode tolerates both
        assert!(SimConfig::new(odd, 64, vec![1], false).is_ok());
        assert!(SimConfig::new(fractional, 64, vec![1], false).is_ok());
    }

    #[test]
    fn expected_cells_at_coin_flip() {
        let pop = expected_measurements(&params(0.5, 0.0, 1000.0));
        for (_, _, n) in pop.cells() {
            assert_eq!(n, 250.0);
        }
        assert_eq!(pop.total(), 1000.0);
    }

    #[test]
    fn perfect_readout_has_no_mistakes() {
        let pop = sample_measurements(&params(0.5, 1.0, 100_000.0), 7);
        assert_eq!(pop.count(GasLabel::Psi1, MemoryRecord::Two), 0.0);
        assert_eq!(pop.count(GasLabel::Psi2, MemoryRecord::One), 0.0);
        assert_eq!(pop.count(GasLabel::Psi1, MemoryRecord::One), 50_000.0);
        assert_eq!(pop.total(), 100_000.0);
    }

    #[test]
    fn sampled_mistakes_within_binomial_band() {
        // Bin(N/2, 1/4): mean 12500, sigma = sqrt(50000*0.25*0.75) ~ 96.8
        let n = 100_000.0;
        for seed in [1, 2, 3, 4, 5] {
            let pop = sample_measurements(&params(0.5, 0.5, n), seed);
            for mis in [
                pop.count(GasLabel::Psi1, MemoryRecord::Two),
                pop.count(GasLabel::Psi2, MemoryRecord::One),
            ] {
                assert!((mis - 12_500.0).abs() <= 4.0 * 96.825, "mis = {mis} at seed {seed}");
            }
            assert_eq!(pop.total(), n);
        }
    }

    #[test]
    fn wall_equilibrium_exact_counts() {
        let (x, y) = find_wall_equilibrium(&expected_measurements(&params(0.9, 0.5, 1000.0))).unwrap();
        assert!((x - 0.25).abs() <= 1e-12);
        assert!((y - 0.25).abs() <= 1e-12);
        let (x, y) = find_wall_equilibrium(&expected_measurements(&params(0.9, 0.0, 1000.0))).unwrap();
        assert!((x - 0.5).abs() <= 1e-12);
        assert!((y - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn wall_equilibrium_sampled_within_band() {
        // delta-method standard error of m/(m+c) at N = 1e5 is ~1.5e-3
        let pop = sample_measurements(&params(0.9, 0.5, 100_000.0), 11);
        let (x, y) = find_wall_equilibrium(&pop).unwrap();
        assert!((x - 0.25).abs() <= 3.0 * 1.6e-3, "x = {x}");
        assert!((y - 0.25).abs() <= 3.0 * 1.6e-3, "y = {y}");
    }

    #[test]
    fn wall_equilibrium_degenerate() {
        let pop = PopulationState::post_measurement(500.0, 0.0, 0.0, 500.0);
        assert!(matches!(
            find_wall_equilibrium(&pop),
            Err(GasSimError::DegenerateWall { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        // both half-gases of step 1, summed
        let w = isothermal_work(500.0, 1.0, 0.25, 0.5, 4096).unwrap() * 2.0;
        assert_relative_eq!(w, -1000.0 * LN_2, epsilon = 1e-6 * 1000.0 * LN_2);
        assert_eq!(isothermal_work(10.0, 1.0, 0.3, 0.3, 64).unwrap(), 0.0);
        assert_eq!(isothermal_work(0.0, 1.0, -1.0, 0.0, 64).unwrap(), 0.0);
        assert!(isothermal_work(5.0, 1.0, 0.0, 0.5, 64).is_err());
        assert!(isothermal_work(5.0, 1.0, 0.5, 0.0, 64).is_err());
    }

    #[test]
    fn quadrature_error_within_bound_and_order_two() {
        let exact = -300.0 * (0.5f64 / 0.125).ln();
        let mut prev_err = f64::INFINITY;
        for substeps in [16, 32, 64, 128, 256] {
            let w = isothermal_work(300.0, 1.0, 0.125, 0.5, substeps).unwrap();
            let err = (w - exact).abs();
            let bound = quadrature_error_bound(300.0, 1.0, 0.125, 0.5, substeps);
            assert!(err <= bound, "err {err} above bound {bound} at {substeps}");
            // halving h must cut the error by ~4 (second-order rule)
            assert!(err <= prev_err / 3.5, "order below 2 at {substeps}");
            prev_err = err;
        }
    }

    #[test]
    fn expected_mode_reproduces_ledger() {
        for (cos_theta, delta) in [(0.2f64, 0.3), (0.5, 0.9), (0.8, 0.0), (0.0, 1.0), (0.7, 0.55)] {
            let cfg = config(cos_theta.acos(), delta, 1000.0, vec![1], false);
            let report = simulate_cycle(&cfg).unwrap();
            assert!(report.passed, "failed at ({cos_theta}, {delta}): {report:?}");
            for step in &report.steps {
                assert!(
                    step.rel_dev <= 1e-3,
                    "step {} rel_dev {} at ({cos_theta}, {delta})",
                    step.step,
                    step.rel_dev
                );
            }
            assert!((report.equilibrium.x_mean - report.equilibrium.expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampled_mode_matches_reference_total() {
        // perfect readout, cos theta = 1/2: total converges to
        // -N k T ln2 (1 - H(3/4))
        let cfg = config(0.5f64.acos(), 1.0, 100_000.0, (0..16).collect(), true);
        let report = simulate_cycle(&cfg).unwrap();
        let reference = -100_000.0 * LN_2 * (1.0 - 0.8112781244591328);
        assert!(
            (report.totals.sim_mean - reference).abs() <= 0.01 * reference.abs(),
            "total {} vs {reference}",
            report.totals.sim_mean
        );
        assert!(report.passed);
    }

    #[test]
    fn orthogonal_perfect_cycle_is_reversible() {
        // expected counts: sampling at theta = pi/2 adds ~kT/2 of real
        // fluctuation work through the step-4 endpoints (see module doc)
        let cfg = config(std::f64::consts::FRAC_PI_2, 1.0, 10_000.0, vec![3], false);
        let report = simulate_cycle(&cfg).unwrap();
        assert!(report.totals.abs_dev <= report.totals.tolerance);
        assert!((report.totals.analytic).abs() <= 1e-12);
        assert!(report.totals.sim_mean.abs() <= report.totals.tolerance);
    }

    #[test]
    fn sampled_interior_parameters_pass_gates() {
        let cfg = config(0.5f64.acos(), 0.5, 100_000.0, (0..16).collect(), true);
        let report = simulate_cycle(&cfg).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.equilibrium.x_stderr > 0.0);
        assert!((report.equilibrium.x_mean - 0.25).abs() <= 3.0 * report.equilibrium.x_stderr);
    }

    #[test]
    fn reports_are_bit_identical() {
        let mk = || {
            let cfg = config(0.9, 0.4, 5000.0, vec![5, 6, 7], true);
            serde_json::to_string(&simulate_cycle(&cfg).unwrap()).unwrap()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn particle_conservation_through_stages() {
        let p = params(0.8, 0.3, 100_000.0);
        let pop = sample_measurements(&p, 17);
        assert_eq!(pop.total(), 100_000.0);
        let collapsed = PopulationState::post_collapse(61_234.0, 100_000.0 - 61_234.0);
        assert_eq!(collapsed.total(), 100_000.0);
    }

    #[test]
    fn homogeneity_expected_mode_is_even() {
        for delta in [0.0, 0.3, 0.9] {
            let p = params(0.8, delta, 1000.0);
            let pop = expected_measurements(&p);
            let (x, y) = find_wall_equilibrium(&pop).unwrap();
            let report = homogeneity_check(&pop.with_walls(x, y), None).unwrap();
            assert!(report.max_deviation <= 1e-12, "delta {delta}: {report:?}");
            let expected_regions = if delta == 0.0 { 2 } else { 3 };
            assert_eq!(report.regions.len(), expected_regions);
        }
    }

    #[test]
    fn homogeneity_skips_empty_end_regions() {
        let p = params(0.8, 1.0, 1000.0);
        let pop = expected_measurements(&p);
        let (x, y) = find_wall_equilibrium(&pop).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
        let report = homogeneity_check(&pop.with_walls(x, y), None).unwrap();
        assert_eq!(report.regions.len(), 1);
        assert_eq!(report.regions[0].region, "middle");
        assert!(report.max_deviation <= 1e-12);
    }

    #[test]
    fn homogeneity_sampled_within_band() {
        let p = params(0.8, 0.5, 100_000.0);
        let pop = sample_measurements(&p, 23);
        let (x, y) = find_wall_equilibrium(&pop).unwrap();
        let report = homogeneity_check(&pop.with_walls(x, y), Some(23)).unwrap();
        assert_eq!(report.regions.len(), 3);
        for region in &report.regions {
            assert!(
                region.deviation <= 4.0 * region.stderr,
                "{} fraction {} stderr {}",
                region.region,
                region.fraction_record_one,
                region.stderr
            );
        }
    }

    #[test]
    fn homogeneity_requires_walls() {
        let pop = expected_measurements(&params(0.8, 0.5, 1000.0));
        assert!(matches!(homogeneity_check(&pop, None), Err(GasSimError::WallsNotSet)));
    }

    #[test]
    fn step_errors_carry_position() {
        let err = GasSimError::AtStep {
            step: 4,
            source: Box::new(GasSimError::BadVolume { v_from: 0.0, v_to: 1.0, n: 5.0 }),
        };
        assert!(err.to_string().contains("step 4"));
    }

    #[test]
    fn single_seed_sampled_run_fails_tolerance() {
        // one seed means zero standard error, so statistical deviation
        // cannot be absorbed; the report must say so rather than pass
        let cfg = config(0.5f64.acos(), 0.5, 10_000.0, vec![9], true);
        let report = simulate_cycle(&cfg).unwrap();
        assert!(!report.passed);
    }
}
