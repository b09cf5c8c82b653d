//! The almost-reducibility scheme.
//!
//! The state is a cocycle `(alpha, exp(theta e) e^{F(.)})` in a diagonal frame
//! together with the conjugation chain that produced it. Each step
//!
//! 1. removes a resonance of `theta` with `k . alpha` at the current scale `N`
//!    by a torus morphism of winding `-k`,
//! 2. solves `Y(x + alpha) - Ad(A) Y(x) = -Ad(A) F(x)` on non-small divisors,
//! 3. conjugates by `exp(Y)` exactly on a grid and re-splits into a constant
//!    and a perturbation, re-diagonalising the constant,
//! 4. grows the scale `N -> N^{1 + sigma}`.
//!
//! The torus part of `Y` sees the divisors `e^{2 i pi k.alpha} - 1`; the `j`
//! part, written as the complex function `Y_x + i Y_y`, sees
//! `e^{2 i pi k.alpha} - e^{2 i pi theta}`, which is small exactly when
//! `theta` is close to `k . alpha` modulo `1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{
    closest_resonance, diophantine_witness, frac_dist, max_norm, resonance_threshold, DiophParams,
    Frequency, ResonanceRecord, UNDERFLOW_DEFECT,
};
use crate::cocycle::{conjugate_raw, normalize_with_report, Cocycle, FiberSamples};
use crate::error::{Error, Result};
use crate::fourier::{
    default_band, group_map_sobolev_norm, AlgebraMap, ChainFactor, ConjugationChain, Grid,
    TorusMorphism,
};
use crate::su2::{
    diagonalize, diagonalize_near, exp_map, group_distance, AlgebraVector, GroupElement,
    TorusElement,
};

/// Residual of the solved homological modes that every step must respect.
pub const HOMOLOGICAL_TOLERANCE: f64 = 1e-10;
/// Tolerance of the replay check of a normal form against its input.
pub const REPLAY_TOLERANCE: f64 = 1e-9;
/// Growth of `|F|_0` below this level is treated as round-off, not divergence.
pub const ROUNDOFF_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Initial truncation scale `N_0`.
    pub n0: u64,
    /// Scale growth `N_{n+1} = N_n^{1 + sigma}`.
    pub sigma: f64,
    /// Resonance exponent; must exceed the declared `tau` of the frequency.
    pub nu: f64,
    pub max_steps: usize,
    pub stop_tolerance: f64,
    /// Each step requires `|F_n|_0 < N_n^{-safety_exponent}`.
    pub safety_exponent: f64,
    /// Largest `|F_0|_0` accepted by [`run_scheme`].
    pub perturbative_bound: f64,
    /// Storage band for the perturbation; `None` picks [`default_band`].
    pub band: Option<usize>,
    /// Declared Diophantine class of the base frequency.
    pub dioph: DiophParams,
}

impl Default for SchemeParams {
    fn default() -> Self {
        let dioph = DiophParams::default();
        Self {
            n0: 8,
            sigma: 0.3,
            nu: dioph.tau + 2.0,
            max_steps: 12,
            stop_tolerance: 1e-12,
            safety_exponent: 2.0,
            perturbative_bound: 1e-2,
            band: None,
            dioph,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        self.dioph.validate()?;
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} must lie in (0, 1)",
                self.sigma
            )));
        }
        if !(self.nu.is_finite() && self.nu > self.dioph.tau) {
            return Err(Error::InvalidParameter(format!(
                "nu = {} must exceed tau = {}",
                self.nu, self.dioph.tau
            )));
        }
        if self.n0 < 1 {
            return Err(Error::InvalidParameter("N_0 must be >= 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        for (name, v) in [
            ("stop_tolerance", self.stop_tolerance),
            ("safety_exponent", self.safety_exponent),
            ("perturbative_bound", self.perturbative_bound),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn band_for(&self, dim: usize) -> usize {
        self.band.unwrap_or_else(|| default_band(dim))
    }

    /// `max(N + 1, round(N^{1 + sigma}))`.
    pub fn next_scale(&self, n: u64) -> u64 {
        let grown = (n as f64).powf(1.0 + self.sigma).round() as u64;
        grown.max(n + 1)
    }
}

/// One resonance removal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantStep {
    pub step: usize,
    pub k: Vec<i64>,
    /// The resonant constant `Lambda = k . alpha + m`, nearest the current angle.
    pub lambda: TorusElement,
    /// Diagonalising frame in force when the resonance was removed.
    pub frame: GroupElement,
    pub scale: u64,
    pub threshold: f64,
    /// `|theta - k . alpha|_Z` before removal.
    pub defect_before: f64,
    /// `|theta'|_Z` after removal.
    pub defect_after: f64,
    /// `d(exp(Lambda e), A_n)`.
    pub distance: f64,
}

/// Per-step record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub n: usize,
    /// Scale used during this step.
    pub scale: u64,
    pub resonant: bool,
    pub k: Option<Vec<i64>>,
    /// Norms of the perturbation after the step.
    pub f_norm_0: f64,
    pub f_norm_1: f64,
    pub f_norm_neg: f64,
    /// `H^{-(d+3)}` norm of the accumulated conjugation after the step.
    pub h_prefix_norm_neg: f64,
    pub y_norm_0: f64,
    pub y_norm_1: f64,
    pub homological_residual: f64,
    pub truncation_error: f64,
    /// Energy lost at the band edge when shifting modes in a removal.
    pub dropped_energy: f64,
    pub theta: f64,
    /// `theta + (sum of removed windings) . alpha`.
    pub accumulator: f64,
}

/// Scheme state between steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KamState {
    pub alpha: Frequency,
    /// Unreduced angle of the constant `exp(theta e)`.
    pub theta: f64,
    pub perturbation: AlgebraMap,
    pub scale: u64,
    pub step: usize,
    pub chain: ConjugationChain,
    pub ledger: Vec<ResonantStep>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Sum of the removed windings.
    pub winding_sum: Vec<i64>,
    /// Most recent diagonalising frame.
    pub frame: GroupElement,
    /// `theta` after initialisation and after every step.
    pub thetas: Vec<f64>,
}

impl KamState {
    /// Diagonalises the constant of `phi` and stores the perturbation at `band`.
    pub fn init(phi: &Cocycle, params: &SchemeParams) -> Result<Self> {
        let dim = phi.dim();
        let band = params.band_for(dim).max(phi.perturbation.band());
        let (p, theta) = diagonalize(&phi.constant);
        let f = phi.perturbation.with_band(band).0.adjoint_by(&p);
        Ok(Self {
            alpha: phi.alpha.clone(),
            theta,
            perturbation: f,
            scale: params.n0,
            step: 0,
            chain: ConjugationChain::from_factors(vec![ChainFactor::Constant { value: p }]),
            ledger: Vec::new(),
            diagnostics: Vec::new(),
            winding_sum: vec![0; dim],
            frame: p,
            thetas: vec![theta],
        })
    }

    pub fn band(&self) -> usize {
        self.perturbation.band()
    }

    pub fn accumulator(&self) -> f64 {
        self.theta + self.alpha.dot(&self.winding_sum)
    }

    pub fn cocycle(&self) -> Cocycle {
        Cocycle {
            alpha: self.alpha.clone(),
            constant: TorusElement::new(self.theta).exp(),
            perturbation: self.perturbation.clone(),
        }
    }
}

/// Solution of the linearised conjugation equation.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologicalSolution {
    pub correction: AlgebraMap,
    /// The unsolvable constant part, absorbed into the next constant.
    pub constant_update: AlgebraVector,
    /// Small-divisor modes and modes beyond the scale.
    pub remainder: AlgebraMap,
    /// Sup-norm substitution residual of the solved part on the grid.
    pub residual: f64,
}

/// Solves `Y(x + alpha) - Ad(exp(theta e)) Y(x) = G(x) - obstruction - R(x)`
/// mode by mode for `|k| <= N`, keeping a mode only when its divisor has
/// modulus at least `N^{-nu}`.
///
/// The obstruction collects the constant torus mode and, when `theta` is
/// central enough that its divisor is small, the constant `j` mode.
pub fn solve_homological(
    theta: &TorusElement,
    rhs: &AlgebraMap,
    alpha: &Frequency,
    n: u64,
    nu: f64,
) -> Result<HomologicalSolution> {
    if alpha.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: rhs.dim(),
        });
    }
    let threshold = resonance_threshold(n, nu)?;
    let dim = rhs.dim();
    let band = rhs.band();
    let rot = Complex64::from_polar(1.0, 2.0 * PI * theta.theta);
    let size = (2 * band + 1).pow(dim as u32);
    let zero = Complex64::new(0.0, 0.0);
    let (mut ye, mut yz, mut re, mut rz) = (
        vec![zero; size],
        vec![zero; size],
        vec![zero; size],
        vec![zero; size],
    );
    let mut obs = AlgebraVector::ZERO;
    for (idx, (k, c)) in rhs.modes().enumerate() {
        let within = max_norm(&k) <= n;
        let is_zero = k.iter().all(|&v| v == 0);
        let shift = Complex64::from_polar(1.0, 2.0 * PI * alpha.dot(&k));
        let ge = c[0];
        let gz = rhs.j_coeff(&k);

        if is_zero {
            obs.coords[0] = ge.re;
        } else {
            let den = shift - 1.0;
            if within && den.norm() < UNDERFLOW_DEFECT && ge.norm() > 0.0 {
                return Err(Error::DenominatorUnderflow {
                    k,
                    modulus: den.norm(),
                });
            }
            if within && den.norm() >= threshold {
                ye[idx] = ge / den;
            } else {
                re[idx] = ge;
            }
        }

        let den = shift - rot;
        if within && den.norm() >= threshold {
            yz[idx] = gz / den;
        } else if is_zero {
            obs.coords[1] = gz.re;
            obs.coords[2] = gz.im;
        } else {
            if within && den.norm() < UNDERFLOW_DEFECT && gz.norm() > 0.0 {
                return Err(Error::DenominatorUnderflow {
                    k,
                    modulus: den.norm(),
                });
            }
            rz[idx] = gz;
        }
    }
    let lookup = |v: &Vec<Complex64>, k: &[i64]| -> Complex64 {
        rhs.index(k).map_or(zero, |i| v[i])
    };
    let correction =
        AlgebraMap::from_torus_and_j(dim, band, |k| lookup(&ye, k), |k| lookup(&yz, k));
    let remainder =
        AlgebraMap::from_torus_and_j(dim, band, |k| lookup(&re, k), |k| lookup(&rz, k));

    let grid = Grid::for_band(dim, band);
    let a = theta.exp();
    let lhs = correction
        .translate(alpha)?
        .sub(&correction.adjoint_by(&a));
    let target = rhs
        .sub(&AlgebraMap::constant(dim, band, obs))
        .sub(&remainder);
    let residual = lhs
        .sub(&target)
        .synthesize(&grid)?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(HomologicalSolution {
        correction,
        constant_update: obs,
        remainder,
        residual,
    })
}

/// Resonance of the constant `exp(theta e)` at scale `N`: the `k` with
/// `0 < |k| <= N` minimising `|theta - k . alpha|_Z`, reported when the
/// defect is at most `N^{-nu}` (closed threshold).
///
/// The second root `-theta` gives the same defects with `k` negated, so the
/// record is always expressed for the root `+theta`.
pub fn detect_resonance(
    theta: &TorusElement,
    alpha: &Frequency,
    n: u64,
    nu: f64,
) -> Result<Option<ResonanceRecord>> {
    let threshold = resonance_threshold(n, nu)?;
    Ok(closest_resonance(theta.theta, alpha, n)?
        .filter(|(_, d)| *d <= threshold)
        .map(|(k, defect)| ResonanceRecord {
            k,
            defect,
            scale: n,
            threshold,
            near_rational: defect < UNDERFLOW_DEFECT,
        }))
}

/// Conjugates by the torus morphism of winding `-k`: the angle becomes
/// `theta - k . alpha` (unreduced, so the central sign is kept) and the `j`
/// modes of `F` move from `k'` to `k' - k`.
///
/// Returns the ledger entry and the `H^0` norm lost at the band edge.
pub fn remove_resonance(
    state: &mut KamState,
    record: &ResonanceRecord,
    nu: f64,
) -> Result<(ResonantStep, f64)> {
    let alpha = &state.alpha;
    let k = record.k.clone();
    if k.len() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: k.len(),
        });
    }
    let threshold = resonance_threshold(state.scale, nu)?;
    let ka = alpha.dot(&k);
    let lambda = ka + (state.theta - ka).round();
    let a_before = TorusElement::new(state.theta).exp();
    let distance = group_distance(&TorusElement::new(lambda).exp(), &a_before);
    let defect_before = frac_dist(state.theta - ka);
    let theta_new = state.theta - ka;
    let defect_after = frac_dist(theta_new);
    if defect_after > threshold {
        return Err(Error::RemovalFailed {
            step: state.step,
            defect: defect_after,
            threshold,
        });
    }
    if let Some(again) = detect_resonance(&TorusElement::new(theta_new), alpha, state.scale, nu)? {
        return Err(Error::RemovalFailed {
            step: state.step,
            defect: again.defect,
            threshold,
        });
    }

    let f = &state.perturbation;
    let shifted = AlgebraMap::from_torus_and_j(
        f.dim(),
        f.band(),
        |kk| f.coeff(kk)[0],
        |kk| {
            let src: Vec<i64> = kk.iter().zip(&k).map(|(a, b)| a + b).collect();
            f.j_coeff(&src)
        },
    );
    // The j part carries H^0 energy sum_k |z(k)|^2; modes landing outside
    // the band are lost.
    let dropped = f
        .modes()
        .filter(|(kk, _)| {
            let dst: Vec<i64> = kk.iter().zip(&k).map(|(a, b)| a - b).collect();
            max_norm(&dst) > f.band() as u64
        })
        .map(|(kk, _)| f.j_coeff(&kk).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let entry = ResonantStep {
        step: state.step,
        k: k.clone(),
        lambda: TorusElement::new(lambda),
        frame: state.frame,
        scale: state.scale,
        threshold,
        defect_before,
        defect_after,
        distance,
    };
    state.perturbation = shifted;
    state.theta = theta_new;
    for (w, ki) in state.winding_sum.iter_mut().zip(&k) {
        *w += ki;
    }
    state.chain.push(ChainFactor::Torus {
        morphism: TorusMorphism::new(k.iter().map(|v| -v).collect()),
    });
    state.ledger.push(entry.clone());
    Ok((entry, dropped))
}

/// `H^{-(d+3)}` norm of the accumulated conjugation, sampled on the double
/// cover so that odd windings are resolved.
pub fn chain_negative_norm(chain: &ConjugationChain, dim: usize) -> Result<f64> {
    let size = 2 * (4 * chain.max_exp_band() + 4) + 4 * chain.total_winding() as usize;
    let grid = Grid::double_cover(dim, size);
    let values = chain.evaluate_grid(&grid, None)?;
    group_map_sobolev_norm(&values, &grid, -(dim as f64 + 3.0))
}

/// One step of the scheme; see the module documentation.
pub fn kam_step(mut state: KamState, params: &SchemeParams) -> Result<KamState> {
    let n = state.scale;
    let dim = state.alpha.dim();
    let band = state.band();
    let f_before = state.perturbation.sobolev_norm(0.0);
    let bound = (n as f64).powf(-params.safety_exponent);
    if f_before >= bound {
        return Err(Error::NonPerturbative {
            step: state.step,
            norm: f_before,
            bound,
        });
    }

    let mut resonant_k = None;
    let mut dropped = 0.0;
    if let Some(record) = detect_resonance(&TorusElement::new(state.theta), &state.alpha, n, params.nu)? {
        let (entry, lost) = remove_resonance(&mut state, &record, params.nu)?;
        log::debug!("step {}: removed resonance k = {:?}", state.step, entry.k);
        resonant_k = Some(entry.k);
        dropped = lost;
    }

    let (mut y_norm_0, mut y_norm_1, mut residual, mut truncation_error) = (0.0, 0.0, 0.0, 0.0);
    if !state.perturbation.is_zero() {
        let a0 = TorusElement::new(state.theta);
        let rhs = state.perturbation.adjoint_by(&a0.exp()).scale(-1.0);
        let sol = solve_homological(&a0, &rhs, &state.alpha, n, params.nu)?;
        residual = sol.residual;
        let y = sol.correction;
        y_norm_0 = y.sobolev_norm(0.0);
        y_norm_1 = y.sobolev_norm(1.0);

        let grid = Grid::for_band(dim, band);
        let ys = y.synthesize(&grid)?;
        let yt = y.translate(&state.alpha)?.synthesize(&grid)?;
        let fs = state.perturbation.synthesize(&grid)?;
        let a = a0.exp();
        let values = yt
            .iter()
            .zip(&fs)
            .zip(&ys)
            .map(|((yt, f), y)| exp_map(yt) * a * exp_map(f) * exp_map(&-*y))
            .collect();
        let (next, report) = normalize_with_report(&FiberSamples { grid, values }, &state.alpha, band)?;
        truncation_error = report.truncation_error;
        let (p, theta) = diagonalize_near(&next.constant, state.theta);
        state.perturbation = next.perturbation.adjoint_by(&p);
        state.theta = theta;
        state.frame = p;
        state.chain.push(ChainFactor::Exp { map: y });
        state.chain.push(ChainFactor::Constant { value: p });
    }

    let f_after = state.perturbation.sobolev_norm(0.0);
    let diag = StepDiagnostics {
        n: state.step,
        scale: n,
        resonant: resonant_k.is_some(),
        k: resonant_k,
        f_norm_0: f_after,
        f_norm_1: state.perturbation.sobolev_norm(1.0),
        f_norm_neg: state.perturbation.sobolev_norm(-(dim as f64 + 3.0)),
        h_prefix_norm_neg: chain_negative_norm(&state.chain, dim)?,
        y_norm_0,
        y_norm_1,
        homological_residual: residual,
        truncation_error,
        dropped_energy: dropped,
        theta: state.theta,
        accumulator: state.accumulator(),
    };
    log::debug!(
        "step {}: N = {n}, |F|_0 {f_before:e} -> {f_after:e}",
        state.step
    );
    state.diagnostics.push(diag);
    state.thetas.push(state.theta);
    state.scale = params.next_scale(n);
    state.step += 1;

    if f_after > f_before && f_after > ROUNDOFF_FLOOR {
        return Err(Error::Divergence {
            step: state.step - 1,
            before: f_before,
            after: f_after,
            state: Box::new(state),
        });
    }
    Ok(state)
}

/// Output of [`run_scheme`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub params: SchemeParams,
    pub ledger: Vec<ResonantStep>,
    /// Angle of the constant after initialisation and after every step.
    pub constants: Vec<f64>,
    pub final_theta: f64,
    pub final_cocycle: Cocycle,
    pub final_scale: u64,
    pub chain: ConjugationChain,
    pub diagnostics: Vec<StepDiagnostics>,
    pub winding_sum: Vec<i64>,
    pub steps: usize,
    pub converged: bool,
    /// False when the base frequency violates its declared Diophantine class.
    pub within_hypotheses: bool,
    /// Value of the angle accumulator after initialisation and every step.
    pub accumulators: Vec<f64>,
}

impl NormalForm {
    /// Number of resonant steps in the run.
    pub fn resonant_count(&self) -> usize {
        self.ledger.len()
    }

    /// Sup over a grid of `d(H(x + alpha) Phi(x) H(x)^{-1}, final fiber(x))`.
    pub fn replay_defect(&self, input: &Cocycle) -> Result<f64> {
        let band = self
            .final_cocycle
            .perturbation
            .band()
            .max(input.perturbation.band())
            .max(self.chain.max_exp_band());
        let grid = Grid::for_band(input.dim(), band);
        let replay = conjugate_raw(&self.chain, input, &grid)?;
        let target = self.final_cocycle.sample(&grid)?;
        Ok(replay
            .values
            .iter()
            .zip(&target.values)
            .map(|(a, b)| group_distance(a, b))
            .fold(0.0, f64::max))
    }
}

fn finish(state: KamState, params: &SchemeParams, converged: bool, hyp: bool) -> NormalForm {
    let accumulators = state
        .thetas
        .iter()
        .enumerate()
        .map(|(i, t)| {
            // Windings removed up to and including step i - 1.
            let mut w = vec![0i64; state.alpha.dim()];
            for r in state.ledger.iter().filter(|r| r.step < i) {
                for (wi, ki) in w.iter_mut().zip(&r.k) {
                    *wi += ki;
                }
            }
            t + state.alpha.dot(&w)
        })
        .collect();
    NormalForm {
        params: params.clone(),
        final_cocycle: state.cocycle(),
        final_theta: state.theta,
        final_scale: state.scale,
        constants: state.thetas,
        ledger: state.ledger,
        chain: state.chain,
        diagnostics: state.diagnostics,
        winding_sum: state.winding_sum,
        steps: state.step,
        converged,
        within_hypotheses: hyp,
        accumulators,
    }
}

/// Checks the declared Diophantine class of `alpha`; logs a warning and
/// returns `false` when a witness is found at the declared horizon.
pub fn frequency_within_hypotheses(alpha: &Frequency, p: &DiophParams) -> Result<bool> {
    match diophantine_witness(alpha, p)? {
        Some(w) => {
            log::warn!(
                "frequency violates the declared Diophantine condition at k = {:?} (defect {:e}); \
                 run is outside the theorem hypotheses",
                w.k,
                w.defect
            );
            Ok(false)
        }
        None => Ok(true),
    }
}

/// Iterates [`kam_step`] until `|F|_0 < stop_tolerance` with no resonance
/// pending at the current scale, or fails with [`Error::NotConverged`].
pub fn run_scheme(phi: &Cocycle, params: &SchemeParams) -> Result<NormalForm> {
    let (nf, err) = run_scheme_partial(phi, params)?;
    match err {
        None => Ok(nf),
        Some(e) => Err(e),
    }
}

/// Like [`run_scheme`] but returns the partial normal form alongside the
/// non-convergence error instead of discarding it.
pub fn run_scheme_partial(phi: &Cocycle, params: &SchemeParams) -> Result<(NormalForm, Option<Error>)> {
    params.validate()?;
    let hyp = if params.dioph.tau > phi.dim() as f64 {
        frequency_within_hypotheses(&phi.alpha, &params.dioph)?
    } else {
        log::warn!("declared tau does not exceed the dimension; hypotheses cannot hold");
        false
    };
    let f0 = phi.perturbation.sobolev_norm(0.0);
    if f0 >= params.perturbative_bound {
        return Err(Error::NonPerturbative {
            step: 0,
            norm: f0,
            bound: params.perturbative_bound,
        });
    }
    let mut state = KamState::init(phi, params)?;
    for _ in 0..=params.max_steps {
        let done = state.perturbation.sobolev_norm(0.0) < params.stop_tolerance
            && detect_resonance(&TorusElement::new(state.theta), &state.alpha, state.scale, params.nu)?
                .is_none();
        if done {
            return Ok((finish(state, params, true, hyp), None));
        }
        if state.step == params.max_steps {
            break;
        }
        state = kam_step(state, params)?;
    }
    let norm = state.perturbation.sobolev_norm(0.0);
    let steps = state.step;
    Ok((
        finish(state, params, false, hyp),
        Some(Error::NotConverged { steps, norm }),
    ))
}
