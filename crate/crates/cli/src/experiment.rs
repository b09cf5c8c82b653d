//! Synthesis of cocycles with known rotation class, scheme runs against that
//! ground truth, and the JSON and CSV artifacts they produce.

use std::fs;
use std::io::Write;
use std::path::Path;

use kamrot_core::arithmetic::{continued_fraction_digits, diophantine_witness};
use kamrot_core::cocycle::conjugate_at_band;
use kamrot_core::kam::{
    frequency_within_hypotheses, run_scheme_partial, ResonantStep, StepDiagnostics, REPLAY_TOLERANCE};
use kamrot_core::rotation::{
    classify_arithmetic, equivalence_witness, rotation_vector, ArithmeticReport, EquivalenceWitness,
    CAUCHY_TOLERANCE, EXACT_RESONANCE,
};
use kamrot_core::{
    AlgebraMap, ChainFactor, Cocycle, ConjugationChain, DiophParams, Error as CoreError, Frequency,
    GroupElement, ResonanceRecord, RotationVector, SchemeParams, TorusElement, TorusMorphism,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, FactorSpec};
use crate::error::{CliError, CliResult, ErrorClass, EXIT_FAIL, EXIT_OK};

/// Column order of the diagnostics CSV.
pub const CSV_COLUMNS: [&str; 7] = [
    "n",
    "N_n",
    "resonant",
    "k",
    "F_norm_0",
    "F_norm_1",
    "H_prefix_norm_neg",
];

/// A seeded real map with zero mean, random coefficients on `|k| <= band`
/// and `H^0` norm `amplitude`.
pub fn seeded_zero_mean_map(dim: usize, band: usize, amplitude: f64, seed: u64) -> CliResult<AlgebraMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = AlgebraMap::zeros(dim, band);
    let modes: Vec<Vec<i64>> = m.modes().map(|(k, _)| k).collect();
    for k in modes {
        // One draw per conjugate pair: the pair is fixed by its first
        // nonzero coordinate being positive.
        if !k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            continue;
        }
        let c = [0; 3].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m.set_mode(&k, c)?;
    }
    let norm = m.sobolev_norm(0.0);
    if norm == 0.0 || amplitude == 0.0 {
        return Ok(AlgebraMap::zeros(dim, band));
    }
    Ok(m.scale(amplitude / norm))
}

/// The rotation class planted by construction: the base angle plus the
/// `alpha`-shifts of the windings in the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub representative: f64,
    pub winding_sum: Vec<i64>,
}

impl GroundTruth {
    pub fn rotation(&self, alpha: &Frequency) -> RotationVector {
        RotationVector::from_representative(alpha.clone(), self.representative)
    }
}

/// Output of the `synthesize` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub config_hash: String,
    pub cocycle: Cocycle,
    pub ground_truth: GroundTruth,
}

fn build_factor(factor: &FactorSpec, dim: usize) -> CliResult<ChainFactor> {
    Ok(match factor {
        FactorSpec::Winding { k } => ChainFactor::Torus {
            morphism: TorusMorphism::new(k.clone()),
        },
        FactorSpec::Exp {
            band,
            amplitude,
            seed,
        } => ChainFactor::Exp {
            map: seeded_zero_mean_map(dim, *band, *amplitude, *seed)?,
        },
        FactorSpec::Constant { quaternion } => ChainFactor::Constant {
            value: GroupElement::from(*quaternion),
        },
    })
}

/// `Phi = Conj_H (alpha, exp(theta e) e^{P})` with `H` built from the chain
/// recipe, together with its planted rotation class.
pub fn synthesize_cocycle(cfg: &ExperimentConfig) -> CliResult<(Cocycle, GroundTruth)> {
    cfg.validate()?;
    let alpha = cfg.frequency.resolve()?;
    let dim = alpha.dim();
    let p = match &cfg.perturbation {
        Some(s) => seeded_zero_mean_map(dim, s.band, s.amplitude, s.seed)?,
        None => AlgebraMap::zeros(dim, 0),
    };
    let base = Cocycle::new(alpha.clone(), TorusElement::new(cfg.theta).exp(), p)?;
    let factors = cfg
        .chain
        .iter()
        .map(|f| build_factor(f, dim))
        .collect::<CliResult<Vec<_>>>()?;
    let band = cfg.synthesis_band.unwrap_or_else(|| cfg.params.band_for(dim));
    let chain = ConjugationChain::from_factors(factors.clone());
    let phi = match conjugate_at_band(&chain, &base, band) {
        Ok(phi) => phi,
        Err(source) => {
            // Locate the first prefix of the chain that cannot be normalized.
            let factor = (1..=factors.len())
                .find(|&i| {
                    let prefix = ConjugationChain::from_factors(factors[..i].to_vec());
                    conjugate_at_band(&prefix, &base, band).is_err()
                })
                .map_or(0, |i| i - 1);
            return Err(CliError::Synthesis { factor, source });
        }
    };
    let winding_sum = winding_sum(&chain, dim);
    let truth = GroundTruth {
        representative: cfg.theta + alpha.dot(&winding_sum),
        winding_sum,
    };
    Ok((phi, truth))
}

/// Componentwise sum of the windings of the torus factors.
fn winding_sum(chain: &ConjugationChain, dim: usize) -> Vec<i64> {
    let mut w = vec![0i64; dim];
    for f in &chain.factors {
        if let ChainFactor::Torus { morphism } = f {
            for (wi, ki) in w.iter_mut().zip(&morphism.winding) {
                *wi += ki;
            }
        }
    }
    w
}

/// Every threshold and horizon a report's verdict depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Resonance threshold exponent: a constant is resonant at scale `N` when
    /// `|theta - k . alpha|_Z < N^{-nu}` for some `|k| <= N`.
    pub nu: f64,
    pub dioph: DiophParams,
    pub stop_tolerance: f64,
    pub safety_exponent: f64,
    pub perturbative_bound: f64,
    pub equivalence_horizon: u64,
    pub truth_tolerance: f64,
    pub cauchy_tolerance: f64,
    pub exact_resonance: f64,
    pub replay_tolerance: f64,
}

impl Thresholds {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            nu: cfg.params.nu,
            dioph: cfg.params.dioph,
            stop_tolerance: cfg.params.stop_tolerance,
            safety_exponent: cfg.params.safety_exponent,
            perturbative_bound: cfg.params.perturbative_bound,
            equivalence_horizon: cfg.horizon,
            truth_tolerance: cfg.truth_tolerance,
            cauchy_tolerance: CAUCHY_TOLERANCE,
            exact_resonance: EXACT_RESONANCE,
            replay_tolerance: REPLAY_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The computed rotation vector matches the ground truth.
    Pass,
    /// The run finished but the rotation vector does not match.
    Fail,
    /// The run stopped with an error.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub class: ErrorClass,
    pub message: String,
}

impl ErrorRecord {
    fn of(e: &CliError) -> Self {
        Self {
            class: e.class(),
            message: e.to_string(),
        }
    }
}

/// What the scheme produced, complete or partial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// False when the base frequency violates the declared Diophantine
    /// class: the run is outside the hypotheses of the convergence theorem.
    pub within_hypotheses: bool,
    pub converged: bool,
    pub steps: usize,
    pub final_scale: u64,
    pub final_theta: f64,
    pub winding_sum: Vec<i64>,
    pub ledger: Vec<ResonantStep>,
    pub constants: Vec<f64>,
    pub replay_defect: Option<f64>,
    pub rotation: Option<RotationVector>,
    pub arithmetic: Option<ArithmeticReport>,
    pub witness: Option<EquivalenceWitness>,
    pub diagnostics: Vec<StepDiagnostics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub thresholds: Thresholds,
    pub ground_truth: Option<GroundTruth>,
    pub outcome: Option<RunOutcome>,
    pub verdict: Verdict,
    pub error: Option<ErrorRecord>,
    pub exit_code: i32,
}

impl ExperimentReport {
    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        self.outcome.as_ref().map_or(&[], |o| o.diagnostics.as_slice())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn error_report(
    cfg: &ExperimentConfig,
    truth: Option<GroundTruth>,
    outcome: Option<RunOutcome>,
    err: &CliError,
) -> ExperimentReport {
    ExperimentReport {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        thresholds: Thresholds::of(cfg),
        ground_truth: truth,
        outcome,
        verdict: Verdict::Error,
        error: Some(ErrorRecord::of(err)),
        exit_code: err.exit_code(),
    }
}

/// Synthesizes the configured cocycle, runs the scheme, reads off and
/// classifies the rotation vector and compares it with the ground truth.
/// Scheme and synthesis failures are recorded in the report rather than
/// returned.
pub fn evaluate_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let (phi, truth) = match synthesize_cocycle(cfg) {
        Ok(v) => v,
        Err(e) => return Ok(error_report(cfg, None, None, &e)),
    };
    Ok(analyse(cfg, &phi, Some(truth)))
}

/// Runs the scheme on `phi` and assembles the report.
pub fn analyse(cfg: &ExperimentConfig, phi: &Cocycle, truth: Option<GroundTruth>) -> ExperimentReport {
    let (nf, pending) = match run_scheme_partial(phi, &cfg.params) {
        Ok(v) => v,
        Err(CoreError::Divergence {
            step,
            before,
            after,
            state,
        }) => {
            let within_hypotheses =
                frequency_within_hypotheses(&phi.alpha, &cfg.params.dioph).unwrap_or(false);
            let outcome = RunOutcome {
                within_hypotheses,
                converged: false,
                steps: state.step,
                final_scale: state.scale,
                final_theta: state.theta,
                winding_sum: state.winding_sum.clone(),
                ledger: state.ledger.clone(),
                constants: state.thetas.clone(),
                replay_defect: None,
                rotation: None,
                arithmetic: None,
                witness: None,
                diagnostics: state.diagnostics.clone(),
            };
            let err = CliError::Core(CoreError::Divergence {
                step,
                before,
                after,
                state,
            });
            return error_report(cfg, truth, Some(outcome), &err);
        }
        Err(e) => return error_report(cfg, truth, None, &CliError::Core(e)),
    };
    let mut outcome = RunOutcome {
        within_hypotheses: nf.within_hypotheses,
        converged: nf.converged,
        steps: nf.steps,
        final_scale: nf.final_scale,
        final_theta: nf.final_theta,
        winding_sum: nf.winding_sum.clone(),
        ledger: nf.ledger.clone(),
        constants: nf.constants.clone(),
        replay_defect: nf.replay_defect(phi).ok(),
        rotation: None,
        arithmetic: None,
        witness: None,
        diagnostics: nf.diagnostics.clone(),
    };
    if let Some(e) = pending {
        return error_report(cfg, truth, Some(outcome), &CliError::Core(e));
    }
    let rotation = match rotation_vector(&nf) {
        Ok(r) => r,
        Err(e) => return error_report(cfg, truth, Some(outcome), &CliError::Core(e)),
    };
    outcome.arithmetic = classify_arithmetic(&rotation, &cfg.params.dioph).ok();
    let mut verdict = Verdict::Pass;
    if let Some(t) = &truth {
        match equivalence_witness(&rotation, &t.rotation(&rotation.alpha), cfg.horizon, cfg.truth_tolerance) {
            Ok(Some(w)) => outcome.witness = Some(w),
            Ok(None) => verdict = Verdict::Fail,
            Err(e) => {
                outcome.rotation = Some(rotation);
                return error_report(cfg, truth, Some(outcome), &CliError::Core(e));
            }
        }
    }
    outcome.rotation = Some(rotation);
    ExperimentReport {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        thresholds: Thresholds::of(cfg),
        ground_truth: truth,
        outcome: Some(outcome),
        verdict,
        error: None,
        exit_code: if verdict == Verdict::Pass { EXIT_OK } else { EXIT_FAIL },
    }
}

fn format_float(v: f64) -> String {
    format!("{v:e}")
}

/// Writes the per-step diagnostics in the fixed [`CSV_COLUMNS`] order. The
/// `k` column lists the removed winding's components separated by `;` and is
/// empty on non-resonant steps.
pub fn write_diagnostics_csv<W: Write>(out: W, diagnostics: &[StepDiagnostics]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for d in diagnostics {
        let k = d
            .k
            .as_ref()
            .map(|k| k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        w.write_record([
            d.n.to_string(),
            d.scale.to_string(),
            d.resonant.to_string(),
            k,
            format_float(d.f_norm_0),
            format_float(d.f_norm_1),
            format_float(d.h_prefix_norm_neg),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// [`evaluate_experiment`] followed by writing the JSON report and the CSV
/// diagnostics to the configured output paths.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let report = evaluate_experiment(cfg)?;
    if let Some(path) = &cfg.output.report {
        write_file(path, report.to_json().as_bytes())?;
    }
    if let Some(path) = &cfg.output.diagnostics {
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, report.diagnostics())?;
        write_file(path, &buf)?;
    }
    Ok(report)
}

/// Rotation vector of an arbitrary cocycle under the given parameters.
pub fn rotation_of(phi: &Cocycle, params: &SchemeParams) -> CliResult<RotationVector> {
    let (nf, pending) = run_scheme_partial(phi, params)?;
    if let Some(e) = pending {
        return Err(e.into());
    }
    Ok(rotation_vector(&nf)?)
}

/// Reads a cocycle from a `synthesize` output or a bare cocycle document.
pub fn parse_cocycle(text: &str) -> CliResult<Cocycle> {
    match serde_json::from_str::<Synthesis>(text) {
        Ok(s) => Ok(s.cocycle),
        Err(_) => Ok(serde_json::from_str::<Cocycle>(text)?),
    }
}

/// Output of the `check-dioph` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophCheck {
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub horizon: u64,
    /// True when no `0 < |k| <= horizon` violates the condition.
    pub holds: bool,
    pub witness: Option<ResonanceRecord>,
    /// Leading continued-fraction digits (one-frequency case only).
    pub continued_fraction: Option<Vec<u64>>,
}

pub fn check_dioph(alpha: &Frequency, p: &DiophParams) -> CliResult<DiophCheck> {
    let witness = diophantine_witness(alpha, p)?;
    let continued_fraction = match alpha.components() {
        [a] => continued_fraction_digits(*a, 16).ok(),
        _ => None,
    };
    Ok(DiophCheck {
        alpha: alpha.components().to_vec(),
        gamma: p.gamma,
        tau: p.tau,
        horizon: p.horizon,
        holds: witness.is_none(),
        witness,
        continued_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEntry {
    pub config_hash: String,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub ground_truth: Option<f64>,
    pub representative: Option<f64>,
    pub steps: Option<usize>,
    pub resonant_steps: Option<usize>,
    pub within_hypotheses: Option<bool>,
}

/// Summary of a batch of reports, in input order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedReport {
    pub entries: Vec<MergeEntry>,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
}

impl MergedReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.errored == 0
    }
}

pub fn merge_reports(reports: &[ExperimentReport]) -> MergedReport {
    let entries: Vec<MergeEntry> = reports
        .iter()
        .map(|r| MergeEntry {
            config_hash: r.config_hash.clone(),
            verdict: r.verdict,
            exit_code: r.exit_code,
            ground_truth: r.ground_truth.as_ref().map(|t| t.representative),
            representative: r
                .outcome
                .as_ref()
                .and_then(|o| o.rotation.as_ref())
                .map(|v| v.representative),
            steps: r.outcome.as_ref().map(|o| o.steps),
            resonant_steps: r.outcome.as_ref().map(|o| o.ledger.len()),
            within_hypotheses: r.outcome.as_ref().map(|o| o.within_hypotheses),
        })
        .collect();
    let count = |v: Verdict| entries.iter().filter(|e| e.verdict == v).count();
    MergedReport {
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        errored: count(Verdict::Error),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_map_is_deterministic_and_scaled() {
        let a = seeded_zero_mean_map(2, 3, 1e-4, 9).unwrap();
        let b = seeded_zero_mean_map(2, 3, 1e-4, 9).unwrap();
        assert_eq!(a, b);
        assert!((a.sobolev_norm(0.0) - 1e-4).abs() < 1e-18);
        assert!(a.mean().norm() == 0.0);
        let c = seeded_zero_mean_map(2, 3, 1e-4, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn csv_header_order() {
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,N_n,resonant,k,F_norm_0,F_norm_1,H_prefix_norm_neg\n"
        );
    }
}
