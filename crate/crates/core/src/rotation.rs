//! Fibered rotation vectors and their arithmetic.
//!
//! A rotation vector is stored as the `e`-coefficient of an algebra element.
//! Two representatives `r`, `r'` describe the same class when
//! `+-r - r' = n (k . alpha) + 2m` for integers `n`, `m` and `k in Z^d`: the
//! shift by `k . alpha` comes from torus morphisms, the shift by `2` from
//! `exp(2e) = Id`, and the sign from the Weyl reflection `theta -> -theta`.

use serde::{Deserialize, Serialize};

use crate::arithmetic::{
    closest_resonance, for_each_in_shell, frac_dist, relative_diophantine_witness, DiophParams,
    Frequency, ResonanceRecord,
};
use crate::cocycle::{conjugate_at_band, Cocycle};
use crate::error::{Error, Result};
use crate::fourier::{AlgebraMap, ChainFactor, ConjugationChain};
use crate::kam::{detect_resonance, run_scheme, NormalForm, SchemeParams};
use crate::su2::TorusElement;

/// Default matching tolerance for [`equivalence_check`].
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-8;
/// Largest gap between the last two angle accumulators of a resolved vector.
pub const CAUCHY_TOLERANCE: f64 = 1e-8;
/// Defects at or below this level count as exact relations.
pub const EXACT_RESONANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub final_theta: f64,
    pub winding_sum: Vec<i64>,
    pub resonant_steps: usize,
    pub steps: usize,
    /// Gap between the last two accumulators.
    pub certificate_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationVector {
    /// Unreduced `e`-coefficient.
    pub representative: f64,
    pub alpha: Frequency,
    pub provenance: Option<Provenance>,
}

impl RotationVector {
    /// A bare representative, for ground truths and tests.
    pub fn from_representative(alpha: Frequency, representative: f64) -> Self {
        Self {
            representative,
            alpha,
            provenance: None,
        }
    }
}

/// Reads the rotation vector off a converged normal form: the final angle
/// plus the `alpha`-shifts of every removed resonance.
pub fn rotation_vector(nf: &NormalForm) -> Result<RotationVector> {
    if !nf.converged {
        return Err(Error::NotConverged {
            steps: nf.steps,
            norm: nf.final_cocycle.perturbation.sobolev_norm(0.0),
        });
    }
    let alpha = nf.final_cocycle.alpha.clone();
    let representative = nf.final_theta + alpha.dot(&nf.winding_sum);
    let gap = match nf.accumulators.as_slice() {
        [.., a, b] => (b - a).abs(),
        _ => 0.0,
    };
    if gap.is_nan() || gap >= CAUCHY_TOLERANCE {
        return Err(Error::RotationUnresolved { gap });
    }
    Ok(RotationVector {
        representative,
        alpha,
        provenance: Some(Provenance {
            final_theta: nf.final_theta,
            winding_sum: nf.winding_sum.clone(),
            resonant_steps: nf.ledger.len(),
            steps: nf.steps,
            certificate_gap: gap,
        }),
    })
}

/// The combination realising an equivalence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    /// Weyl sign applied to the first vector.
    pub sign: i8,
    pub n: i64,
    pub k: Vec<i64>,
    pub m: i64,
    pub residual: f64,
}

/// Bounded search over `|k| <= K`, `|n| <= K`, `|m| <= K` and both Weyl signs
/// for `sign * r1 - r2 = n (k . alpha) + 2m` within `tolerance`.
pub fn equivalence_witness(
    r1: &RotationVector,
    r2: &RotationVector,
    horizon: u64,
    tolerance: f64,
) -> Result<Option<EquivalenceWitness>> {
    if r1.alpha != r2.alpha {
        return Err(Error::FrequencyMismatch);
    }
    let alpha = &r1.alpha;
    let kmax = horizon as i64;
    let mut found = None;
    for sign in [1i8, -1] {
        let diff = sign as f64 * r1.representative - r2.representative;
        if !diff.is_finite() {
            return Err(Error::NonFinite("rotation vector representative"));
        }
        let mut check = |k: &[i64]| -> bool {
            let ka = alpha.dot(k);
            let nmax = if k.iter().all(|&v| v == 0) { 0 } else { kmax };
            for n in -nmax..=nmax {
                let rest = diff - n as f64 * ka;
                let m = (rest / 2.0).round();
                let residual = (rest - 2.0 * m).abs();
                if m.abs() <= kmax as f64 && residual <= tolerance {
                    found = Some(EquivalenceWitness {
                        sign,
                        n,
                        k: k.to_vec(),
                        m: m as i64,
                        residual,
                    });
                    return false;
                }
            }
            true
        };
        for r in 0..=kmax {
            if !for_each_in_shell(alpha.dim(), r, &mut check) {
                break;
            }
        }
        if found.is_some() {
            break;
        }
    }
    Ok(found)
}

/// [`equivalence_witness`] at the default tolerance.
pub fn equivalence_check(r1: &RotationVector, r2: &RotationVector, horizon: u64) -> Result<bool> {
    Ok(equivalence_witness(r1, r2, horizon, EQUIVALENCE_TOLERANCE)?.is_some())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithmeticClass {
    /// No violation of the relative Diophantine condition up to the horizon.
    DiophantineWrtAlpha,
    /// An exact relation `beta = k . alpha mod 1` (or `beta` is central).
    ResonantWrtAlpha,
    /// A violation that is not an exact relation.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArithmeticReport {
    pub representative: f64,
    /// `representative mod 1`, the value tested.
    pub reduced: f64,
    pub classification: ArithmeticClass,
    pub witness: Option<ResonanceRecord>,
    pub horizon: u64,
    pub gamma: f64,
    pub tau: f64,
}

/// Classifies a representative against `DC_alpha(gamma, tau)` at the horizon.
///
/// A central representative (`beta in Z`) or an exact relation with some
/// `k` is resonant; any other violation is undetermined at this horizon.
pub fn classify_arithmetic(r: &RotationVector, p: &DiophParams) -> Result<ArithmeticReport> {
    p.validate()?;
    let beta = r.representative.rem_euclid(1.0);
    let mut report = ArithmeticReport {
        representative: r.representative,
        reduced: beta,
        classification: ArithmeticClass::DiophantineWrtAlpha,
        witness: None,
        horizon: p.horizon,
        gamma: p.gamma,
        tau: p.tau,
    };
    if frac_dist(beta) <= EXACT_RESONANCE {
        report.classification = ArithmeticClass::ResonantWrtAlpha;
        return Ok(report);
    }
    if let Some((k, defect)) = closest_resonance(beta, &r.alpha, p.horizon)? {
        if defect <= EXACT_RESONANCE {
            report.classification = ArithmeticClass::ResonantWrtAlpha;
            report.witness = Some(ResonanceRecord {
                k,
                defect,
                scale: p.horizon,
                threshold: EXACT_RESONANCE,
                near_rational: true,
            });
            return Ok(report);
        }
    }
    if let Some(w) = relative_diophantine_witness(beta, &r.alpha, p)? {
        report.classification = ArithmeticClass::Undetermined;
        report.witness = Some(w);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub original: RotationVector,
    pub conjugated: RotationVector,
    pub equivalent: bool,
    /// `|r1 - r2|` of the raw representatives.
    pub representative_gap: f64,
    /// Max pointwise distance between the two fibers.
    pub c0_distance: f64,
}

/// Runs the scheme on `phi` and on its conjugate by `exp(b)`.
pub fn invariance_probe(
    phi: &Cocycle,
    b: &AlgebraMap,
    params: &SchemeParams,
    horizon: u64,
) -> Result<InvarianceReport> {
    let chain = ConjugationChain::from_factors(vec![ChainFactor::Exp { map: b.clone() }]);
    conjugation_probe(phi, &chain, params, horizon)
}

/// Like [`invariance_probe`] for an arbitrary chain, including torus
/// morphisms that move the representative by `k . alpha`.
pub fn conjugation_probe(
    phi: &Cocycle,
    chain: &ConjugationChain,
    params: &SchemeParams,
    horizon: u64,
) -> Result<InvarianceReport> {
    let band = params
        .band_for(phi.dim())
        .max(phi.perturbation.band() + chain.total_winding() as usize);
    let psi = conjugate_at_band(chain, phi, band)?;
    let r1 = rotation_vector(&run_scheme(phi, params)?)?;
    let r2 = rotation_vector(&run_scheme(&psi, params)?)?;
    let equivalent = equivalence_check(&r1, &r2, horizon)?;
    Ok(InvarianceReport {
        representative_gap: (r1.representative - r2.representative).abs(),
        c0_distance: phi.c0_distance(&psi)?,
        original: r1,
        conjugated: r2,
        equivalent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub step: usize,
    pub k: Vec<i64>,
    /// `d(Lambda_i, A_{n_i})`.
    pub distance: f64,
    /// `|k_i|^{-nu}`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub classification: ArithmeticClass,
    /// Number of resonant steps observed.
    pub resonant_steps: usize,
    /// First step after which no resonance occurred.
    pub resonances_stop_at: usize,
    /// No resonance pending at the final scale of a converged run.
    pub resonances_ceased: bool,
    /// Every ledger inequality holds and, for a Diophantine class,
    /// resonances ceased.
    pub consistent: bool,
}

/// Checks the ledger inequalities `d(Lambda_i, A_i) < |k_i|^{-nu}` and, for a
/// Diophantine class, that resonances stopped within the observed window.
pub fn finite_resonance_audit(
    nf: &NormalForm,
    r: &RotationVector,
    p: &DiophParams,
) -> Result<AuditReport> {
    let class = classify_arithmetic(r, p)?.classification;
    let nu = nf.params.nu;
    let entries: Vec<AuditEntry> = nf
        .ledger
        .iter()
        .map(|s| {
            let norm = s.k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0).max(1);
            let bound = (norm as f64).powf(-nu);
            AuditEntry {
                step: s.step,
                k: s.k.clone(),
                distance: s.distance,
                bound,
                holds: s.distance < bound && s.defect_after <= s.threshold,
            }
        })
        .collect();
    let pending = detect_resonance(
        &TorusElement::new(nf.final_theta),
        &nf.final_cocycle.alpha,
        nf.final_scale,
        nu,
    )?
    .is_some();
    let resonances_ceased = nf.converged && !pending;
    let stop = nf.ledger.last().map_or(0, |s| s.step + 1);
    let consistent = entries.iter().all(|e| e.holds)
        && (class != ArithmeticClass::DiophantineWrtAlpha || resonances_ceased);
    Ok(AuditReport {
        resonant_steps: entries.len(),
        entries,
        classification: class,
        resonances_stop_at: stop,
        resonances_ceased,
        consistent,
    })
}
