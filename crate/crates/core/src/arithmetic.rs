//! Diophantine arithmetic of the base rotation and of numbers relative to it.
//!
//! Every universally quantified condition over `k in Z^d \ {0}` is replaced by
//! a scan over the max-norm box `0 < |k| <= K`; the horizon `K` travels with
//! each result. Scans visit `k` shell by shell (increasing `|k|`) and
//! lexicographically inside a shell, so the first hit is deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Defects below this are indistinguishable from an exact rational relation.
pub const UNDERFLOW_DEFECT: f64 = 1e-14;

/// Iterates of the Gauss map below this are treated as having reached `0`.
const RATIONAL_ITERATE: f64 = 1e-12;

/// Base rotation `alpha` in `T^d`, stored by its components in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Frequency {
    components: Vec<f64>,
}

impl Frequency {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("frequency must have d >= 1".into()));
        }
        for &c in &components {
            if !c.is_finite() {
                return Err(Error::NonFinite("frequency component"));
            }
            if !(0.0..1.0).contains(&c) {
                return Err(Error::InvalidParameter(format!(
                    "frequency component {c} outside [0, 1)"
                )));
            }
        }
        Ok(Self { components })
    }

    /// Reduces arbitrary reals mod 1 before validating.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frequency component"));
        }
        Self::new(values.iter().map(|v| v.rem_euclid(1.0)).collect())
    }

    /// The golden mean `(sqrt 5 - 1) / 2`.
    pub fn golden() -> Self {
        Self {
            components: vec![(5f64.sqrt() - 1.0) / 2.0],
        }
    }

    /// `sqrt 2 - 1`, whose continued fraction is `[0; 2, 2, 2, ...]`.
    pub fn sqrt2() -> Self {
        Self {
            components: vec![2f64.sqrt() - 1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// `k . alpha` as a real (not reduced).
    pub fn dot(&self, k: &[i64]) -> f64 {
        debug_assert_eq!(k.len(), self.components.len());
        k.iter()
            .zip(&self.components)
            .map(|(&ki, &a)| ki as f64 * a)
            .sum()
    }

    /// Errors unless `k` has the dimension of the frequency.
    pub fn check_dim(&self, k_dim: usize) -> Result<()> {
        if k_dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: k_dim,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Frequency {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Frequency> for Vec<f64> {
    fn from(f: Frequency) -> Self {
        f.components
    }
}

/// Constants `(gamma, tau)` of a Diophantine condition plus the scan horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophParams {
    pub gamma: f64,
    pub tau: f64,
    pub horizon: u64,
}

impl DiophParams {
    pub fn new(gamma: f64, tau: f64, horizon: u64) -> Result<Self> {
        let p = Self {
            gamma,
            tau,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || !self.tau.is_finite() {
            return Err(Error::NonFinite("Diophantine constants"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {} <= 0", self.gamma)));
        }
        if self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!("tau = {} <= 0", self.tau)));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        Ok(())
    }

    /// The absolute condition on `alpha in T^d` additionally needs `tau > d`.
    pub fn validate_for_dim(&self, dim: usize) -> Result<()> {
        self.validate()?;
        if self.tau <= dim as f64 {
            return Err(Error::InvalidParameter(format!(
                "tau = {} must exceed the dimension {dim}",
                self.tau
            )));
        }
        Ok(())
    }

    /// `gamma^{-1} |k|^{-tau}`.
    pub fn bound(&self, norm: u64) -> f64 {
        (norm as f64).powf(-self.tau) / self.gamma
    }
}

impl Default for DiophParams {
    fn default() -> Self {
        Self {
            gamma: 3.0,
            tau: 2.0,
            horizon: 1000,
        }
    }
}

/// A lattice vector `k` at which a Diophantine-type inequality is violated
/// (or nearly so).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub k: Vec<i64>,
    /// `|beta - k . alpha|_Z` (with `beta = 0` for the absolute condition).
    pub defect: f64,
    /// Horizon or KAM scale the search ran at.
    pub scale: u64,
    pub threshold: f64,
    /// Defect below [`UNDERFLOW_DEFECT`]: numerically an exact relation.
    pub near_rational: bool,
}

impl ResonanceRecord {
    fn new(k: Vec<i64>, defect: f64, scale: u64, threshold: f64) -> Self {
        Self {
            k,
            defect,
            scale,
            threshold,
            near_rational: defect < UNDERFLOW_DEFECT,
        }
    }

    pub fn norm(&self) -> u64 {
        max_norm(&self.k)
    }
}

pub fn max_norm(k: &[i64]) -> u64 {
    k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_z(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("dist_to_z argument"));
    }
    Ok(frac_dist(x))
}

#[inline]
pub(crate) fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Calls `f` on every `k` with `|k|_max == r`, lexicographically. Stops early
/// when `f` returns `false`; the return value reports whether the walk ran to
/// completion.
pub fn for_each_in_shell(dim: usize, r: i64, f: &mut impl FnMut(&[i64]) -> bool) -> bool {
    fn rec(
        k: &mut Vec<i64>,
        dim: usize,
        r: i64,
        on_edge: bool,
        f: &mut impl FnMut(&[i64]) -> bool,
    ) -> bool {
        let depth = k.len();
        if depth == dim {
            return f(k);
        }
        let last = depth + 1 == dim;
        for v in -r..=r {
            let edge = v.abs() == r;
            if last && !on_edge && !edge {
                continue;
            }
            k.push(v);
            let go = rec(k, dim, r, on_edge || edge, f);
            k.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if r == 0 {
        return f(&vec![0; dim]);
    }
    let mut k = Vec::with_capacity(dim);
    rec(&mut k, dim, r, false, f)
}

/// First nonzero component positive: one representative of each `{k, -k}`.
fn is_half_lattice(k: &[i64]) -> bool {
    k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

/// Scans `0 < |k| <= K` for the first `k` violating
/// `|k . alpha|_Z >= gamma^{-1} |k|^{-tau}`.
///
/// The condition is symmetric under `k -> -k`, so only the representative
/// whose first nonzero coordinate is positive is reported.
pub fn diophantine_witness(alpha: &Frequency, p: &DiophParams) -> Result<Option<ResonanceRecord>> {
    p.validate_for_dim(alpha.dim())?;
    let mut found = None;
    for r in 1..=p.horizon as i64 {
        let bound = p.bound(r as u64);
        for_each_in_shell(alpha.dim(), r, &mut |k| {
            if !is_half_lattice(k) {
                return true;
            }
            let defect = frac_dist(alpha.dot(k));
            if defect < bound {
                found = Some(ResonanceRecord::new(k.to_vec(), defect, p.horizon, bound));
                return false;
            }
            true
        });
        if found.is_some() {
            break;
        }
    }
    Ok(found)
}

/// The `k` minimising `|beta - k . alpha|_Z` over `0 < |k| <= n`, ties going
/// to the smaller `|k|` and then to the lexicographically smaller `k`.
pub fn closest_resonance(beta: f64, alpha: &Frequency, n: u64) -> Result<Option<(Vec<i64>, f64)>> {
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    let mut best: Option<(Vec<i64>, f64)> = None;
    for r in 1..=n as i64 {
        for_each_in_shell(alpha.dim(), r, &mut |k| {
            let defect = frac_dist(beta - alpha.dot(k));
            if best.as_ref().is_none_or(|(_, d)| defect < *d) {
                best = Some((k.to_vec(), defect));
            }
            true
        });
    }
    Ok(best)
}

/// Resonance of `beta` relative to `alpha` at scale `n`: the closest `k`
/// (see [`closest_resonance`]) when its defect is strictly below `n^{-nu}`.
pub fn relative_resonance(
    beta: f64,
    alpha: &Frequency,
    n: u64,
    nu: f64,
) -> Result<Option<ResonanceRecord>> {
    let threshold = resonance_threshold(n, nu)?;
    Ok(closest_resonance(beta, alpha, n)?
        .filter(|(_, d)| *d < threshold)
        .map(|(k, d)| ResonanceRecord::new(k, d, n, threshold)))
}

/// `n^{-nu}`.
pub fn resonance_threshold(n: u64, nu: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("scale N must be >= 1".into()));
    }
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be > 0")));
    }
    Ok((n as f64).powf(-nu))
}

/// Checks `beta` against `DC_alpha(gamma, tau)` up to the horizon: the first
/// `k` (shell order) with `|beta - k . alpha|_Z < gamma^{-1} |k|^{-tau}`.
pub fn relative_diophantine_witness(
    beta: f64,
    alpha: &Frequency,
    p: &DiophParams,
) -> Result<Option<ResonanceRecord>> {
    p.validate()?;
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    let mut found = None;
    for r in 1..=p.horizon as i64 {
        let bound = p.bound(r as u64);
        for_each_in_shell(alpha.dim(), r, &mut |k| {
            let defect = frac_dist(beta - alpha.dot(k));
            if defect < bound {
                found = Some(ResonanceRecord::new(k.to_vec(), defect, p.horizon, bound));
                return false;
            }
            true
        });
        if found.is_some() {
            break;
        }
    }
    Ok(found)
}

/// `G(alpha) = {1 / alpha}`.
pub fn gauss_map(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("gauss_map argument"));
    }
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "gauss_map needs alpha in (0, 1), got {alpha}"
        )));
    }
    Ok((1.0 / alpha).fract())
}

/// Partial quotients `a_1, a_2, ...` of `alpha = [0; a_1, a_2, ...]`, obtained
/// by iterating the Gauss map. Stops early when an iterate reaches `0`.
pub fn continued_fraction_digits(alpha: f64, count: usize) -> Result<Vec<u64>> {
    let mut x = alpha;
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        if x < RATIONAL_ITERATE {
            break;
        }
        let inv = 1.0 / x;
        digits.push(inv.floor() as u64);
        x = gauss_map(x)?;
    }
    Ok(digits)
}

/// The iterates `n <= depth` of the Gauss map at which `G^n(alpha)` passes
/// the Diophantine scan with parameters `p`.
///
/// This is the finite-horizon stand-in for "infinitely many `n`" in the
/// recurrent Diophantine condition, which only exists for `d = 1`.
pub fn rdc_horizon_check(alpha: &Frequency, p: &DiophParams, depth: usize) -> Result<Vec<usize>> {
    if alpha.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: alpha.dim(),
        });
    }
    p.validate_for_dim(1)?;
    let mut x = alpha.components()[0];
    let mut passing = Vec::new();
    for n in 0..=depth {
        if x < RATIONAL_ITERATE {
            return Err(Error::RationalIterate { step: n });
        }
        let f = Frequency::new(vec![x])?;
        if diophantine_witness(&f, p)?.is_none() {
            passing.push(n);
        }
        if n < depth {
            x = gauss_map(x)?;
        }
    }
    Ok(passing)
}

/// Scans `0 < |k| <= n` for a `k` with `|k . alpha|_Z < UNDERFLOW_DEFECT`;
/// used to flag frequencies that are numerically rational.
pub fn near_rational_witness(alpha: &Frequency, n: u64) -> Option<Vec<i64>> {
    let mut found = None;
    for r in 1..=n as i64 {
        for_each_in_shell(alpha.dim(), r, &mut |k| {
            if is_half_lattice(k) && frac_dist(alpha.dot(k)) < UNDERFLOW_DEFECT {
                found = Some(k.to_vec());
                return false;
            }
            true
        });
        if found.is_some() {
            break;
        }
    }
    found
}
