//! Sharpness schedules for a chain of sequential observers.
//!
//! Two generators are provided: the fixed-slack schedule seeded by a first
//! sharpness `lambda1` and the one-parameter family `lambda_k(theta)` whose
//! small-`theta` behaviour guarantees that every cross pair of observers
//! witnesses entanglement. [`find_theta`] turns that guarantee into a concrete,
//! certified parameter.
//!
//! All products over a chain prefix are accumulated left to right through
//! [`ChainFactors`], which keeps `1 - prod (1 + 2 Lambda_i)/3` in deficit form.
//! For `theta` near `1e-8` the naive product rounds to exactly one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::quiet_deficit;

/// One entry of a [`SharpnessProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileEntry {
    Value(f64),
    /// The defining formula left the unit interval here or earlier.
    Saturated,
}

/// Ordered sharpness values for one chain of observers.
///
/// Entries `1..=values.len()` are numeric; the remaining entries up to `len`
/// are saturated. A saturated entry can therefore never be followed by a
/// numeric one.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessProfile {
    values: Vec<f64>,
    len: usize,
}

impl SharpnessProfile {
    /// A profile of explicit sharpness values, each in `(0, 1]`.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "profile value",
                    value: v,
                    range: "(0, 1]",
                });
            }
        }
        let len = values.len();
        Ok(Self { values, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// 1-based access.
    pub fn entry(&self, k: usize) -> Option<ProfileEntry> {
        if k == 0 || k > self.len {
            None
        } else if k <= self.values.len() {
            Some(ProfileEntry::Value(self.values[k - 1]))
        } else {
            Some(ProfileEntry::Saturated)
        }
    }

    /// The numeric prefix.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// 1-based index of the first saturated entry.
    pub fn first_saturated(&self) -> Option<usize> {
        (self.values.len() < self.len).then_some(self.values.len() + 1)
    }

    /// True when the first `n` entries all lie strictly inside `(0, 1)`.
    pub fn is_feasible_to(&self, n: usize) -> bool {
        n <= self.values.len() && self.values[..n].iter().all(|&v| v > 0.0 && v < 1.0)
    }

    /// Entries as `Some(value)` or `None` for saturated ones.
    pub fn to_entries(&self) -> Vec<Option<f64>> {
        (1..=self.len)
            .map(|k| match self.entry(k) {
                Some(ProfileEntry::Value(v)) => Some(v),
                _ => None,
            })
            .collect()
    }

    fn push_or_saturate(&mut self, value: f64) {
        if self.first_saturated().is_none() && value.is_finite() && value > 0.0 && value < 1.0 {
            self.values.push(value);
        }
        self.len += 1;
    }
}

/// Disturbance accumulated by a prefix of a chain.
///
/// `deficit` is `1 - prod (1 + 2 Lambda_i)/3`, the loss of the sharp
/// sigma_3 correlation; `coherence` is `prod (1 + Lambda_i)/3`, the surviving
/// fraction of the sigma_1/sigma_2 correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainFactors {
    pub deficit: f64,
    pub coherence: f64,
}

impl ChainFactors {
    pub const EMPTY: ChainFactors = ChainFactors {
        deficit: 0.0,
        coherence: 1.0,
    };

    pub fn of(values: &[f64]) -> Self {
        values.iter().fold(Self::EMPTY, |acc, &v| acc.then(v))
    }

    /// Appends one more observer with the given weak sharpness.
    pub fn then(self, sharpness: f64) -> Self {
        let delta = quiet_deficit(sharpness);
        let quiet = 1.0 - delta;
        let u = 2.0 * delta / 3.0;
        Self {
            deficit: self.deficit + (1.0 - self.deficit) * u,
            coherence: self.coherence * (1.0 + quiet) / 3.0,
        }
    }

    /// Factors of two independent chains acting on different qubits.
    pub fn combine(self, other: Self) -> Self {
        Self {
            deficit: self.deficit + other.deficit - self.deficit * other.deficit,
            coherence: self.coherence * other.coherence,
        }
    }

    /// `prod (1 + 2 Lambda_i)/3`.
    pub fn sharp_factor(&self) -> f64 {
        1.0 - self.deficit
    }
}

/// Factors of every prefix: element `k - 1` covers values `1..k`, so it
/// has `values.len() + 1` elements.
pub fn prefix_factors(values: &[f64]) -> Vec<ChainFactors> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = ChainFactors::EMPTY;
    out.push(acc);
    for &v in values {
        acc = acc.then(v);
        out.push(acc);
    }
    out
}

/// Fixed-slack schedule: each squared sharpness exceeds the diagonal-pair
/// witnessing threshold by the factor `1 + epsilon`.
pub fn pandit_sequence(lambda1: f64, epsilon: f64, n: usize) -> Result<SharpnessProfile> {
    if !(lambda1 > 0.0 && lambda1 < 1.0) {
        return Err(Error::OutOfRange {
            name: "lambda1",
            value: lambda1,
            range: "(0, 1)",
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "(0, inf)",
        });
    }
    let mut profile = SharpnessProfile {
        values: Vec::new(),
        len: 0,
    };
    let mut factors = ChainFactors::EMPTY;
    for k in 1..=n {
        if k == 1 {
            profile.push_or_saturate(lambda1);
        } else if profile.first_saturated().is_some() {
            profile.len = n;
            break;
        } else {
            factors = factors.then(profile.values[k - 2]);
            let d = factors.deficit;
            // 1 - P^2 = d (2 - d)
            let squared =
                (1.0 + epsilon) * d * (2.0 - d) / (2.0 * factors.coherence * factors.coherence);
            let next = if squared < 1.0 {
                squared.sqrt()
            } else {
                f64::INFINITY
            };
            profile.push_or_saturate(next);
        }
    }
    Ok(profile)
}

/// Parameters of the theta-family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    pub epsilon: f64,
    /// Correlator constant `T11 + T22` of the initial state.
    pub big_l: f64,
    pub theta: f64,
}

impl SequenceParams {
    pub fn new(epsilon: f64, big_l: f64, theta: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            big_l,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::OutOfRange {
                name: "epsilon",
                value: self.epsilon,
                range: "(0, inf)",
            });
        }
        if !(self.big_l > 0.0 && self.big_l <= 2.0) {
            return Err(Error::OutOfRange {
                name: "L",
                value: self.big_l,
                range: "(0, 2]",
            });
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: self.theta,
                range: "(0, 1)",
            });
        }
        Ok(())
    }
}

/// One term of the theta-family given the factors of all earlier observers
/// of the same chain and the first sharpness `first` of the other chain.
fn theta_term(params: &SequenceParams, own: ChainFactors, first: f64) -> f64 {
    params.epsilon * own.deficit / (params.big_l * first * own.coherence)
}

/// The theta-family `lambda_1 = theta`,
/// `lambda_k = epsilon (1 - prod (1+2 Lambda_i)/3) / (L theta prod (1+Lambda_i)/3)`.
///
/// Alice's and Bob's chains both start at `theta` and obey the same
/// recursion, so one profile serves both.
pub fn theta_sequence(params: &SequenceParams, n: usize) -> Result<SharpnessProfile> {
    params.validate()?;
    let mut profile = SharpnessProfile {
        values: Vec::new(),
        len: 0,
    };
    let mut factors = ChainFactors::EMPTY;
    for k in 1..=n {
        if k == 1 {
            profile.push_or_saturate(params.theta);
        } else if profile.first_saturated().is_some() {
            profile.len = n;
            break;
        } else {
            factors = factors.then(profile.values[k - 2]);
            profile.push_or_saturate(theta_term(params, factors, params.theta));
        }
    }
    Ok(profile)
}

/// Limits `a_k = lim_{theta -> 0} lambda_k(theta) / theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCoefficients {
    pub a: Vec<f64>,
}

impl AsymptoticCoefficients {
    /// `sum_{i<k} a_i^2`.
    pub fn square_sum_before(&self, k: usize) -> f64 {
        self.a[..k - 1].iter().map(|x| x * x).sum()
    }
}

fn check_asymptotic_regime(epsilon: f64, big_l: f64) -> Result<()> {
    if big_l > 0.0 && big_l <= 2.0 && epsilon > 2.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "need 0 < L <= 2 < epsilon, got L = {big_l}, epsilon = {epsilon}"
        )))
    }
}

/// `a_1 = 1`, `a_k = epsilon/(3L) (3/2)^(k-1) sum_{i<k} a_i^2`.
pub fn asymptotic_coefficients(
    epsilon: f64,
    big_l: f64,
    n: usize,
) -> Result<AsymptoticCoefficients> {
    check_asymptotic_regime(epsilon, big_l)?;
    let mut a: Vec<f64> = Vec::with_capacity(n);
    let mut square_sum = 0.0;
    for k in 1..=n {
        let next = if k == 1 {
            1.0
        } else {
            epsilon / (3.0 * big_l) * 1.5_f64.powi(k as i32 - 1) * square_sum
        };
        square_sum += next * next;
        a.push(next);
    }
    Ok(AsymptoticCoefficients { a })
}

fn feasible_theta_profile(params: &SequenceParams, upto: usize) -> Result<SharpnessProfile> {
    let profile = theta_sequence(params, upto)?;
    if !profile.is_feasible_to(upto) {
        return Err(Error::Saturated {
            side: crate::measurement::Side::Alice,
            index: profile.first_saturated().unwrap_or(upto),
        });
    }
    Ok(profile)
}

/// Witnessing threshold `f_kl(theta)` of pair `(k, l)` for the theta-family:
/// the pair witnesses iff `lambda_k gamma_l > f_kl`.
pub fn threshold_f(params: &SequenceParams, k: usize, l: usize) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::IndexOutOfRange {
            k,
            l,
            alice_len: 0,
            bob_len: 0,
        });
    }
    let profile = feasible_theta_profile(params, k.max(l))?;
    let pre = prefix_factors(profile.values());
    let joint = pre[k - 1].combine(pre[l - 1]);
    Ok(joint.deficit / (params.big_l * joint.coherence))
}

/// `L_kl = lim (lambda_k gamma_l - f_kl) / theta^2` for `k, l >= 2`.
pub fn limit_gap_l(epsilon: f64, big_l: f64, k: usize, l: usize) -> Result<f64> {
    check_asymptotic_regime(epsilon, big_l)?;
    if k < 2 || l < 2 {
        return Err(Error::Regime(format!(
            "the limit gap is defined for k, l >= 2, got ({k}, {l})"
        )));
    }
    let coeffs = asymptotic_coefficients(epsilon, big_l, k.max(l))?;
    let (sk, sl) = (coeffs.square_sum_before(k), coeffs.square_sum_before(l));
    let scale = 1.5_f64.powi((k + l - 2) as i32) / (3.0 * big_l);
    Ok(scale * (epsilon * epsilon / (3.0 * big_l) * sk * sl - (sk + sl)))
}

/// Search settings for [`find_theta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindThetaOptions {
    pub initial_theta: f64,
    pub max_halvings: u32,
    /// Start at `min(initial_theta, 1/(M + 1))` with `M = max(a_m, a_n)`.
    pub warm_start: bool,
}

impl Default for FindThetaOptions {
    fn default() -> Self {
        Self {
            initial_theta: 0.1,
            max_halvings: 200,
            warm_start: false,
        }
    }
}

/// A theta for which every pair `(k, l)`, `k <= m`, `l <= n`, has a positive gap.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCertificate {
    pub theta: f64,
    pub halvings: u32,
    pub min_gap: f64,
    /// 1-based pair attaining `min_gap`.
    pub min_gap_pair: (usize, usize),
    pub profile: SharpnessProfile,
}

/// All gaps `lambda_k lambda_l - f_kl` for a symmetric profile, row-major,
/// evaluated against the constant `big_l`.
pub fn gap_grid(values: &[f64], m: usize, n: usize, big_l: f64) -> Vec<Vec<f64>> {
    let pre = prefix_factors(values);
    (1..=m)
        .map(|k| {
            (1..=n)
                .map(|l| {
                    let joint = pre[k - 1].combine(pre[l - 1]);
                    values[k - 1] * values[l - 1] - joint.deficit / (big_l * joint.coherence)
                })
                .collect()
        })
        .collect()
}

fn min_entry(grid: &[Vec<f64>]) -> (f64, (usize, usize)) {
    let mut best = (f64::INFINITY, (0, 0));
    for (i, row) in grid.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            // NaN never counts as a pass
            if g < best.0 || g.is_nan() {
                best = (g, (i + 1, j + 1));
                if g.is_nan() {
                    return best;
                }
            }
        }
    }
    best
}

/// Geometric search for a theta certifying all `m * n` pairs.
pub fn find_theta(
    m: usize,
    n: usize,
    epsilon: f64,
    big_l: f64,
    options: FindThetaOptions,
) -> Result<ThetaCertificate> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "m and n must be at least 1, got m = {m}, n = {n}"
        )));
    }
    if !(epsilon >= 4.0 && epsilon.is_finite()) {
        return Err(Error::Regime(format!(
            "theta search is only certified for epsilon >= 4, got {epsilon}"
        )));
    }
    if !(big_l > 0.0 && big_l <= 2.0) {
        return Err(Error::Regime(format!("L must lie in (0, 2], got {big_l}")));
    }
    if !(options.initial_theta > 0.0 && options.initial_theta < 1.0) {
        return Err(Error::OutOfRange {
            name: "initial theta",
            value: options.initial_theta,
            range: "(0, 1)",
        });
    }
    let upto = m.max(n);
    let mut theta = options.initial_theta;
    if options.warm_start {
        let coeffs = asymptotic_coefficients(epsilon, big_l, upto)?;
        let big_m = coeffs.a[m - 1].max(coeffs.a[n - 1]);
        theta = theta.min(1.0 / (big_m + 1.0));
    }

    let mut failure = String::new();
    let mut smallest = theta;
    for halvings in 0..=options.max_halvings {
        smallest = theta;
        let params = SequenceParams::new(epsilon, big_l, theta)?;
        let profile = theta_sequence(&params, upto)?;
        if !profile.is_feasible_to(upto) {
            failure = format!(
                "sequence saturated at index {}",
                profile.first_saturated().unwrap_or(upto)
            );
        } else {
            let grid = gap_grid(profile.values(), m, n, big_l);
            let (min_gap, pair) = min_entry(&grid);
            if min_gap > 0.0 {
                return Ok(ThetaCertificate {
                    theta,
                    halvings,
                    min_gap,
                    min_gap_pair: pair,
                    profile,
                });
            }
            failure = format!("pair {pair:?} has gap {min_gap:e}");
        }
        theta /= 2.0;
    }
    Err(Error::SearchExhausted {
        halvings: options.max_halvings,
        smallest_theta: smallest,
        failure,
    })
}
