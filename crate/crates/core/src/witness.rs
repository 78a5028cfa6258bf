//! The witness `W = I + Z(x)Z - lambda gamma (X(x)X + Y(x)Y)` and its value on
//! states that have passed through chains of unsharp observers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{check_unit_interval, Side};
use crate::qcore::{pauli_pair, ComplexMatrix, PauliAxis, TwoQubitState};
use crate::sequences::{ChainFactors, SharpnessProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessParams {
    lam: f64,
    gam: f64,
}

impl WitnessParams {
    pub fn new(lam: f64, gam: f64) -> Result<Self> {
        check_unit_interval("lambda", lam)?;
        check_unit_interval("gamma", gam)?;
        Ok(Self { lam, gam })
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    pub fn gam(&self) -> f64 {
        self.gam
    }
}

/// The diagonal two-point correlators `T_ii = Tr[(sigma_i (x) sigma_i) rho]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorTriple {
    pub t11: f64,
    pub t22: f64,
    pub t33: f64,
}

impl CorrelatorTriple {
    pub fn new(t11: f64, t22: f64, t33: f64) -> Result<Self> {
        for (name, v) in [("T11", t11), ("T22", t22), ("T33", t33)] {
            if v.is_nan() || v.abs() > 1.0 + 1e-12 {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[-1, 1]",
                });
            }
        }
        Ok(Self { t11, t22, t33 })
    }
}

/// Verdict for one observer pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// 1-based `(k, l)`.
    pub pair: (usize, usize),
    pub expectation: f64,
    pub gap: f64,
    pub witnessed: bool,
}

impl WitnessReport {
    /// The verdict is `expectation < 0`; a zero expectation is not a detection.
    pub fn new(pair: (usize, usize), expectation: f64, gap: f64) -> Self {
        Self {
            pair,
            expectation,
            gap,
            witnessed: expectation < 0.0,
        }
    }

    /// Whether the gap and the expectation tell the same story.
    pub fn is_consistent(&self) -> bool {
        self.witnessed == (self.gap > 0.0)
    }
}

pub fn witness_matrix(p: &WitnessParams) -> ComplexMatrix {
    let lg = p.lam * p.gam;
    let id = ComplexMatrix::identity(4);
    let zz = pauli_pair(PauliAxis::Z);
    let xx = pauli_pair(PauliAxis::X).scale(lg);
    let yy = pauli_pair(PauliAxis::Y).scale(lg);
    &(&(&id + &zz) - &xx) - &yy
}

/// `Tr[W rho]`.
pub fn witness_expectation(rho: &TwoQubitState, p: &WitnessParams) -> f64 {
    rho.expectation(&witness_matrix(p))
}

fn pair_inputs(
    alice: &SharpnessProfile,
    bob: &SharpnessProfile,
    k: usize,
    l: usize,
) -> Result<(f64, f64, ChainFactors)> {
    if k == 0 || l == 0 || k > alice.len() || l > bob.len() {
        return Err(Error::IndexOutOfRange {
            k,
            l,
            alice_len: alice.len(),
            bob_len: bob.len(),
        });
    }
    for (side, profile, idx) in [(Side::Alice, alice, k), (Side::Bob, bob, l)] {
        if profile.values().len() < idx {
            return Err(Error::Saturated {
                side,
                index: profile.first_saturated().unwrap_or(idx),
            });
        }
        if let Some(&v) = profile.values()[..idx]
            .iter()
            .find(|&&v| !(v > 0.0 && v <= 1.0))
        {
            return Err(Error::OutOfRange {
                name: "profile value",
                value: v,
                range: "(0, 1]",
            });
        }
    }
    let a = ChainFactors::of(&alice.values()[..k - 1]);
    let b = ChainFactors::of(&bob.values()[..l - 1]);
    Ok((alice.values()[k - 1], bob.values()[l - 1], a.combine(b)))
}

/// `1 + T33 * prod(1+2Lambda)/3 * prod(1+2Gamma)/3`, written so that the
/// `T33 = -1` case reduces to the accumulated deficit with no cancellation.
fn sharp_term(initial: &CorrelatorTriple, joint: &ChainFactors) -> f64 {
    (1.0 + initial.t33) - initial.t33 * joint.deficit
}

/// `<W_kl>` from the initial correlators by propagating them through the
/// `k - 1` Alice and `l - 1` Bob channels in closed form.
pub fn witness_expectation_closed_form(
    initial: &CorrelatorTriple,
    alice: &SharpnessProfile,
    bob: &SharpnessProfile,
    k: usize,
    l: usize,
) -> Result<f64> {
    let (lam, gam, joint) = pair_inputs(alice, bob, k, l)?;
    Ok(sharp_term(initial, &joint) - lam * gam * (initial.t11 + initial.t22) * joint.coherence)
}

/// Margin `d_kl = lambda_k gamma_l - threshold` by which pair `(k, l)` clears its
/// witnessing threshold; positive exactly when `<W_kl> < 0`.
///
/// The threshold is `(1 + T33 P) / (C Q)` with `C = T11 + T22`: `C = 2` for the
/// Bell state and `4 p1 sqrt(alpha (1 - alpha))` for the mixed family.
pub fn difference_gap(
    initial: &CorrelatorTriple,
    alice: &SharpnessProfile,
    bob: &SharpnessProfile,
    k: usize,
    l: usize,
) -> Result<f64> {
    let coupling = initial.t11 + initial.t22;
    if coupling.is_nan() || coupling <= 0.0 {
        return Err(Error::UnsupportedFamily(coupling));
    }
    let (lam, gam, joint) = pair_inputs(alice, bob, k, l)?;
    Ok(lam * gam - sharp_term(initial, &joint) / (coupling * joint.coherence))
}

fn bloch_qubit<R: Rng>(rng: &mut R) -> [Complex64; 2] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    [
        Complex64::new(((1.0 + z) / 2.0).sqrt(), 0.0),
        Complex64::from_polar(((1.0 - z) / 2.0).max(0.0).sqrt(), phi),
    ]
}

/// Smallest `<W>` over `n_samples` Haar-random pure product states `|a>|b>`.
///
/// Pure products are the extreme points of the separable set, so this is a
/// statistical lower-bound check of the witness property.
pub fn sample_separable_expectations(
    p: &WitnessParams,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
    }
    let w = witness_matrix(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..n_samples {
        let a = bloch_qubit(&mut rng);
        let b = bloch_qubit(&mut rng);
        let psi = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                value += psi[i].conj() * w.get(i, j) * psi[j];
            }
        }
        min = min.min(value.re);
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{luders_channel, SideSharpness};
    use crate::qcore::{correlators, initial_state, InitialStateSpec};
    use crate::sequences::pandit_sequence;

    fn bell() -> TwoQubitState {
        initial_state(&InitialStateSpec::Bell).unwrap()
    }

    fn profile(v: &[f64]) -> SharpnessProfile {
        SharpnessProfile::explicit(v.to_vec()).unwrap()
    }

    #[test]
    fn blind_witness_is_diagonal() {
        let w = witness_matrix(&WitnessParams::new(0.0, 0.0).unwrap());
        assert_eq!(
            w,
            ComplexMatrix::from_real_diagonal(&[2.0, 0.0, 0.0, 2.0]).unwrap()
        );
    }

    #[test]
    fn witness_diagonal_never_depends_on_sharpness() {
        for (l, g) in [(0.3, 0.9), (1.0, 1.0), (0.5, 0.0)] {
            let w = witness_matrix(&WitnessParams::new(l, g).unwrap());
            let diag: Vec<f64> = (0..4).map(|i| w.get(i, i).re).collect();
            assert_eq!(diag, vec![2.0, 0.0, 0.0, 2.0]);
            assert_eq!(w.hermitian_deviation(), 0.0);
        }
    }

    #[test]
    fn sharp_witness_on_bell() {
        let v = witness_expectation(&bell(), &WitnessParams::new(1.0, 1.0).unwrap());
        assert!((v + 2.0).abs() < 1e-15);
    }

    #[test]
    fn first_pair_on_bell_is_minus_two_lambda_gamma() {
        for (l, g) in [(0.1, 0.2), (0.005, 0.005), (0.7, 1.0)] {
            let v = witness_expectation(&bell(), &WitnessParams::new(l, g).unwrap());
            assert!((v + 2.0 * l * g).abs() < 1e-15);
        }
    }

    #[test]
    fn witness_values_on_simple_states() {
        let p = WitnessParams::new(0.6, 0.8).unwrap();
        assert!((witness_expectation(&TwoQubitState::maximally_mixed(), &p) - 1.0).abs() < 1e-15);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let s01 = TwoQubitState::from_pure([zero, one, zero, zero]).unwrap();
        let s10 = TwoQubitState::from_pure([zero, zero, one, zero]).unwrap();
        assert_eq!(witness_expectation(&s01, &p), 0.0);
        assert_eq!(witness_expectation(&s10, &p), 0.0);
    }

    #[test]
    fn expectation_matches_correlator_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..100 {
            let rho = TwoQubitState::random(&mut rng);
            let p = WitnessParams::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0))
                .unwrap();
            let t = correlators(&rho);
            let formula = 1.0 + t.t33 - p.lam() * p.gam() * (t.t11 + t.t22);
            assert!((witness_expectation(&rho, &p) - formula).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_first_pair() {
        let t = correlators(&bell());
        let v =
            witness_expectation_closed_form(&t, &profile(&[0.3]), &profile(&[0.4]), 1, 1).unwrap();
        assert!((v + 2.0 * 0.12).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_matrix_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let rho0 = TwoQubitState::random(&mut rng);
            let t = correlators(&rho0);
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..=1.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..=1.0)).collect();
            let (pa, pb) = (profile(&a), profile(&b));
            for k in 1..=4 {
                let mut rho = rho0.clone();
                for &v in &a[..k - 1] {
                    rho = luders_channel(&rho, Side::Alice, SideSharpness::new(v).unwrap());
                }
                for l in 1..=4 {
                    let mut r = rho.clone();
                    for &v in &b[..l - 1] {
                        r = luders_channel(&r, Side::Bob, SideSharpness::new(v).unwrap());
                    }
                    let direct =
                        witness_expectation(&r, &WitnessParams::new(a[k - 1], b[l - 1]).unwrap());
                    let closed = witness_expectation_closed_form(&t, &pa, &pb, k, l).unwrap();
                    assert!((direct - closed).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_index_and_saturation_errors() {
        let t = correlators(&bell());
        let p = profile(&[0.2, 0.3]);
        assert!(matches!(
            witness_expectation_closed_form(&t, &p, &p, 3, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            witness_expectation_closed_form(&t, &p, &p, 0, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        let saturated = pandit_sequence(0.005, 4.0, 6).unwrap();
        assert_eq!(
            difference_gap(&t, &saturated, &saturated, 6, 1),
            Err(Error::Saturated {
                side: Side::Alice,
                index: 6
            })
        );
        assert_eq!(
            difference_gap(&t, &saturated, &saturated, 1, 6),
            Err(Error::Saturated {
                side: Side::Bob,
                index: 6
            })
        );
    }

    #[test]
    fn golden_gap_corners() {
        let t = InitialStateSpec::Bell.correlators();
        let p = pandit_sequence(0.005, 4.0, 5).unwrap();
        let d55 = difference_gap(&t, &p, &p, 5, 5).unwrap();
        let d15 = difference_gap(&t, &p, &p, 1, 5).unwrap();
        assert!((100.0 * d55 - 77.5252).abs() <= 5e-5);
        assert!((100.0 * d15 + 1.4184).abs() <= 5e-5);
        let d11 = difference_gap(&t, &p, &p, 1, 1).unwrap();
        assert!((d11 - 0.005 * 0.005).abs() < 1e-18);
    }

    #[test]
    fn mixed_family_at_half_reduces_to_bell() {
        let mixed = InitialStateSpec::MixedAlpha {
            alpha: 0.5,
            p1: 1.0,
            p2: 0.0,
            p3: 0.0,
        };
        let tm = correlators(&initial_state(&mixed).unwrap());
        let tb = correlators(&bell());
        let p = pandit_sequence(0.005, 4.0, 5).unwrap();
        for k in 1..=5 {
            for l in 1..=5 {
                let a = difference_gap(&tm, &p, &p, k, l).unwrap();
                let b = difference_gap(&tb, &p, &p, k, l).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unsupported_family() {
        let t = CorrelatorTriple::new(0.0, 0.0, 0.0).unwrap();
        let p = profile(&[0.5]);
        assert_eq!(
            difference_gap(&t, &p, &p, 1, 1),
            Err(Error::UnsupportedFamily(0.0))
        );
        assert!(CorrelatorTriple::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn report_verdict_is_strict() {
        assert!(!WitnessReport::new((1, 1), 0.0, 0.0).witnessed);
        assert!(WitnessReport::new((1, 1), -1e-300, 1e-300).witnessed);
        assert!(WitnessReport::new((2, 3), -0.1, 0.2).is_consistent());
        assert!(!WitnessReport::new((2, 3), 0.1, 0.2).is_consistent());
    }

    #[test]
    fn separable_floor_examples() {
        let sharp =
            sample_separable_expectations(&WitnessParams::new(1.0, 1.0).unwrap(), 10_000, 0)
                .unwrap();
        assert!(sharp >= -1e-12);
        assert!(sharp < 0.05);
        let blind =
            sample_separable_expectations(&WitnessParams::new(0.0, 0.0).unwrap(), 1000, 1).unwrap();
        assert!(blind >= 0.0);
        assert!(
            sample_separable_expectations(&WitnessParams::new(0.5, 0.5).unwrap(), 0, 1).is_err()
        );
    }

    #[test]
    fn plus_plus_product_sits_on_the_boundary() {
        let h = Complex64::new(0.5, 0.0);
        let plus_plus = TwoQubitState::from_pure([h, h, h, h]).unwrap();
        let v = witness_expectation(&plus_plus, &WitnessParams::new(1.0, 1.0).unwrap());
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = WitnessParams::new(0.75, 0.25).unwrap();
        let a = sample_separable_expectations(&p, 500, 42).unwrap();
        let b = sample_separable_expectations(&p, 500, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
