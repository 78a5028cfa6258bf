use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqwit::experiments::format_sig;
use seqwit::measurement::{lift, luders_channel, Side, SideSharpness};
use seqwit::qcore::{correlators, kron, pauli, pauli_with, PauliAxis, YConvention};
use seqwit::sequences::{
    pandit_sequence, theta_sequence, ChainFactors, ProfileEntry, SequenceParams,
};
use seqwit::witness::{difference_gap, witness_expectation_closed_form, CorrelatorTriple};
use seqwit::{witness_expectation, SharpnessProfile, TwoQubitState, WitnessParams};

fn state(seed: u64) -> TwoQubitState {
    TwoQubitState::random(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Alice), Just(Side::Bob)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channel_output_is_a_state(seed in any::<u64>(), s in 0.0..=1.0f64, side in side()) {
        let out = luders_channel(&state(seed), side, SideSharpness::new(s).unwrap());
        let m = out.matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(m.hermitian_deviation() < 1e-12);
        prop_assert!(m.hermitian_eigenvalues().iter().all(|&e| e > -1e-12));
    }

    #[test]
    fn sides_commute(seed in any::<u64>(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let rho = state(seed);
        let (sa, sb) = (SideSharpness::new(a).unwrap(), SideSharpness::new(b).unwrap());
        let ab = luders_channel(&luders_channel(&rho, Side::Alice, sa), Side::Bob, sb);
        let ba = luders_channel(&luders_channel(&rho, Side::Bob, sb), Side::Alice, sa);
        prop_assert!(ab.matrix().max_abs_diff(ba.matrix()) < 1e-14);
    }

    #[test]
    fn correlators_scale_per_channel(seed in any::<u64>(), s in 0.0..=1.0f64, side in side()) {
        let rho = state(seed);
        let before = correlators(&rho);
        let after = correlators(&luders_channel(&rho, side, SideSharpness::new(s).unwrap()));
        let quiet = (1.0 - s * s).sqrt();
        let coh = (1.0 + quiet) / 3.0;
        prop_assert!((after.t11 - coh * before.t11).abs() < 1e-13);
        prop_assert!((after.t22 - coh * before.t22).abs() < 1e-13);
        prop_assert!((after.t33 - (1.0 + 2.0 * quiet) / 3.0 * before.t33).abs() < 1e-13);
    }

    #[test]
    fn y_convention_does_not_matter(seed in any::<u64>(), side in side()) {
        let rho = state(seed);
        let y = pauli(PauliAxis::Y);
        let yt = pauli_with(PauliAxis::Y, YConvention::Transposed);
        prop_assert_eq!(kron(&y, &y).unwrap(), kron(&yt, &yt).unwrap());
        let conj = |op: &seqwit::qcore::ComplexMatrix| {
            let l = lift(side, op);
            &(&l * rho.matrix()) * &l
        };
        prop_assert!(conj(&y).max_abs_diff(&conj(&yt)) < 1e-15);
    }

    #[test]
    fn closed_form_tracks_matrix_evolution(
        seed in any::<u64>(),
        alice in prop::collection::vec(1e-9..=1.0f64, 1..5),
        bob in prop::collection::vec(1e-9..=1.0f64, 1..5),
    ) {
        let rho0 = state(seed);
        let t0 = correlators(&rho0);
        let (pa, pb) = (SharpnessProfile::explicit(alice.clone()).unwrap(), SharpnessProfile::explicit(bob.clone()).unwrap());
        let (k, l) = (alice.len(), bob.len());
        let mut rho = rho0;
        for &v in &alice[..k - 1] {
            rho = luders_channel(&rho, Side::Alice, SideSharpness::new(v).unwrap());
        }
        for &v in &bob[..l - 1] {
            rho = luders_channel(&rho, Side::Bob, SideSharpness::new(v).unwrap());
        }
        let direct = witness_expectation(&rho, &WitnessParams::new(alice[k - 1], bob[l - 1]).unwrap());
        let closed = witness_expectation_closed_form(&t0, &pa, &pb, k, l).unwrap();
        prop_assert!((direct - closed).abs() < 1e-12);
    }

    #[test]
    fn gap_sign_is_the_verdict(
        alice in prop::collection::vec(1e-3..=1.0f64, 1..6),
        bob in prop::collection::vec(1e-3..=1.0f64, 1..6),
    ) {
        let t0 = CorrelatorTriple::new(1.0, 1.0, -1.0).unwrap();
        let (pa, pb) = (SharpnessProfile::explicit(alice.clone()).unwrap(), SharpnessProfile::explicit(bob.clone()).unwrap());
        for k in 1..=alice.len() {
            for l in 1..=bob.len() {
                let gap = difference_gap(&t0, &pa, &pb, k, l).unwrap();
                let w = witness_expectation_closed_form(&t0, &pa, &pb, k, l).unwrap();
                if gap.abs() > 1e-12 {
                    prop_assert_eq!(gap > 0.0, w < 0.0);
                }
            }
        }
    }

    #[test]
    fn chain_factors_compose(
        a in prop::collection::vec(0.0..=1.0f64, 0..6),
        b in prop::collection::vec(0.0..=1.0f64, 0..6),
    ) {
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let whole = ChainFactors::of(&joined);
        let parts = ChainFactors::of(&a).combine(ChainFactors::of(&b));
        prop_assert!((whole.deficit - parts.deficit).abs() < 1e-15);
        prop_assert!((whole.coherence - parts.coherence).abs() < 1e-15);
    }

    #[test]
    fn theta_sequences_increase(theta in 1e-6..0.05f64, big_l in 0.5..=2.0f64, epsilon in 4.0..8.0f64) {
        let p = theta_sequence(&SequenceParams::new(epsilon, big_l, theta).unwrap(), 12).unwrap();
        let v = p.values();
        for k in 1..v.len() {
            prop_assert!(v[k] > v[k - 1]);
            if k >= 2 {
                let quiet = (1.0 - v[k - 1] * v[k - 1]).sqrt();
                prop_assert!(v[k] / v[k - 1] > 3.0 / (1.0 + quiet));
            }
        }
    }

    #[test]
    fn saturation_is_absorbing(lambda1 in 1e-4..0.5f64, epsilon in 0.5..8.0f64, n in 1usize..40) {
        let p = pandit_sequence(lambda1, epsilon, n).unwrap();
        prop_assert_eq!(p.len(), n);
        if let Some(first) = p.first_saturated() {
            prop_assert_eq!(p.values().len(), first - 1);
            for k in first..=n {
                prop_assert_eq!(p.entry(k), Some(ProfileEntry::Saturated));
            }
        }
        prop_assert!(p.values().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn format_sig_round_trips(x in prop::num::f64::NORMAL) {
        let back: f64 = format_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }
}
