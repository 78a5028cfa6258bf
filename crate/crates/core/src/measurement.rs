//! Unsharp Pauli measurements and the outcome-averaged Lüders update they
//! induce on one half of a two-qubit state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{kron, pauli, ComplexMatrix, PauliAxis, TwoQubitState};

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Alice,
    Bob,
}

/// Outcome label: `Zero` is the element `(I + lambda P)/2`, `One` is `(I - lambda P)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    fn sign(self) -> f64 {
        match self {
            Outcome::Zero => 1.0,
            Outcome::One => -1.0,
        }
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// `1 - sqrt(1 - s^2)` evaluated without cancellation for small `s`.
pub fn quiet_deficit(sharpness: f64) -> f64 {
    let s2 = sharpness * sharpness;
    s2 / (1.0 + (1.0 - s2).sqrt())
}

/// Two-outcome POVM `{(I + sP)/2, (I - sP)/2}` along a Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakPovm {
    axis: PauliAxis,
    sharpness: f64,
}

impl WeakPovm {
    pub fn new(axis: PauliAxis, sharpness: f64) -> Result<Self> {
        check_unit_interval("sharpness", sharpness)?;
        Ok(Self { axis, sharpness })
    }

    pub fn axis(&self) -> PauliAxis {
        self.axis
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn element(&self, outcome: Outcome) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        let p = pauli(self.axis).scale(outcome.sign() * self.sharpness);
        (&id + &p).scale(0.5)
    }

    /// Positive square root of an element, `a I +/- b P` in closed form.
    pub fn sqrt_element(&self, outcome: Outcome) -> ComplexMatrix {
        let s = self.sharpness;
        let plus = ((1.0 + s) / 2.0).sqrt();
        let minus = ((1.0 - s) / 2.0).sqrt();
        let a = (plus + minus) / 2.0;
        // (plus - minus)/2, rewritten to avoid cancellation for small s
        let b = s / (2.0 * (plus + minus));
        let id = ComplexMatrix::identity(2).scale(a);
        let p = pauli(self.axis).scale(outcome.sign() * b);
        &id + &p
    }
}

pub fn povm_elements(p: &WeakPovm) -> (ComplexMatrix, ComplexMatrix) {
    (p.element(Outcome::Zero), p.element(Outcome::One))
}

/// Sharpness of one observer: shared by the sigma_1 and sigma_2 measurements,
/// while sigma_3 is always measured sharply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideSharpness {
    weak: f64,
}

impl SideSharpness {
    pub fn new(weak: f64) -> Result<Self> {
        check_unit_interval("weak sharpness", weak)?;
        Ok(Self { weak })
    }

    pub fn weak(&self) -> f64 {
        self.weak
    }

    /// `sqrt(1 - weak^2)`.
    pub fn quiet(&self) -> f64 {
        (1.0 - self.weak * self.weak).sqrt()
    }

    pub fn quiet_deficit(&self) -> f64 {
        quiet_deficit(self.weak)
    }

    /// The three measurements performed, each with probability 1/3.
    pub fn povms(&self) -> [WeakPovm; 3] {
        [
            WeakPovm {
                axis: PauliAxis::X,
                sharpness: self.weak,
            },
            WeakPovm {
                axis: PauliAxis::Y,
                sharpness: self.weak,
            },
            WeakPovm {
                axis: PauliAxis::Z,
                sharpness: 1.0,
            },
        ]
    }
}

/// Embeds a single-qubit operator on the given side.
pub fn lift(side: Side, op: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    match side {
        Side::Alice => kron(op, &id),
        Side::Bob => kron(&id, op),
    }
    .expect("single-qubit operator")
}

fn conjugate(rho: &ComplexMatrix, op: &ComplexMatrix) -> ComplexMatrix {
    &(op * rho) * op
}

/// Non-selective Lüders update, simplified form:
/// `(1/6) sum_i [(1 + L_i) rho + (1 - L_i) P_i rho P_i]` with
/// `L_1 = L_2 = sqrt(1 - weak^2)` and `L_3 = 0`.
pub fn luders_channel(rho: &TwoQubitState, side: Side, s: SideSharpness) -> TwoQubitState {
    let m = rho.matrix();
    let deficit = s.quiet_deficit();
    let keep = (3.0 + 2.0 * s.quiet()) / 6.0;
    let flip = |axis| conjugate(m, &lift(side, &pauli(axis)));
    let xy = &flip(PauliAxis::X) + &flip(PauliAxis::Y);
    let out = &(&m.scale(keep) + &xy.scale(deficit / 6.0)) + &flip(PauliAxis::Z).scale(1.0 / 6.0);
    TwoQubitState::from_channel_output(out)
}

/// Non-selective Lüders update from the explicit square roots of every POVM element:
/// `(1/3) sum_i sum_a sqrt(E_ia) rho sqrt(E_ia)`.
pub fn luders_channel_bruteforce(
    rho: &TwoQubitState,
    side: Side,
    s: SideSharpness,
) -> TwoQubitState {
    let m = rho.matrix();
    let mut acc = ComplexMatrix::zeros(4);
    for povm in s.povms() {
        for outcome in Outcome::BOTH {
            let root = lift(side, &povm.sqrt_element(outcome));
            acc = &acc + &conjugate(m, &root);
        }
    }
    TwoQubitState::from_channel_output(acc.scale(1.0 / 3.0))
}

/// `Tr[(E_a (x) F_b) rho]`.
pub fn joint_outcome_probability(
    rho: &TwoQubitState,
    alice: &WeakPovm,
    a: Outcome,
    bob: &WeakPovm,
    b: Outcome,
) -> f64 {
    let joint = kron(&alice.element(a), &bob.element(b)).expect("2x2 elements");
    rho.expectation(&joint)
}

/// Total probability `p1 + p2 + p3` of the three witnessing events: both
/// measure sigma_3 sharply with equal outcomes, or both measure sigma_1
/// (resp. sigma_2) unsharply with different outcomes. Each measurement choice
/// pair has probability 1/9.
pub fn witness_probability_sum(rho: &TwoQubitState, lam: f64, gam: f64) -> Result<f64> {
    check_unit_interval("lambda", lam)?;
    check_unit_interval("gamma", gam)?;
    use Outcome::{One, Zero};

    let z = WeakPovm::new(PauliAxis::Z, 1.0)?;
    let p1 = joint_outcome_probability(rho, &z, Zero, &z, Zero)
        + joint_outcome_probability(rho, &z, One, &z, One);

    let anti = |axis| -> Result<f64> {
        let a = WeakPovm::new(axis, lam)?;
        let b = WeakPovm::new(axis, gam)?;
        Ok(joint_outcome_probability(rho, &a, Zero, &b, One)
            + joint_outcome_probability(rho, &a, One, &b, Zero))
    };
    let p2 = anti(PauliAxis::X)?;
    let p3 = anti(PauliAxis::Y)?;
    Ok((p1 + p2 + p3) / 9.0)
}
