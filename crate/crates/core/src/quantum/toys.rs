//! Small CDQS fixtures with known correctness and security values.

use crate::classical::neq_cds_with_secret;
use crate::error::Result;
use crate::protocol::cdqs::{classical_to_quantum_lift, pad_operator, CdqsProtocol, L, MA, MB, Q, R};
use crate::protocol::types::PromiseFunction;
use crate::qcore::layout::Layout;
use crate::qcore::linalg::{self, cr, CMatrix, CVector};
use crate::qcore::{QuantumChannel, StateVector};

/// Noise level of the depolarized variants.
pub const DEPOLARIZING_P: f64 = 0.1;
/// Leak probability of the leaky AND variant.
pub const LEAK_Q: f64 = 0.05;

/// Discard the input and prepare |0> on `output`.
fn trash(input: Layout, output: Layout) -> Result<QuantumChannel> {
    let (din, dout) = (input.dim(), output.dim());
    let kraus = (0..din)
        .map(|i| {
            let mut k = CMatrix::zeros(dout, din);
            k[(0, i)] = cr(1.0);
            k
        })
        .collect();
    QuantumChannel::new(kraus, input, output)
}

fn trivial_resource() -> Result<StateVector> {
    StateVector::new(CVector::from_element(1, cr(1.0)), Layout::new([(L, 1), (R, 1)])?)
}

/// Alice forwards Q; Bob sends nothing; the decoder is the identity.
/// Correct everywhere and secure nowhere.
pub fn forwarding() -> Result<CdqsProtocol> {
    CdqsProtocol::new(
        "forwarding",
        1,
        (2, 2),
        2,
        trivial_resource()?,
        |_| QuantumChannel::new(vec![linalg::identity(2)], Layout::new([(Q, 2), (L, 1)])?, Layout::single(MA, 2)),
        |_| QuantumChannel::new(vec![linalg::identity(1)], Layout::single(R, 1), Layout::single(MB, 1)),
        |_, _| QuantumChannel::new(vec![linalg::identity(2)], Layout::new([(MA, 2), (MB, 1)])?, Layout::single(Q, 2)),
    )
}

/// One-time pad on Q keyed by the NEQ CDS on 2-bit inputs hiding a 2-bit key.
pub fn lifted_neq() -> Result<CdqsProtocol> {
    let mut p = classical_to_quantum_lift(&neq_cds_with_secret(2, 2)?)?;
    p.name = "lifted_neq2".into();
    Ok(p)
}

fn teleport_and(leak: f64) -> Result<CdqsProtocol> {
    let mut phi = CVector::zeros(4);
    phi[0] = cr(1.0 / 2f64.sqrt());
    phi[3] = cr(1.0 / 2f64.sqrt());
    let resource = StateVector::new(phi, Layout::new([(L, 2), (R, 2)])?)?;
    let h = 1.0 / 2f64.sqrt();
    // Bell projection onto (W_c (x) I)|Phi+> announcing c.
    let bell: Vec<CMatrix> = (0..4u64)
        .map(|c| {
            let w = pad_operator(c);
            CMatrix::from_fn(4, 4, |m, col| {
                if m == c as usize {
                    w[(col / 2, col % 2)].conj() * cr(h)
                } else {
                    cr(0.0)
                }
            })
        })
        .collect();
    let alice_in = Layout::new([(Q, 2), (L, 2)])?;
    let alice = move |x: u64| -> Result<QuantumChannel> {
        let out = Layout::single(MA, 4);
        if x == 1 {
            return QuantumChannel::new(bell.clone(), alice_in.clone(), out);
        }
        let quiet = trash(alice_in.clone(), out.clone())?;
        if leak == 0.0 {
            return Ok(quiet);
        }
        let mut kraus: Vec<CMatrix> = quiet.kraus().iter().map(|k| k * cr((1.0 - leak).sqrt())).collect();
        kraus.extend(bell.iter().map(|k| k * cr(leak.sqrt())));
        QuantumChannel::new(kraus, alice_in.clone(), out)
    };
    let bob = |y: u64| -> Result<QuantumChannel> {
        if y == 1 {
            QuantumChannel::new(vec![linalg::identity(2)], Layout::single(R, 2), Layout::single(MB, 2))
        } else {
            trash(Layout::single(R, 2), Layout::single(MB, 2))
        }
    };
    let decoder = |x: u64, y: u64| -> Result<QuantumChannel> {
        let input = Layout::new([(MA, 4), (MB, 2)])?;
        if x == 1 && y == 1 {
            // Bob's qubit holds W_c^dag psi; undo with W_c.
            let kraus = (0..4u64)
                .map(|c| {
                    let w = pad_operator(c);
                    CMatrix::from_fn(2, 8, |q, col| {
                        if col / 2 == c as usize {
                            w[(q, col % 2)]
                        } else {
                            cr(0.0)
                        }
                    })
                })
                .collect();
            QuantumChannel::new(kraus, input, Layout::single(Q, 2))
        } else {
            trash(input, Layout::single(Q, 2))
        }
    };
    let name = if leak == 0.0 {
        "teleport_and".to_string()
    } else {
        format!("leaky_and({leak})")
    };
    let mut p = CdqsProtocol::new(name, 1, (2, 2), 2, resource, alice, bob, decoder)?;
    if leak != 0.0 {
        p.params.insert("leak".into(), leak.into());
    }
    Ok(p)
}

/// AND via teleportation: Alice announces her Bell outcome only when x = 1,
/// Bob forwards his half of the EPR pair only when y = 1.
pub fn teleport_and_toy() -> Result<CdqsProtocol> {
    teleport_and(0.0)
}

/// The AND toy where Alice, at x = 0, still announces a Bell outcome with
/// probability `q`.
pub fn leaky_and(q: f64) -> Result<CdqsProtocol> {
    if !(0.0..=1.0).contains(&q) {
        return Err(crate::Error::InvalidArgument(format!("leak probability {q}")));
    }
    teleport_and(q)
}

/// `p` with the secret passed through a depolarizing channel before Alice.
pub fn depolarized(p: &CdqsProtocol, noise: f64) -> Result<CdqsProtocol> {
    let dep = QuantumChannel::depolarizing(noise, Layout::single(Q, p.d_q))?;
    let pre = dep.tensor(&QuantumChannel::identity(Layout::single(L, p.d_l())))?;
    let (pa, pb, pd) = (p.clone(), p.clone(), p.clone());
    let mut out = CdqsProtocol::new(
        format!("depolarized({},{noise})", p.name),
        p.n,
        (p.x_size, p.y_size),
        p.d_q,
        p.resource().clone(),
        move |x| pa.alice_channel(x)?.compose_after(&pre),
        move |y| pb.bob_channel(y),
        move |x, y| pd.decoder_channel(x, y),
    )?;
    out.params = p.params.clone();
    out.params.insert("depolarizing".into(), noise.into());
    Ok(out)
}

/// A shipped protocol with its function and designed error values.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub protocol: CdqsProtocol,
    pub function: PromiseFunction,
    pub epsilon: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// True when the construction is perfectly secure.
    pub perfect_security: bool,
}

/// Every CDQS fixture with the values it was built to have.
///
/// Depolarizing with strength p gives D∘N = Dep_p at f = 1, whose Choi
/// distance to the identity is 2p(1 − 1/d²). The leak mixes in a full
/// teleportation with weight q, so the f = 0 distance is q·‖Φ+ − I/4‖₁.
pub fn shipped_fixtures() -> Result<Vec<Fixture>> {
    let dep_eps = 2.0 * DEPOLARIZING_P * (1.0 - 1.0 / 4.0);
    let leak_delta = LEAK_Q * 1.5;
    let and = teleport_and_toy()?;
    let neq = lifted_neq()?;
    Ok(vec![
        Fixture {
            protocol: forwarding()?,
            function: PromiseFunction::constant(1, true),
            epsilon: 0.0,
            delta_lower: 0.0,
            delta_upper: 0.0,
            perfect_security: true,
        },
        Fixture {
            protocol: neq.clone(),
            function: PromiseFunction::neq(2),
            epsilon: 0.0,
            delta_lower: 0.0,
            delta_upper: 0.0,
            perfect_security: true,
        },
        Fixture {
            protocol: and.clone(),
            function: PromiseFunction::and(),
            epsilon: 0.0,
            delta_lower: 0.0,
            delta_upper: 0.0,
            perfect_security: true,
        },
        Fixture {
            protocol: depolarized(&and, DEPOLARIZING_P)?,
            function: PromiseFunction::and(),
            epsilon: dep_eps,
            delta_lower: 0.0,
            delta_upper: 0.0,
            perfect_security: true,
        },
        Fixture {
            protocol: depolarized(&neq, DEPOLARIZING_P)?,
            function: PromiseFunction::neq(2),
            epsilon: dep_eps,
            delta_lower: 0.0,
            delta_upper: 0.0,
            perfect_security: true,
        },
        Fixture {
            protocol: leaky_and(LEAK_Q)?,
            function: PromiseFunction::and(),
            epsilon: 0.0,
            delta_lower: leak_delta,
            delta_upper: 2.0 * leak_delta,
            perfect_security: false,
        },
    ])
}
