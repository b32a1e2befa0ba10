use serde::{Deserialize, Serialize};

use super::{InputDiagnostic, VerificationReport};
use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::cdqs::{mid_protocol_state, protocol_cost, CdqsProtocol, MA, MB, Q, QBAR};
use crate::protocol::types::{ProtocolKind, PromiseFunction};
use crate::qcore::layout::Layout;
use crate::qcore::linalg::{self, c, cr, CMatrix, CVector};
use crate::qcore::{diamond_distance_bounds, DensityMatrix, QuantumChannel, StateVector};

/// Largest Choi dimension d_Q * d_MA * d_MB the verifier will diagonalize.
const MAX_CHOI_DIM: usize = 4096;

/// Pure secrets whose projectors span all d x d matrices: the basis states
/// plus (|i> + |j>)/√2 and (|i> + i|j>)/√2 for i < j. Two channels that agree
/// on these agree on every input without a reference system. For a qubit
/// this is {|0>, |1>, |+>, |+i>}.
pub fn spanning_secrets(d: usize) -> Vec<CVector> {
    let mut out: Vec<CVector> = (0..d).map(|i| linalg::basis(d, i)).collect();
    let h = 1.0 / 2f64.sqrt();
    for i in 0..d {
        for j in i + 1..d {
            let mut v = CVector::zeros(d);
            v[i] = cr(h);
            v[j] = cr(h);
            out.push(v.clone());
            v[j] = c(0.0, h);
            out.push(v);
        }
    }
    out
}

/// Choi of the constant channel rho -> sigma, in (output, input) order.
fn constant_choi(sigma: &CMatrix, d_in: usize) -> CMatrix {
    linalg::kron(sigma, &(linalg::identity(d_in) * cr(1.0 / d_in as f64)))
}

struct SecurityRow {
    lower: f64,
    upper: f64,
    spanning: f64,
}

fn security_at(n: &QuantumChannel, d_q: usize) -> Result<SecurityRow> {
    let dm = n.output().dim();
    let j = n.choi_matrix();
    let rho_m = linalg::partial_trace(&j, &[dm, d_q], &[0]);
    let lower = linalg::trace_norm(&(&j - constant_choi(&rho_m, d_q)))?;
    let upper = (lower * d_q as f64).min(2.0).max(lower);
    let mut spanning = 0.0f64;
    for v in spanning_secrets(d_q) {
        let out = n.apply_matrix(&linalg::projector(&v));
        spanning = spanning.max(linalg::trace_norm(&(out - &rho_m))?);
    }
    Ok(SecurityRow { lower, upper, spanning })
}

pub fn cdqs_verify(p: &CdqsProtocol, f: &PromiseFunction) -> Result<VerificationReport> {
    cdqs_verify_with(p, f, Exec::default())
}

/// ε̂: Choi lower bound on the diamond distance between decoder∘protocol and
/// the identity, maximized over f = 1 inputs. δ̂: interval for the distance to
/// the constant channel onto ρ_M = N(π), maximized over f = 0 inputs.
pub fn cdqs_verify_with(p: &CdqsProtocol, f: &PromiseFunction, exec: Exec) -> Result<VerificationReport> {
    if p.x_size < f.x_size() || p.y_size < f.y_size() {
        return Err(Error::DimensionMismatch("protocol domain smaller than function domain".into()));
    }
    let inputs = f.promise_inputs();
    let id = QuantumChannel::identity(Layout::single(Q, p.d_q));
    let rows = exec.map(&inputs, |&(x, y, v)| -> Result<(InputDiagnostic, f64)> {
        let n = p.combined_channel(x, y)?;
        if n.output().dim() * p.d_q > MAX_CHOI_DIM {
            return Err(Error::BudgetExceeded(format!(
                "Choi dimension {}",
                n.output().dim() * p.d_q
            )));
        }
        let row = InputDiagnostic::new(x, y, v);
        if v {
            let d = p.decoder_channel(x, y)?;
            let dn = d.compose_after(&n)?;
            let (lo, hi) = diamond_distance_bounds(&dn, &id)?;
            Ok((row.with("decode_error_lower", lo).with("decode_error_upper", hi), hi))
        } else {
            let s = security_at(&n, p.d_q)?;
            Ok((
                row.with("simulator_distance_lower", s.lower)
                    .with("simulator_distance_upper", s.upper)
                    .with("spanning_set_max", s.spanning),
                0.0,
            ))
        }
    });
    let rows = collect_results(rows)?;
    let eps_upper = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let rows: Vec<InputDiagnostic> = rows.into_iter().map(|r| r.0).collect();
    let get = |k: &str| {
        rows.iter()
            .filter_map(|r| r.distances.get(k).copied())
            .fold(0.0, f64::max)
    };
    let mut rep = VerificationReport::new(&p.name, ProtocolKind::Cdqs, f.name(), f.n(), protocol_cost(p)?);
    rep.epsilon_hat = get("decode_error_lower");
    rep.delta_hat_lower = get("simulator_distance_lower");
    rep.delta_hat_upper = get("simulator_distance_upper");
    rep.metric("epsilon_hat_upper", eps_upper);
    rep.metric("spanning_set_max", get("spanning_set_max"));
    rep.metric("d_q", p.d_q as f64);
    rep.notes.push("epsilon: trace norm of the Choi difference to the identity, upper end scaled by d_Q".into());
    rep.notes.push(
        "delta: constant simulator onto rho_M = N(pi), maximally entangled input, upper end scaled by d_Q".into(),
    );
    rep.notes.push(format!(
        "spanning set of {} pure secrets checked against rho_M",
        spanning_secrets(p.d_q).len()
    ));
    rep.inputs = rows;
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductnessEntry {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    /// f = 0: ‖ρ_{Q̄M} − π ⊗ ρ_M‖₁. f = 1: entanglement fidelity after decoding.
    pub value: f64,
}

impl ProductnessEntry {
    /// Compares against a verifier report: distance ≤ δ̂ (upper) or
    /// fidelity ≥ 1 − ε̂, both with slack `tol`.
    pub fn holds(&self, rep: &VerificationReport, tol: f64) -> bool {
        if self.f {
            self.value >= 1.0 - rep.epsilon_hat - tol
        } else {
            self.value <= rep.delta_hat_upper + tol
        }
    }
}

/// Mid-protocol state checks, computed from (N ⊗ id)(Φ+) on (Q̄, M_A, M_B).
pub fn productness_check(p: &CdqsProtocol, f: &PromiseFunction) -> Result<Vec<ProductnessEntry>> {
    let inputs = f.promise_inputs();
    let rows = crate::exec::par_map(&inputs, |&(x, y, v)| -> Result<ProductnessEntry> {
        let rho = mid_protocol_state(p, x, y)?;
        let value = if v {
            let d = p.decoder_channel(x, y)?;
            let out = d.apply(&rho)?.reorder(&[QBAR, Q])?;
            let phi = StateVector::max_entangled(QBAR, Q, p.d_q)?;
            let a = phi.amplitudes();
            (a.adjoint() * out.entries() * a)[(0, 0)].re
        } else {
            let rho_m = rho.partial_trace(&[MA, MB])?;
            let pi = DensityMatrix::maximally_mixed(Layout::single(QBAR, p.d_q));
            let prod = pi.tensor(&rho_m)?;
            linalg::trace_norm(&(rho.entries() - prod.entries()))?
        };
        Ok(ProductnessEntry { x, y, f: v, value })
    });
    collect_results(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::channel::pauli_x;

    #[test]
    fn spanning_set_spans() {
        for d in 1..=4 {
            let vs = spanning_secrets(d);
            assert_eq!(vs.len(), d * d);
            // Rank of the vectorized projectors must be d^2.
            let m = CMatrix::from_fn(d * d, vs.len(), |r, col| {
                let p = linalg::projector(&vs[col]);
                p[(r / d, r % d)]
            });
            let rank = m.svd(false, false).singular_values.iter().filter(|s| **s > 1e-9).count();
            assert_eq!(rank, d * d);
        }
    }

    /// Q goes to MA unchanged, MB and the resource are trivial.
    fn forwarding(flip: bool) -> CdqsProtocol {
        let res = StateVector::basis(Layout::new([(crate::protocol::cdqs::L, 1), (crate::protocol::cdqs::R, 1)]).unwrap(), 0).unwrap();
        CdqsProtocol::new(
            "fwd",
            1,
            (2, 2),
            2,
            res,
            |_| {
                QuantumChannel::identity(Layout::new([(Q, 2), (crate::protocol::cdqs::L, 1)]).unwrap())
                    .with_layouts(
                        Layout::new([(Q, 2), (crate::protocol::cdqs::L, 1)]).unwrap(),
                        Layout::single(MA, 2),
                    )
            },
            |_| QuantumChannel::identity(Layout::single(crate::protocol::cdqs::R, 1)).with_layouts(
                Layout::single(crate::protocol::cdqs::R, 1),
                Layout::single(MB, 1),
            ),
            move |_, _| {
                let u = if flip { pauli_x() } else { linalg::identity(2) };
                QuantumChannel::unitary(u, Layout::single(Q, 2))?.with_layouts(
                    Layout::new([(MA, 2), (MB, 1)]).unwrap(),
                    Layout::single(Q, 2),
                )
            },
        )
        .unwrap()
    }

    #[test]
    fn forwarding_correct_but_insecure() {
        let p = forwarding(false);
        let r = cdqs_verify(&p, &PromiseFunction::constant(1, true)).unwrap();
        assert!(r.epsilon_hat < 1e-12);
        let r = cdqs_verify(&p, &PromiseFunction::constant(1, false)).unwrap();
        // ‖Φ+ − π⊗π‖₁ = 3/2 for a qubit.
        assert!((r.delta_hat_lower - 1.5).abs() < 1e-9);
        assert!((r.delta_hat_upper - 2.0).abs() < 1e-12);
        // |0><0| vs I/2 in trace norm.
        assert!((r.metrics["spanning_set_max"] - 1.0).abs() < 1e-9);
        for e in productness_check(&p, &PromiseFunction::constant(1, false)).unwrap() {
            assert!(e.holds(&r, 1e-9));
            assert!((e.value - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_decoder_detected() {
        let p = forwarding(true);
        let f = PromiseFunction::constant(1, true);
        let r = cdqs_verify(&p, &f).unwrap();
        // ‖(X⊗I)Φ+ − Φ+‖₁ = 2 for orthogonal pure states.
        assert!((r.epsilon_hat - 2.0).abs() < 1e-9);
        for e in productness_check(&p, &f).unwrap() {
            assert!(e.value.abs() < 1e-12);
        }
    }
}
