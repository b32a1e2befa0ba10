//! Constructive pieces of the lower-bound arguments: the fixed-point one-way
//! reduction, the two-prover proof built from a CDQS protocol, and decoding
//! the secret from a complementary channel.

pub mod two_prover;

use serde::{Deserialize, Serialize};

pub use two_prover::{
    build_two_prover_proof, cheat_optimize, honest_acceptance, message_orthogonality_check, soundness_bound, two_prover_lab,
    CheatResult, HonestAcceptance, ProofCost, ProverView, TwoProverEntry, TwoProverProof, TwoProverReport,
};

use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::cdqs::{CdqsProtocol, L};
use crate::protocol::types::PromiseFunction;
use crate::qcore::layout::Layout;
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::{find_best_decoder, DensityMatrix, QuantumChannel};
use crate::verifier::cdqs_verify;

/// Largest k accepted by `quantize_state` (values times 2^k stay in i64).
pub const MAX_DIGITS: u32 = 60;

/// ½(1 − 1/√d_Q) − ε/4 − δ/4; the trace-distance precision that lets the
/// product test separate the two cases.
pub fn gamma_threshold(epsilon: f64, delta: f64, d_q: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) || !(0.0..1.0).contains(&delta) {
        return Err(Error::Precondition(format!("epsilon = {epsilon}, delta = {delta} must lie in [0, 1)")));
    }
    if d_q < 2 {
        return Err(Error::Precondition(format!("d_Q = {d_q} must be at least 2")));
    }
    let g = 0.5 * (1.0 - 1.0 / (d_q as f64).sqrt()) - epsilon / 4.0 - delta / 4.0;
    if g <= 0.0 {
        return Err(Error::Precondition(format!("gamma = {g} is not positive")));
    }
    Ok(g)
}

/// ceil(3/2 (q_B + E) − log2 γ), at least 1.
pub fn required_digits(q_b: f64, e: f64, gamma: f64) -> Result<u32> {
    if gamma <= 0.0 {
        return Err(Error::Precondition(format!("gamma = {gamma} is not positive")));
    }
    let k = (1.5 * (q_b + e) - gamma.log2()).ceil();
    Ok((k.max(1.0)) as u32)
}

/// Entries rounded to the nearest multiple of 2^-k, real and imaginary
/// parts separately, stored as integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedState {
    pub digits: u32,
    pub dim: usize,
    /// Row-major (re, im) numerators over 2^k.
    pub entries: Vec<(i64, i64)>,
    pub layout: Layout,
}

impl QuantizedState {
    pub fn to_matrix(&self) -> CMatrix {
        let scale = (-(self.digits as f64)).exp2();
        CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let (re, im) = self.entries[i * self.dim + j];
            c(re as f64 * scale, im as f64 * scale)
        })
    }

    /// Bits in the classical description: sign, integer bit and k
    /// fractional bits for each real component.
    pub fn description_bits(&self) -> u64 {
        2 * (self.digits as u64 + 2) * (self.dim * self.dim) as u64
    }

    /// Recomputes every link of ‖Δ‖₁ ≤ √d‖Δ‖₂ ≤ d^{3/2}/2^k.
    pub fn bounds(&self, original: &CMatrix) -> Result<QuantizationBounds> {
        let diff = self.to_matrix() - original;
        let d = self.dim as f64;
        let step = (-(self.digits as f64)).exp2();
        let frob = linalg::frobenius_norm(&diff);
        Ok(QuantizationBounds {
            max_entry_error: diff.iter().map(|z| z.norm()).fold(0.0, f64::max),
            entry_bound: step,
            frobenius: frob,
            frobenius_bound: d * step,
            trace_norm: linalg::trace_norm(&diff)?,
            sqrt_d_frobenius: d.sqrt() * frob,
            trace_bound: d.powf(1.5) * step,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationBounds {
    pub max_entry_error: f64,
    pub entry_bound: f64,
    pub frobenius: f64,
    pub frobenius_bound: f64,
    pub trace_norm: f64,
    pub sqrt_d_frobenius: f64,
    pub trace_bound: f64,
}

impl QuantizationBounds {
    pub fn holds(&self) -> bool {
        let tol = 1e-12;
        self.max_entry_error < self.entry_bound
            && self.frobenius <= self.frobenius_bound + tol
            && self.trace_norm <= self.sqrt_d_frobenius + tol
            && self.sqrt_d_frobenius <= self.trace_bound + tol
    }
}

pub fn quantize_state(rho: &DensityMatrix, k: u32) -> Result<QuantizedState> {
    if k > MAX_DIGITS {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {MAX_DIGITS}")));
    }
    let scale = (k as f64).exp2();
    let m = rho.entries();
    let dim = m.nrows();
    // f64::round is odd-symmetric, so Hermitian input stays Hermitian.
    let entries = (0..dim * dim)
        .map(|idx| {
            let z = m[(idx / dim, idx % dim)];
            ((z.re * scale).round() as i64, (z.im * scale).round() as i64)
        })
        .collect();
    Ok(QuantizedState { digits: k, dim, entries, layout: rho.layout().clone() })
}

/// Bob's state ρ_{L M_B}(y) = (id_L ⊗ N^y)(Ψ_LR).
pub fn bob_state(p: &CdqsProtocol, y: u64) -> Result<DensityMatrix> {
    let ch = QuantumChannel::identity(Layout::single(L, p.d_l())).tensor(&p.bob_channel(y)?)?;
    ch.apply(&p.resource().to_density())
}

/// Alice's reconstruction of ρ_{Q̄ M} from a (possibly quantized) ρ_{L M_B}.
/// Returns the matrix on [Q̄, M_A, M_B] and the product distance.
fn alice_reconstruct(p: &CdqsProtocol, x: u64, rho_lmb: &CMatrix, d_mb: usize) -> Result<(CMatrix, f64)> {
    let dq = p.d_q;
    let dl = p.d_l();
    let alice = p.alice_channel(x)?.compressed();
    let d_ma = alice.output().dim();
    if rho_lmb.nrows() != dl * d_mb {
        return Err(Error::DimensionMismatch(format!("rho_LMB is {} but L M_B is {}", rho_lmb.nrows(), dl * d_mb)));
    }
    // Spectral form of rho_LMB (signs kept: a quantized state need not be PSD).
    // Each eigenvector v and Kraus operator K give the vector
    // (I ⊗ K ⊗ I)(Φ+ ⊗ v) on [Q̄, M_A, M_B].
    let (vals, vecs) = linalg::eigh(rho_lmb);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() > 1e-15).collect();
    let n = keep.len() * alice.kraus().len();
    let dim = dq * d_ma * d_mb;
    let mut cols = CMatrix::zeros(dim, n);
    let mut weights = Vec::with_capacity(n);
    let norm = c(1.0 / (dq as f64).sqrt(), 0.0);
    let mut j = 0;
    for &i in &keep {
        let lam = vals[i];
        let v = CMatrix::from_fn(dl, d_mb, |l, m| vecs[(l * d_mb + m, i)]);
        for k in alice.kraus() {
            for qb in 0..dq {
                let u = k.columns(qb * dl, dl) * &v;
                for ma in 0..d_ma {
                    for mb in 0..d_mb {
                        cols[(qb * d_ma * d_mb + ma * d_mb + mb, j)] = u[(ma, mb)] * norm;
                    }
                }
            }
            weights.push(lam);
            j += 1;
        }
    }
    let mut scaled = cols.clone();
    for (j, w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*w);
    }
    let out = scaled * cols.adjoint();
    let rho_m = linalg::partial_trace(&out, &[dq, d_ma, d_mb], &[1, 2]);
    let prod = linalg::kron(&(linalg::identity(dq) / c(dq as f64, 0.0)), &rho_m);
    let dist = linalg::trace_norm(&(&out - prod))?;
    Ok((out, dist))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayDecision {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    pub decided: bool,
    /// Product distance computed from the quantized description.
    pub distance: f64,
    /// Same distance from the exact state.
    pub exact_distance: f64,
    /// ‖ρ̂_{Q̄M} − ρ_{Q̄M}‖₁, at most the quantization error on L M_B.
    pub reconstruction_error: f64,
    pub gamma: f64,
    pub digits: u32,
    pub description_bits: u64,
    pub bounds: QuantizationBounds,
}

/// Bob sends ρ_{L M_B}(y) to k binary digits; Alice applies her channel to
/// half of a maximally entangled secret and reports 0 when the result is
/// within γ of π ⊗ ρ_M.
pub fn one_way_decide(p: &CdqsProtocol, f: &PromiseFunction, x: u64, y: u64, k: u32, gamma: f64) -> Result<OneWayDecision> {
    let fv = f.require(x, y)?;
    let rho = bob_state(p, y)?;
    let d_mb = p.bob_channel(y)?.output().dim();
    let need = required_digits((d_mb as f64).log2(), (p.d_l() as f64).log2(), gamma)?;
    if k < need {
        return Err(Error::Precondition(format!("k = {k} is below the required {need}")));
    }
    let qs = quantize_state(&rho, k)?;
    let bounds = qs.bounds(rho.entries())?;
    let (hat, distance) = alice_reconstruct(p, x, &qs.to_matrix(), d_mb)?;
    let (exact, exact_distance) = alice_reconstruct(p, x, rho.entries(), d_mb)?;
    Ok(OneWayDecision {
        x,
        y,
        f: fv,
        decided: distance >= gamma,
        distance,
        exact_distance,
        reconstruction_error: linalg::trace_norm(&(hat - exact))?,
        gamma,
        digits: k,
        description_bits: qs.description_bits(),
        bounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayReport {
    pub protocol: String,
    pub epsilon_hat: f64,
    pub delta_hat: f64,
    pub d_q: usize,
    pub q_b: f64,
    pub e: f64,
    pub gamma: f64,
    pub digits: u32,
    pub decisions: Vec<OneWayDecision>,
    pub all_correct: bool,
    pub chain_holds: bool,
}

/// Runs the reduction on every promise input at k = required_digits, with
/// γ from the verifier's ε̂ and the upper end of δ̂.
pub fn one_way_sweep(p: &CdqsProtocol, f: &PromiseFunction, exec: Exec) -> Result<OneWayReport> {
    let rep = cdqs_verify(p, f)?;
    let gamma = gamma_threshold(rep.epsilon_hat, rep.delta_hat_upper, p.d_q)?;
    let inputs = f.promise_inputs();
    let d_mb = inputs
        .iter()
        .map(|&(_, y, _)| p.bob_channel(y).map(|b| b.output().dim()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    let (q_b, e) = ((d_mb as f64).log2(), (p.d_l() as f64).log2());
    let k = required_digits(q_b, e, gamma)?;
    let decisions = collect_results(exec.map(&inputs, |&(x, y, _)| one_way_decide(p, f, x, y, k, gamma)))?;
    Ok(OneWayReport {
        protocol: p.name.clone(),
        epsilon_hat: rep.epsilon_hat,
        delta_hat: rep.delta_hat_upper,
        d_q: p.d_q,
        q_b,
        e,
        gamma,
        digits: k,
        all_correct: decisions.iter().all(|d| d.decided == d.f),
        chain_holds: decisions.iter().all(|d| d.bounds.holds()),
        decisions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementaryFit {
    pub x: u64,
    pub y: u64,
    /// Raw Choi trace norm between D∘N^c and the identity on Q.
    pub achieved_error: f64,
    pub fidelity: f64,
    pub env_dim: usize,
    pub rounds: usize,
    pub converged: bool,
}

/// Best decoder from the complementary channel of N^{x,y} back to Q, at an
/// input where f = 0.
pub fn complementary_decode_check(p: &CdqsProtocol, f: &PromiseFunction, x: u64, y: u64) -> Result<ComplementaryFit> {
    if f.require(x, y)? {
        return Err(Error::Precondition(format!("f({x}, {y}) = 1; complementary decoding needs f = 0")));
    }
    let comp = p.combined_channel(x, y)?.complementary();
    let target = QuantumChannel::identity(comp.input().clone());
    let fit = find_best_decoder(&comp, &target)?;
    Ok(ComplementaryFit {
        x,
        y,
        achieved_error: fit.achieved_error,
        fidelity: fit.fidelity,
        env_dim: comp.output().dim(),
        rounds: fit.rounds,
        converged: fit.converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementaryReport {
    pub protocol: String,
    /// Upper end of the verifier's δ̂.
    pub delta_hat: f64,
    /// 2√δ̂ + 1e-6.
    pub bound: f64,
    pub fits: Vec<ComplementaryFit>,
    pub passed: bool,
}

/// `complementary_decode_check` on every f = 0 promise input.
pub fn complementary_sweep(p: &CdqsProtocol, f: &PromiseFunction, exec: Exec) -> Result<ComplementaryReport> {
    let rep = cdqs_verify(p, f)?;
    let bound = 2.0 * rep.delta_hat_upper.sqrt() + 1e-6;
    let zeros: Vec<(u64, u64)> = f.promise_inputs().into_iter().filter(|e| !e.2).map(|e| (e.0, e.1)).collect();
    let fits = collect_results(exec.map(&zeros, |&(x, y)| complementary_decode_check(p, f, x, y)))?;
    Ok(ComplementaryReport {
        protocol: p.name.clone(),
        delta_hat: rep.delta_hat_upper,
        bound,
        passed: fits.iter().all(|r| r.achieved_error <= bound),
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{lifted_neq, teleport_and_toy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_values() {
        let g = gamma_threshold(0.0, 0.0, 2).unwrap();
        assert!((g - 0.5 * (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((g - 0.146_446_609_4).abs() < 1e-9);
        let g = gamma_threshold(0.09, 0.09, 2).unwrap();
        assert!((g - 0.101_446_609_4).abs() < 1e-9);
        assert!(gamma_threshold(1.0, 1.0, 2).is_err());
        assert!(gamma_threshold(0.9, 0.9, 2).is_err());
        assert!(gamma_threshold(0.0, 0.0, 1).is_err());
    }

    #[test]
    fn digit_counts() {
        let g = gamma_threshold(0.09, 0.09, 2).unwrap();
        assert_eq!(required_digits(1.0, 1.0, g).unwrap(), 7);
        assert_eq!(required_digits(0.0, 0.0, 0.5).unwrap(), 1);
        assert_eq!(required_digits(2.0, 1.0, 1.0).unwrap(), 5);
        assert!(required_digits(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quantization_chain() {
        let mixed = DensityMatrix::maximally_mixed(Layout::single("A", 2));
        let q = quantize_state(&mixed, 1).unwrap();
        assert!(linalg::max_abs_diff(&q.to_matrix(), mixed.entries()) == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = DensityMatrix::new(linalg::random_density(4, 4, &mut rng), Layout::single("A", 4)).unwrap();
        let q = quantize_state(&rho, 7).unwrap();
        let b = q.bounds(rho.entries()).unwrap();
        assert!(b.holds(), "{b:?}");
        assert!(b.trace_norm <= 0.0625);
        assert!((b.trace_bound - 0.0625).abs() < 1e-15);
        let fine = quantize_state(&rho, 40).unwrap().bounds(rho.entries()).unwrap();
        assert!(fine.trace_norm <= 1e-9);
        assert!(linalg::is_hermitian(&q.to_matrix(), 0.0));
    }

    #[test]
    fn one_way_on_teleport_toy() {
        let p = teleport_and_toy().unwrap();
        let f = PromiseFunction::and();
        let rep = one_way_sweep(&p, &f, Exec::Sequential).unwrap();
        assert!(rep.all_correct && rep.chain_holds, "{rep:?}");
        let at11 = rep.decisions.iter().find(|d| d.f).unwrap();
        assert!(at11.exact_distance >= 2.0 * (1.0 - 1.0 / 2f64.sqrt()) - 1e-9);
        for d in rep.decisions.iter().filter(|d| !d.f) {
            assert!(d.exact_distance < 1e-9);
            assert!(d.reconstruction_error <= d.bounds.trace_norm + 1e-12);
        }
        let low = one_way_decide(&p, &f, 1, 1, rep.digits - 1, rep.gamma);
        assert!(matches!(low, Err(Error::Precondition(_))));
    }

    #[test]
    fn one_way_on_lifted_neq() {
        let p = lifted_neq().unwrap();
        let f = PromiseFunction::neq(2);
        let rep = one_way_sweep(&p, &f, Exec::Parallel).unwrap();
        assert!(rep.all_correct && rep.chain_holds);
        assert_eq!(rep.decisions.len(), f.promise_inputs().len());
    }

    #[test]
    fn complementary_on_perfect_toy() {
        let p = teleport_and_toy().unwrap();
        let f = PromiseFunction::and();
        for (x, y) in [(0, 0), (0, 1), (1, 0)] {
            let fit = complementary_decode_check(&p, &f, x, y).unwrap();
            assert!(fit.achieved_error <= 1e-6, "{fit:?}");
        }
        assert!(matches!(complementary_decode_check(&p, &f, 1, 1), Err(Error::Precondition(_))));
    }
}
