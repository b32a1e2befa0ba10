//! Two-prover proof from a CDQS protocol: purified encoders, the honest
//! provers' acceptance, near-orthogonality of the purifier marginals, and a
//! see-saw search for cheating provers.
//!
//! For secret s the verifier accepts on the projector onto
//! |ψ^s⟩ = (V_A ⊗ V_B)|s⟩_Q|Ψ⟩_LR on M M', where V_A, V_B are the
//! Stinespring isometries of Alice's and Bob's channels, M = (M_A, M_B) is
//! sent by prover 1 and the environments M' = (M_A', M_B') by prover 2.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::cdqs::{parallel_repeat, CdqsProtocol};
use crate::protocol::types::PromiseFunction;
use crate::qcore::linalg::{self, cr, CMatrix, CVector};
use crate::verifier::cdqs_verify;

pub const SEESAW_ROUNDS: usize = 500;
pub const SEESAW_TOL: f64 = 1e-10;
const SKETCH_SEED: u64 = 0x5EE5_A11E;
/// Largest d_M · d_M' handled.
pub const MAX_PROOF_DIM: usize = 1 << 18;
/// Largest k-fold Choi dimension verified directly in `two_prover_lab`.
pub const DIRECT_VERIFY_DIM: usize = 1024;

/// √(2^-k + δ·2^{-k/4}).
pub fn soundness_bound(k: f64, delta: f64) -> Result<f64> {
    if k < 1.0 {
        return Err(Error::Precondition(format!("k = {k} must be at least 1")));
    }
    Ok(((-k).exp2() + delta * (-k / 4.0).exp2()).sqrt())
}

#[derive(Clone, Debug)]
pub struct TwoProverProof {
    pub base: String,
    /// Number of parallel copies of the base protocol.
    pub k: usize,
    /// The k-fold protocol whose secret is the proof's random string.
    pub protocol: CdqsProtocol,
}

impl TwoProverProof {
    pub fn d_secret(&self) -> usize {
        self.protocol.d_q
    }

    /// log2 of the secret dimension.
    pub fn secret_qubits(&self) -> f64 {
        (self.d_secret() as f64).log2()
    }
}

pub fn build_two_prover_proof(p: &CdqsProtocol, k: usize) -> Result<TwoProverProof> {
    Ok(TwoProverProof { base: p.name.clone(), k, protocol: parallel_repeat(p, k)? })
}

/// The verifier's test states at one input. `psi[s]` is |ψ^s⟩ reshaped to a
/// d_M × d_M' matrix.
#[derive(Clone, Debug)]
pub struct ProverView {
    pub x: u64,
    pub y: u64,
    pub d_ma: usize,
    pub d_ma_env: usize,
    pub d_mb: usize,
    pub d_mb_env: usize,
    pub psi: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofCost {
    /// log2(d_MA d_MA' d_MB d_MB' d_R).
    pub actual_qubits: f64,
    /// 2(q_A + q_B + log d_L + log d_R) + log d_Q.
    pub bound_qubits: f64,
    pub env_bounds_hold: bool,
}

impl ProverView {
    pub fn d_m(&self) -> usize {
        self.d_ma * self.d_mb
    }

    pub fn d_env(&self) -> usize {
        self.d_ma_env * self.d_mb_env
    }

    /// ψ^s reduced to M'.
    pub fn env_marginals(&self) -> Vec<CMatrix> {
        self.psi.iter().map(|m| m.transpose() * m.map(|z| z.conj())).collect()
    }

    /// Factors G_s with G_s G_s† = ψ^s_{M'} and one column per nonzero
    /// eigenvalue. The column space comes from a seeded Gaussian sketch of
    /// Ψ_s^T, widened until Ψ_s^T lies in it to 1e-10 relative residual.
    pub fn marginal_factors(&self) -> Vec<CMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
        self.psi.iter().map(|m| low_rank_factor(&m.transpose(), &mut rng)).collect()
    }
}

/// G with G G† = A A†, G having rank(A) columns.
fn low_rank_factor(a: &CMatrix, rng: &mut ChaCha8Rng) -> CMatrix {
    let (rows, cols) = a.shape();
    let n = a.norm();
    if n == 0.0 {
        return CMatrix::zeros(rows, 1);
    }
    let mut width = 4usize;
    loop {
        let w = width.min(cols);
        let y = a * linalg::random_gaussian_matrix(cols, w, rng);
        let svd = y.svd(true, false);
        let u = svd.u.unwrap();
        let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-12 * top).collect();
        let q = CMatrix::from_fn(rows, keep.len(), |r, j| u[(r, keep[j])]);
        let b = q.adjoint() * a;
        if (a - &q * &b).norm() <= 1e-10 * n || w == cols {
            // q b = (q U) Σ V†, so G = q U Σ.
            let svd = b.svd(true, false);
            let u = svd.u.unwrap();
            let mut g = q * u;
            for (j, sv) in svd.singular_values.iter().enumerate() {
                g.column_mut(j).scale_mut(*sv);
            }
            let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let r = svd.singular_values.iter().filter(|&&v| v > 1e-12 * top).count().max(1);
            let order = {
                let mut o: Vec<usize> = (0..svd.singular_values.len()).collect();
                o.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
                o
            };
            return CMatrix::from_fn(rows, r, |i, j| g[(i, order[j])]);
        }
        width *= 2;
    }
}

/// F(G_a G_a†, G_b G_b†) = ‖G_a† G_b‖₁².
fn factor_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    (a.adjoint() * b).singular_values().sum().powi(2)
}

impl TwoProverProof {
    pub fn view(&self, x: u64, y: u64) -> Result<ProverView> {
        let p = &self.protocol;
        let va = p.alice_channel(x)?.purify();
        let vb = p.bob_channel(y)?.purify();
        let (dq, dl, dr) = (p.d_q, p.d_l(), p.d_r());
        let (d_ma, d_mb) = (va.output().dims()[0], vb.output().dims()[0]);
        let (ea, eb) = (va.output().dims()[1], vb.output().dims()[1]);
        if (d_ma * d_mb).saturating_mul(ea * eb) > MAX_PROOF_DIM {
            return Err(Error::BudgetExceeded(format!("d_M d_M' = {} exceeds {MAX_PROOF_DIM}", d_ma * d_mb * ea * eb)));
        }
        let psi_lr = CMatrix::from_fn(dl, dr, |l, r| p.resource().amplitudes()[l * dr + r]);
        let right = &psi_lr * vb.matrix().transpose();
        let mut psi = Vec::with_capacity(dq);
        for s in 0..dq {
            // rows (ma, ea), cols (mb, eb)
            let c = va.matrix().columns(s * dl, dl) * &right;
            psi.push(CMatrix::from_fn(d_ma * d_mb, ea * eb, |m, e| {
                let (ma, mb) = (m / d_mb, m % d_mb);
                let (a, b) = (e / eb, e % eb);
                c[(ma * ea + a, mb * eb + b)]
            }));
        }
        Ok(ProverView { x, y, d_ma, d_ma_env: ea, d_mb, d_mb_env: eb, psi })
    }

    pub fn cost(&self, x: u64, y: u64) -> Result<ProofCost> {
        let v = self.view(x, y)?;
        let p = &self.protocol;
        let lg = |d: usize| (d as f64).log2();
        let (q_a, q_b) = (lg(v.d_ma), lg(v.d_mb));
        Ok(ProofCost {
            actual_qubits: lg(v.d_ma) + lg(v.d_ma_env) + lg(v.d_mb) + lg(v.d_mb_env) + lg(p.d_r()),
            bound_qubits: 2.0 * (q_a + q_b + lg(p.d_l()) + lg(p.d_r())) + lg(p.d_q),
            env_bounds_hold: v.d_ma_env <= p.d_q * p.d_l() * v.d_ma && v.d_mb_env <= p.d_r() * v.d_mb,
        })
    }
}

fn require_value(tp: &TwoProverProof, f: &PromiseFunction, x: u64, y: u64, want: bool) -> Result<()> {
    let v = f.require(x, y)?;
    if v != want {
        return Err(Error::Precondition(format!(
            "f({x}, {y}) = {} in {}, this check needs f = {}",
            v as u8, tp.base, want as u8
        )));
    }
    Ok(())
}

/// Largest eigenpair of a Hermitian matrix.
fn top_eigen(m: &CMatrix) -> (f64, CVector) {
    let (vals, vecs) = linalg::eigh(m);
    let i = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (vals[i], vecs.column(i).into_owned())
}

fn gram(vs: &[CVector], scale: f64) -> CMatrix {
    CMatrix::from_fn(vs.len(), vs.len(), |s, t| vs[s].dotc(&vs[t]) * cr(scale))
}

fn flatten(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().cloned())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HonestAcceptance {
    pub x: u64,
    pub y: u64,
    pub per_secret: Vec<f64>,
    pub mean: f64,
    pub spread: f64,
}

/// Honest provers share φ_{PM'} independent of s; prover 1 applies the
/// adjoint of the referee's recovery isometry V_{M→QP} to |s⟩_Q|φ⟩.
/// Accepting on secret s has probability |⟨g_s|φ⟩|², g_s = (⟨s| ⊗ I)(V ⊗ I)|ψ^s⟩.
/// φ is the top eigenvector of (1/d) Σ_s |g_s⟩⟨g_s|, the best s-independent
/// choice. The branch of V† outside its range counts as rejection.
pub fn honest_acceptance(tp: &TwoProverProof, f: &PromiseFunction, x: u64, y: u64) -> Result<HonestAcceptance> {
    require_value(tp, f, x, y, true)?;
    let view = tp.view(x, y)?;
    let dec = tp.protocol.decoder_channel(x, y)?;
    if dec.input().dim() != view.d_m() {
        return Err(Error::DimensionMismatch(format!("decoder input {} vs messages {}", dec.input(), view.d_m())));
    }
    let vd = dec.purify();
    let ed = vd.output().dims()[1];
    let d = tp.d_secret();
    let g: Vec<CVector> = view
        .psi
        .iter()
        .enumerate()
        .map(|(s, m)| flatten(&(vd.matrix().rows(s * ed, ed) * m)))
        .collect();
    let (_, c) = top_eigen(&gram(&g, 1.0 / d as f64));
    // Gram eigenvector c maps back to φ = Σ_t c_t g_t.
    let mut phi = CVector::zeros(g[0].len());
    for (t, gt) in g.iter().enumerate() {
        phi += gt * c[t];
    }
    let norm = phi.norm();
    let per_secret: Vec<f64> = if norm > 0.0 {
        g.iter().map(|gs| (gs.dotc(&phi).norm() / norm).powi(2)).collect()
    } else {
        vec![0.0; d]
    };
    let mean = per_secret.iter().sum::<f64>() / d as f64;
    let spread = per_secret.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - per_secret.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(HonestAcceptance { x, y, per_secret, mean, spread })
}

/// Max over s ≠ s' of F(ψ^s_{M'}, ψ^{s'}_{M'}).
pub fn message_orthogonality_check(tp: &TwoProverProof, f: &PromiseFunction, x: u64, y: u64) -> Result<f64> {
    require_value(tp, f, x, y, false)?;
    let g = tp.view(x, y)?.marginal_factors();
    let mut worst: f64 = 0.0;
    for s in 0..g.len() {
        for t in s + 1..g.len() {
            worst = worst.max(factor_fidelity(&g[s], &g[t]));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheatResult {
    pub x: u64,
    pub y: u64,
    /// Best p_pass found; a lower bound on the provers' optimum.
    pub p_pass: f64,
    pub rounds: usize,
    pub converged: bool,
    /// (1/d) sqrt(Σ_{s,s'} √F(ψ^s_{M'}, ψ^{s'}_{M'})), an upper bound on p_pass.
    pub ensemble_bound: f64,
    /// p_pass when prover 2 may also depend on s (the marginal constraint dropped).
    pub unconstrained_p_pass: f64,
}

/// See-saw over prover strategies with a shared marginal σ on M'.
///
/// p_pass only depends on the marginals ρ_s = G_s G_s†, since for fixed σ
/// the best prover-1 action reaches F(ρ_s, σ). With σ = ΦΦ† this is
/// ‖G_s†Φ‖₁². Step one takes the polar part of G_s†Φ to get the vector v_s
/// that attains it; step two sets Φ to the top eigenvector of
/// (1/d) Σ_s |v_s⟩⟨v_s|. Neither step lowers p_pass.
pub fn cheat_optimize(tp: &TwoProverProof, f: &PromiseFunction, x: u64, y: u64) -> Result<CheatResult> {
    require_value(tp, f, x, y, false)?;
    let g = tp.view(x, y)?.marginal_factors();
    let d = g.len();

    let mut ens = d as f64;
    for s in 0..d {
        for t in s + 1..d {
            ens += 2.0 * factor_fidelity(&g[s], &g[t]).sqrt();
        }
    }
    let ensemble_bound = ens.sqrt() / d as f64;
    let unconstrained = g.iter().map(|m| m.norm_squared()).sum::<f64>() / d as f64;

    // Φ has as many columns as all factors together, enough for any σ on
    // the span of the supports.
    let rows = g[0].nrows();
    let width: usize = g.iter().map(|m| m.ncols()).sum();
    let mut mean = CMatrix::zeros(rows, width);
    let mut starts = Vec::with_capacity(d + 1);
    let mut col = 0;
    for m in &g {
        mean.columns_mut(col, m.ncols()).copy_from(m);
        let mut one = CMatrix::zeros(rows, width);
        one.columns_mut(col, m.ncols()).copy_from(m);
        starts.push(one);
        col += m.ncols();
    }
    starts.insert(0, mean);
    let mut best = (f64::NEG_INFINITY, 0, false);
    for start in starts {
        let r = seesaw(&g, start);
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(CheatResult {
        x,
        y,
        p_pass: best.0,
        rounds: best.1,
        converged: best.2,
        ensemble_bound,
        unconstrained_p_pass: unconstrained,
    })
}

fn seesaw(factors: &[CMatrix], start: CMatrix) -> (f64, usize, bool) {
    let d = factors.len() as f64;
    let n = start.norm();
    if n == 0.0 {
        return (0.0, 0, true);
    }
    let mut phi = start / cr(n);
    let mut prev = f64::NEG_INFINITY;
    let mut best = f64::NEG_INFINITY;
    for round in 1..=SEESAW_ROUNDS {
        // v_s = G_s U V† where G_s†Φ = U Σ V†; ⟨v_s, Φ⟩ = tr Σ.
        let mut val = 0.0;
        let mut vs = Vec::with_capacity(factors.len());
        for g in factors {
            let svd = (g.adjoint() * &phi).svd(true, true);
            val += svd.singular_values.sum().powi(2);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            vs.push(flatten(&(g * u * vt)));
        }
        val /= d;
        best = best.max(val);
        if (val - prev).abs() < SEESAW_TOL {
            return (best, round, true);
        }
        prev = val;
        let (lam, c) = top_eigen(&gram(&vs, 1.0 / d));
        best = best.max(lam);
        let mut next = CVector::zeros(vs[0].len());
        for (t, v) in vs.iter().enumerate() {
            next += v * c[t];
        }
        let nn = next.norm();
        if nn == 0.0 {
            return (best, round, false);
        }
        phi = CMatrix::from_iterator(phi.nrows(), phi.ncols(), next.iter().map(|z| z / nn));
    }
    (best, SEESAW_ROUNDS, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoProverEntry {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    pub honest: Option<HonestAcceptance>,
    pub honest_floor: Option<f64>,
    pub cheat: Option<CheatResult>,
    pub soundness_bound: Option<f64>,
    pub max_fidelity: Option<f64>,
    pub fidelity_bound: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoProverReport {
    pub protocol: String,
    pub k: usize,
    pub secret_qubits: f64,
    /// ε̂ and δ̂ (upper end) of the k-fold protocol.
    pub epsilon_hat: f64,
    pub delta_hat: f64,
    /// δ̂ (upper end) of the base protocol, used in the soundness bound.
    pub base_delta_hat: f64,
    /// False when the k-fold ε̂, δ̂ are k times the base values rather than
    /// computed on the k-fold protocol.
    pub k_fold_verified: bool,
    pub cost: ProofCost,
    pub entries: Vec<TwoProverEntry>,
    pub passed: bool,
}

impl TwoProverReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "protocol: {}\nk: {}\nsecret_qubits: {}\nepsilon_hat: {:.3e}\ndelta_hat: {:.3e}\nk_fold_verified: {}\nbase_delta_hat: {:.3e}\ncost_qubits: {} (bound {})\n",
            self.protocol,
            self.k,
            self.secret_qubits,
            self.epsilon_hat,
            self.delta_hat,
            self.k_fold_verified,
            self.base_delta_hat,
            self.cost.actual_qubits,
            self.cost.bound_qubits
        );
        for e in &self.entries {
            s.push_str(&format!("input {} {} f={}:", e.x, e.y, e.f as u8));
            if let (Some(h), Some(fl)) = (&e.honest, e.honest_floor) {
                s.push_str(&format!(" honest={:.9} floor={:.6}", h.mean, fl));
            }
            if let (Some(c), Some(b)) = (&e.cheat, e.soundness_bound) {
                s.push_str(&format!(" cheat={:.9} bound={:.6} ablation={:.6}", c.p_pass, b, c.unconstrained_p_pass));
            }
            if let (Some(m), Some(b)) = (e.max_fidelity, e.fidelity_bound) {
                s.push_str(&format!(" max_fidelity={m:.3e} fidelity_bound={b:.3e}"));
            }
            s.push_str(if e.passed { " pass\n" } else { " FAIL\n" });
        }
        s.push_str(&format!("result: {}\n", if self.passed { "pass" } else { "fail" }));
        s
    }
}

/// Honest acceptance on every f = 1 input, cheating and orthogonality on
/// every f = 0 input, for the k-fold protocol.
pub fn two_prover_lab(p: &CdqsProtocol, f: &PromiseFunction, k: usize, exec: Exec) -> Result<TwoProverReport> {
    let tp = build_two_prover_proof(p, k)?;
    let base = cdqs_verify(p, f)?;
    let (x0, y0, _) = f.promise_inputs()[0];
    let choi_dim = tp.protocol.combined_channel(x0, y0)?.output().dim() * tp.d_secret();
    let (eps, delta, direct) = if k == 1 {
        (base.epsilon_hat, base.delta_hat_upper, true)
    } else if choi_dim <= DIRECT_VERIFY_DIM {
        let rep = cdqs_verify(&tp.protocol, f)?;
        (rep.epsilon_hat, rep.delta_hat_upper, true)
    } else {
        // Both distances are subadditive over tensor factors.
        let kf = k as f64;
        ((kf * base.epsilon_hat).min(2.0), (kf * base.delta_hat_upper).min(2.0), false)
    };
    let bound = soundness_bound(tp.secret_qubits(), base.delta_hat_upper)?;
    let inputs = f.promise_inputs();
    let entries = collect_results(exec.map(&inputs, |&(x, y, v)| -> Result<TwoProverEntry> {
        let mut e = TwoProverEntry {
            x,
            y,
            f: v,
            honest: None,
            honest_floor: None,
            cheat: None,
            soundness_bound: None,
            max_fidelity: None,
            fidelity_bound: None,
            passed: true,
        };
        if v {
            let h = honest_acceptance(&tp, f, x, y)?;
            let floor = 1.0 - 2.0 * eps.sqrt();
            e.passed = h.per_secret.iter().all(|&a| a >= floor - 1e-9);
            e.honest = Some(h);
            e.honest_floor = Some(floor);
        } else {
            let c = cheat_optimize(&tp, f, x, y)?;
            let m = message_orthogonality_check(&tp, f, x, y)?;
            let fb = 4.0 * delta.sqrt();
            e.passed = c.p_pass <= bound + 1e-6 && c.p_pass <= c.ensemble_bound + 1e-9 && m <= fb + 1e-9;
            e.cheat = Some(c);
            e.soundness_bound = Some(bound);
            e.max_fidelity = Some(m);
            e.fidelity_bound = Some(fb);
        }
        Ok(e)
    }))?;
    let cost = tp.cost(x0, y0)?;
    let passed = entries.iter().all(|e| e.passed) && cost.env_bounds_hold && cost.actual_qubits <= cost.bound_qubits + 1e-9;
    Ok(TwoProverReport {
        protocol: tp.protocol.name.clone(),
        k,
        secret_qubits: tp.secret_qubits(),
        epsilon_hat: eps,
        delta_hat: delta,
        base_delta_hat: base.delta_hat_upper,
        k_fold_verified: direct,
        cost,
        entries,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::teleport_and_toy;

    #[test]
    fn bound_values() {
        assert!((soundness_bound(1.0, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((soundness_bound(4.0, 0.09).unwrap() - 0.327_871_926).abs() < 1e-6);
        let b: Vec<f64> = (1..=10).map(|k| soundness_bound(k as f64, 0.09).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        assert!(soundness_bound(0.0, 0.1).is_err());
    }

    #[test]
    fn perfect_toy_k1() {
        let p = teleport_and_toy().unwrap();
        let f = PromiseFunction::and();
        let tp = build_two_prover_proof(&p, 1).unwrap();
        let h = honest_acceptance(&tp, &f, 1, 1).unwrap();
        assert!((h.mean - 1.0).abs() < 1e-9 && h.spread < 1e-9, "{h:?}");
        for (x, y) in [(0, 0), (0, 1), (1, 0)] {
            assert!(message_orthogonality_check(&tp, &f, x, y).unwrap() < 1e-9);
            let c = cheat_optimize(&tp, &f, x, y).unwrap();
            assert!(c.p_pass <= 0.5f64.sqrt() + 1e-6, "{c:?}");
            assert!(c.p_pass <= c.ensemble_bound + 1e-9);
            assert!((c.unconstrained_p_pass - 1.0).abs() < 1e-9);
        }
        assert!(honest_acceptance(&tp, &f, 0, 1).is_err());
        assert!(cheat_optimize(&tp, &f, 1, 1).is_err());
        let cost = tp.cost(1, 1).unwrap();
        assert!(cost.env_bounds_hold && cost.actual_qubits <= cost.bound_qubits);
    }

    #[test]
    fn factors_reproduce_marginals() {
        let p = crate::quantum::leaky_and(crate::quantum::toys::LEAK_Q).unwrap();
        let tp = build_two_prover_proof(&p, 2).unwrap();
        for (x, y) in [(0, 1), (1, 1)] {
            let v = tp.view(x, y).unwrap();
            let full = v.env_marginals();
            let g = v.marginal_factors();
            for (m, gs) in full.iter().zip(&g) {
                assert!(linalg::max_abs_diff(m, &(gs * gs.adjoint())) < 1e-10);
            }
            let want = linalg::fidelity_psd(&full[0], &full[1]);
            assert!((factor_fidelity(&g[0], &g[1]) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn seesaw_two_state_optimum() {
        // max_σ F(ρ0, σ) + F(ρ1, σ) = 1 + √F(ρ0, ρ1) for pure ρ0, ρ1.
        let t = 0.3f64;
        let a = CVector::from_vec(vec![cr(1.0), cr(0.0)]);
        let b = CVector::from_vec(vec![cr(t.cos()), cr(t.sin())]);
        let g = vec![CMatrix::from_column_slice(2, 1, a.as_slice()), CMatrix::from_column_slice(2, 1, b.as_slice())];
        let mut start = CMatrix::zeros(2, 2);
        start.column_mut(0).copy_from(&a);
        start.column_mut(1).copy_from(&b);
        let (v, _, conv) = seesaw(&g, start);
        assert!(conv);
        assert!((v - (1.0 + t.cos().abs()) / 2.0).abs() < 1e-8, "{v}");
    }
}
