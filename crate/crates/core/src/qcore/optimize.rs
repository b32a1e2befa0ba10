//! Decoder search and the ensemble square-root-fidelity bound.

use super::channel::QuantumChannel;
use super::linalg::{self, cr, CMatrix, CVector};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

pub const MAX_ROUNDS: usize = 500;
pub const IMPROVEMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DecoderFit {
    pub decoder: QuantumChannel,
    /// Raw trace norm between the Choi states of decoder∘n and the target.
    pub achieved_error: f64,
    /// Entanglement fidelity between decoder∘n and the target.
    pub fidelity: f64,
    pub rounds: usize,
    pub converged: bool,
}

/// Searches for a decoder `D` with `D∘n` close to `target`.
///
/// The target must be a single-Kraus (isometric) channel with the same input
/// as `n`. The entanglement fidelity is linear in the Choi matrix of `D`; it
/// is maximized by the fixed-point update J <- L^-1/2 X J X L^-1/2 with
/// L = tr_out(X J X), starting from the Petz-style transpose recovery.
pub fn find_best_decoder(n: &QuantumChannel, target: &QuantumChannel) -> Result<DecoderFit> {
    if n.input().dims() != target.input().dims() {
        return Err(Error::DimensionMismatch("decoder target input".into()));
    }
    if target.kraus().len() != 1 {
        return Err(Error::Unsupported("decoder target must be isometric".into()));
    }
    let n = n.compressed();
    let t = &target.kraus()[0];
    let da = n.input().dim();
    let db = n.output().dim();
    let dc = target.output().dim();

    // X = sum_j conj(m_j) m_j^T with m_j[(c, b)] = (N_j T^dag)[b, c].
    let dim = dc * db;
    let mut x = CMatrix::zeros(dim, dim);
    for nj in n.kraus() {
        let p = nj * t.adjoint();
        let m = CVector::from_fn(dim, |idx, _| p[(idx % db, idx / db)]);
        let mc = m.map(|z| z.conj());
        x += &mc * m.transpose();
    }
    let norm = cr(1.0 / (da * da) as f64);
    x *= norm;

    let objective = |j: &CMatrix| (&x * j).trace().re;

    let mut j = petz_initial(&n, t, dc)?;
    let mut best = j.clone();
    let mut best_val = objective(&j);
    let mut rounds = 0;
    let mut converged = false;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        let xjx = &x * &j * &x;
        let lam = linalg::partial_trace(&xjx, &[dc, db], &[1]);
        let (inv, ker) = linalg::psd_pinv_sqrt(&lam, 1e-13 * (1.0 + lam.norm()));
        let side = linalg::kron(&linalg::identity(dc), &inv);
        let mut next = &side * xjx * &side;
        let mut e00 = CMatrix::zeros(dc, dc);
        e00[(0, 0)] = cr(1.0);
        next += linalg::kron(&e00, &ker);
        next = linalg::hermitian_part(&next);
        let val = objective(&next);
        let improvement = val - best_val;
        j = next;
        if val > best_val {
            best_val = val;
            best = j.clone();
        }
        if improvement.abs() < IMPROVEMENT_TOL {
            converged = true;
            break;
        }
    }

    let decoder = choi_to_channel(&best, dc, db, n.output().clone(), target.output().clone())?;
    let composed = decoder.compose_after(&n)?;
    let achieved_error = linalg::trace_norm(&(composed.choi_matrix() - target.choi_matrix()))?;
    Ok(DecoderFit {
        decoder,
        achieved_error,
        fidelity: best_val,
        rounds,
        converged,
    })
}

/// Unnormalized decoder Choi matrix (output c slow, input b fast) of
/// T∘R with R the transpose recovery of `n` at the maximally mixed input.
fn petz_initial(n: &QuantumChannel, t: &CMatrix, dc: usize) -> Result<CMatrix> {
    let da = n.input().dim();
    let db = n.output().dim();
    let pi = linalg::identity(da) * cr(1.0 / da as f64);
    let out = n.apply_matrix(&pi);
    let (inv, ker) = linalg::psd_pinv_sqrt(&out, 1e-12);
    let mut kraus: Vec<CMatrix> = n
        .kraus()
        .iter()
        .map(|nj| t * nj.adjoint() * &inv * cr(1.0 / (da as f64).sqrt()))
        .collect();
    let (vals, vecs) = linalg::eigh(&ker);
    for (k, &l) in vals.iter().enumerate() {
        if l > 0.5 {
            let v = vecs.column(k).into_owned();
            kraus.push(linalg::outer(&linalg::basis(dc, 0), &v));
        }
    }
    let dim = dc * db;
    let mut j = CMatrix::zeros(dim, dim);
    for d in &kraus {
        let v = CVector::from_fn(dim, |idx, _| d[(idx / db, idx % db)]);
        j += &v * v.adjoint();
    }
    Ok(j)
}

fn choi_to_channel(
    j: &CMatrix,
    dc: usize,
    db: usize,
    input: super::Layout,
    output: super::Layout,
) -> Result<QuantumChannel> {
    let (vals, vecs) = linalg::eigh(j);
    let mut kraus = Vec::new();
    for (k, &l) in vals.iter().enumerate() {
        if l <= 1e-14 {
            continue;
        }
        let s = cr(l.sqrt());
        kraus.push(CMatrix::from_fn(dc, db, |c, b| vecs[(c * db + b, k)] * s));
    }
    // Clean residual trace-preservation drift from the eigen cutoff.
    let mut sum = CMatrix::zeros(db, db);
    for k in &kraus {
        sum += k.adjoint() * k;
    }
    let (inv, ker) = linalg::psd_pinv_sqrt(&sum, 1e-12);
    let mut kraus: Vec<CMatrix> = kraus.into_iter().map(|k| k * &inv).collect();
    let (kv, kvec) = linalg::eigh(&ker);
    for (k, &l) in kv.iter().enumerate() {
        if l > 0.5 {
            kraus.push(linalg::outer(&linalg::basis(dc, 0), &kvec.column(k).into_owned()));
        }
    }
    QuantumChannel::new(kraus, input, output)
}

/// Returns (max over candidates of sum_i p_i sqrt F(sigma, rho_i),
/// sqrt(sum_ij p_i p_j sqrt F(rho_i, rho_j))).
pub fn ensemble_sqrt_fidelity_check(
    ensemble: &[(f64, DensityMatrix)],
    candidates: &[DensityMatrix],
) -> Result<(f64, f64)> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-9 || ensemble.iter().any(|(p, _)| *p < 0.0) {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    let mut max_lhs = f64::NEG_INFINITY;
    for sigma in candidates {
        let mut s = 0.0;
        for (p, rho) in ensemble {
            s += p * sigma.fidelity(rho)?.sqrt();
        }
        max_lhs = max_lhs.max(s);
    }
    let mut rhs = 0.0;
    for (pi, ri) in ensemble {
        for (pj, rj) in ensemble {
            rhs += pi * pj * ri.fidelity(rj)?.sqrt();
        }
    }
    Ok((max_lhs, rhs.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{random_density, random_unitary};
    use crate::qcore::Layout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_needs_no_decoding() {
        let id = QuantumChannel::identity(Layout::single("A", 2));
        let fit = find_best_decoder(&id, &id).unwrap();
        assert!(fit.achieved_error < 1e-9);
    }

    #[test]
    fn unitary_is_inverted() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random_unitary(3, &mut rng);
        let l = Layout::single("A", 3);
        let n = QuantumChannel::unitary(u.clone(), l.clone()).unwrap();
        let fit = find_best_decoder(&n, &QuantumChannel::identity(l)).unwrap();
        assert!(fit.achieved_error < 1e-8, "{}", fit.achieved_error);
        let k = &fit.decoder.kraus()[0];
        let overlap = (k * &u).trace().norm() / 3.0;
        assert!((overlap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn noisy_channel_fit_is_valid() {
        let l = Layout::single("A", 2);
        let n = QuantumChannel::depolarizing(0.2, l.clone()).unwrap();
        let fit = find_best_decoder(&n, &QuantumChannel::identity(l)).unwrap();
        // Nothing beats doing nothing for depolarizing noise: F = 1 - 3p/4.
        assert!((fit.fidelity - 0.85).abs() < 1e-8);
        assert!(fit.converged);
    }

    #[test]
    fn ensemble_single_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rho = DensityMatrix::new(random_density(2, 2, &mut rng), Layout::single("A", 2)).unwrap();
        let (lhs, rhs) = ensemble_sqrt_fidelity_check(&[(1.0, rho.clone())], &[rho]).unwrap();
        assert!((lhs - 1.0).abs() < 1e-9 && (rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ensemble_orthogonal_pair() {
        let l = Layout::single("A", 2);
        let r0 = DensityMatrix::new(linalg::projector(&linalg::basis(2, 0)), l.clone()).unwrap();
        let r1 = DensityMatrix::new(linalg::projector(&linalg::basis(2, 1)), l.clone()).unwrap();
        let mid = DensityMatrix::maximally_mixed(l);
        let ens = [(0.5, r0.clone()), (0.5, r1.clone())];
        let (lhs, rhs) = ensemble_sqrt_fidelity_check(&ens, &[r0, r1, mid]).unwrap();
        // rhs = sqrt(1/4 + 1/4); the midpoint attains it.
        assert!((rhs - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(lhs <= rhs + 1e-9);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn ensemble_rejects_empty() {
        assert!(ensemble_sqrt_fidelity_check(&[], &[]).is_err());
    }
}
