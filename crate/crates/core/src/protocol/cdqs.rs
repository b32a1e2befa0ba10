//! Quantum protocols as channel families over a shared resource state.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::types::{ceil_log2, CdsProtocol, CostReport, ProtocolDescriptor, ProtocolKind};
use crate::error::{Error, Result};
use crate::qcore::channel::{weyl, CHOI_REF};
use crate::qcore::layout::{permutation_map, Layout};
use crate::qcore::linalg::{self, cr, CMatrix, CVector};
use crate::qcore::{DensityMatrix, QuantumChannel, StateVector};

pub const Q: &str = "Q";
pub const QBAR: &str = "Qbar";
pub const L: &str = "L";
pub const R: &str = "R";
pub const MA: &str = "MA";
pub const MB: &str = "MB";

/// Largest combined dimension d_Q * d_MA * d_MB accepted by combinators.
pub const MAX_CDQS_DIM: usize = 1 << 14;

type ChannelFamily = dyn Fn(u64) -> Result<QuantumChannel> + Send + Sync;
type DecoderFamily = dyn Fn(u64, u64) -> Result<QuantumChannel> + Send + Sync;

/// CDQS: Alice maps (Q, L) to M_A, Bob maps R to M_B, the referee decodes
/// (M_A, M_B) to Q knowing (x, y).
#[derive(Clone)]
pub struct CdqsProtocol {
    pub name: String,
    pub n: usize,
    pub x_size: u64,
    pub y_size: u64,
    pub d_q: usize,
    resource: StateVector,
    alice: Arc<ChannelFamily>,
    bob: Arc<ChannelFamily>,
    decoder: Arc<DecoderFamily>,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl fmt::Debug for CdqsProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CdqsProtocol({}, n={}, d_Q={})", self.name, self.n, self.d_q)
    }
}

impl CdqsProtocol {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: usize,
        (x_size, y_size): (u64, u64),
        d_q: usize,
        resource: StateVector,
        alice: impl Fn(u64) -> Result<QuantumChannel> + Send + Sync + 'static,
        bob: impl Fn(u64) -> Result<QuantumChannel> + Send + Sync + 'static,
        decoder: impl Fn(u64, u64) -> Result<QuantumChannel> + Send + Sync + 'static,
    ) -> Result<Self> {
        if resource.layout().names() != [L, R] {
            return Err(Error::InvalidArgument(format!(
                "resource layout must be [L, R], got {}",
                resource.layout()
            )));
        }
        let p = CdqsProtocol {
            name: name.into(),
            n,
            x_size,
            y_size,
            d_q,
            resource,
            alice: Arc::new(alice),
            bob: Arc::new(bob),
            decoder: Arc::new(decoder),
            params: BTreeMap::new(),
        };
        p.alice_channel(0)?;
        p.bob_channel(0)?;
        Ok(p)
    }

    pub fn resource(&self) -> &StateVector {
        &self.resource
    }

    pub fn d_l(&self) -> usize {
        self.resource.layout().systems()[0].dim
    }

    pub fn d_r(&self) -> usize {
        self.resource.layout().systems()[1].dim
    }

    /// Alice's channel (Q, L) -> M_A.
    pub fn alice_channel(&self, x: u64) -> Result<QuantumChannel> {
        if x >= self.x_size {
            return Err(Error::InvalidArgument(format!("x={x} out of range")));
        }
        let ch = (self.alice)(x)?;
        if ch.input().names() != [Q, L]
            || ch.input().dims() != [self.d_q, self.d_l()]
            || ch.output().names() != [MA]
        {
            return Err(Error::DimensionMismatch(format!(
                "Alice channel {} -> {}",
                ch.input(),
                ch.output()
            )));
        }
        Ok(ch)
    }

    /// Bob's channel R -> M_B.
    pub fn bob_channel(&self, y: u64) -> Result<QuantumChannel> {
        if y >= self.y_size {
            return Err(Error::InvalidArgument(format!("y={y} out of range")));
        }
        let ch = (self.bob)(y)?;
        if ch.input().names() != [R] || ch.input().dim() != self.d_r() || ch.output().names() != [MB] {
            return Err(Error::DimensionMismatch(format!(
                "Bob channel {} -> {}",
                ch.input(),
                ch.output()
            )));
        }
        Ok(ch)
    }

    /// Referee's decoder (M_A, M_B) -> Q.
    pub fn decoder_channel(&self, x: u64, y: u64) -> Result<QuantumChannel> {
        let ch = (self.decoder)(x, y)?;
        if ch.output().names() != [Q] || ch.output().dim() != self.d_q {
            return Err(Error::DimensionMismatch(format!("decoder output {}", ch.output())));
        }
        Ok(ch)
    }

    /// The channel Q -> (M_A, M_B) implemented jointly at inputs (x, y).
    pub fn combined_channel(&self, x: u64, y: u64) -> Result<QuantumChannel> {
        let a = self.alice_channel(x)?.compressed();
        let b = self.bob_channel(y)?.compressed();
        let (dq, dl, dr) = (self.d_q, self.d_l(), self.d_r());
        let dma = a.output().dim();
        let dmb = b.output().dim();
        let psi = CMatrix::from_fn(dl, dr, |l, r| self.resource.amplitudes()[l * dr + r]);
        let mut kraus = Vec::new();
        for ak in a.kraus() {
            // C[(ma, q), r] = sum_l A[ma, (q, l)] psi[l, r]
            let c = CMatrix::from_fn(dma * dq, dr, |row, r| {
                let (ma, q) = (row / dq, row % dq);
                let mut s = cr(0.0);
                for l in 0..dl {
                    s += ak[(ma, q * dl + l)] * psi[(l, r)];
                }
                s
            });
            for bk in b.kraus() {
                let t = &c * bk.transpose();
                let k = CMatrix::from_fn(dma * dmb, dq, |row, q| t[((row / dmb) * dq + q, row % dmb)]);
                if k.iter().any(|z| z.norm() > 1e-15) {
                    kraus.push(k);
                }
            }
        }
        let out = Layout::new([(MA, dma), (MB, dmb)])?;
        Ok(QuantumChannel::new(kraus, Layout::single(Q, dq), out)?.compressed())
    }

    pub fn descriptor(&self) -> Result<ProtocolDescriptor> {
        let mut d = ProtocolDescriptor::new(ProtocolKind::Cdqs, self.n, self.name.clone());
        d.params = self.params.clone();
        d.cost = protocol_cost(self)?;
        Ok(d)
    }
}

/// Output state on (M_A, M_B) for a secret state on Q.
pub fn run_cdqs(p: &CdqsProtocol, x: u64, y: u64, secret: &DensityMatrix) -> Result<DensityMatrix> {
    if secret.dim() != p.d_q {
        return Err(Error::DimensionMismatch(format!(
            "secret dimension {} vs d_Q {}",
            secret.dim(),
            p.d_q
        )));
    }
    let secret = secret.relabel(Layout::single(Q, p.d_q))?;
    p.combined_channel(x, y)?.apply(&secret)
}

/// (N^{x,y} (x) id)(Phi+) on (Qbar, M_A, M_B). This is the Choi state of
/// the combined channel with the reference renamed.
pub fn mid_protocol_state(p: &CdqsProtocol, x: u64, y: u64) -> Result<DensityMatrix> {
    let choi = p.combined_channel(x, y)?.choi();
    let layout = choi.layout().rename(CHOI_REF, QBAR)?;
    choi.relabel(layout)?.reorder(&[QBAR, MA, MB])
}

/// Communication and entanglement, maximized over inputs.
pub fn protocol_cost(p: &CdqsProtocol) -> Result<CostReport> {
    let mut qa = 0;
    for x in 0..p.x_size {
        qa = qa.max(ceil_log2(p.alice_channel(x)?.output().dim() as u64));
    }
    let mut qb = 0;
    for y in 0..p.y_size {
        qb = qb.max(ceil_log2(p.bob_channel(y)?.output().dim() as u64));
    }
    Ok(CostReport {
        classical_bits: 0,
        qubits: qa + qb,
        random_bits: 0,
        ebits: ceil_log2(p.d_l() as u64),
    })
}

/// Regroups the input factors of a Kraus operator: new factor j is old
/// factor `perm[j]`, so column j of the result is column map[j] of `k`.
fn permute_input(k: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_map(dims, perm);
    CMatrix::from_fn(k.nrows(), k.ncols(), |a, j| k[(a, map[j])])
}

fn kron_power(ch: &QuantumChannel, k: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = ch.kraus().to_vec();
    for _ in 1..k {
        let mut next = Vec::with_capacity(out.len() * ch.kraus().len());
        for a in &out {
            for b in ch.kraus() {
                next.push(linalg::kron(a, b));
            }
        }
        out = next;
    }
    out
}

/// k independent copies run side by side on a secret of dimension d_Q^k.
pub fn parallel_repeat(p: &CdqsProtocol, k: usize) -> Result<CdqsProtocol> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k == 1 {
        return Ok(p.clone());
    }
    let a0 = p.alice_channel(0)?;
    let b0 = p.bob_channel(0)?;
    let per = p.d_q * a0.output().dim() * b0.output().dim();
    let total = per.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total > MAX_CDQS_DIM {
        return Err(Error::BudgetExceeded(format!("parallel_repeat dimension {total}")));
    }
    let ku = k as u32;
    let (dq, dl, dr) = (p.d_q, p.d_l(), p.d_r());

    // Resource: (L1 R1 L2 R2 ...) -> (L1..Lk R1..Rk).
    let mut amp = p.resource.amplitudes().clone();
    for _ in 1..k {
        amp = linalg::kron_vec(&amp, p.resource.amplitudes());
    }
    let pair_dims: Vec<usize> = (0..k).flat_map(|_| [dl, dr]).collect();
    let lr_perm: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
    let amp = linalg::permute_vector(&amp, &pair_dims, &lr_perm);
    let resource = StateVector::new(
        amp,
        Layout::new([(L, dl.pow(ku)), (R, dr.pow(ku))])?,
    )?;

    let inner = p.clone();
    let alice = move |x: u64| -> Result<QuantumChannel> {
        let ch = inner.alice_channel(x)?.compressed();
        let dma = ch.output().dim();
        let kraus = kron_power(&ch, k);
        // Kronecker input order is (Q1 L1 Q2 L2 ...); regroup as (Q1..Qk L1..Lk).
        let dims: Vec<usize> = (0..k).flat_map(|_| [dq, dl]).collect();
        let perm: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
        let kraus = kraus.iter().map(|m| permute_input(m, &dims, &perm)).collect();
        QuantumChannel::new(
            kraus,
            Layout::new([(Q, dq.pow(ku)), (L, dl.pow(ku))])?,
            Layout::single(MA, dma.pow(ku)),
        )
    };
    let inner = p.clone();
    let bob = move |y: u64| -> Result<QuantumChannel> {
        let ch = inner.bob_channel(y)?.compressed();
        let dmb = ch.output().dim();
        QuantumChannel::new(
            kron_power(&ch, k),
            Layout::single(R, dr.pow(ku)),
            Layout::single(MB, dmb.pow(ku)),
        )
    };
    let inner = p.clone();
    let decoder = move |x: u64, y: u64| -> Result<QuantumChannel> {
        let ch = inner.decoder_channel(x, y)?.compressed();
        let dims_in = ch.input().dims();
        if dims_in.len() != 2 {
            return Err(Error::DimensionMismatch("decoder input must be [MA, MB]".into()));
        }
        let (dma, dmb) = (dims_in[0], dims_in[1]);
        let kraus = kron_power(&ch, k);
        let dims: Vec<usize> = (0..k).flat_map(|_| [dma, dmb]).collect();
        let perm: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
        let kraus = kraus.iter().map(|m| permute_input(m, &dims, &perm)).collect();
        QuantumChannel::new(
            kraus,
            Layout::new([(MA, dma.pow(ku)), (MB, dmb.pow(ku))])?,
            Layout::single(Q, dq.pow(ku)),
        )
    };
    let mut out = CdqsProtocol::new(
        format!("{}^{k}", p.name),
        p.n,
        (p.x_size, p.y_size),
        dq.pow(ku),
        resource,
        alice,
        bob,
        decoder,
    )?;
    out.params = p.params.clone();
    out.params.insert("parallel_copies".into(), (k as u64).into());
    Ok(out)
}

/// Quantum one-time pad keyed by a classical CDS over 2-bit secrets.
///
/// Shared randomness r is held as the maximally correlated state
/// sum_r |r>|r> / sqrt(2^R). Alice draws a private key (k1, k2), applies
/// X^k1 Z^k2 to Q and sends Q together with the key-CDS message; Bob sends
/// his key-CDS message. The referee decodes the key and undoes the pad.
pub fn classical_to_quantum_lift(key_cds: &CdsProtocol) -> Result<CdqsProtocol> {
    if key_cds.secret_alphabet != 4 {
        return Err(Error::Precondition("key CDS must hide 2-bit secrets".into()));
    }
    if key_cds.randomness_bits > 12 {
        return Err(Error::BudgetExceeded("lift needs at most 12 randomness bits".into()));
    }
    let nr = 1usize << key_cds.randomness_bits;
    let amp = CVector::from_fn(nr * nr, |i, _| {
        if i / nr == i % nr {
            cr(1.0 / (nr as f64).sqrt())
        } else {
            cr(0.0)
        }
    });
    let resource = StateVector::new(amp, Layout::new([(L, nr), (R, nr)])?)?;
    let da = 1usize << key_cds.message_a_bits;
    let db = 1usize << key_cds.message_b_bits;
    let pads: Vec<CMatrix> = (0..4).map(pad_operator).collect();

    let cds = key_cds.clone();
    let pads_a = pads.clone();
    let alice = move |x: u64| -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(4 * nr);
        for key in 0..4u64 {
            let p = &pads_a[key as usize];
            for r in 0..nr {
                let ma = cds.message_a(x, key, r as u64) as usize;
                // K[(q', ma'), (q, r')] = 1/2 P[q', q] [ma' = ma][r' = r]
                let k = CMatrix::from_fn(2 * da, 2 * nr, |row, col| {
                    let (qo, mo) = (row / da, row % da);
                    let (qi, ri) = (col / nr, col % nr);
                    if mo == ma && ri == r {
                        p[(qo, qi)] * cr(0.5)
                    } else {
                        cr(0.0)
                    }
                });
                kraus.push(k);
            }
        }
        QuantumChannel::new(
            kraus,
            Layout::new([(Q, 2), (L, nr)])?,
            Layout::single(MA, 2 * da),
        )
    };
    let cds = key_cds.clone();
    let bob = move |y: u64| -> Result<QuantumChannel> {
        let kraus = (0..nr)
            .map(|r| {
                let mb = cds.message_b(y, r as u64) as usize;
                let mut k = CMatrix::zeros(db, nr);
                k[(mb, r)] = cr(1.0);
                k
            })
            .collect();
        QuantumChannel::new(kraus, Layout::single(R, nr), Layout::single(MB, db))
    };
    let cds = key_cds.clone();
    let decoder = move |x: u64, y: u64| -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(da * db);
        for ma in 0..da {
            for mb in 0..db {
                let key = cds.decode(ma as u64, x, mb as u64, y) & 3;
                let undo = pads[key as usize].adjoint();
                // K[q', ((q, ma'), mb')] = P^dag[q', q] [ma' = ma][mb' = mb]
                let k = CMatrix::from_fn(2, 2 * da * db, |qo, col| {
                    let (q, rest) = (col / (da * db), col % (da * db));
                    if rest == ma * db + mb {
                        undo[(qo, q)]
                    } else {
                        cr(0.0)
                    }
                });
                kraus.push(k);
            }
        }
        QuantumChannel::new(
            kraus,
            Layout::new([(MA, 2 * da), (MB, db)])?,
            Layout::single(Q, 2),
        )
    };
    let mut p = CdqsProtocol::new(
        format!("lift({})", key_cds.name),
        key_cds.n,
        (key_cds.x_size, key_cds.y_size),
        2,
        resource,
        alice,
        bob,
        decoder,
    )?;
    p.params = key_cds.params.clone();
    p.params.insert("key_cds".into(), key_cds.name.clone().into());
    Ok(p)
}

/// X^k1 Z^k2 with key = 2 k1 + k2.
pub fn pad_operator(key: u64) -> CMatrix {
    weyl(2, ((key >> 1) & 1) as usize, (key & 1) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Alice forwards Q; no resource, Bob sends nothing.
    fn forwarding() -> CdqsProtocol {
        let res = StateVector::new(CVector::from_element(1, cr(1.0)), Layout::new([(L, 1), (R, 1)]).unwrap()).unwrap();
        CdqsProtocol::new(
            "forward",
            1,
            (2, 2),
            2,
            res,
            |_| QuantumChannel::new(vec![linalg::identity(2)], Layout::new([(Q, 2), (L, 1)])?, Layout::single(MA, 2)),
            |_| QuantumChannel::new(vec![linalg::identity(1)], Layout::single(R, 1), Layout::single(MB, 1)),
            |_, _| QuantumChannel::new(vec![linalg::identity(2)], Layout::new([(MA, 2), (MB, 1)])?, Layout::single(Q, 2)),
        )
        .unwrap()
    }

    #[test]
    fn forwarding_output_is_secret() {
        let p = forwarding();
        let secret = DensityMatrix::new(linalg::projector(&linalg::basis(2, 1)), Layout::single("S", 2)).unwrap();
        let out = run_cdqs(&p, 0, 0, &secret).unwrap();
        assert!((out.entries()[(1, 1)].re - 1.0).abs() < 1e-14);
        let mid = mid_protocol_state(&p, 0, 0).unwrap();
        let phi = StateVector::max_entangled(QBAR, MA, 2).unwrap().to_density();
        assert!(linalg::max_abs_diff(mid.entries(), phi.entries()) < 1e-14);
        let c = protocol_cost(&p).unwrap();
        assert_eq!((c.qubits, c.ebits), (1, 0));
    }

    #[test]
    fn repeat_scales_dimensions() {
        let p = forwarding();
        let p2 = parallel_repeat(&p, 2).unwrap();
        assert_eq!(p2.d_q, 4);
        assert_eq!(protocol_cost(&p2).unwrap().qubits, 2);
        let mid = mid_protocol_state(&p2, 1, 1).unwrap();
        assert_eq!(mid.dim(), 16);
        assert!(parallel_repeat(&p, 0).is_err());
    }

    #[test]
    fn pad_operators_are_paulis() {
        let x = pad_operator(2);
        let z = pad_operator(1);
        assert!(linalg::max_abs_diff(&x, &crate::qcore::channel::pauli_x()) < 1e-15);
        assert!(linalg::max_abs_diff(&z, &crate::qcore::channel::pauli_z()) < 1e-15);
    }
}
