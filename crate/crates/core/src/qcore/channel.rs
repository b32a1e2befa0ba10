use super::layout::Layout;
use super::linalg::{self, cr, eigh, max_abs_diff, CMatrix, C64};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

pub const CHANNEL_TOL: f64 = 1e-9;

/// Name of the reference factor appended by [`QuantumChannel::choi`].
pub const CHOI_REF: &str = "choi_ref";

/// Environment factor name used by purifications and complements.
pub const ENV: &str = "env";

/// CPTP map in operator-sum form.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    input: Layout,
    output: Layout,
}

/// Matrix with orthonormal columns between two layouts.
#[derive(Clone, Debug)]
pub struct Isometry {
    matrix: CMatrix,
    input: Layout,
    output: Layout,
}

impl Isometry {
    pub fn new(matrix: CMatrix, input: Layout, output: Layout) -> Result<Self> {
        if matrix.nrows() != output.dim() || matrix.ncols() != input.dim() {
            return Err(Error::DimensionMismatch(format!(
                "isometry {}x{} for {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                input,
                output
            )));
        }
        let gram = matrix.adjoint() * &matrix;
        if max_abs_diff(&gram, &linalg::identity(input.dim())) > CHANNEL_TOL {
            return Err(Error::InvalidChannel("columns not orthonormal".into()));
        }
        Ok(Isometry {
            matrix,
            input,
            output,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input(&self) -> &Layout {
        &self.input
    }

    pub fn output(&self) -> &Layout {
        &self.output
    }

    /// Channel obtained by tracing out the listed output factors.
    pub fn trace_out(&self, traced: &[&str]) -> Result<QuantumChannel> {
        let pos = self.output.positions(traced)?;
        let keep: Vec<usize> = (0..self.output.len()).filter(|p| !pos.contains(p)).collect();
        let mut perm = keep.clone();
        perm.extend(&pos);
        let dims = self.output.dims();
        let map = super::layout::permutation_map(&dims, &perm);
        let dk: usize = keep.iter().map(|&p| dims[p]).product();
        let de: usize = pos.iter().map(|&p| dims[p]).product();
        let din = self.input.dim();
        let kraus = (0..de)
            .map(|e| CMatrix::from_fn(dk, din, |a, i| self.matrix[(map[a * de + e], i)]))
            .collect();
        QuantumChannel::new(kraus, self.input.clone(), self.output.select(&keep))
    }

    pub fn as_channel(&self) -> QuantumChannel {
        QuantumChannel {
            kraus: vec![self.matrix.clone()],
            input: self.input.clone(),
            output: self.output.clone(),
        }
    }
}

impl QuantumChannel {
    /// Validates shapes and trace preservation within 1e-9.
    pub fn new(kraus: Vec<CMatrix>, input: Layout, output: Layout) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let (din, dout) = (input.dim(), output.dim());
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus {}x{} for {} -> {}",
                    k.nrows(),
                    k.ncols(),
                    input,
                    output
                )));
            }
            linalg::check_finite(k)?;
        }
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &linalg::identity(din));
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!("trace preservation off by {dev:e}")));
        }
        Ok(QuantumChannel {
            kraus,
            input,
            output,
        })
    }

    pub fn identity(layout: Layout) -> Self {
        let d = layout.dim();
        QuantumChannel {
            kraus: vec![linalg::identity(d)],
            input: layout.clone(),
            output: layout,
        }
    }

    pub fn unitary(u: CMatrix, layout: Layout) -> Result<Self> {
        QuantumChannel::new(vec![u], layout.clone(), layout)
    }

    /// rho -> (1-p) rho + p tr(rho) I/d, Kraus operators from the
    /// clock-and-shift basis.
    pub fn depolarizing(p: f64, layout: Layout) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing p={p}")));
        }
        let d = layout.dim();
        let df = d as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = weyl(d, a, b);
                let coef = if a == 0 && b == 0 {
                    (1.0 - p + p / (df * df)).sqrt()
                } else {
                    p.sqrt() / df
                };
                if coef > 0.0 {
                    kraus.push(w * cr(coef));
                }
            }
        }
        QuantumChannel::new(kraus, layout.clone(), layout)
    }

    /// rho -> (1-p) rho + p diag(rho).
    pub fn dephasing(p: f64, layout: Layout) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("dephasing p={p}")));
        }
        let d = layout.dim();
        let mut kraus = Vec::new();
        if p < 1.0 {
            kraus.push(linalg::identity(d) * cr((1.0 - p).sqrt()));
        }
        if p > 0.0 {
            for i in 0..d {
                kraus.push(linalg::projector(&linalg::basis(d, i)) * cr(p.sqrt()));
            }
        }
        QuantumChannel::new(kraus, layout.clone(), layout)
    }

    /// Constant channel rho -> tr(rho) sigma.
    pub fn replacement(sigma: &DensityMatrix, input: Layout) -> Result<Self> {
        let (vals, vecs) = eigh(sigma.entries());
        let din = input.dim();
        let mut kraus = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l <= 1e-15 {
                continue;
            }
            let v = vecs.column(k).into_owned() * cr(l.sqrt());
            for i in 0..din {
                kraus.push(linalg::outer(&v, &linalg::basis(din, i)));
            }
        }
        QuantumChannel::new(kraus, input, sigma.layout().clone())
    }

    /// Prepares a fixed state from nothing (input dimension 1).
    pub fn preparation(sigma: &DensityMatrix) -> Result<Self> {
        QuantumChannel::replacement(sigma, Layout::trivial())
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input(&self) -> &Layout {
        &self.input
    }

    pub fn output(&self) -> &Layout {
        &self.output
    }

    pub fn with_layouts(&self, input: Layout, output: Layout) -> Result<Self> {
        if input.dim() != self.input.dim() || output.dim() != self.output.dim() {
            return Err(Error::DimensionMismatch("relabel channel".into()));
        }
        Ok(QuantumChannel {
            kraus: self.kraus.clone(),
            input,
            output,
        })
    }

    /// Action on an operator over exactly the input space.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let d = self.output.dim();
        let mut out = CMatrix::zeros(d, d);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Applies the channel to the input factors of `rho`, acting as the
    /// identity on the remaining factors. The output factors take the place
    /// of the first input factor in the layout.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = rho.layout();
        let in_names = self.input.names();
        let pos = layout.positions(&in_names)?;
        for (i, s) in self.input.systems().iter().enumerate() {
            if layout.systems()[pos[i]].dim != s.dim {
                return Err(Error::DimensionMismatch(format!("subsystem {}", s.name)));
            }
        }
        let rest: Vec<usize> = (0..layout.len()).filter(|p| !pos.contains(p)).collect();
        let rest_layout = layout.select(&rest);
        for s in self.output.systems() {
            if rest_layout.position(&s.name).is_some() {
                return Err(Error::NameCollision(s.name.clone()));
            }
        }
        let mut perm = pos.clone();
        perm.extend(&rest);
        let arranged = linalg::permute_matrix(rho.entries(), &layout.dims(), &perm);
        let dr = rest_layout.dim();
        let mut out = CMatrix::zeros(self.output.dim() * dr, self.output.dim() * dr);
        for k in &self.kraus {
            let left = apply_left(k, &arranged, dr);
            let both = apply_left(k, &left.adjoint(), dr).adjoint();
            out += both;
        }
        // Current order: outputs then rest. Move outputs to the slot of the
        // first input factor.
        let combined = self.output.concat(&rest_layout)?;
        let first = pos.iter().copied().min().unwrap_or(0);
        let insert_at = rest.iter().filter(|&&r| r < first).count();
        let nout = self.output.len();
        let nrest = rest.len();
        let mut order: Vec<usize> = (nout..nout + insert_at).collect();
        order.extend(0..nout);
        order.extend(nout + insert_at..nout + nrest);
        let final_entries = linalg::permute_matrix(&out, &combined.dims(), &order);
        DensityMatrix::unchecked(final_entries, combined.select(&order))
    }

    /// Normalized Choi state (N (x) id)(Phi+), layout outputs then [`CHOI_REF`].
    pub fn choi(&self) -> DensityMatrix {
        let m = self.choi_matrix();
        let mut layout = self.output.clone();
        layout
            .push(CHOI_REF, self.input.dim())
            .unwrap_or_else(|_| unreachable!("output layouts never use the reserved name"));
        DensityMatrix::unchecked(m, layout).expect("shape fixed by construction")
    }

    /// Normalized Choi matrix in (output, input) index order.
    pub fn choi_matrix(&self) -> CMatrix {
        let (din, dout) = (self.input.dim(), self.output.dim());
        let scale = cr(1.0 / (din as f64).sqrt());
        // Column e of V is vec(K_e); J = V V^dag.
        let v = CMatrix::from_fn(din * dout, self.kraus.len(), |idx, e| {
            self.kraus[e][(idx / din, idx % din)] * scale
        });
        &v * v.adjoint()
    }

    /// Minimal Kraus representation from the Choi spectrum.
    pub fn canonical(&self) -> QuantumChannel {
        let (din, dout) = (self.input.dim(), self.output.dim());
        let j = self.choi_matrix() * cr(din as f64);
        let (vals, vecs) = eigh(&j);
        let cutoff = 1e-13 * vals.first().copied().unwrap_or(1.0).max(1.0);
        let mut kraus = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l <= cutoff {
                continue;
            }
            let s = cr(l.sqrt());
            kraus.push(CMatrix::from_fn(dout, din, |a, i| vecs[(a * din + i, k)] * s));
        }
        // Renormalize away the discarded tail so the result stays trace preserving.
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let (inv, _) = linalg::psd_pinv_sqrt(&sum, 1e-14);
        let kraus = kraus.into_iter().map(|k| k * &inv).collect();
        QuantumChannel {
            kraus,
            input: self.input.clone(),
            output: self.output.clone(),
        }
    }

    /// Drops zero Kraus operators; switches to the canonical form when the
    /// count exceeds d_in * d_out.
    pub fn compressed(&self) -> QuantumChannel {
        let bound = self.input.dim() * self.output.dim();
        let kept: Vec<CMatrix> = self
            .kraus
            .iter()
            .filter(|k| k.iter().any(|z| z.norm() > 1e-15))
            .cloned()
            .collect();
        if kept.len() > bound {
            return self.canonical();
        }
        QuantumChannel {
            kraus: kept,
            input: self.input.clone(),
            output: self.output.clone(),
        }
    }

    /// Stinespring isometry V with V[(a, e), i] = K_e[a, i]; environment factor [`ENV`].
    pub fn purify(&self) -> Isometry {
        let ch = self.compressed();
        let (din, dout, ne) = (ch.input.dim(), ch.output.dim(), ch.kraus.len());
        let v = CMatrix::from_fn(dout * ne, din, |row, i| ch.kraus[row % ne][(row / ne, i)]);
        let mut out = ch.output.clone();
        let env_name = fresh_name(&out, ENV);
        out.push(env_name, ne).expect("fresh name");
        Isometry {
            matrix: v,
            input: ch.input.clone(),
            output: out,
        }
    }

    /// Complement with respect to [`QuantumChannel::purify`]: traces out the
    /// original output and keeps the environment.
    pub fn complementary(&self) -> QuantumChannel {
        let ch = self.compressed();
        let (din, dout, ne) = (ch.input.dim(), ch.output.dim(), ch.kraus.len());
        let kraus = (0..dout)
            .map(|a| CMatrix::from_fn(ne, din, |e, i| ch.kraus[e][(a, i)]))
            .collect();
        QuantumChannel {
            kraus,
            input: ch.input.clone(),
            output: Layout::single(ENV, ne),
        }
    }

    /// `self` applied after `first`.
    pub fn compose_after(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.output.dims() != self.input.dims() {
            return Err(Error::DimensionMismatch(format!(
                "compose {} -> {}",
                first.output, self.input
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Ok(QuantumChannel {
            kraus,
            input: first.input.clone(),
            output: self.output.clone(),
        }
        .compressed())
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        Ok(QuantumChannel {
            kraus,
            input,
            output,
        })
    }

    /// Superoperator matrix acting on row-major vectorized operators.
    pub fn superoperator(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.output.dim().pow(2), self.input.dim().pow(2));
        for k in &self.kraus {
            s += linalg::kron(k, &k.map(|z| z.conj()));
        }
        s
    }
}

/// (K (x) I_dr) m for `m` with rows indexed (i, r), r fastest.
pub(crate) fn apply_left(k: &CMatrix, m: &CMatrix, dr: usize) -> CMatrix {
    let (dout, din) = k.shape();
    let cols = m.ncols();
    let x = CMatrix::from_fn(din, dr * cols, |i, rc| m[(i * dr + rc / cols, rc % cols)]);
    let y = k * x;
    CMatrix::from_fn(dout * dr, cols, |ar, col| y[(ar / dr, (ar % dr) * cols + col)])
}

/// Reconstructs N(rho) from a normalized Choi matrix: d_in tr_in[J (I (x) rho^T)].
pub fn apply_from_choi(choi: &CMatrix, din: usize, dout: usize, rho: &CMatrix) -> CMatrix {
    let rt = rho.transpose();
    let m = choi * linalg::kron(&linalg::identity(dout), &rt);
    linalg::partial_trace(&m, &[dout, din], &[0]) * cr(din as f64)
}

/// (lower, upper) interval for the diamond distance: the raw trace norm of
/// the Choi difference, and d_in times it clamped to 2.
pub fn diamond_distance_bounds(n: &QuantumChannel, m: &QuantumChannel) -> Result<(f64, f64)> {
    if n.input.dims() != m.input.dims() || n.output.dims() != m.output.dims() {
        return Err(Error::DimensionMismatch("diamond distance layouts".into()));
    }
    let lower = linalg::trace_norm(&(n.choi_matrix() - m.choi_matrix()))?;
    let upper = (lower * n.input.dim() as f64).min(2.0).max(lower);
    Ok((lower, upper))
}

/// Generalized Pauli X^a Z^b in dimension d.
pub fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    CMatrix::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            C64::from_polar(1.0, omega * ((b * col) % d) as f64)
        } else {
            cr(0.0)
        }
    })
}

pub fn pauli_x() -> CMatrix {
    weyl(2, 1, 0)
}

pub fn pauli_z() -> CMatrix {
    weyl(2, 0, 1)
}

pub fn hadamard() -> CMatrix {
    let s = cr(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

fn fresh_name(layout: &Layout, base: &str) -> String {
    let mut name = base.to_string();
    let mut i = 0;
    while layout.position(&name).is_some() {
        i += 1;
        name = format!("{base}{i}");
    }
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{random_density, random_isometry, CVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(name: &str) -> Layout {
        Layout::single(name, 2)
    }

    fn random_channel(din: usize, dout: usize, nk: usize, rng: &mut ChaCha8Rng) -> QuantumChannel {
        let v = random_isometry(dout * nk, din, rng);
        let kraus = (0..nk)
            .map(|e| CMatrix::from_fn(dout, din, |a, i| v[(a * nk + e, i)]))
            .collect();
        QuantumChannel::new(kraus, Layout::single("I", din), Layout::single("O", dout)).unwrap()
    }

    #[test]
    fn identity_and_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::new(random_density(2, 2, &mut rng), q("A")).unwrap();
        let id = QuantumChannel::identity(q("A"));
        assert!(id.apply(&rho).unwrap().approx_eq(&rho, 1e-14));
        let dep = QuantumChannel::depolarizing(1.0, q("A")).unwrap();
        let out = dep.apply(&rho).unwrap();
        assert!(out.approx_eq(&DensityMatrix::maximally_mixed(q("A")), 1e-14));
    }

    #[test]
    fn apply_matches_superoperator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = random_channel(3, 2, 4, &mut rng);
        let rho = random_density(3, 3, &mut rng);
        let s = ch.superoperator();
        let vec_in = CVector::from_fn(9, |idx, _| rho[(idx / 3, idx % 3)]);
        let vec_out = &s * vec_in;
        let want = CMatrix::from_fn(2, 2, |a, b| vec_out[a * 2 + b]);
        let got = ch.apply(&DensityMatrix::new(rho, Layout::single("I", 3)).unwrap()).unwrap();
        assert!(max_abs_diff(got.entries(), &want) < 1e-12);
    }

    #[test]
    fn apply_on_subsystem_keeps_rest() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = random_channel(2, 3, 3, &mut rng);
        let l = Layout::new([("X", 2), ("I", 2), ("Y", 2)]).unwrap();
        let rho = DensityMatrix::new(random_density(8, 8, &mut rng), l).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert_eq!(out.layout().names(), vec!["X", "O", "Y"]);
        // Oracle: explicit kron with identities.
        let big: Vec<CMatrix> = ch
            .kraus()
            .iter()
            .map(|k| linalg::kron(&linalg::kron(&linalg::identity(2), k), &linalg::identity(2)))
            .collect();
        let mut want = CMatrix::zeros(12, 12);
        for k in &big {
            want += k * rho.entries() * k.adjoint();
        }
        assert!(max_abs_diff(out.entries(), &want) < 1e-12);
    }

    #[test]
    fn purification_reproduces_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dep = QuantumChannel::depolarizing(0.3, q("A")).unwrap();
        let v = dep.purify();
        assert!(v.output().dim_of(ENV).unwrap() <= 4);
        let back = v.trace_out(&[ENV]).unwrap();
        for _ in 0..20 {
            let rho = DensityMatrix::new(random_density(2, 2, &mut rng), q("A")).unwrap();
            let a = dep.apply(&rho).unwrap();
            let b = back.apply(&rho).unwrap();
            assert!(a.approx_eq(&b, 1e-9));
        }
    }

    #[test]
    fn identity_purifies_trivially() {
        let v = QuantumChannel::identity(q("A")).purify();
        assert_eq!(v.output().dim_of(ENV).unwrap(), 1);
        assert!(max_abs_diff(v.matrix(), &linalg::identity(2)) < 1e-15);
    }

    #[test]
    fn oversized_kraus_lists_are_compressed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = random_channel(2, 2, 9, &mut rng);
        let v = ch.purify();
        assert!(v.output().dim_of(ENV).unwrap() <= 4);
        let back = v.trace_out(&[ENV]).unwrap();
        let (lo, _) = diamond_distance_bounds(&ch, &back).unwrap();
        assert!(lo < 1e-9);
    }

    #[test]
    fn complement_of_identity_is_constant() {
        let c = QuantumChannel::identity(q("A")).complementary();
        assert_eq!(c.output().dim(), 1);
    }

    #[test]
    fn dephasing_complement_carries_bit() {
        let c = QuantumChannel::dephasing(1.0, q("A")).unwrap().complementary();
        let z1 = DensityMatrix::new(linalg::projector(&linalg::basis(2, 1)), q("A")).unwrap();
        let out = c.apply(&z1).unwrap();
        assert!((out.entries()[(1, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn double_complement_choi_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let ch = random_channel(2, 3, 2, &mut rng);
            let cc = ch.complementary().complementary();
            let mut a = ch.choi().eigenvalues();
            let mut b = cc.choi().eigenvalues();
            a.retain(|l| l.abs() > 1e-12);
            b.retain(|l| l.abs() > 1e-12);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn choi_examples() {
        let j = QuantumChannel::identity(q("A")).choi();
        assert!((j.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((j.entries()[(0, 3)].re - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sigma = DensityMatrix::new(random_density(3, 2, &mut rng), Layout::single("S", 3)).unwrap();
        let rep = QuantumChannel::replacement(&sigma, q("A")).unwrap();
        let want = linalg::kron(sigma.entries(), &(linalg::identity(2) * cr(0.5)));
        assert!(max_abs_diff(rep.choi().entries(), &want) < 1e-12);
    }

    #[test]
    fn choi_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ch = random_channel(3, 2, 3, &mut rng);
        let rho = random_density(3, 2, &mut rng);
        let a = ch.apply_matrix(&rho);
        let b = apply_from_choi(&ch.choi_matrix(), 3, 2, &rho);
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn diamond_examples() {
        let id = QuantumChannel::identity(q("A"));
        assert_eq!(diamond_distance_bounds(&id, &id).unwrap(), (0.0, 0.0));
        let x = QuantumChannel::unitary(pauli_x(), q("A")).unwrap();
        let (lo, hi) = diamond_distance_bounds(&id, &x).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        let deph = QuantumChannel::dephasing(1.0, q("A")).unwrap();
        let (lo, hi) = diamond_distance_bounds(&id, &deph).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && hi >= lo);
    }
}
