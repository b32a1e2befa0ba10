use super::layout::Layout;
use super::linalg::{
    self, cr, eigenvalues_h, fidelity_psd, kron, kron_vec, max_abs_diff, CMatrix, CVector,
};
use crate::error::{Error, Result};

pub const STATE_TOL: f64 = 1e-9;

/// Normalized pure state over a named layout.
#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: CVector,
    layout: Layout,
}

impl StateVector {
    pub fn new(amplitudes: CVector, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for layout {}",
                amplitudes.len(),
                layout
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm}")));
        }
        Ok(StateVector { amplitudes, layout })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: CVector, layout: Layout) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        StateVector::new(amplitudes / cr(norm), layout)
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {d}")));
        }
        StateVector::new(linalg::basis(d, index), layout)
    }

    /// sum_i |i>|i> / sqrt(d) on two systems of dimension d.
    pub fn max_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        let layout = Layout::new([(a, d), (b, d)])?;
        let mut v = CVector::zeros(d * d);
        let amp = cr(1.0 / (d as f64).sqrt());
        for i in 0..d {
            v[i * d + i] = amp;
        }
        StateVector::new(v, layout)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(StateVector {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            layout,
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: linalg::projector(&self.amplitudes),
            layout: self.layout.clone(),
        }
    }

    /// Same state with factors listed in the order `names` (a permutation of the layout).
    pub fn reorder(&self, names: &[&str]) -> Result<StateVector> {
        let perm = full_permutation(&self.layout, names)?;
        Ok(StateVector {
            amplitudes: linalg::permute_vector(&self.amplitudes, &self.layout.dims(), &perm),
            layout: self.layout.select(&perm),
        })
    }

    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let pos = self.layout.positions(keep)?;
        let cm = linalg::reshape_pure(&self.amplitudes, &self.layout.dims(), &pos);
        Ok(DensityMatrix {
            entries: &cm * cm.adjoint(),
            layout: self.layout.select(&pos),
        })
    }

    pub fn inner(&self, other: &StateVector) -> Result<nalgebra::Complex<f64>> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::DimensionMismatch("inner product".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Density operator over a named layout.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    entries: CMatrix,
    layout: Layout,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within 1e-9.
    pub fn new(entries: CMatrix, layout: Layout) -> Result<Self> {
        let rho = DensityMatrix::unchecked(entries, layout)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks shape only. Used for intermediate operators such as
    /// quantized states that may sit slightly outside the state space.
    pub fn unchecked(entries: CMatrix, layout: Layout) -> Result<Self> {
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for layout {}",
                entries.nrows(),
                entries.ncols(),
                layout
            )));
        }
        linalg::check_finite(&entries)?;
        Ok(DensityMatrix { entries, layout })
    }

    pub fn validate(&self) -> Result<()> {
        if !linalg::is_hermitian(&self.entries, STATE_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = self.entries.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = eigenvalues_h(&self.entries).last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn maximally_mixed(layout: Layout) -> Self {
        let d = layout.dim();
        DensityMatrix {
            entries: linalg::identity(d) / cr(d as f64),
            layout,
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(DensityMatrix {
            entries: kron(&self.entries, &other.entries),
            layout,
        })
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let pos = self.layout.positions(keep)?;
        Ok(DensityMatrix {
            entries: linalg::partial_trace(&self.entries, &self.layout.dims(), &pos),
            layout: self.layout.select(&pos),
        })
    }

    pub fn reorder(&self, names: &[&str]) -> Result<DensityMatrix> {
        let perm = full_permutation(&self.layout, names)?;
        Ok(DensityMatrix {
            entries: linalg::permute_matrix(&self.entries, &self.layout.dims(), &perm),
            layout: self.layout.select(&perm),
        })
    }

    pub fn relabel(&self, layout: Layout) -> Result<DensityMatrix> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::DimensionMismatch("relabel".into()));
        }
        Ok(DensityMatrix {
            entries: self.entries.clone(),
            layout,
        })
    }

    /// Raw trace norm of the difference (no factor 1/2).
    pub fn trace_distance_raw(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_shape(other)?;
        linalg::trace_norm(&(&self.entries - &other.entries))
    }

    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_shape(other)?;
        Ok(fidelity_psd(&self.entries, &other.entries).clamp(0.0, 1.0))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_h(&self.entries)
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.layout.dims() == other.layout.dims() && max_abs_diff(&self.entries, &other.entries) <= tol
    }

    fn same_shape(&self, other: &DensityMatrix) -> Result<()> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }
}

/// Trace norm of a general square matrix, re-exported for call sites that
/// work with raw operators.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    linalg::trace_norm(m)
}

/// Fidelity of two density matrices; fails on dimension mismatch.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.fidelity(sigma)
}

fn full_permutation(layout: &Layout, names: &[&str]) -> Result<Vec<usize>> {
    if names.len() != layout.len() {
        return Err(Error::InvalidArgument(format!(
            "reorder needs all {} subsystems",
            layout.len()
        )));
    }
    let perm = layout.positions(names)?;
    let mut seen = vec![false; perm.len()];
    for &p in &perm {
        if seen[p] {
            return Err(Error::InvalidArgument("repeated subsystem in reorder".into()));
        }
        seen[p] = true;
    }
    Ok(perm)
}
