use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of tensor factors.
///
/// Flat indices are row-major over the factors: the last-listed subsystem is
/// the fastest-varying digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Layout {
    systems: Vec<Subsystem>,
}

impl Layout {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out = Layout::default();
        for (name, dim) in systems {
            out.push(name, dim)?;
        }
        Ok(out)
    }

    pub fn single(name: impl Into<String>, dim: usize) -> Self {
        Layout {
            systems: vec![Subsystem {
                name: name.into(),
                dim,
            }],
        }
    }

    /// The layout with no factors (total dimension 1).
    pub fn trivial() -> Self {
        Layout::default()
    }

    pub fn push(&mut self, name: impl Into<String>, dim: usize) -> Result<()> {
        let name = name.into();
        if dim == 0 {
            return Err(Error::DimensionMismatch(format!("subsystem {name} has dimension 0")));
        }
        if self.position(&name).is_some() {
            return Err(Error::NameCollision(name));
        }
        self.systems.push(Subsystem { name, dim });
        Ok(())
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        self.position(name)
            .map(|p| self.systems[p].dim)
            .ok_or_else(|| Error::UnknownSubsystem(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.position(n).ok_or_else(|| Error::UnknownSubsystem(n.to_string())))
            .collect()
    }

    /// Concatenation; fails on a shared name.
    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut out = self.clone();
        for s in &other.systems {
            out.push(s.name.clone(), s.dim)?;
        }
        Ok(out)
    }

    pub fn select(&self, positions: &[usize]) -> Layout {
        Layout {
            systems: positions.iter().map(|&p| self.systems[p].clone()).collect(),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Layout> {
        let pos = self
            .position(from)
            .ok_or_else(|| Error::UnknownSubsystem(from.to_string()))?;
        if from != to && self.position(to).is_some() {
            return Err(Error::NameCollision(to.to_string()));
        }
        let mut out = self.clone();
        out.systems[pos].name = to.to_string();
        Ok(out)
    }

    /// Merge the whole layout into one factor.
    pub fn fused(&self, name: impl Into<String>) -> Layout {
        Layout::single(name, self.dim())
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .systems
            .iter()
            .map(|s| format!("{}:{}", s.name, s.dim))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// For a tensor with factor dimensions `dims`, reordered so that new factor
/// `k` is old factor `perm[k]`, return the map new flat index -> old flat index.
pub fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), perm.len());
    let k = dims.len();
    let mut old_strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; k];
    for _ in 0..total {
        let old: usize = (0..k).map(|j| digits[j] * old_strides[perm[j]]).sum();
        map.push(old);
        for j in (0..k).rev() {
            digits[j] += 1;
            if digits[j] < new_dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_rejected() {
        let a = Layout::single("A", 2);
        assert_eq!(a.concat(&a), Err(Error::NameCollision("A".into())));
    }

    #[test]
    fn permutation_swaps_factors() {
        // dims (2,3): old index (i,j) = 3i + j; new order (j,i) has index 2j + i.
        let map = permutation_map(&[2, 3], &[1, 0]);
        for j in 0..3 {
            for i in 0..2 {
                assert_eq!(map[2 * j + i], 3 * i + j);
            }
        }
    }
}
