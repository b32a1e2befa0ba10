use std::collections::{BTreeMap, BTreeSet};

use super::lp::chebyshev_center_l1;
use super::{InputDiagnostic, VerificationReport};
use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::enumerate::{
    cds_decode_successes, enumerate_message_distribution, enumerate_psm_distribution, psm_decode_successes,
    MessageDistribution,
};
use crate::protocol::types::{CdsProtocol, ProtocolKind, PromiseFunction, PsmProtocol};

/// Cap on (inputs x secrets x randomness) enumeration steps.
const MAX_STEPS: u64 = 1 << 32;

fn check_domain(px: u64, py: u64, f: &PromiseFunction) -> Result<()> {
    if px < f.x_size() || py < f.y_size() {
        return Err(Error::DimensionMismatch(format!(
            "protocol domain {px}x{py} smaller than {} domain {}x{}",
            f.name(),
            f.x_size(),
            f.y_size()
        )));
    }
    Ok(())
}

fn check_steps(inputs: usize, per: u64, bits: u32) -> Result<()> {
    let steps = (inputs as u64).saturating_mul(per).saturating_mul(1u64 << bits.min(63));
    if steps > MAX_STEPS {
        return Err(Error::BudgetExceeded(format!("{steps} enumeration steps")));
    }
    Ok(())
}

/// Dense vectors over the union support of several distributions.
fn on_union_support(ds: &[&MessageDistribution]) -> Vec<Vec<f64>> {
    let support: BTreeSet<(u64, u64)> = ds.iter().flat_map(|d| d.counts.keys().copied()).collect();
    ds.iter()
        .map(|d| support.iter().map(|&m| d.probability(m)).collect())
        .collect()
}

fn secret_distributions(p: &CdsProtocol, x: u64, y: u64) -> Result<Vec<MessageDistribution>> {
    (0..p.secret_alphabet)
        .map(|s| enumerate_message_distribution(p, x, y, s))
        .collect()
}

/// Optimal simulator radius at one input: half the L1 distance for a binary
/// secret, the Chebyshev LP otherwise.
pub fn cds_secret_radius(p: &CdsProtocol, x: u64, y: u64) -> Result<f64> {
    let ds = secret_distributions(p, x, y)?;
    if ds.len() == 2 {
        Ok(ds[0].l1(&ds[1]) / 2.0)
    } else {
        let refs: Vec<_> = ds.iter().collect();
        Ok(chebyshev_center_l1(&on_union_support(&refs))?.0)
    }
}

/// The same radius, always through the LP.
pub fn cds_secret_radius_lp(p: &CdsProtocol, x: u64, y: u64) -> Result<f64> {
    let ds = secret_distributions(p, x, y)?;
    let refs: Vec<_> = ds.iter().collect();
    Ok(chebyshev_center_l1(&on_union_support(&refs))?.0)
}

pub fn cds_verify(p: &CdsProtocol, f: &PromiseFunction) -> Result<VerificationReport> {
    cds_verify_with(p, f, Exec::default())
}

pub fn cds_verify_with(p: &CdsProtocol, f: &PromiseFunction, exec: Exec) -> Result<VerificationReport> {
    check_domain(p.x_size, p.y_size, f)?;
    let inputs = f.promise_inputs();
    check_steps(inputs.len(), p.secret_alphabet, p.randomness_bits)?;
    let full = (1u64 << p.randomness_bits) as f64;
    let rows = exec.map(&inputs, |&(x, y, v)| -> Result<InputDiagnostic> {
        if v {
            let mut worst = 0.0f64;
            for s in 0..p.secret_alphabet {
                let ok = cds_decode_successes(p, x, y, s)?;
                worst = worst.max(1.0 - ok as f64 / full);
            }
            Ok(InputDiagnostic::new(x, y, v).with("decode_failure", worst))
        } else {
            Ok(InputDiagnostic::new(x, y, v).with("simulator_radius", cds_secret_radius(p, x, y)?))
        }
    });
    let rows = collect_results(rows)?;
    let mut rep = VerificationReport::new(&p.name, ProtocolKind::Cds, f.name(), f.n(), p.cost());
    rep.epsilon_hat = max_of(&rows, "decode_failure");
    let delta = max_of(&rows, "simulator_radius");
    rep.delta_hat_lower = delta;
    rep.delta_hat_upper = delta;
    rep.metric("secret_alphabet", p.secret_alphabet as f64);
    rep.metric("randomness_bits", p.randomness_bits as f64);
    rep.notes.push(format!(
        "exhaustive over {} promise inputs and 2^{} randomness values",
        rows.len(),
        p.randomness_bits
    ));
    rep.notes.push(if p.secret_alphabet == 2 {
        "simulator radius = half L1 distance between the two secret distributions".into()
    } else {
        "simulator radius from the L1 Chebyshev-center linear program".into()
    });
    rep.inputs = rows;
    Ok(rep)
}

fn max_of(rows: &[InputDiagnostic], key: &str) -> f64 {
    rows.iter()
        .filter_map(|r| r.distances.get(key).copied())
        .fold(0.0, f64::max)
}

pub fn psm_verify(p: &PsmProtocol, f: &PromiseFunction) -> Result<VerificationReport> {
    psm_verify_with(p, f, Exec::default())
}

/// The simulator sees f(x, y) only: one L1 Chebyshev center per value class.
pub fn psm_verify_with(p: &PsmProtocol, f: &PromiseFunction, exec: Exec) -> Result<VerificationReport> {
    check_domain(p.x_size, p.y_size, f)?;
    let inputs = f.promise_inputs();
    check_steps(inputs.len(), 2, p.randomness_bits)?;
    let full = (1u64 << p.randomness_bits) as f64;
    let per = exec.map(&inputs, |&(x, y, v)| -> Result<(MessageDistribution, f64)> {
        let d = enumerate_psm_distribution(p, x, y)?;
        let ok = psm_decode_successes(p, x, y, v as u64)?;
        Ok((d, 1.0 - ok as f64 / full))
    });
    let per = collect_results(per)?;

    let mut rows: Vec<InputDiagnostic> = inputs
        .iter()
        .zip(&per)
        .map(|(&(x, y, v), (_, fail))| InputDiagnostic::new(x, y, v).with("decode_failure", *fail))
        .collect();
    let mut radius = BTreeMap::new();
    for value in [false, true] {
        let idx: Vec<usize> = (0..inputs.len()).filter(|&i| inputs[i].2 == value).collect();
        if idx.is_empty() {
            continue;
        }
        let ds: Vec<&MessageDistribution> = idx.iter().map(|&i| &per[i].0).collect();
        let dense = on_union_support(&ds);
        let (r, center) = chebyshev_center_l1(&dense)?;
        for (&i, q) in idx.iter().zip(&dense) {
            let dist: f64 = q.iter().zip(&center).map(|(a, b)| (a - b).abs()).sum();
            rows[i].distances.insert("center_distance".into(), dist);
        }
        radius.insert(value, r);
    }

    let mut rep = VerificationReport::new(&p.name, ProtocolKind::Psm, f.name(), f.n(), p.cost());
    rep.epsilon_hat = max_of(&rows, "decode_failure");
    let delta = radius.values().copied().fold(0.0, f64::max);
    rep.delta_hat_lower = delta;
    rep.delta_hat_upper = delta;
    for (v, r) in &radius {
        rep.metric(&format!("class_radius_{}", *v as u8), *r);
    }
    rep.notes.push(format!(
        "exhaustive over {} promise inputs; per-value simulators from the L1 Chebyshev-center linear program",
        rows.len()
    ));
    rep.inputs = rows;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{and_cds, and_cds_with_secret, ip_psm, neq_cds};

    #[test]
    fn neq_is_perfect() {
        let r = cds_verify(&neq_cds(2).unwrap(), &PromiseFunction::neq(2)).unwrap();
        assert_eq!((r.epsilon_hat, r.delta_hat_upper), (0.0, 0.0));
        assert_eq!(r.inputs.len(), 16);
    }

    #[test]
    fn clear_secret_leaks_fully() {
        let p = CdsProtocol::new("clear", 1, (2, 2), 0, 2, (1, 0), |_, s, _| s, |_, _| 0, |ma, _, _, _| ma);
        let r = cds_verify(&p, &PromiseFunction::constant(1, false)).unwrap();
        assert_eq!(r.delta_hat_upper, 1.0);
        assert!((cds_secret_radius_lp(&p, 0, 0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn and_variants_perfect() {
        let r = cds_verify(&and_cds(), &PromiseFunction::and()).unwrap();
        assert_eq!((r.epsilon_hat, r.delta_hat_upper), (0.0, 0.0));
        let r = cds_verify(&and_cds_with_secret(2).unwrap(), &PromiseFunction::and()).unwrap();
        assert!(r.epsilon_hat == 0.0 && r.delta_hat_upper < 1e-9);
    }

    #[test]
    fn ip_psm_perfect() {
        let r = psm_verify(&ip_psm(2).unwrap(), &PromiseFunction::inner_product(2)).unwrap();
        assert_eq!(r.epsilon_hat, 0.0);
        assert!(r.delta_hat_upper < 1e-9);
    }

    #[test]
    fn echo_psm_leaks() {
        // m_A = x on a constant function: two distinct point masses, radius 1.
        let p = PsmProtocol::new("echo", 1, (2, 2), 0, (1, 0), |x, _| x, |_, _| 0, |_, _| 0);
        let r = psm_verify(&p, &PromiseFunction::constant(1, false)).unwrap();
        assert!((r.delta_hat_upper - 1.0).abs() < 1e-9);
        let c = PsmProtocol::new("const", 1, (2, 2), 0, (0, 0), |_, _| 0, |_, _| 0, |_, _| 0);
        let r = psm_verify(&c, &PromiseFunction::constant(1, false)).unwrap();
        assert_eq!((r.epsilon_hat, r.delta_hat_upper), (0.0, 0.0));
    }

    #[test]
    fn noisy_cds_error_is_exact() {
        // Referee flips the secret when r = 0 of 4: error exactly 1/4.
        let p = CdsProtocol::new(
            "noisy",
            1,
            (2, 2),
            2,
            2,
            (3, 2),
            |_, s, r| (s << 2) | r,
            |_, r| r,
            |ma, _, mb, _| (ma >> 2) ^ (mb == 0) as u64,
        );
        let r = cds_verify(&p, &PromiseFunction::constant(1, true)).unwrap();
        assert_eq!(r.epsilon_hat, 0.25);
    }
}
