//! Promise-NEQ with O(log n) cost: DJ shortening followed by the NEQ CDS on
//! the shortened strings.
//!
//! The referee does not see the measurement results (a, b) directly, yet the
//! NEQ decoder needs a ⊕ b, so each party appends its result to its message.
//! At x = y the pair is (a, a) with a uniform, so this reveals nothing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dj::{bits_of, check_power_of_two, dj_shorten, DjDistribution};
use crate::classical::neq_cds;
use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::enumerate::{cds_decode_successes, enumerate_message_distribution, MessageDistribution};
use crate::protocol::types::{CdsProtocol, CostReport, ProtocolKind};
use crate::verifier::{InputDiagnostic, VerificationReport};

/// Largest n verified class by class (the inputs fit in a u64).
pub const MAX_EXHAUSTIVE_N: usize = 16;

#[derive(Clone, Debug)]
pub struct HybridNeq {
    pub n: usize,
    pub log_n: u32,
    pub inner: CdsProtocol,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub component: String,
    pub amount: u32,
    pub unit: String,
}

/// One row per cost component plus totals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub n: usize,
    pub rows: Vec<CostRow>,
    pub total: CostReport,
}

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,component,amount,unit\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", self.n, r.component, r.amount, r.unit));
        }
        s
    }
}

/// Referee's view: (a, m_A, b, m_B).
pub type View = (u64, u64, u64, u64);

pub fn neq_promise_cdqs(n: usize) -> Result<HybridNeq> {
    let log_n = check_power_of_two(n)?;
    if n > super::dj::MAX_DJ_N {
        return Err(Error::BudgetExceeded(format!("n = {n}")));
    }
    Ok(HybridNeq {
        n,
        log_n,
        inner: neq_cds(log_n)?,
    })
}

impl HybridNeq {
    /// Some(false) when x = y, Some(true) at distance n/2, None otherwise.
    pub fn promise(&self, x: &[bool], y: &[bool]) -> Option<bool> {
        let d = x.iter().zip(y).filter(|(a, b)| a != b).count();
        if d == 0 {
            Some(false)
        } else if 2 * d == self.n {
            Some(true)
        } else {
            None
        }
    }

    fn require(&self, x: &[bool], y: &[bool]) -> Result<bool> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch("input length".into()));
        }
        self.promise(x, y)
            .ok_or_else(|| Error::OutsidePromise("Hamming distance is neither 0 nor n/2".into()))
    }

    pub fn cost_table(&self) -> CostTable {
        let m = self.log_n;
        let c = self.inner.cost();
        let rows = vec![
            CostRow { component: "epr_pairs".into(), amount: m, unit: "ebits".into() },
            CostRow { component: "cds_message_a".into(), amount: self.inner.message_a_bits, unit: "bits".into() },
            CostRow { component: "cds_message_b".into(), amount: self.inner.message_b_bits, unit: "bits".into() },
            CostRow { component: "outcome_disclosure".into(), amount: 2 * m, unit: "bits".into() },
            CostRow { component: "cds_randomness".into(), amount: c.random_bits, unit: "bits".into() },
        ];
        CostTable { n: self.n, rows, total: self.cost() }
    }

    pub fn cost(&self) -> CostReport {
        let c = self.inner.cost();
        CostReport {
            classical_bits: c.classical_bits + 2 * self.log_n,
            qubits: 0,
            random_bits: c.random_bits,
            ebits: self.log_n,
        }
    }

    fn combine(&self, dj: &DjDistribution, cds: &dyn Fn(u64, u64) -> Result<MessageDistribution>) -> Result<BTreeMap<View, f64>> {
        let mut out = BTreeMap::new();
        for (a, b, p) in dj.support(0.0) {
            let d = cds(a, b)?;
            for (&(ma, mb), _) in &d.counts {
                *out.entry((a, ma, b, mb)).or_insert(0.0) += p * d.probability((ma, mb));
            }
        }
        Ok(out)
    }

    /// Exact distribution of the referee's view for secret bit `s`.
    pub fn view_distribution(&self, x: &[bool], y: &[bool], s: u64) -> Result<BTreeMap<View, f64>> {
        let dj = dj_shorten(x, y)?;
        self.combine(&dj, &|a, b| enumerate_message_distribution(&self.inner, a, b, s))
    }

    /// Probability that the referee outputs something other than `s`.
    pub fn failure_probability(&self, x: &[bool], y: &[bool], s: u64) -> Result<f64> {
        let dj = dj_shorten(x, y)?;
        let full = (1u64 << self.inner.randomness_bits) as f64;
        let mut fail = 0.0;
        for (a, b, p) in dj.support(0.0) {
            let ok = cds_decode_successes(&self.inner, a, b, s)?;
            fail += p * (1.0 - ok as f64 / full);
        }
        Ok(fail)
    }

    /// Diagnostics for one promise input, from the full view enumeration.
    pub fn verify_input(&self, x: &[bool], y: &[bool]) -> Result<InputDiagnostic> {
        let v = self.require(x, y)?;
        let (xi, yi) = (to_u64(x), to_u64(y));
        let mut row = InputDiagnostic::new(xi, yi, v);
        if v {
            let f = (0..2).map(|s| self.failure_probability(x, y, s)).collect::<Result<Vec<_>>>()?;
            row.distances.insert("decode_failure".into(), f[0].max(f[1]));
        } else {
            let d0 = self.view_distribution(x, y, 0)?;
            let d1 = self.view_distribution(x, y, 1)?;
            row.distances.insert("simulator_radius".into(), half_l1(&d0, &d1));
        }
        row.distances.insert("pr_equal_outcomes".into(), dj_shorten(x, y)?.diagonal_mass());
        Ok(row)
    }
}

fn to_u64(bits: &[bool]) -> u64 {
    bits.iter()
        .take(64)
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

fn half_l1(p: &BTreeMap<View, f64>, q: &BTreeMap<View, f64>) -> f64 {
    let mut s = 0.0;
    for (k, v) in p {
        s += (v - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, v) in q {
        if !p.contains_key(k) {
            s += v.abs();
        }
    }
    s / 2.0
}

/// All z with popcount 0 or n/2, in increasing order.
fn xor_classes(n: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    for z in 1..1u64 << n {
        if 2 * z.count_ones() as usize == n {
            out.push(z);
        }
    }
    out
}

/// Exhaustive verification over every promise input.
///
/// The DJ distribution depends on (x, y) only through z = x ⊕ y, and the
/// referee's view depends only on that distribution, so one row per z covers
/// every input (x, x ⊕ z). Rows carry x = 0, y = z and a class label.
pub fn hybrid_verify(h: &HybridNeq, exec: Exec) -> Result<VerificationReport> {
    if h.n > MAX_EXHAUSTIVE_N {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive hybrid verification needs n <= {MAX_EXHAUSTIVE_N}"
        )));
    }
    let n = h.n;
    let m = h.log_n;
    let full = (1u64 << h.inner.randomness_bits) as f64;
    // fail[(a, b, s)] and per-(a, b, s) message distributions.
    let mut fail = vec![0.0f64; 2 << (2 * m)];
    let mut dists = Vec::with_capacity(2 << (2 * m));
    for a in 0..1u64 << m {
        for b in 0..1u64 << m {
            for s in 0..2u64 {
                let idx = (((a << m) | b) << 1 | s) as usize;
                fail[idx] = 1.0 - cds_decode_successes(&h.inner, a, b, s)? as f64 / full;
                dists.push(enumerate_message_distribution(&h.inner, a, b, s)?);
            }
        }
    }
    let classes = xor_classes(n);
    let zero = vec![false; n];
    let rows = exec.map(&classes, |&z| -> Result<InputDiagnostic> {
        let zb = bits_of(z, n);
        let dj = dj_shorten(&zero, &zb)?;
        let f = z != 0;
        let mut row = InputDiagnostic::new(0, z, f);
        row.class = Some(format!("xor={z:x}"));
        row.distances.insert("pr_equal_outcomes".into(), dj.diagonal_mass());
        if f {
            let mut worst = 0.0f64;
            for s in 0..2u64 {
                let mut e = 0.0;
                for (a, b, p) in dj.support(0.0) {
                    e += p * fail[(((a << m) | b) << 1 | s) as usize];
                }
                worst = worst.max(e);
            }
            row.distances.insert("decode_failure".into(), worst);
        } else {
            let view = |s: u64| {
                h.combine(&dj, &|a, b| Ok(dists[(((a << m) | b) << 1 | s) as usize].clone()))
            };
            row.distances.insert("simulator_radius".into(), half_l1(&view(0)?, &view(1)?));
        }
        Ok(row)
    });
    let rows = collect_results(rows)?;
    let mut rep = VerificationReport::new(
        &format!("hybrid_neq({n})"),
        ProtocolKind::Cdqs,
        &format!("PROMISE_NEQ_{n}"),
        n,
        h.cost(),
    );
    let max_of = |k: &str| rows.iter().filter_map(|r| r.distances.get(k).copied()).fold(0.0, f64::max);
    rep.epsilon_hat = max_of("decode_failure");
    rep.delta_hat_lower = max_of("simulator_radius");
    rep.delta_hat_upper = rep.delta_hat_lower;
    let diag_equal = rows.iter().filter(|r| !r.f).map(|r| r.distances["pr_equal_outcomes"]).fold(1.0, f64::min);
    let diag_far = rows.iter().filter(|r| r.f).map(|r| r.distances["pr_equal_outcomes"]).fold(0.0, f64::max);
    rep.metric("min_pr_equal_at_x_eq_y", diag_equal);
    rep.metric("max_pr_equal_at_half_distance", diag_far);
    rep.metric("xor_classes", rows.len() as f64);
    rep.metric("promise_inputs", (rows.len() as f64) * (1u64 << n) as f64);
    rep.notes.push("one row per xor class z; the view distribution is identical for every (x, x xor z)".into());
    rep.notes.push("delta: half L1 between the s = 0 and s = 1 view distributions".into());
    rep.inputs = rows;
    Ok(rep)
}

/// Seeded random promise inputs for sizes too large for exhaustion. Half the
/// draws have x = y, half have distance exactly n/2.
pub fn sample_promise_inputs(n: usize, count: usize, seed: u64) -> Result<Vec<(Vec<bool>, Vec<bool>)>> {
    check_power_of_two(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let mut y = x.clone();
        if t % 2 == 1 {
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..n / 2 {
                let j = rng.random_range(i..n);
                idx.swap(i, j);
                y[idx[i]] = !y[idx[i]];
            }
        }
        out.push((x, y));
    }
    Ok(out)
}

/// Per-input verification of explicitly listed inputs.
pub fn hybrid_verify_inputs(h: &HybridNeq, inputs: &[(Vec<bool>, Vec<bool>)], exec: Exec) -> Result<VerificationReport> {
    let rows = collect_results(exec.map(inputs, |(x, y)| h.verify_input(x, y)))?;
    let mut rep = VerificationReport::new(
        &format!("hybrid_neq({})", h.n),
        ProtocolKind::Cdqs,
        &format!("PROMISE_NEQ_{}", h.n),
        h.n,
        h.cost(),
    );
    let max_of = |k: &str| rows.iter().filter_map(|r| r.distances.get(k).copied()).fold(0.0, f64::max);
    rep.epsilon_hat = max_of("decode_failure");
    rep.delta_hat_lower = max_of("simulator_radius");
    rep.delta_hat_upper = rep.delta_hat_lower;
    rep.notes.push(format!("{} listed inputs, each enumerated over outcomes and randomness", rows.len()));
    rep.inputs = rows;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::types::PromiseFunction;

    #[test]
    fn cost_at_sixteen() {
        let h = neq_promise_cdqs(16).unwrap();
        let t = h.cost_table();
        let get = |c: &str| t.rows.iter().find(|r| r.component == c).unwrap().amount;
        assert_eq!(get("epr_pairs"), 4);
        assert_eq!(get("cds_message_a") + get("cds_message_b"), 9);
        assert_eq!(get("outcome_disclosure"), 8);
        assert_eq!(get("cds_randomness"), 8);
        assert_eq!(t.total.classical_bits, 17);
        assert!(t.to_csv().starts_with("n,component"));
    }

    #[test]
    fn class_rows_match_every_input_small_n() {
        for n in [2usize, 4] {
            let h = neq_promise_cdqs(n).unwrap();
            let by_class = hybrid_verify(&h, Exec::Sequential).unwrap();
            let f = PromiseFunction::promise_neq(n);
            let inputs: Vec<_> = f
                .promise_inputs()
                .into_iter()
                .map(|(x, y, _)| (bits_of(x, n), bits_of(y, n)))
                .collect();
            let per_input = hybrid_verify_inputs(&h, &inputs, Exec::Sequential).unwrap();
            assert_eq!(per_input.inputs.len(), f.promise_inputs().len());
            assert_eq!(by_class.epsilon_hat, 0.0);
            assert!(by_class.delta_hat_upper < 1e-12);
            assert!((per_input.epsilon_hat - by_class.epsilon_hat).abs() < 1e-12);
            assert!((per_input.delta_hat_upper - by_class.delta_hat_upper).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_promise_rejected() {
        let h = neq_promise_cdqs(4).unwrap();
        assert!(matches!(
            h.verify_input(&bits_of(0, 4), &bits_of(1, 4)),
            Err(Error::OutsidePromise(_))
        ));
    }

    #[test]
    fn samples_respect_promise() {
        let h = neq_promise_cdqs(64).unwrap();
        for (x, y) in sample_promise_inputs(64, 6, 7).unwrap() {
            assert!(h.promise(&x, &y).is_some());
        }
    }
}
