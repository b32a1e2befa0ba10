//! Boolean Hidden Matching: promise instances and the one-shot PSQM.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::ip_psm;
use crate::error::{Error, Result};
use crate::exec::{collect_results, Exec};
use crate::protocol::enumerate::{enumerate_psm_distribution, MessageDistribution};
use crate::protocol::types::{inner_product, CostReport, ProtocolKind, PsmProtocol};
use crate::verifier::{chebyshev_center_l1, InputDiagnostic, VerificationReport};

/// Largest 2n supported.
pub const MAX_BHM_BITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BhmInstance {
    /// Number of matching edges; x has 2n bits.
    pub n: usize,
    pub x: Vec<bool>,
    pub matching: Vec<(usize, usize)>,
    pub w: Vec<bool>,
    pub promised_value: bool,
}

/// Value under the promise: weight ≥ 2n/3 gives 1, weight < n/3 gives 0.
/// Compared as integers, so n need not be divisible by 3.
pub fn promise_value(n: usize, weight: usize) -> Option<bool> {
    if 3 * weight >= 2 * n {
        Some(true)
    } else if 3 * weight < n {
        Some(false)
    } else {
        None
    }
}

fn to_hex(bits: &[bool]) -> String {
    let v = bits.iter().enumerate().fold(0u64, |a, (i, &b)| a | (b as u64) << i);
    format!("{v:x}")
}

fn from_hex(s: &str, len: usize, line: usize) -> Result<Vec<bool>> {
    let v = u64::from_str_radix(s.trim(), 16).map_err(|e| Error::Parse {
        line,
        message: format!("bad hex {s:?}: {e}"),
    })?;
    if len < 64 && v >> len != 0 {
        return Err(Error::Parse {
            line,
            message: format!("{s} has more than {len} bits"),
        });
    }
    Ok((0..len).map(|i| (v >> i) & 1 == 1).collect())
}

impl BhmInstance {
    /// (Mx ⊕ w)_k = x_i ⊕ x_j ⊕ w_k for the k-th edge (i, j).
    pub fn edge_bits(&self) -> Vec<bool> {
        self.matching
            .iter()
            .zip(&self.w)
            .map(|(&(i, j), &wk)| self.x[i] ^ self.x[j] ^ wk)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.edge_bits().iter().filter(|b| **b).count()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || 2 * n > MAX_BHM_BITS {
            return Err(Error::InvalidArgument(format!("n = {n}")));
        }
        if self.x.len() != 2 * n || self.w.len() != n || self.matching.len() != n {
            return Err(Error::DimensionMismatch("instance lengths".into()));
        }
        let mut seen = vec![false; 2 * n];
        for &(i, j) in &self.matching {
            if i >= 2 * n || j >= 2 * n || i == j || seen[i] || seen[j] {
                return Err(Error::InvalidArgument(format!("({i}, {j}) breaks the perfect matching")));
            }
            seen[i] = true;
            seen[j] = true;
        }
        match promise_value(n, self.weight()) {
            Some(v) if v == self.promised_value => Ok(()),
            Some(_) => Err(Error::InvalidArgument("promised value disagrees with Mx xor w".into())),
            None => Err(Error::OutsidePromise(format!("weight {} of {n}", self.weight()))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "x: {}", to_hex(&self.x));
        let pairs: Vec<String> = self.matching.iter().map(|(i, j)| format!("({i},{j})")).collect();
        let _ = writeln!(s, "matching: {}", pairs.join(" "));
        let _ = writeln!(s, "w: {}", to_hex(&self.w));
        let _ = writeln!(s, "promised_value: {}", self.promised_value as u8);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: ln + 1,
                message: "expected `key: value`".into(),
            })?;
            fields.insert(k.trim(), (ln + 1, v.trim()));
        }
        let get = |k: &str| {
            fields.get(k).copied().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing field {k}"),
            })
        };
        let (ln, v) = get("n")?;
        let n: usize = v.parse().map_err(|_| Error::Parse {
            line: ln,
            message: format!("bad n {v:?}"),
        })?;
        if n == 0 || 2 * n > MAX_BHM_BITS {
            return Err(Error::Parse { line: ln, message: format!("n = {n} out of range") });
        }
        let (ln, v) = get("x")?;
        let x = from_hex(v, 2 * n, ln)?;
        let (ln, v) = get("w")?;
        let w = from_hex(v, n, ln)?;
        let (ln, v) = get("matching")?;
        let mut matching = Vec::new();
        for tok in v.split_whitespace() {
            let inner = tok.trim_start_matches('(').trim_end_matches(')');
            let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse {
                line: ln,
                message: format!("bad pair {tok:?}"),
            })?;
            let parse = |t: &str| {
                t.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: ln,
                    message: format!("bad index in {tok:?}"),
                })
            };
            matching.push((parse(a)?, parse(b)?));
        }
        let (ln, v) = get("promised_value")?;
        let promised_value = match v {
            "0" => false,
            "1" => true,
            _ => return Err(Error::Parse { line: ln, message: format!("bad value {v:?}") }),
        };
        let inst = BhmInstance { n, x, matching, w, promised_value };
        inst.validate()?;
        Ok(inst)
    }
}

/// Random promise instance with a uniformly chosen admissible weight.
pub fn bhm_instance(n: usize, target_value: bool, seed: u64) -> Result<BhmInstance> {
    if n == 0 || 2 * n > MAX_BHM_BITS {
        return Err(Error::InvalidArgument(format!("2n = {} outside 2..={MAX_BHM_BITS}", 2 * n)));
    }
    let weights: Vec<usize> = (0..=n).filter(|&k| promise_value(n, k) == Some(target_value)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = weights[rng.random_range(0..weights.len())];
    build(n, target_value, weight, &mut rng)
}

/// Random instance whose Mx ⊕ w has exactly `weight` ones.
pub fn bhm_instance_with_weight(n: usize, target_value: bool, weight: usize, seed: u64) -> Result<BhmInstance> {
    if n == 0 || 2 * n > MAX_BHM_BITS || weight > n {
        return Err(Error::InvalidArgument(format!("n = {n}, weight = {weight}")));
    }
    if promise_value(n, weight) != Some(target_value) {
        return Err(Error::OutsidePromise(format!("weight {weight} does not give value {target_value}")));
    }
    build(n, target_value, weight, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn build(n: usize, v: bool, weight: usize, rng: &mut ChaCha8Rng) -> Result<BhmInstance> {
    let x: Vec<bool> = (0..2 * n).map(|_| rng.random()).collect();
    let mut idx: Vec<usize> = (0..2 * n).collect();
    idx.shuffle(rng);
    let matching: Vec<(usize, usize)> = idx
        .chunks(2)
        .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
        .collect();
    let mut ones: Vec<usize> = (0..n).collect();
    ones.shuffle(rng);
    let mut target = vec![false; n];
    for &k in &ones[..weight] {
        target[k] = true;
    }
    let w = matching
        .iter()
        .zip(&target)
        .map(|(&(i, j), &t)| x[i] ^ x[j] ^ t)
        .collect();
    let inst = BhmInstance { n, x, matching, w, promised_value: v };
    inst.validate()?;
    Ok(inst)
}

/// One measurement record of the quantum stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhmOutcome {
    pub edge: usize,
    pub i: usize,
    pub j: usize,
    /// Alice's Hadamard-basis result.
    pub k: u64,
    /// Bob's Hadamard-basis result.
    pub l: u64,
    pub prob: f64,
    /// Inner-product PSM inputs (k, 1, 1) and (i ⊕ j, <l, i ⊕ j>, w_ij).
    pub alpha: u64,
    pub beta: u64,
    pub vote: bool,
}

/// The BHM PSQM: log D EPR pairs (D = 2n rounded up to a power of 2), a
/// phase from x, Bob's edge measurement, Hadamards, then the inner-product
/// PSM on the classical results.
#[derive(Clone, Debug)]
pub struct BhmPsqm {
    pub n: usize,
    pub reg_qubits: u32,
    pub inner: PsmProtocol,
}

pub fn bhm_psqm(n: usize) -> Result<BhmPsqm> {
    if n == 0 || 2 * n > MAX_BHM_BITS {
        return Err(Error::InvalidArgument(format!("2n = {} outside 2..={MAX_BHM_BITS}", 2 * n)));
    }
    let reg_qubits = (2 * n).next_power_of_two().trailing_zeros();
    Ok(BhmPsqm {
        n,
        reg_qubits,
        inner: ip_psm(reg_qubits + 2)?,
    })
}

fn wht(v: &mut [i64], offset: usize, stride: usize, len: usize) {
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (p, q) = (offset + j * stride, offset + (j + h) * stride);
                let (u, w) = (v[p], v[q]);
                v[p] = u + w;
                v[q] = u - w;
            }
        }
        h *= 2;
    }
}

/// Exact vote-correctness summary for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteStats {
    pub pr_correct: f64,
    /// Agreeing edges over n, the value the promise guarantees ≥ 2/3.
    pub agreeing_fraction: f64,
    pub edge_probs: Vec<f64>,
    pub identity_violations: usize,
    pub outcomes: usize,
}

impl BhmPsqm {
    pub fn register_dim(&self) -> usize {
        1 << self.reg_qubits
    }

    pub fn cost(&self) -> CostReport {
        let c = self.inner.cost();
        CostReport {
            classical_bits: c.classical_bits,
            qubits: 0,
            random_bits: c.random_bits,
            ebits: self.reg_qubits,
        }
    }

    pub fn psm_inputs(&self, k: u64, l: u64, i: usize, j: usize, wk: bool) -> (u64, u64) {
        let m = self.reg_qubits;
        let b = (i ^ j) as u64;
        let alpha = k | (1 << m) | (1 << (m + 1));
        let beta = b | (inner_product(l, b) << m) | ((wk as u64) << (m + 1));
        (alpha, beta)
    }

    /// The referee's output when the parties use randomness `r`.
    pub fn decode_vote(&self, alpha: u64, beta: u64, r: u64) -> bool {
        let ma = self.inner.message_a(alpha, r);
        let mb = self.inner.message_b(beta, r);
        self.inner.decode(ma, mb) == 1
    }

    /// All outcomes of the quantum stage with nonzero probability.
    ///
    /// The register state is Σ_{i<2n} |i>|i> / √(2n); padded indices carry
    /// zero amplitude, so the projector onto them never fires and is left out.
    /// Amplitudes are integers times 1/(√(2n)·D), which keeps zeros exact.
    pub fn outcomes(&self, inst: &BhmInstance) -> Result<Vec<BhmOutcome>> {
        if inst.n != self.n {
            return Err(Error::DimensionMismatch(format!("instance n = {}, protocol n = {}", inst.n, self.n)));
        }
        inst.validate()?;
        let d = self.register_dim();
        let m = self.reg_qubits;
        let mut psi = vec![0i64; d * d];
        for i in 0..2 * self.n {
            psi[(i << m) | i] = if inst.x[i] { -1 } else { 1 };
        }
        let norm = (2 * self.n * d * d) as f64;
        let mut out = Vec::new();
        for (edge, &(i, j)) in inst.matching.iter().enumerate() {
            // Bob's projector |i><i| + |j><j| on his register.
            let mut v = vec![0i64; d * d];
            for a in 0..d {
                for b in [i, j] {
                    v[(a << m) | b] = psi[(a << m) | b];
                }
            }
            for b in 0..d {
                wht(&mut v, b, d, d);
            }
            for a in 0..d {
                wht(&mut v, a * d, 1, d);
            }
            for (idx, &amp) in v.iter().enumerate() {
                if amp != 0 {
                    let (k, l) = ((idx >> m) as u64, (idx & (d - 1)) as u64);
                    let (alpha, beta) = self.psm_inputs(k, l, i, j, inst.w[edge]);
                    out.push(BhmOutcome {
                        edge,
                        i,
                        j,
                        k,
                        l,
                        prob: (amp * amp) as f64 / norm,
                        alpha,
                        beta,
                        vote: inner_product(alpha, beta) == 1,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn vote_stats(&self, inst: &BhmInstance) -> Result<VoteStats> {
        let outs = self.outcomes(inst)?;
        let bits = inst.edge_bits();
        let mut edge_probs = vec![0.0; self.n];
        let mut pr_correct = 0.0;
        let mut violations = 0;
        let rmax = (1u64 << self.inner.randomness_bits) - 1;
        for o in &outs {
            edge_probs[o.edge] += o.prob;
            let direct = bits[o.edge];
            // Decoded through the PSM at three fixed randomness values.
            let decoded = [0, rmax / 3, rmax].iter().all(|&r| self.decode_vote(o.alpha, o.beta, r) == direct);
            if o.vote != direct || !decoded {
                violations += 1;
            }
            if o.vote == inst.promised_value {
                pr_correct += o.prob;
            }
        }
        let agree = bits.iter().filter(|&&b| b == inst.promised_value).count();
        Ok(VoteStats {
            pr_correct,
            agreeing_fraction: agree as f64 / self.n as f64,
            edge_probs,
            identity_violations: violations,
            outcomes: outs.len(),
        })
    }

    /// Probability that the majority of `t` independent votes is correct
    /// (ties count as errors).
    pub fn majority_correct_probability(&self, inst: &BhmInstance, t: u32) -> Result<f64> {
        let p = self.vote_stats(inst)?.pr_correct;
        let mut acc = 0.0;
        for c in 0..=t {
            if 2 * c > t {
                acc += binom(t, c) * p.powi(c as i32) * (1.0 - p).powi((t - c) as i32);
            }
        }
        Ok(acc)
    }

    /// Vote distribution [Pr(0), Pr(1)] for one instance.
    pub fn vote_distribution(&self, inst: &BhmInstance) -> Result<[f64; 2]> {
        let mut d = [0.0; 2];
        for o in self.outcomes(inst)? {
            d[o.vote as usize] += o.prob;
        }
        Ok(d)
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Inner PSM layer: for each vote value, every (α, β) pair occurring in the
/// given instances must produce the same message distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerLayerReport {
    pub distinct_pairs: usize,
    pub consistent: bool,
    /// Half L1 between a pair's distribution and the first one with the same vote.
    pub max_distance: f64,
}

pub fn inner_layer_check(p: &BhmPsqm, instances: &[BhmInstance], exec: Exec) -> Result<InnerLayerReport> {
    let mut pairs = BTreeSet::new();
    for inst in instances {
        for o in p.outcomes(inst)? {
            pairs.insert((o.alpha, o.beta));
        }
    }
    let pairs: Vec<(u64, u64)> = pairs.into_iter().collect();
    let dists = collect_results(exec.map(&pairs, |&(a, b)| enumerate_psm_distribution(&p.inner, a, b)))?;
    let mut reference: [Option<&MessageDistribution>; 2] = [None, None];
    let mut max_distance = 0.0f64;
    for (&(a, b), d) in pairs.iter().zip(&dists) {
        let v = inner_product(a, b) as usize;
        match reference[v] {
            None => reference[v] = Some(d),
            Some(r) => max_distance = max_distance.max(r.l1(d) / 2.0),
        }
    }
    Ok(InnerLayerReport {
        distinct_pairs: pairs.len(),
        consistent: max_distance == 0.0,
        max_distance,
    })
}

/// Report over a batch of instances.
///
/// ε̂ is the worst single-shot vote error. The referee's view is the inner
/// PSM transcript, which (given the inner-layer check) is a fixed
/// distribution per vote value with disjoint supports, so the optimal
/// simulator radius per f class reduces to the Chebyshev center of the vote
/// distributions.
pub fn bhm_verify(p: &BhmPsqm, instances: &[BhmInstance], exec: Exec) -> Result<VerificationReport> {
    let stats = collect_results(exec.map(instances, |inst| -> Result<(VoteStats, [f64; 2])> {
        Ok((p.vote_stats(inst)?, p.vote_distribution(inst)?))
    }))?;
    let mut rep = VerificationReport::new(
        &format!("bhm_psqm({})", p.n),
        ProtocolKind::Psqm,
        &format!("BHM_{}", 2 * p.n),
        2 * p.n,
        p.cost(),
    );
    let mut rows = Vec::with_capacity(instances.len());
    let mut eps = 0.0f64;
    let mut equality_cases = 0;
    let mut violations = 0;
    let mut edge_dev = 0.0f64;
    for (idx, (inst, (s, _))) in instances.iter().zip(&stats).enumerate() {
        let x = inst.x.iter().enumerate().fold(0u64, |a, (i, &b)| a | (b as u64) << i);
        let mut row = InputDiagnostic::new(x, idx as u64, inst.promised_value);
        row.class = Some(format!("instance={idx}"));
        row.distances.insert("pr_vote_correct".into(), s.pr_correct);
        row.distances.insert("agreeing_fraction".into(), s.agreeing_fraction);
        let dev = s
            .edge_probs
            .iter()
            .map(|q| (q - 1.0 / p.n as f64).abs())
            .fold(0.0, f64::max);
        row.distances.insert("edge_uniformity_deviation".into(), dev);
        edge_dev = edge_dev.max(dev);
        eps = eps.max(1.0 - s.pr_correct);
        if (s.pr_correct * 3.0 - 2.0).abs() < 1e-12 {
            equality_cases += 1;
        }
        violations += s.identity_violations;
        rows.push(row);
    }
    let mut delta = 0.0f64;
    for v in [false, true] {
        let class: Vec<Vec<f64>> = instances
            .iter()
            .zip(&stats)
            .filter(|(i, _)| i.promised_value == v)
            .map(|(_, (_, d))| d.to_vec())
            .collect();
        if !class.is_empty() {
            let (r, _) = chebyshev_center_l1(&class)?;
            rep.metric(&format!("class_radius_{}", v as u8), r);
            delta = delta.max(r);
        }
    }
    rep.epsilon_hat = eps;
    rep.delta_hat_lower = delta;
    rep.delta_hat_upper = delta;
    rep.metric("min_pr_vote_correct", 1.0 - eps);
    rep.metric("equality_cases", equality_cases as f64);
    rep.metric("vote_identity_violations", violations as f64);
    rep.metric("max_edge_uniformity_deviation", edge_dev);
    rep.check("vote_correct_at_least_two_thirds", 1.0 - eps >= 2.0 / 3.0 - 1e-12, format!("min {:.6}", 1.0 - eps));
    rep.check("vote_identity", violations == 0, format!("{violations} violations"));
    rep.notes.push("single-shot votes; delta is measured, not asserted".into());
    rep.inputs = rows;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_instances() {
        let z = bhm_instance(3, false, 1).unwrap();
        assert_eq!(z.weight(), 0);
        let o = bhm_instance(3, true, 1).unwrap();
        assert!(o.weight() >= 2);
        let four = bhm_instance_with_weight(6, true, 4, 9).unwrap();
        let bits = four.edge_bits();
        assert_eq!(bits.iter().filter(|b| **b).count(), 4);
        assert!(bhm_instance_with_weight(6, true, 3, 9).is_err());
    }

    #[test]
    fn promise_thresholds() {
        assert_eq!(promise_value(2, 0), Some(false));
        assert_eq!(promise_value(2, 1), None);
        assert_eq!(promise_value(2, 2), Some(true));
        assert_eq!(promise_value(6, 4), Some(true));
        assert_eq!(promise_value(6, 1), Some(false));
        assert_eq!(promise_value(6, 2), None);
    }

    #[test]
    fn text_round_trip() {
        let inst = bhm_instance(4, true, 3).unwrap();
        let t = inst.to_text();
        assert_eq!(BhmInstance::from_text(&t).unwrap(), inst);
        assert!(BhmInstance::from_text("n: 2\nx: zz\n").is_err());
    }

    #[test]
    fn all_zero_instance_votes_zero() {
        let inst = BhmInstance {
            n: 2,
            x: vec![false; 4],
            matching: vec![(0, 1), (2, 3)],
            w: vec![false; 2],
            promised_value: false,
        };
        let p = bhm_psqm(2).unwrap();
        let outs = p.outcomes(&inst).unwrap();
        assert!(outs.iter().all(|o| !o.vote));
        let total: f64 = outs.iter().map(|o| o.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let s = p.vote_stats(&inst).unwrap();
        assert_eq!(s.pr_correct, 1.0);
    }

    #[test]
    fn vote_probability_is_agreeing_fraction() {
        let p = bhm_psqm(6).unwrap();
        for seed in 0..10 {
            let inst = bhm_instance(6, seed % 2 == 0, seed).unwrap();
            let s = p.vote_stats(&inst).unwrap();
            assert!((s.pr_correct - s.agreeing_fraction).abs() < 1e-12);
            assert_eq!(s.identity_violations, 0);
            for q in &s.edge_probs {
                assert!((q - 1.0 / 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn majority_helps() {
        let p = bhm_psqm(3).unwrap();
        let inst = bhm_instance_with_weight(3, true, 2, 5).unwrap();
        let one = p.vote_stats(&inst).unwrap().pr_correct;
        assert!((one - 2.0 / 3.0).abs() < 1e-12);
        assert!(p.majority_correct_probability(&inst, 15).unwrap() > 0.9);
    }
}
