//! Forrelation: value, promise instances, the decision circuit with its
//! Clifford+T compilation, and the amplified majority decision.
//!
//! Inputs are ±1 vectors stored as `i8`. Layout of the decision circuit on
//! 2·log2 n wires: register A is wires 0..log n with wire 0 the control,
//! register B is the next log n wires. The preparation segment (H on A, E,
//! both phase oracles, E) leaves (1/√n) Σ_a z_a |a⟩|0⟩ with z = x·y; the
//! body is X on the control, controlled-H from the control to every other A
//! wire, H on the control, and a measurement of the control.

pub mod circuit;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use circuit::{compile_clifford_t, dense_unitary, simulate, t_depth, Circuit, Gate, Party};

use crate::error::{Error, Result};
use crate::exec::{collect_results, task_seed, Exec};

/// Shipped promise thresholds; see `calibrate`.
pub const ALPHA: f64 = 0.35;
pub const BETA: f64 = 0.01;
/// Shipped number of repetitions for the amplified decision.
pub const DEFAULT_REPS: usize = 15;
/// Resampling budget for instance generation.
pub const SAMPLE_BUDGET: usize = 1000;
pub const MIN_INSTANCE_N: usize = 4;
pub const MAX_INSTANCE_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    High,
    Low,
}

impl Side {
    /// Function value: -1 on the high side, +1 on the low side.
    pub fn value(self) -> i8 {
        match self {
            Side::High => -1,
            Side::Low => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::High => "high",
            Side::Low => "low",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForrelationInstance {
    pub x: Vec<i8>,
    pub y: Vec<i8>,
    pub side: Side,
    pub alpha: f64,
    pub beta: f64,
}

impl ForrelationInstance {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn product(&self) -> Vec<i8> {
        pointwise(&self.x, &self.y)
    }

    pub fn forr(&self) -> Result<f64> {
        forr_value(&self.product())
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.forr()?;
        let ok = match self.side {
            Side::High => f >= self.alpha,
            Side::Low => f <= self.beta,
        };
        if !ok {
            return Err(Error::OutsidePromise(format!("forr = {f} on the {} side", self.side.as_str())));
        }
        Ok(())
    }
}

pub fn pointwise(x: &[i8], y: &[i8]) -> Vec<i8> {
    x.iter().zip(y).map(|(a, b)| a * b).collect()
}

fn check_signs(z: &[i8]) -> Result<u32> {
    let n = z.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("length {n} must be a power of 2, at least 2")));
    }
    if let Some(v) = z.iter().find(|v| v.abs() != 1) {
        return Err(Error::InvalidArgument(format!("entry {v} is not ±1")));
    }
    Ok(n.trailing_zeros())
}

/// Unnormalized in-place Walsh-Hadamard transform.
fn wht(v: &mut [i64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// (1/n) z1ᵀ H z2 with z1, z2 the two halves and H the orthonormal
/// Walsh-Hadamard transform of size n/2.
pub fn forr_value(z: &[i8]) -> Result<f64> {
    check_signs(z)?;
    let n = z.len();
    let half = n / 2;
    let mut h2: Vec<i64> = z[half..].iter().map(|&v| v as i64).collect();
    wht(&mut h2);
    let dot: i64 = z[..half].iter().zip(&h2).map(|(&a, b)| a as i64 * b).sum();
    Ok(dot as f64 / (n as f64 * (half as f64).sqrt()))
}

fn random_signs<R: Rng>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn check_instance_n(n: usize) -> Result<()> {
    if !n.is_power_of_two() || !(MIN_INSTANCE_N..=MAX_INSTANCE_N).contains(&n) {
        return Err(Error::InvalidArgument(format!("n = {n} must be a power of 2 in [{MIN_INSTANCE_N}, {MAX_INSTANCE_N}]")));
    }
    Ok(())
}

/// Promise instance with the shipped thresholds.
pub fn forrelation_instance(n: usize, side: Side, seed: u64) -> Result<ForrelationInstance> {
    forrelation_instance_with(n, side, ALPHA, BETA, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// High side: z2 = sign(H z1), z1 resampled until forr ≥ α. Low side: z
/// uniform, resampled until forr ≤ β. Then x is uniform and y = z·x.
pub fn forrelation_instance_with<R: Rng>(n: usize, side: Side, alpha: f64, beta: f64, rng: &mut R) -> Result<ForrelationInstance> {
    check_instance_n(n)?;
    if !(alpha > beta && beta > 0.0) {
        return Err(Error::InvalidArgument(format!("need alpha > beta > 0, got {alpha}, {beta}")));
    }
    let half = n / 2;
    for _ in 0..SAMPLE_BUDGET {
        let z = match side {
            Side::High => {
                let z1 = random_signs(half, rng);
                let mut h: Vec<i64> = z1.iter().map(|&v| v as i64).collect();
                wht(&mut h);
                let mut z = z1;
                z.extend(h.iter().map(|&v| if v < 0 { -1i8 } else { 1 }));
                z
            }
            Side::Low => random_signs(n, rng),
        };
        let f = forr_value(&z)?;
        let ok = match side {
            Side::High => f >= alpha,
            Side::Low => f <= beta,
        };
        if ok {
            let x = random_signs(n, rng);
            let y = pointwise(&z, &x);
            return Ok(ForrelationInstance { x, y, side, alpha, beta });
        }
    }
    Err(Error::BudgetExceeded(format!("no {} instance at n = {n} within {SAMPLE_BUDGET} draws", side.as_str())))
}

/// `count` instances alternating high/low and cycling through `ns`;
/// instance i is drawn from its own stream seeded with `task_seed(seed, i)`.
pub fn instance_suite(ns: &[usize], count: usize, seed: u64, exec: Exec) -> Result<Vec<ForrelationInstance>> {
    if ns.is_empty() {
        return Err(Error::EmptySelection);
    }
    collect_results(exec.map_range(count, |i| {
        let side = if i % 2 == 0 { Side::High } else { Side::Low };
        let n = ns[(i / 2) % ns.len()];
        forrelation_instance(n, side, task_seed(seed, i as u64))
    }))
}

/// One CSV row per vector: `index,side,role,v_0,...,v_{n-1}`.
pub fn instances_to_csv(instances: &[ForrelationInstance]) -> String {
    let mut s = String::new();
    for (i, inst) in instances.iter().enumerate() {
        for (role, v) in [("x", &inst.x), ("y", &inst.y)] {
            let _ = write!(s, "{i},{},{role}", inst.side.as_str());
            for e in v {
                let _ = write!(s, ",{e}");
            }
            s.push('\n');
        }
    }
    s
}

pub fn instances_from_csv(text: &str, alpha: f64, beta: f64) -> Result<Vec<ForrelationInstance>> {
    let mut out: Vec<ForrelationInstance> = Vec::new();
    let mut pending: Option<(Side, Vec<i8>)> = None;
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() < 4 {
            return Err(err("too few columns"));
        }
        let side = match cols[1] {
            "high" => Side::High,
            "low" => Side::Low,
            _ => return Err(err("side must be high or low")),
        };
        let v = cols[3..]
            .iter()
            .map(|t| match t.trim() {
                "1" => Ok(1i8),
                "-1" => Ok(-1),
                _ => Err(err("entries must be 1 or -1")),
            })
            .collect::<Result<Vec<i8>>>()?;
        match (cols[2], pending.take()) {
            ("x", None) => pending = Some((side, v)),
            ("y", Some((s, x))) if s == side && x.len() == v.len() => {
                out.push(ForrelationInstance { x, y: v, side, alpha, beta })
            }
            _ => return Err(err("expected an x row followed by a matching y row")),
        }
    }
    if pending.is_some() {
        return Err(Error::Parse { line: text.lines().count(), message: "dangling x row".into() });
    }
    Ok(out)
}

/// The decision circuit, preparation and body kept apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForrelationCircuit {
    pub n: usize,
    pub log_n: u32,
    pub control: usize,
    pub prep: Circuit,
    pub body: Circuit,
}

pub fn forrelation_circuit(n: usize) -> Result<ForrelationCircuit> {
    let z = vec![1i8; n];
    let log_n = check_signs(&z)?;
    let l = log_n as usize;
    let wires = 2 * l;
    let reg_a: Vec<usize> = (0..l).collect();
    let reg_b: Vec<usize> = (l..wires).collect();
    let mut prep = Circuit::new(wires);
    for &w in &reg_a {
        prep.push(Gate::H(w));
    }
    let e_layer = |c: &mut Circuit| {
        for i in 0..l {
            c.push(Gate::Cnot(i, l + i));
        }
    };
    e_layer(&mut prep);
    prep.push(Gate::Oracle(Party::A, reg_a.clone()));
    prep.push(Gate::Oracle(Party::B, reg_b));
    e_layer(&mut prep);
    let mut body = Circuit::new(wires);
    body.push(Gate::X(0));
    for t in 1..l {
        body.push(Gate::Ch(0, t));
    }
    body.push(Gate::H(0)).push(Gate::Measure(0));
    prep.validate()?;
    body.validate()?;
    Ok(ForrelationCircuit { n, log_n, control: 0, prep, body })
}

fn to_bits(v: &[i8]) -> Vec<bool> {
    v.iter().map(|&e| e < 0).collect()
}

impl ForrelationCircuit {
    pub fn wire_count(&self) -> usize {
        self.prep.wire_count
    }

    /// Whole circuit with both oracles bound to the parties' inputs.
    pub fn bound(&self, x: &[i8], y: &[i8]) -> Result<Circuit> {
        check_signs(x)?;
        check_signs(y)?;
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch(format!("inputs of length {}, {} for n = {}", x.len(), y.len(), self.n)));
        }
        let mut c = self.prep.bind(&to_bits(x), &to_bits(y))?;
        c.extend(&self.body)?;
        Ok(c)
    }

    pub fn compiled_body(&self) -> Result<Circuit> {
        compile_clifford_t(&self.body)
    }

    pub fn t_depth(&self) -> Result<usize> {
        t_depth(&self.compiled_body()?)
    }

    /// P(control reads 0) by statevector simulation.
    pub fn acceptance_probability(&self, x: &[i8], y: &[i8]) -> Result<f64> {
        let c = self.bound(x, y)?;
        let state = simulate(&c)?;
        Ok(circuit::zero_probability(&state, self.control, c.wire_count))
    }

    /// Same quantity read off the dense unitary's first column.
    pub fn acceptance_probability_dense(&self, x: &[i8], y: &[i8]) -> Result<f64> {
        let c = self.bound(x, y)?;
        let col = circuit::dense_output(&c)?;
        Ok(circuit::zero_probability(col.as_slice(), self.control, c.wire_count))
    }
}

/// Circuit size summary for one n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub n: usize,
    pub wires: usize,
    pub prep_gates: usize,
    pub body_gates: usize,
    pub compiled_gates: usize,
    pub t_count: usize,
    pub t_depth: usize,
}

pub fn circuit_stats(n: usize) -> Result<CircuitStats> {
    let fc = forrelation_circuit(n)?;
    let compiled = fc.compiled_body()?;
    Ok(CircuitStats {
        n,
        wires: fc.wire_count(),
        prep_gates: fc.prep.gates.len(),
        body_gates: fc.body.gates.len(),
        compiled_gates: compiled.gates.len(),
        t_count: compiled.t_count(),
        t_depth: t_depth(&compiled)?,
    })
}

/// Fewest zero outcomes out of `reps` that decide "high".
pub fn decision_threshold(reps: usize, alpha: f64, beta: f64) -> usize {
    (reps as f64 * (0.5 + (alpha + beta) / 2.0)).ceil() as usize
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    Ok(())
}

/// Majority decision from `reps` simulated shots: -1 (high) when at least
/// the threshold number of shots read 0, else +1.
pub fn forrelation_decision<R: Rng>(x: &[i8], y: &[i8], reps: usize, rng: &mut R) -> Result<i8> {
    check_reps(reps)?;
    let fc = forrelation_circuit(x.len())?;
    let p0 = fc.acceptance_probability(x, y)?;
    Ok(decide_from_probability(p0, reps, rng))
}

fn decide_from_probability<R: Rng>(p0: f64, reps: usize, rng: &mut R) -> i8 {
    let zeros = (0..reps).filter(|_| rng.random::<f64>() < p0).count();
    if zeros >= decision_threshold(reps, ALPHA, BETA) {
        -1
    } else {
        1
    }
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut lc = 0.0;
    for i in 0..k {
        lc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    let a = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let b = if k == n { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    (lc + a + b).exp()
}

/// Exact probability that the majority decision errs when each shot reads 0
/// with probability `p0`.
pub fn exact_decision_error(p0: f64, reps: usize, side: Side) -> Result<f64> {
    check_reps(reps)?;
    let t = decision_threshold(reps, ALPHA, BETA);
    let p_high: f64 = (t..=reps).map(|k| binomial_pmf(reps, k, p0.clamp(0.0, 1.0))).sum();
    Ok(match side {
        Side::High => 1.0 - p_high,
        Side::Low => p_high,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub n: usize,
    pub side: Side,
    pub forr: f64,
    pub p0: f64,
    pub decision: i8,
    pub correct: bool,
    pub exact_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub reps: usize,
    pub threshold: usize,
    pub instances: usize,
    pub errors: usize,
    pub empirical_error: f64,
    /// Mean of the exact per-instance error probabilities.
    pub expected_error: f64,
    pub max_exact_error: f64,
    pub outcomes: Vec<InstanceOutcome>,
}

/// Runs the amplified decision once per instance, shots for instance i
/// drawn from `task_seed(seed, i)`.
pub fn run_suite(instances: &[ForrelationInstance], reps: usize, seed: u64, exec: Exec) -> Result<SuiteReport> {
    check_reps(reps)?;
    let indexed: Vec<(usize, &ForrelationInstance)> = instances.iter().enumerate().collect();
    let outcomes = collect_results(exec.map(&indexed, |(i, inst)| -> Result<InstanceOutcome> {
        let fc = forrelation_circuit(inst.n())?;
        let p0 = fc.acceptance_probability(&inst.x, &inst.y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, *i as u64));
        let decision = decide_from_probability(p0, reps, &mut rng);
        Ok(InstanceOutcome {
            n: inst.n(),
            side: inst.side,
            forr: inst.forr()?,
            p0,
            decision,
            correct: decision == inst.side.value(),
            exact_error: exact_decision_error(p0, reps, inst.side)?,
        })
    }))?;
    let m = outcomes.len().max(1) as f64;
    let errors = outcomes.iter().filter(|o| !o.correct).count();
    Ok(SuiteReport {
        reps,
        threshold: decision_threshold(reps, ALPHA, BETA),
        instances: outcomes.len(),
        errors,
        empirical_error: errors as f64 / m,
        expected_error: outcomes.iter().map(|o| o.exact_error).sum::<f64>() / m,
        max_exact_error: outcomes.iter().map(|o| o.exact_error).fold(0.0, f64::max),
        outcomes,
    })
}

/// Fitted relation p0 = c0 + c1·forr plus the error figures it implies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub ns: Vec<usize>,
    pub samples: usize,
    pub c0: f64,
    pub c1: f64,
    pub max_residual: f64,
    pub alpha: f64,
    pub beta: f64,
    pub reps: usize,
    pub threshold: usize,
    /// Worst-case single-shot error when reading "0" as high.
    pub single_shot_error_high: f64,
    pub single_shot_error_low: f64,
    /// Worst-case amplified errors at forr = α and forr = β.
    pub amplified_error_high: f64,
    pub amplified_error_low: f64,
}

impl Calibration {
    pub fn to_text(&self) -> String {
        let ns: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
        format!(
            "n: {}\nsamples: {}\nc0: {:.12}\nc1: {:.12}\nmax_residual: {:.3e}\nalpha: {}\nbeta: {}\nreps: {}\nthreshold: {}\n\
             single_shot_error_high: {:.6}\nsingle_shot_error_low: {:.6}\namplified_error_high: {:.6}\namplified_error_low: {:.6}\n",
            ns.join(" "),
            self.samples,
            self.c0,
            self.c1,
            self.max_residual,
            self.alpha,
            self.beta,
            self.reps,
            self.threshold,
            self.single_shot_error_high,
            self.single_shot_error_low,
            self.amplified_error_high,
            self.amplified_error_low,
        )
    }
}

/// Fits the acceptance probability against forr by least squares, using
/// the dense-unitary evaluation on uniform and high-side z at each n.
pub fn calibrate(ns: &[usize], samples_per_n: usize, reps: usize, seed: u64) -> Result<Calibration> {
    check_reps(reps)?;
    if ns.is_empty() || samples_per_n < 2 {
        return Err(Error::InvalidArgument("need at least one n and two samples per n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    for &n in ns {
        let fc = forrelation_circuit(n)?;
        let ones = vec![1i8; n];
        for s in 0..samples_per_n {
            let z = if s % 2 == 0 {
                random_signs(n, &mut rng)
            } else {
                forrelation_instance_with(n, Side::High, 1e-9, 1e-10, &mut rng)?.product()
            };
            pts.push((forr_value(&z)?, fc.acceptance_probability_dense(&z, &ones)?));
        }
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("calibration sample has no spread in forr".into()));
    }
    let c1 = sxy / sxx;
    let c0 = my - c1 * mx;
    let max_residual = pts.iter().map(|p| (p.1 - c0 - c1 * p.0).abs()).fold(0.0, f64::max);
    Ok(Calibration {
        ns: ns.to_vec(),
        samples: pts.len(),
        c0,
        c1,
        max_residual,
        alpha: ALPHA,
        beta: BETA,
        reps,
        threshold: decision_threshold(reps, ALPHA, BETA),
        single_shot_error_high: 1.0 - (c0 + c1 * ALPHA),
        single_shot_error_low: c0 + c1 * BETA,
        amplified_error_high: exact_decision_error(c0 + c1 * ALPHA, reps, Side::High)?,
        amplified_error_low: exact_decision_error(c0 + c1 * BETA, reps, Side::Low)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(n²) summation with explicit Hadamard entries.
    fn forr_direct(z: &[i8]) -> f64 {
        let n = z.len();
        let h = n / 2;
        let mut s = 0.0;
        for i in 0..h {
            for j in 0..h {
                let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                s += z[i] as f64 * sign / (h as f64).sqrt() * z[h + j] as f64;
            }
        }
        s / n as f64
    }

    #[test]
    fn all_ones_at_four() {
        assert!((forr_value(&[1, 1, 1, 1]).unwrap() - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((forr_value(&[1, -1]).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 8, 16, 32, 64] {
            for _ in 0..20 {
                let z = random_signs(n, &mut rng);
                assert!((forr_value(&z).unwrap() - forr_direct(&z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_aligned_second_half_is_maximal() {
        let n = 8;
        for z1v in 0..16u32 {
            let z1: Vec<i8> = (0..4).map(|i| if z1v >> i & 1 == 1 { -1 } else { 1 }).collect();
            let mut h: Vec<i64> = z1.iter().map(|&v| v as i64).collect();
            wht(&mut h);
            let mut aligned = z1.clone();
            aligned.extend(h.iter().map(|&v| if v < 0 { -1i8 } else { 1 }));
            let best = forr_value(&aligned).unwrap();
            for z2v in 0..16u32 {
                let mut z = z1.clone();
                z.extend((0..4).map(|i| if z2v >> i & 1 == 1 { -1i8 } else { 1 }));
                assert!(forr_direct(&z) <= best + 1e-12);
            }
            assert_eq!(aligned.len(), n);
        }
    }

    #[test]
    fn negating_second_half_negates() {
        let z = [1, -1, -1, 1, 1, 1, -1, 1];
        let mut w = z;
        for v in &mut w[4..] {
            *v = -*v;
        }
        assert!((forr_value(&z).unwrap() + forr_value(&w).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(forr_value(&[1, 1, 1]).is_err());
        assert!(forr_value(&[1, 0]).is_err());
        assert!(forr_value(&[1]).is_err());
    }

    #[test]
    fn instances_satisfy_promise() {
        for n in [4, 8, 16, 32, 64] {
            for side in [Side::High, Side::Low] {
                let inst = forrelation_instance(n, side, 17).unwrap();
                inst.validate().unwrap();
                assert_eq!(inst, forrelation_instance(n, side, 17).unwrap());
                let mut flipped = inst.clone();
                flipped.x[1] = -flipped.x[1];
                flipped.y[1] = -flipped.y[1];
                assert!((flipped.forr().unwrap() - inst.forr().unwrap()).abs() < 1e-15);
            }
        }
        assert!(forrelation_instance(2, Side::Low, 0).is_err());
        assert!(forrelation_instance(128, Side::Low, 0).is_err());
    }

    #[test]
    fn unreachable_threshold_exhausts_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = forrelation_instance_with(4, Side::High, 0.9, 0.01, &mut rng).unwrap_err();
        assert!(matches!(e, Error::BudgetExceeded(_)));
    }

    #[test]
    fn csv_round_trip() {
        let suite = instance_suite(&[4, 8], 4, 5, Exec::Sequential).unwrap();
        let text = instances_to_csv(&suite);
        assert_eq!(instances_from_csv(&text, ALPHA, BETA).unwrap(), suite);
        assert!(instances_from_csv("0,high,y,1,1\n", ALPHA, BETA).is_err());
    }

    #[test]
    fn circuit_layout() {
        let fc = forrelation_circuit(8).unwrap();
        assert_eq!(fc.wire_count(), 6);
        assert_eq!(fc.body.measured_wires(), vec![0]);
        assert!(matches!(fc.body.gates.last(), Some(Gate::Measure(0))));
        let text = fc.body.to_text();
        assert_eq!(Circuit::from_text(&text).unwrap(), fc.body);
    }

    #[test]
    fn acceptance_is_half_plus_forr() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2, 4, 8, 16] {
            let fc = forrelation_circuit(n).unwrap();
            for _ in 0..10 {
                let x = random_signs(n, &mut rng);
                let y = random_signs(n, &mut rng);
                let f = forr_value(&pointwise(&x, &y)).unwrap();
                let p = fc.acceptance_probability(&x, &y).unwrap();
                let pd = fc.acceptance_probability_dense(&x, &y).unwrap();
                assert!((p - pd).abs() < 1e-12);
                assert!((p - 0.5 - f).abs() < 1e-12, "n = {n}: p = {p}, forr = {f}");
            }
        }
    }

    #[test]
    fn all_ones_acceptance() {
        let fc = forrelation_circuit(4).unwrap();
        let p = fc.acceptance_probability_dense(&[1; 4], &[1; 4]).unwrap();
        assert!((p - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn compiled_unitary_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [4, 8, 16, 32] {
            let fc = forrelation_circuit(n).unwrap();
            let x = random_signs(n, &mut rng);
            let y = random_signs(n, &mut rng);
            let orig = fc.bound(&x, &y).unwrap();
            let mut comp = fc.prep.bind(&to_bits(&x), &to_bits(&y)).unwrap();
            comp.extend(&fc.compiled_body().unwrap()).unwrap();
            let (u, v) = (dense_unitary(&orig).unwrap(), dense_unitary(&comp).unwrap());
            assert!(crate::qcore::linalg::max_abs_diff(&u, &v) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn t_depth_is_constant() {
        let depths: Vec<usize> = [4, 8, 16, 32, 64].iter().map(|&n| forrelation_circuit(n).unwrap().t_depth().unwrap()).collect();
        assert!(depths.iter().all(|&d| d == depths[0]), "{depths:?}");
        assert_eq!(depths[0], 2);
        assert!(t_depth(&fc_prep_only()).is_err());
    }

    fn fc_prep_only() -> Circuit {
        forrelation_circuit(4).unwrap().prep
    }

    #[test]
    fn threshold_and_reps() {
        assert_eq!(decision_threshold(15, ALPHA, BETA), 11);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(forrelation_decision(&[1; 4], &[1; 4], 0, &mut rng).is_err());
        // p0 = 1/2 + 0.354 at all-ones.
        let v = forrelation_decision(&[1; 4], &[1; 4], 15, &mut rng).unwrap();
        assert!(v == -1 || v == 1);
    }

    #[test]
    fn exact_error_sums() {
        let e_hi = exact_decision_error(0.5 + ALPHA, 15, Side::High).unwrap();
        let e_lo = exact_decision_error(0.5 + BETA, 15, Side::Low).unwrap();
        assert!(e_hi < 0.09 && e_lo < 0.09, "{e_hi} {e_lo}");
        // p = 1: never errs on high; p = 0: never errs on low.
        assert!(exact_decision_error(1.0, 15, Side::High).unwrap().abs() < 1e-15);
        assert!(exact_decision_error(0.0, 15, Side::Low).unwrap().abs() < 1e-15);
        let total: f64 = (0..=7).map(|k| binomial_pmf(7, k, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_recovers_relation() {
        let cal = calibrate(&[4, 8], 40, DEFAULT_REPS, 1).unwrap();
        assert!((cal.c0 - 0.5).abs() < 1e-9 && (cal.c1 - 1.0).abs() < 1e-9, "{cal:?}");
        assert!(cal.max_residual < 1e-9);
        assert!(cal.amplified_error_high <= 0.09 && cal.amplified_error_low <= 0.09);
        assert!(cal.to_text().contains("threshold: 11\n"));
    }

    #[test]
    fn suite_is_reproducible() {
        let insts = instance_suite(&[4, 8, 16, 32], 40, 7, Exec::Parallel).unwrap();
        let a = run_suite(&insts, 15, 99, Exec::Parallel).unwrap();
        let b = run_suite(&insts, 15, 99, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(insts, instance_suite(&[4, 8, 16, 32], 40, 7, Exec::Sequential).unwrap());
    }
}
