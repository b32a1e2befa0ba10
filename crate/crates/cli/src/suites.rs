//! One runner per suite. Every runner returns finished reports in a fixed
//! order with pass/fail checks attached; nothing here depends on scheduling.

use cdslab::classical::{ip_psm, neq_cds};
use cdslab::exec::{collect_results, task_seed, Exec};
use cdslab::forrelation::{circuit_stats, instance_suite, run_suite, CircuitStats, Side, ALPHA, BETA};
use cdslab::lowerbound::{
    complementary_sweep, gamma_threshold, one_way_sweep, required_digits, soundness_bound, two_prover_lab,
};
use cdslab::protocol::cdqs::{protocol_cost, CdqsProtocol};
use cdslab::protocol::types::{CostReport, PromiseFunction, ProtocolKind};
use cdslab::qcore::layout::Layout;
use cdslab::qcore::linalg::{self, CMatrix};
use cdslab::qcore::optimize::ensemble_sqrt_fidelity_check;
use cdslab::qcore::DensityMatrix;
use cdslab::quantum::hybrid::MAX_EXHAUSTIVE_N;
use cdslab::quantum::toys::{DEPOLARIZING_P, LEAK_Q};
use cdslab::quantum::{
    bhm_instance, bhm_psqm, bhm_verify, depolarized, dj_shorten, forwarding, hybrid_verify, hybrid_verify_inputs,
    inner_layer_check, leaky_and, lifted_neq, neq_promise_cdqs, sample_promise_inputs, shipped_fixtures,
    teleport_and_toy,
};
use cdslab::verifier::{cdqs_verify, cds_verify_with, productness_check, psm_verify_with, InputDiagnostic, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Suite};
use crate::CliError;

const EXEC: Exec = Exec::Parallel;
const BHM_INSTANCES: usize = 100;
const FORRELATION_INSTANCES: usize = 200;
const FORRELATION_BUDGET: f64 = 0.09;
const SAMPLED_HYBRID_INPUTS: usize = 200;
const DJ_SAMPLES: usize = 64;
const TOOL_INSTANCES: usize = 100;
const TOOL_TOL: f64 = 1e-9;

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut reports = match cfg.suite {
        Suite::NeqClassical => neq_classical(cfg)?,
        Suite::DjShortening => dj_shortening(cfg)?,
        Suite::NeqHybrid => neq_hybrid(cfg)?,
        Suite::IpPsm => ip(cfg)?,
        Suite::Bhm => bhm(cfg)?,
        Suite::Forrelation => forrelation(cfg)?,
        Suite::Productness => productness(cfg)?,
        Suite::OneWay => one_way(cfg)?,
        Suite::TwoProver => two_prover(cfg)?,
        Suite::Complementary => complementary(cfg)?,
        Suite::Tools => tools(cfg)?,
    };
    if seeded(cfg.suite) {
        for r in &mut reports {
            r.seed = Some(cfg.seed);
        }
    }
    Ok(reports)
}

/// Suites whose inputs are drawn from the seed.
pub fn seeded(s: Suite) -> bool {
    matches!(s, Suite::DjShortening | Suite::NeqHybrid | Suite::Bhm | Suite::Forrelation | Suite::Tools)
}

fn to_u32(n: usize) -> Result<u32, CliError> {
    u32::try_from(n).map_err(|_| CliError::Config(format!("n = {n} out of range")))
}

fn neq_classical(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for n in cfg.sizes() {
        let mut rep = cds_verify_with(&neq_cds(to_u32(n)?)?, &PromiseFunction::neq(n), EXEC)?;
        rep.check("perfect_correctness", rep.epsilon_hat == 0.0, format!("epsilon_hat {}", rep.epsilon_hat));
        rep.check("perfect_security", rep.delta_hat_upper == 0.0, format!("delta_hat {}", rep.delta_hat_upper));
        out.push(rep);
    }
    Ok(out)
}

fn ip(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for n in cfg.sizes() {
        let mut rep = psm_verify_with(&ip_psm(to_u32(n)?)?, &PromiseFunction::inner_product(n), EXEC)?;
        rep.check("perfect_correctness", rep.epsilon_hat == 0.0, format!("epsilon_hat {}", rep.epsilon_hat));
        rep.check("perfect_security", rep.delta_hat_upper <= 1e-12, format!("LP radius {}", rep.delta_hat_upper));
        out.push(rep);
    }
    Ok(out)
}

fn bits_to_u64(v: &[bool]) -> u64 {
    v.iter().enumerate().fold(0, |a, (i, &b)| a | (b as u64) << i)
}

type InputPairs = Vec<(Vec<bool>, Vec<bool>)>;

/// Promise inputs for DJ at size n: exhaustive for n ≤ 4, seeded otherwise.
fn dj_inputs(n: usize, seed: u64, samples: usize) -> Result<InputPairs, CliError> {
    if n <= 4 {
        let mut v = Vec::new();
        for x in 0..1u64 << n {
            for y in 0..1u64 << n {
                let d = (x ^ y).count_ones() as usize;
                if d == 0 || 2 * d == n {
                    v.push((cdslab::quantum::bits_of(x, n), cdslab::quantum::bits_of(y, n)));
                }
            }
        }
        Ok(v)
    } else {
        Ok(sample_promise_inputs(n, samples, seed)?)
    }
}

fn dj_shortening(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for n in cfg.sizes() {
        if n > 64 {
            return Err(CliError::Config(format!("dj-shortening supports n <= 64, got {n}")));
        }
        let inputs = dj_inputs(n, task_seed(cfg.seed, n as u64), cfg.instances.unwrap_or(DJ_SAMPLES))?;
        let rows = collect_results(EXEC.map(&inputs, |(x, y)| -> cdslab::Result<InputDiagnostic> {
            let dist = dj_shorten(x, y)?;
            let far = x != y;
            let per_diag = (0..n as u64).map(|a| dist.prob(a, a)).collect::<Vec<_>>();
            let target = if far { 0.0 } else { 1.0 / n as f64 };
            let dev = per_diag.iter().map(|p| (p - target).abs()).fold(0.0, f64::max);
            Ok(InputDiagnostic::new(bits_to_u64(x), bits_to_u64(y), far)
                .with("pr_equal_outcomes", dist.diagonal_mass())
                .with("max_diagonal_deviation", dev)
                .with("total_probability", dist.total()))
        }))?;
        let log_n = n.trailing_zeros();
        let cost = CostReport { classical_bits: 0, qubits: 0, random_bits: 0, ebits: log_n };
        let mut rep = VerificationReport::new(&format!("dj_shorten({n})"), ProtocolKind::Circuit, &format!("PROMISE_NEQ_{n}"), n, cost);
        let equal_min = rows.iter().filter(|r| !r.f).map(|r| r.distances["pr_equal_outcomes"]).fold(1.0, f64::min);
        let far_max = rows.iter().filter(|r| r.f).map(|r| r.distances["pr_equal_outcomes"]).fold(0.0, f64::max);
        let dev = rows.iter().map(|r| r.distances["max_diagonal_deviation"]).fold(0.0, f64::max);
        rep.epsilon_hat = (1.0 - equal_min).max(far_max);
        rep.metric("min_pr_equal_at_x_eq_y", equal_min);
        rep.metric("max_pr_equal_at_half_distance", far_max);
        rep.metric("max_diagonal_deviation", dev);
        rep.check("equal_inputs_agree", (1.0 - equal_min).abs() <= 1e-9, format!("min {equal_min}"));
        rep.check("far_inputs_disagree", far_max <= 1e-9, format!("max {far_max}"));
        rep.check("diagonal_outcomes_uniform", dev <= 1e-9, format!("max deviation {dev}"));
        if n > 4 {
            rep.notes.push(format!("{} seeded promise inputs", rows.len()));
        }
        rep.inputs = rows;
        out.push(rep);
    }
    Ok(out)
}

fn neq_hybrid(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for n in cfg.sizes() {
        let h = neq_promise_cdqs(n)?;
        let mut rep = if n <= MAX_EXHAUSTIVE_N {
            hybrid_verify(&h, EXEC)?
        } else {
            let count = cfg.instances.unwrap_or(SAMPLED_HYBRID_INPUTS);
            let inputs = sample_promise_inputs(n, count, task_seed(cfg.seed, n as u64))?;
            hybrid_verify_inputs(&h, &inputs, EXEC)?
        };
        let table = h.cost_table();
        for row in &table.rows {
            rep.metric(&format!("cost.{}", row.component), row.amount as f64);
            rep.notes.push(format!("cost {}: {} {}", row.component, row.amount, row.unit));
        }
        rep.check("perfect_correctness", rep.epsilon_hat == 0.0, format!("epsilon_hat {}", rep.epsilon_hat));
        rep.check("security", rep.delta_hat_upper <= 1e-9, format!("delta_hat {}", rep.delta_hat_upper));
        rep.check("log_n_epr_pairs", table.total.ebits == h.log_n, format!("{} ebits", table.total.ebits));
        out.push(rep);
    }
    Ok(out)
}

fn bhm(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for two_n in cfg.sizes() {
        if two_n % 2 != 0 || two_n < 4 {
            return Err(CliError::Config(format!("bhm input length must be even and at least 4, got {two_n}")));
        }
        let half = two_n / 2;
        let p = bhm_psqm(half)?;
        let root = task_seed(cfg.seed, two_n as u64);
        let count = cfg.instances.unwrap_or(BHM_INSTANCES);
        let insts = collect_results((0..count).map(|i| bhm_instance(half, i % 2 == 1, task_seed(root, i as u64))).collect())?;
        let mut rep = bhm_verify(&p, &insts, EXEC)?;
        let inner = inner_layer_check(&p, &insts, EXEC)?;
        rep.metric("inner_distinct_pairs", inner.distinct_pairs as f64);
        rep.metric("inner_max_distance", inner.max_distance);
        rep.check("inner_layer_vote_only", inner.consistent, format!("max distance {}", inner.max_distance));
        out.push(rep);
    }
    Ok(out)
}

fn forrelation(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let ns = cfg.sizes();
    let count = cfg.instances.unwrap_or(FORRELATION_INSTANCES);
    let insts = instance_suite(&ns, count, task_seed(cfg.seed, 0), EXEC)?;
    let suite = run_suite(&insts, cfg.reps, task_seed(cfg.seed, 1), EXEC)?;
    let stats: Vec<CircuitStats> = collect_results(ns.iter().map(|&n| circuit_stats(n)).collect())?;
    let depth0 = stats.first().map(|s| s.t_depth);
    let mut out = Vec::new();
    for st in &stats {
        let mut rep = VerificationReport::new(
            &format!("forrelation_circuit({})", st.n),
            ProtocolKind::Circuit,
            &format!("FORR_{}", st.n),
            st.n,
            CostReport { classical_bits: 0, qubits: st.wires as u32, random_bits: 0, ebits: 0 },
        );
        let mut errors = 0usize;
        let mut max_exact = 0.0f64;
        for (inst, o) in insts.iter().zip(&suite.outcomes).filter(|(_, o)| o.n == st.n) {
            let enc = |v: &[i8]| v.iter().enumerate().fold(0u64, |a, (i, &s)| a | ((s < 0) as u64) << i);
            let mut row = InputDiagnostic::new(enc(&inst.x), enc(&inst.y), o.side == Side::High)
                .with("forr", o.forr)
                .with("p0", o.p0)
                .with("decision", o.decision as f64)
                .with("exact_error", o.exact_error)
                .with("t_depth", st.t_depth as f64);
            row.class = Some(o.side.as_str().to_string());
            if !o.correct {
                errors += 1;
            }
            max_exact = max_exact.max(o.exact_error);
            rep.inputs.push(row);
        }
        let total = rep.inputs.len().max(1) as f64;
        rep.epsilon_hat = errors as f64 / total;
        rep.metric("reps", suite.reps as f64);
        rep.metric("threshold", suite.threshold as f64);
        rep.metric("max_exact_error", max_exact);
        rep.metric("suite_empirical_error", suite.empirical_error);
        rep.metric("suite_expected_error", suite.expected_error);
        rep.metric("t_depth", st.t_depth as f64);
        rep.metric("t_count", st.t_count as f64);
        rep.metric("wires", st.wires as f64);
        rep.metric("compiled_gates", st.compiled_gates as f64);
        rep.check("t_depth_constant", Some(st.t_depth) == depth0, format!("t_depth {}", st.t_depth));
        rep.check(
            "suite_decision_error",
            suite.empirical_error <= FORRELATION_BUDGET,
            format!("{} errors over {} instances", suite.errors, suite.instances),
        );
        rep.notes.push(format!("alpha {ALPHA}, beta {BETA}; epsilon_hat is the empirical error at this n"));
        out.push(rep);
    }
    Ok(out)
}

/// (protocol, function) pairs by selector name.
pub fn cdqs_protocols(name: &str) -> Result<Vec<(CdqsProtocol, PromiseFunction)>, CliError> {
    let and = || PromiseFunction::and();
    let neq = || PromiseFunction::neq(2);
    Ok(match name {
        "forwarding" => vec![(forwarding()?, PromiseFunction::constant(1, true))],
        "and" => vec![(teleport_and_toy()?, and())],
        "lifted-neq" => vec![(lifted_neq()?, neq())],
        "leaky-and" => vec![(leaky_and(LEAK_Q)?, and())],
        "depolarized-and" => vec![(depolarized(&teleport_and_toy()?, DEPOLARIZING_P)?, and())],
        "depolarized-lifted-neq" => vec![(depolarized(&lifted_neq()?, DEPOLARIZING_P)?, neq())],
        "all" => shipped_fixtures()?.into_iter().map(|f| (f.protocol, f.function)).collect(),
        _ => {
            return Err(CliError::Config(format!(
                "unknown protocol '{name}'; expected forwarding, and, lifted-neq, leaky-and, depolarized-and, depolarized-lifted-neq or all"
            )))
        }
    })
}

fn selected(cfg: &ExperimentConfig, defaults: &[&str]) -> Result<Vec<(CdqsProtocol, PromiseFunction)>, CliError> {
    let names: Vec<&str> = match &cfg.protocol {
        Some(p) => vec![p.as_str()],
        None => defaults.to_vec(),
    };
    let mut out = Vec::new();
    for n in names {
        out.extend(cdqs_protocols(n)?);
    }
    Ok(out)
}

fn productness(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for (p, f) in selected(cfg, &["all"])? {
        let mut rep = cdqs_verify(&p, &f)?;
        let entries = productness_check(&p, &f)?;
        let mut worst_far = 0.0f64;
        let mut worst_near = 1.0f64;
        for e in &entries {
            let key = if e.f { "decoded_fidelity" } else { "product_distance" };
            if let Some(row) = rep.inputs.iter_mut().find(|r| r.x == e.x && r.y == e.y) {
                row.distances.insert(key.into(), e.value);
            }
            if e.f {
                worst_near = worst_near.min(e.value);
            } else {
                worst_far = worst_far.max(e.value);
            }
        }
        let far_ok = entries.iter().filter(|e| !e.f).all(|e| e.holds(&rep, 1e-9));
        let near_ok = entries.iter().filter(|e| e.f).all(|e| e.holds(&rep, 1e-9));
        rep.metric("max_product_distance", worst_far);
        rep.metric("min_decoded_fidelity", worst_near);
        rep.check("product_state_at_f0", far_ok, format!("max distance {worst_far}, delta_hat {}", rep.delta_hat_upper));
        rep.check("decoded_fidelity_at_f1", near_ok, format!("min fidelity {worst_near}, epsilon_hat {}", rep.epsilon_hat));
        out.push(rep);
    }
    Ok(out)
}

fn one_way(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for (p, f) in selected(cfg, &["and", "lifted-neq"])? {
        let ow = one_way_sweep(&p, &f, EXEC)?;
        let mut rep = VerificationReport::new(&p.name, ProtocolKind::Cdqs, f.name(), f.n(), protocol_cost(&p)?);
        rep.epsilon_hat = ow.epsilon_hat;
        rep.delta_hat_lower = ow.delta_hat;
        rep.delta_hat_upper = ow.delta_hat;
        for d in &ow.decisions {
            rep.inputs.push(
                InputDiagnostic::new(d.x, d.y, d.f)
                    .with("decided", d.decided as u8 as f64)
                    .with("distance", d.distance)
                    .with("exact_distance", d.exact_distance)
                    .with("reconstruction_error", d.reconstruction_error)
                    .with("description_bits", d.description_bits as f64)
                    .with("quantization_trace_norm", d.bounds.trace_norm)
                    .with("quantization_trace_bound", d.bounds.trace_bound),
            );
        }
        rep.metric("gamma", ow.gamma);
        rep.metric("digits", ow.digits as f64);
        rep.metric("q_b", ow.q_b);
        rep.metric("e", ow.e);
        rep.metric("d_q", ow.d_q as f64);
        let want = gamma_threshold(ow.epsilon_hat, ow.delta_hat, ow.d_q).and_then(|g| required_digits(ow.q_b, ow.e, g))?;
        rep.check("digits_as_required", ow.digits == want, format!("{} digits, required {want}", ow.digits));
        rep.check("decides_every_input", ow.all_correct, format!("{} inputs", ow.decisions.len()));
        rep.check("quantization_chain", ow.chain_holds, "trace <= sqrt(d) frobenius <= d^1.5 / 2^k");
        out.push(rep);
    }
    Ok(out)
}

fn two_prover(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut plan: Vec<(CdqsProtocol, PromiseFunction, Vec<usize>)> = Vec::new();
    match &cfg.protocol {
        Some(name) => {
            let ks = if cfg.k.is_empty() { vec![1] } else { cfg.k.clone() };
            for (p, f) in cdqs_protocols(name)? {
                plan.push((p, f, ks.clone()));
            }
        }
        None => {
            let pick = |d: Vec<usize>| if cfg.k.is_empty() { d } else { cfg.k.clone() };
            plan.push((teleport_and_toy()?, PromiseFunction::and(), pick(vec![1, 2, 3])));
            plan.push((lifted_neq()?, PromiseFunction::neq(2), pick(vec![1])));
            plan.push((leaky_and(LEAK_Q)?, PromiseFunction::and(), pick(vec![1, 2])));
        }
    }
    let mut out = Vec::new();
    for (p, f, ks) in plan {
        for k in ks {
            out.push(two_prover_report(&p, &f, k)?);
        }
    }
    Ok(out)
}

fn two_prover_report(p: &CdqsProtocol, f: &PromiseFunction, k: usize) -> Result<VerificationReport, CliError> {
    let lab = two_prover_lab(p, f, k, EXEC)?;
    let cost = protocol_cost(p)?.scaled(to_u32(k)?);
    let mut rep = VerificationReport::new(&format!("two_prover[{}]", p.name), ProtocolKind::Cdqs, f.name(), k, cost);
    rep.epsilon_hat = lab.epsilon_hat;
    rep.delta_hat_lower = lab.delta_hat;
    rep.delta_hat_upper = lab.delta_hat;
    let (mut honest_ok, mut cheat_ok, mut orth_ok) = (true, true, true);
    let bound = soundness_bound(k as f64, lab.base_delta_hat)?;
    for e in &lab.entries {
        let mut row = InputDiagnostic::new(e.x, e.y, e.f);
        if let (Some(h), Some(floor)) = (&e.honest, e.honest_floor) {
            row = row.with("honest_acceptance", h.mean).with("honest_spread", h.spread).with("honest_floor", floor);
            honest_ok &= h.mean >= floor;
        }
        if let Some(c) = &e.cheat {
            row = row
                .with("cheat_p_pass", c.p_pass)
                .with("cheat_rounds", c.rounds as f64)
                .with("ensemble_bound", c.ensemble_bound)
                .with("unconstrained_p_pass", c.unconstrained_p_pass)
                .with("soundness_bound", bound);
            cheat_ok &= c.p_pass <= bound + 1e-6;
        }
        if let (Some(m), Some(b)) = (e.max_fidelity, e.fidelity_bound) {
            row = row.with("max_purifier_fidelity", m).with("fidelity_bound", b);
            orth_ok &= m <= b + 1e-9;
        }
        rep.inputs.push(row);
    }
    rep.metric("k", k as f64);
    rep.metric("secret_qubits", lab.secret_qubits);
    rep.metric("base_delta_hat", lab.base_delta_hat);
    rep.metric("soundness_bound", bound);
    rep.metric("proof_qubits", lab.cost.actual_qubits);
    rep.metric("proof_qubit_bound", lab.cost.bound_qubits);
    rep.metric("k_fold_verified", lab.k_fold_verified as u8 as f64);
    rep.check("honest_acceptance", honest_ok, "acceptance >= 1 - 2 sqrt(epsilon_hat) on f = 1 inputs");
    rep.check("soundness", cheat_ok, format!("see-saw estimate <= {bound:.6} + 1e-6 on f = 0 inputs"));
    rep.check("purifier_orthogonality", orth_ok, "pairwise fidelity <= 4 sqrt(delta_hat) + 1e-9");
    rep.check("proof_size", lab.cost.env_bounds_hold, format!("{} qubits, bound {}", lab.cost.actual_qubits, lab.cost.bound_qubits));
    if !lab.k_fold_verified {
        rep.notes.push("k-fold errors from the subadditive bound k times the base value".into());
    }
    rep.notes.extend(lab.to_text().lines().map(str::to_string));
    Ok(rep)
}

fn complementary(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let mut out = Vec::new();
    for (p, f) in selected(cfg, &["and", "lifted-neq", "depolarized-and", "depolarized-lifted-neq", "leaky-and"])? {
        let c = complementary_sweep(&p, &f, EXEC)?;
        let mut rep = VerificationReport::new(&p.name, ProtocolKind::Cdqs, f.name(), f.n(), protocol_cost(&p)?);
        rep.delta_hat_lower = c.delta_hat;
        rep.delta_hat_upper = c.delta_hat;
        for fit in &c.fits {
            rep.inputs.push(
                InputDiagnostic::new(fit.x, fit.y, false)
                    .with("achieved_error", fit.achieved_error)
                    .with("fidelity", fit.fidelity)
                    .with("env_dim", fit.env_dim as f64)
                    .with("rounds", fit.rounds as f64)
                    .with("converged", fit.converged as u8 as f64),
            );
        }
        let worst = c.fits.iter().map(|r| r.achieved_error).fold(0.0, f64::max);
        rep.metric("bound", c.bound);
        rep.metric("max_achieved_error", worst);
        rep.check("complementary_decoding", c.passed, format!("max error {worst}, bound {}", c.bound));
        out.push(rep);
    }
    Ok(out)
}

fn random_state(d: usize, rng: &mut ChaCha8Rng) -> cdslab::Result<DensityMatrix> {
    let rank = rng.random_range(1..=d);
    DensityMatrix::new(linalg::random_density(d, rank, rng), Layout::single("S", d))
}

fn tools(cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>, CliError> {
    let dims = cfg.sizes();
    if dims.is_empty() || dims.iter().any(|d| !(2..=8).contains(d)) {
        return Err(CliError::Config("tools dimensions must lie in 2..=8".into()));
    }
    let count = cfg.instances.unwrap_or(TOOL_INSTANCES);
    let fvdg = collect_results(EXEC.map_range(count, |i| -> cdslab::Result<InputDiagnostic> {
        let d = dims[i % dims.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(task_seed(cfg.seed, 0), i as u64));
        let (a, b) = (random_state(d, &mut rng)?, random_state(d, &mut rng)?);
        let f = a.fidelity(&b)?;
        let t = 0.5 * a.trace_distance_raw(&b)?;
        Ok(InputDiagnostic::new(i as u64, d as u64, true)
            .with("fidelity", f)
            .with("trace_distance", t)
            .with("lower_slack", t - (1.0 - f.sqrt()))
            .with("upper_slack", (1.0 - f).max(0.0).sqrt() - t))
    }))?;
    let ensemble = collect_results(EXEC.map_range(count, |i| -> cdslab::Result<InputDiagnostic> {
        let d = dims[i % dims.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(task_seed(cfg.seed, 1), i as u64));
        let m = rng.random_range(2..=5usize);
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut ens = Vec::with_capacity(m);
        for p in &raw {
            ens.push((p / total, random_state(d, &mut rng)?));
        }
        let mut mean = CMatrix::zeros(d, d);
        for (p, r) in &ens {
            mean += r.entries() * linalg::cr(*p);
        }
        let mut cands: Vec<DensityMatrix> = ens.iter().map(|e| e.1.clone()).collect();
        cands.push(DensityMatrix::new(mean, Layout::single("S", d))?);
        for _ in 0..4 {
            cands.push(random_state(d, &mut rng)?);
        }
        let (lhs, rhs) = ensemble_sqrt_fidelity_check(&ens, &cands)?;
        Ok(InputDiagnostic::new(i as u64, d as u64, true)
            .with("ensemble_size", m as f64)
            .with("lhs", lhs)
            .with("rhs", rhs)
            .with("slack", rhs - lhs))
    }))?;
    let max_d = *dims.iter().max().unwrap_or(&2);
    let cost = CostReport::default();
    let mut a = VerificationReport::new("fuchs_van_de_graaf", ProtocolKind::Tool, "random_states", max_d, cost);
    let worst = fvdg
        .iter()
        .map(|r| r.distances["lower_slack"].min(r.distances["upper_slack"]))
        .fold(f64::INFINITY, f64::min);
    a.metric("min_slack", worst);
    a.check("fuchs_van_de_graaf", worst >= -TOOL_TOL, format!("min slack {worst} over {count} instances"));
    a.inputs = fvdg;
    let mut b = VerificationReport::new("ensemble_fidelity_bound", ProtocolKind::Tool, "random_ensembles", max_d, cost);
    let worst = ensemble.iter().map(|r| r.distances["slack"]).fold(f64::INFINITY, f64::min);
    b.metric("min_slack", worst);
    b.check("ensemble_fidelity_bound", worst >= -TOOL_TOL, format!("min slack {worst} over {count} instances"));
    b.inputs = ensemble;
    for r in [&mut a, &mut b] {
        r.notes.push("rows: x is the instance index, y the dimension".into());
    }
    Ok(vec![a, b])
}
