//! The verification suite: one record per acceptance criterion.

use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use thermocoding::append::{append_fidelity_beta_j, append_fidelity_closed, append_fidelity_simulated, eta_from_beta, synthetic_setup};
use thermocoding::coding::average_guess_overlap;
use thermocoding::cooling::{
    eta_achieved, entropy_production_diagnostic, fidelity_ceilings, ground_pop_bound, steps_required, swap_gate,
};
use thermocoding::haar::seeded_haar_states;
use thermocoding::linalg::exp_hermitian;
use thermocoding::measure::{
    average_fidelity_thermal, gentle_bound_check, haar_average_fidelity_analytic, haar_average_fidelity_from_eta, haar_average_fidelity_mc,
    haar_average_fidelity_mc_kraus, instrument_kraus, nielsen_average_fidelity, thermal_bound,
    thermal_bound_tight, thermal_state,
};
use thermocoding::source::epsilon_window;
use thermocoding::timing::{clock_limited_fidelity, clock_limited_fidelity_pipeline};
use thermocoding::{
    CMatrix, ClockSpec, CodingSetup, DensityMatrix, GeneratorSpec, Operator, PlanOptions, QubitSource,
    StateVector, C64,
};

use crate::config::ExperimentConfig;
use crate::sweep::{self, SweepKind};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

impl CheckRecord {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("[{verdict}] {}. {} ({:.2}s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub violations: usize,
    pub checks: Vec<CheckRecord>,
}

fn timed(
    id: u32,
    name: &'static str,
    limit_s: Option<f64>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CheckRecord {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e:#}")),
    };
    if let Some(limit) = limit_s {
        if seconds >= limit {
            passed = false;
            detail.push_str(&format!("; runtime {seconds:.2}s exceeds {limit}s"));
        }
    }
    CheckRecord { id, name, passed, seconds, detail }
}

/// Reference setup at block length `n`: typical set = eigen-strings with at most one `1'`.
pub fn block_setup(n: usize) -> Result<CodingSetup> {
    let src = QubitSource::zero_plus();
    let (lo, hi) = epsilon_window(&src, n, &[0, 1]).ok_or_else(|| anyhow::anyhow!("no window at n = {n}"))?;
    Ok(CodingSetup::new(src, n, 0.5 * (lo + hi), &PlanOptions::default())?)
}

pub fn criterion_1() -> CheckRecord {
    timed(1, "worked example", Some(1.0), || {
        let r = crate::example3::run()?;
        Ok((
            r.passed(),
            format!(
                "delta={:.6} fidelity={:.6} overlap={:.5} (sq {:.5}) U_dev={:.1e}",
                r.delta, r.ideal_avg_fidelity, r.guess_overlap, r.guess_overlap_sq, r.u_encode_max_dev
            ),
        ))
    })
}

pub fn criterion_2() -> CheckRecord {
    timed(2, "thermal-probe fidelity bounds", Some(30.0), || {
        let mut violations = 0;
        let mut cases = 0;
        let mut min_gap = f64::INFINITY;
        for n in 3..=6 {
            let s = block_setup(n)?;
            let ens = s.ensemble()?;
            let (_, g) = average_guess_overlap(&ens, &s.guess)?;
            for i in 0..=5 {
                let c = 0.5 + 0.1 * i as f64;
                let f = average_fidelity_thermal(&ens, &s.spec, c, &s.guess)?;
                let plain = thermal_bound(c, s.spec.delta);
                let tight = thermal_bound_tight(c, s.spec.delta, g);
                cases += 1;
                if f < plain - 1e-12 || f < tight - 1e-12 {
                    violations += 1;
                }
                min_gap = min_gap.min(f - tight);
            }
        }
        Ok((violations == 0, format!("{violations} violations over {cases} cases; min margin over tight bound {min_gap:.3e}")))
    })
}

pub fn criterion_3(samples: usize, seed: u64) -> CheckRecord {
    let samples = samples.max(10_000);
    timed(3, "Haar-average oracle", Some(60.0), || {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for (k, n) in [2usize, 3].into_iter().enumerate() {
            for (i, c) in [0.6, 0.8, 0.95].into_iter().enumerate() {
                let est = haar_average_fidelity_mc(n, c, samples, seed.wrapping_add((10 * k + i) as u64))?;
                let z = (est.mean - haar_average_fidelity_analytic(n, c)).abs() / est.std_err;
                worst = worst.max(z);
                ok &= z <= 3.0;
            }
            let s = block_setup(n)?;
            let kraus = instrument_kraus(&s.spec);
            let est = haar_average_fidelity_mc_kraus(&kraus, samples, seed.wrapping_add(100 + k as u64))?;
            let z = (est.mean - nielsen_average_fidelity(&kraus)).abs() / est.std_err;
            worst = worst.max(z);
            ok &= z <= 3.0;
        }
        Ok((ok, format!("{samples} samples per case; worst deviation {worst:.2} standard errors")))
    })
}

pub fn criterion_4(seed: u64) -> CheckRecord {
    timed(4, "gentle-measurement bound", None, || {
        let s = block_setup(3)?;
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for psi in seeded_haar_states(8, 100, seed) {
            for c in [0.7, 0.9] {
                let g = gentle_bound_check(&psi, &s.spec, c)?;
                worst = worst.max(g.lhs - g.rhs);
                if !g.holds() {
                    violations += 1;
                }
            }
        }
        Ok((violations == 0, format!("{violations} violations over 200 cases; max lhs-rhs {worst:.3e}")))
    })
}

fn typical_part(s: &CodingSetup, psi: &StateVector) -> Result<StateVector> {
    Ok(StateVector::from_vector(s.spec.projector.matrix() * psi.amps())?)
}

pub fn criterion_5(seed: u64, sigmas: &[f64]) -> CheckRecord {
    timed(5, "imperfect clocks", None, || {
        let s = block_setup(3)?;
        let gen = GeneratorSpec::from_plan(&s.plan, &ClockSpec::with_sigma(0.0)?)?;
        let mut pipeline_dev: f64 = 0.0;
        let mut ideal_dev: f64 = 0.0;
        let mut monotone = true;
        let random = seeded_haar_states(8, 50, seed);
        for psi in &random {
            for &sigma in sigmas.iter().chain([0.0].iter()) {
                let clock = ClockSpec::with_sigma(sigma)?;
                let a = clock_limited_fidelity(psi, &s.spec, &gen, &clock)?;
                let b = clock_limited_fidelity_pipeline(psi, &s.spec, &gen, &clock)?;
                pipeline_dev = pipeline_dev.max((a - b).abs());
                if sigma == 0.0 {
                    let x = s.spec.typical_weight(psi)?;
                    ideal_dev = ideal_dev.max((a - x * x).abs());
                }
            }
        }
        // non-increasing along the grid: the source messages, their ensemble
        // average, and typical-subspace messages
        let mut sorted = sigmas.to_vec();
        sorted.sort_by(f64::total_cmp);
        let ens = s.ensemble()?;
        let mut curves: Vec<Box<dyn Fn(&ClockSpec) -> thermocoding::Result<f64>>> = Vec::new();
        curves.push(Box::new(|clock: &ClockSpec| ens.average(|psi| clock_limited_fidelity(psi, &s.spec, &gen, clock))));
        let mut messages: Vec<StateVector> = ens.messages.iter().map(|(psi, _)| psi.clone()).collect();
        for psi in random.iter().take(10) {
            messages.push(typical_part(&s, psi)?);
        }
        for psi in &messages {
            let psi = psi.clone();
            let (spec, gen) = (&s.spec, &gen);
            curves.push(Box::new(move |clock: &ClockSpec| clock_limited_fidelity(&psi, spec, gen, clock)));
        }
        for curve in &curves {
            let mut prev = f64::INFINITY;
            for &sigma in &sorted {
                let f = curve(&ClockSpec::with_sigma(sigma)?)?;
                monotone &= f <= prev + 1e-12;
                prev = f;
            }
        }
        let ok = pipeline_dev <= 1e-10 && ideal_dev <= 1e-12 && monotone;
        Ok((
            ok,
            format!(
                "sum vs pipeline {pipeline_dev:.1e}; sigma=0 vs ideal {ideal_dev:.1e}; non-increasing on {} curves: {monotone}",
                curves.len()
            ),
        ))
    })
}

pub fn criterion_6(seed: u64, betas: &[f64]) -> CheckRecord {
    timed(6, "thermal appends", None, || {
        let mut sim_dev: f64 = 0.0;
        let mut tanh_dev: f64 = 0.0;
        let mut cases = 0;
        for j in 1..=3 {
            let s = synthetic_setup(j)?;
            let mut messages: Vec<StateVector> =
                s.spec.typical_strings.iter().map(|&t| s.source.eigen_string_ket(s.spec.n, t)).collect();
            for psi in seeded_haar_states(s.spec.dim(), 5, seed.wrapping_add(j as u64)) {
                messages.push(typical_part(&s, &psi)?);
            }
            for psi in &messages {
                for eta in [0.0, 0.05, 0.2, 0.5] {
                    let sim = append_fidelity_simulated(psi, &s.plan, eta)?;
                    sim_dev = sim_dev.max((sim - append_fidelity_closed(eta, j)?).abs());
                    cases += 1;
                }
            }
            for &beta in betas {
                let t = append_fidelity_beta_j(beta, j)?;
                tanh_dev = tanh_dev.max((t - append_fidelity_closed(eta_from_beta(beta), j)?).abs());
            }
        }
        Ok((
            sim_dev <= 1e-10 && tanh_dev <= 1e-12,
            format!("pipeline vs (1-eta)^J {sim_dev:.1e} over {cases} cases; tanh form vs (1-eta)^J {tanh_dev:.1e}"),
        ))
    })
}

fn random_density(states: &[StateVector], weights: &[f64]) -> Result<DensityMatrix> {
    let dim = states[0].dim();
    let total: f64 = weights.iter().sum();
    let m = states
        .iter()
        .zip(weights)
        .fold(CMatrix::zeros(dim, dim), |acc, (s, w)| acc + s.outer() * C64::from(w / total));
    Ok(DensityMatrix::from_channel_output(m)?)
}

pub fn criterion_7(seed: u64) -> CheckRecord {
    timed(7, "cooling relations", None, || {
        let pinned = steps_required(0.1, 0.01)?;
        let mut failures = Vec::new();
        if pinned != 113 {
            failures.push(format!("steps_required(0.1, 0.01) = {pinned}"));
        }
        let (mut round_trips, mut ceiling_checks) = (0, 0);
        for li in 1..=20u64 {
            let steps = 5 * li;
            for ki in 1..=20 {
                let kappa = 0.05 * ki as f64;
                let eta = eta_achieved(steps, kappa)?;
                if eta < 1.0 {
                    round_trips += 1;
                    if steps_required(kappa, eta)? > steps {
                        failures.push(format!("round trip at L={steps}, kappa={kappa}"));
                    }
                    if ground_pop_bound(steps, kappa)? < 1.0 - eta - 1e-12 {
                        failures.push(format!("ground bound at L={steps}, kappa={kappa}"));
                    }
                }
                if eta <= 0.5 {
                    for j in 0..=3 {
                        let c = fidelity_ceilings(3, j, steps, kappa)?;
                        ceiling_checks += 1;
                        if append_fidelity_closed(eta, j)? > c.append + 1e-12 {
                            failures.push(format!("append ceiling at L={steps}, kappa={kappa}, J={j}"));
                        }
                        if haar_average_fidelity_from_eta(3, eta) > c.measure + 1e-12 {
                            failures.push(format!("measure ceiling at L={steps}, kappa={kappa}"));
                        }
                    }
                }
            }
        }
        let t1 = thermal_state(&[-1.0, 1.0], 1.0)?;
        let t2 = thermal_state(&[-1.0, 1.0], 2.0)?;
        let identity = entropy_production_diagnostic(&t1, &t2, &Operator::identity(4))?;
        let same_swap = entropy_production_diagnostic(&t1, &t1, &swap_gate())?;
        if identity.abs() > 1e-10 || same_swap.abs() > 1e-10 {
            failures.push(format!("trivial processes give {identity:.1e}, {same_swap:.1e}"));
        }
        let mut min_sigma = f64::INFINITY;
        let pool = seeded_haar_states(4, 60, seed);
        let qubits = seeded_haar_states(2, 80, seed.wrapping_add(1));
        for i in 0..20 {
            let sys = random_density(&qubits[4 * i..4 * i + 2], &[1.0, 0.3 + i as f64 / 20.0])?;
            let env = random_density(&qubits[4 * i + 2..4 * i + 4], &[1.0, 0.5])?;
            let h = pool[3 * i..3 * i + 3]
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(4, 4), |acc, (k, s)| acc + s.outer() * C64::from(1.0 + k as f64));
            let u = Operator::unitary(exp_hermitian(&h, 1.7))?;
            min_sigma = min_sigma.min(entropy_production_diagnostic(&sys, &env, &u)?);
        }
        if min_sigma < -1e-10 {
            failures.push(format!("negative entropy production {min_sigma:.3e}"));
        }
        let detail = format!(
            "L(0.1, 0.01)={pinned}; {round_trips} round trips, {ceiling_checks} ceiling checks; min random <Sigma> {min_sigma:.3e}"
        );
        if failures.is_empty() {
            Ok((true, detail))
        } else {
            Ok((false, format!("{detail}; failures: {}", failures.join(", "))))
        }
    })
}

pub fn criterion_8(cfg: &ExperimentConfig) -> CheckRecord {
    timed(8, "deterministic sweeps", None, || {
        let mut identical = true;
        for kind in [SweepKind::ProbeBeta, SweepKind::Cooling] {
            let a = sweep::run(kind, cfg)?.to_csv()?;
            let b = sweep::run(kind, cfg)?.to_csv()?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
            let c = pool.install(|| sweep::run(kind, cfg))?.to_csv()?;
            identical &= a == b && a == c;
        }
        Ok((identical, format!("probe-beta and cooling sweeps byte-identical across runs and thread counts: {identical}")))
    })
}

pub fn run_all(cfg: &ExperimentConfig) -> VerifySummary {
    let checks = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(cfg.samples, cfg.seed),
        criterion_4(cfg.seed),
        criterion_5(cfg.seed, &cfg.clock_sigma_grid),
        criterion_6(cfg.seed, &cfg.append_beta_grid),
        criterion_7(cfg.seed),
        criterion_8(cfg),
    ];
    let violations = checks.iter().filter(|c| !c.passed).count();
    VerifySummary { passed: violations == 0, violations, checks }
}
