//! Parameter sweeps written as CSV.

use std::fmt;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;

use thermocoding::append::{
    append_fidelity_beta_j, append_fidelity_closed, append_fidelity_simulated, eta_from_beta, synthetic_setup,
};
use thermocoding::coding::average_guess_overlap;
use thermocoding::cooling::{eta_achieved, fidelity_ceilings, ground_pop_bound, steps_required};
use thermocoding::measure::{
    average_fidelity_thermal, haar_average_fidelity_analytic, haar_average_fidelity_from_eta, haar_average_fidelity_mc, thermal_bound,
    thermal_bound_tight,
};
use thermocoding::timing::{clock_limited_fidelity, clock_limited_fidelity_full};
use thermocoding::{ClockSpec, CodingSetup, CVector, GeneratorSpec, StateVector, C64};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    ProbeBeta,
    ProbeDim,
    ClockSigma,
    AppendEta,
    AppendBeta,
    Cooling,
}

impl SweepKind {
    pub const ALL: [SweepKind; 6] = [
        SweepKind::ProbeBeta,
        SweepKind::ProbeDim,
        SweepKind::ClockSigma,
        SweepKind::AppendEta,
        SweepKind::AppendBeta,
        SweepKind::Cooling,
    ];
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(&'static str),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => (*s).to_string(),
        }
    }

    fn opt(x: Option<f64>) -> Cell {
        Cell::Float(x.unwrap_or(f64::NAN))
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        Ok(String::from_utf8(w.into_inner().context("flushing CSV")?)?)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Int(i) => *i as f64,
                    Cell::Float(x) => *x,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

fn row_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run(kind: SweepKind, cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    match kind {
        SweepKind::ProbeBeta => probe_beta(cfg),
        SweepKind::ProbeDim => probe_dim(cfg),
        SweepKind::ClockSigma => clock_sigma(cfg),
        SweepKind::AppendEta => append_eta(cfg),
        SweepKind::AppendBeta => append_beta(cfg),
        SweepKind::Cooling => cooling(cfg),
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn probe_beta(cfg: &ExperimentConfig) -> Result<Table> {
    let s = cfg.setup()?;
    let ens = s.ensemble()?;
    let (_, g) = average_guess_overlap(&ens, &s.guess)?;
    let n = s.spec.n;
    let rows = cfg
        .probe_beta_grid
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| -> Result<Vec<Cell>> {
            let c = cfg.probe.probe_at(cfg.probe.d, beta)?.c_max();
            let f = average_fidelity_thermal(&ens, &s.spec, c, &s.guess)?;
            let mc = haar_average_fidelity_mc(n, c, cfg.samples, row_seed(cfg.seed, i))?;
            Ok(vec![
                Cell::Float(beta),
                Cell::Float(c),
                Cell::Float(f),
                Cell::Float(thermal_bound(c, s.spec.delta)),
                Cell::Float(thermal_bound_tight(c, s.spec.delta, g)),
                Cell::Float(haar_average_fidelity_analytic(n, c)),
                Cell::Float(mc.mean),
                Cell::Float(mc.std_err),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header: header(&[
            "beta",
            "c_max",
            "avg_fidelity",
            "bound",
            "bound_tight",
            "haar_analytic",
            "haar_mc",
            "haar_mc_stderr",
        ]),
        rows,
    })
}

fn probe_dim(cfg: &ExperimentConfig) -> Result<Table> {
    let s = cfg.setup()?;
    let ens = s.ensemble()?;
    let (_, g) = average_guess_overlap(&ens, &s.guess)?;
    let rows = cfg
        .probe_dim_grid
        .par_iter()
        .map(|&d| -> Result<Vec<Cell>> {
            let c = cfg.probe.probe_at(d, cfg.probe.beta)?.c_max();
            let f = average_fidelity_thermal(&ens, &s.spec, c, &s.guess)?;
            Ok(vec![
                Cell::Int(d as i64),
                Cell::Float(c),
                Cell::Float(f),
                Cell::Float(thermal_bound(c, s.spec.delta)),
                Cell::Float(thermal_bound_tight(c, s.spec.delta, g)),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { header: header(&["d", "c_max", "avg_fidelity", "bound", "bound_tight"]), rows })
}

fn clock_sigma(cfg: &ExperimentConfig) -> Result<Table> {
    let s = cfg.setup()?;
    let ens = s.ensemble()?;
    let gen = GeneratorSpec::from_plan(&s.plan, &ClockSpec::new(cfg.clock_tau, 0.0)?)?;
    let c = cfg.probe.probe()?.c_max();
    let rows = cfg
        .clock_sigma_grid
        .par_iter()
        .map(|&sigma| -> Result<Vec<Cell>> {
            let clock = ClockSpec::new(cfg.clock_tau, sigma)?;
            let typical = ens.average(|psi| clock_limited_fidelity(psi, &s.spec, &gen, &clock))?;
            let ideal_probe = ens.average(|psi| clock_limited_fidelity_full(psi, &s.spec, &gen, &clock, 1.0, &s.guess))?;
            let probe = ens.average(|psi| clock_limited_fidelity_full(psi, &s.spec, &gen, &clock, c, &s.guess))?;
            Ok(vec![Cell::Float(sigma), Cell::Float(typical), Cell::Float(ideal_probe), Cell::Float(probe)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { header: header(&["sigma", "typical_term", "full_perfect_probe", "full_thermal_probe"]), rows })
}

/// Fixed typical-subspace message: `Σ_{t ∈ T} (t+1)|t'⟩`, normalized.
pub fn typical_probe_message(s: &CodingSetup) -> Result<StateVector> {
    let basis = s.source.eigenbasis(s.spec.n);
    let mut v = CVector::zeros(s.spec.dim());
    for &t in &s.spec.typical_strings {
        v += basis.column(t) * C64::from(t as f64 + 1.0);
    }
    Ok(StateVector::from_vector(v)?)
}

fn append_eta(cfg: &ExperimentConfig) -> Result<Table> {
    let plans = cfg
        .append_j
        .iter()
        .map(|&j| {
            let s = synthetic_setup(j)?;
            let msg = typical_probe_message(&s)?;
            Ok((j, s, msg))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg
        .append_eta_grid
        .par_iter()
        .map(|&eta| -> Result<Vec<Cell>> {
            let mut row = vec![Cell::Float(eta)];
            for (j, s, msg) in &plans {
                row.push(Cell::Float(append_fidelity_closed(eta, *j)?));
                row.push(Cell::Float(append_fidelity_simulated(msg, &s.plan, eta)?));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut names = vec!["eta".to_string()];
    for j in &cfg.append_j {
        names.push(format!("closed_j{j}"));
        names.push(format!("simulated_j{j}"));
    }
    Ok(Table { header: names, rows })
}

fn append_beta(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = cfg
        .append_beta_grid
        .iter()
        .map(|&beta| -> Result<Vec<Cell>> {
            let eta = eta_from_beta(beta);
            let mut row = vec![Cell::Float(beta), Cell::Float(eta)];
            for &j in &cfg.append_j {
                row.push(Cell::Float(append_fidelity_beta_j(beta, j)?));
                row.push(Cell::Float(append_fidelity_closed(eta, j)?));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut names = vec!["beta".to_string(), "eta".to_string()];
    for j in &cfg.append_j {
        names.push(format!("tanh_form_j{j}"));
        names.push(format!("closed_j{j}"));
    }
    Ok(Table { header: names, rows })
}

fn cooling(cfg: &ExperimentConfig) -> Result<Table> {
    let s = cfg.setup()?;
    let (n, j) = (s.spec.n, s.plan.discarded);
    let grid: Vec<(u64, f64)> =
        cfg.cooling_steps.iter().flat_map(|&l| cfg.cooling_kappa.iter().map(move |&k| (l, k))).collect();
    let rows = grid
        .par_iter()
        .map(|&(steps, kappa)| -> Result<Vec<Cell>> {
            let eta = eta_achieved(steps, kappa)?;
            let round_trip = if eta < 1.0 { Cell::Int(steps_required(kappa, eta)? as i64) } else { Cell::Float(f64::NAN) };
            let bound = ground_pop_bound(steps, kappa)?;
            let ceilings = fidelity_ceilings(n, j, steps, kappa).ok();
            let append_achieved = (eta <= 1.0).then(|| (1.0 - eta).powi(j as i32));
            let measure_achieved = (eta <= 0.5).then(|| haar_average_fidelity_from_eta(n, eta));
            Ok(vec![
                Cell::Int(steps as i64),
                Cell::Float(kappa),
                Cell::Float(eta),
                round_trip,
                Cell::Float(bound),
                Cell::opt(ceilings.map(|c| c.append)),
                Cell::opt(append_achieved),
                Cell::opt(ceilings.map(|c| c.measure)),
                Cell::opt(measure_achieved),
                Cell::Text(if ceilings.is_some() { "ok" } else { "vacuous" }),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header: header(&[
            "steps",
            "kappa",
            "eta_achieved",
            "steps_round_trip",
            "ground_pop_bound",
            "append_ceiling",
            "append_achieved",
            "measure_ceiling",
            "measure_achieved",
            "status",
        ]),
        rows,
    })
}

/// Shape summary of a sweep CSV that passed [`check_schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub rows: usize,
    pub columns: usize,
}

/// Header present, every row the same width, first column a non-decreasing number.
pub fn check_schema(text: &str) -> Result<Schema> {
    if text.contains('\r') {
        bail!("CSV must use LF line endings");
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let columns = reader.headers()?.len();
    if columns == 0 {
        bail!("empty header");
    }
    let mut prev = f64::NEG_INFINITY;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != columns {
            bail!("row {i} has {} fields, header has {columns}", record.len());
        }
        let x: f64 = record[0].parse().with_context(|| format!("row {i}: grid value {:?}", &record[0]))?;
        if x < prev {
            bail!("grid column decreases at row {i}");
        }
        prev = x;
        rows += 1;
    }
    if rows == 0 {
        bail!("no data rows");
    }
    Ok(Schema { rows, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { samples: 200, ..Default::default() }
    }

    #[test]
    fn float_format_has_twelve_digits() {
        assert_eq!(format_float(0.5), "5.00000000000e-1");
        assert_eq!(format_float(-123.456), "-1.23456000000e2");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn every_sweep_passes_schema() {
        let cfg = small();
        for kind in SweepKind::ALL {
            let table = run(kind, &cfg).unwrap();
            let text = table.to_csv().unwrap();
            let schema = check_schema(&text).unwrap();
            assert_eq!(schema.columns, table.header.len(), "{kind}");
            assert_eq!(schema.rows, table.rows.len(), "{kind}");
            assert!(text.ends_with('\n'));
        }
    }

    #[test]
    fn schema_rejects_bad_tables() {
        assert!(check_schema("a,b\n1,2\n0,3\n").is_err());
        assert!(check_schema("a,b\n1,2\n2\n").is_err());
        assert!(check_schema("a,b\r\n1,2\r\n").is_err());
        assert!(check_schema("a,b\n").is_err());
    }

    #[test]
    fn clock_sweep_starts_at_ideal_typical_term() {
        let cfg = small();
        let table = run(SweepKind::ClockSigma, &cfg).unwrap();
        let s = cfg.setup().unwrap();
        let ens = s.ensemble().unwrap();
        let ideal = ens
            .average(|psi| {
                let x = s.spec.typical_weight(psi)?;
                Ok(x * x)
            })
            .unwrap();
        let col = table.column("typical_term").unwrap();
        assert!((col[0] - ideal).abs() < 1e-12);
        assert!(col.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn probe_beta_fidelity_is_nondecreasing() {
        let table = run(SweepKind::ProbeBeta, &small()).unwrap();
        let f = table.column("avg_fidelity").unwrap();
        assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn append_eta_rows_are_exact_powers() {
        let cfg = small();
        let table = run(SweepKind::AppendEta, &cfg).unwrap();
        let eta = table.column("eta").unwrap();
        for &j in &cfg.append_j {
            let closed = table.column(&format!("closed_j{j}")).unwrap();
            let sim = table.column(&format!("simulated_j{j}")).unwrap();
            for i in 0..eta.len() {
                assert_eq!(closed[i], (1.0 - eta[i]).powi(j as i32));
                assert!((sim[i] - closed[i]).abs() < 1e-10);
            }
        }
    }
}
