//! Acceptance criteria. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use lambda_phase::algebra::{
    generator, lowering, phase_eigensystem, phase_exponential, phase_operator, raising, verify_polar_identity,
    AtomOperator,
};
use lambda_phase::config::{preset, tau_to_time, RunConfig, PRESET_NAMES};
use lambda_phase::dynamics::{SubspaceIndex, SystemParams};
use lambda_phase::eigen::eigh;
use lambda_phase::oracle::compare_block_and_full;
use lambda_phase::relphase::{block_phase_exponential, rel_phase_eigenstates, trapping_config, verify_deformed_polar};
use lambda_phase::scenario::{run_scenario, TimeSeries};
use lambda_phase::verify::phase_spectrum_residual;
use lambda_phase::{Level, PhaseLabel, Transition};

struct Outcome {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Outcome {
    fn print(&self) {
        let within = self.limit.is_none_or(|l| self.elapsed <= l);
        let status = if self.passed && within { "PASS" } else { "FAIL" };
        let time = match self.limit {
            Some(l) => format!("{:.2} s (limit {} s)", self.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2} s", self.elapsed.as_secs_f64()),
        };
        println!("[{status}] {} {}: {} [{time}]", self.id, self.title, self.detail);
    }

    fn ok(&self) -> bool {
        self.passed && self.limit.is_none_or(|l| self.elapsed <= l)
    }
}

fn timed(
    id: &'static str,
    title: &'static str,
    limit: Option<u64>,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome { id, title, passed, detail, elapsed: start.elapsed(), limit: limit.map(Duration::from_secs) }
}

fn column(series: &TimeSeries, name: &str) -> Vec<f64> {
    series.column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

/// Values of `name` at grid points with `lo ≤ τ ≤ hi`.
fn window(series: &TimeSeries, name: &str, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let taus = series.taus();
    let vals = column(series, name);
    taus.into_iter().zip(vals).filter(|(t, _)| *t >= lo - 1e-12 && *t <= hi + 1e-12).unzip()
}

fn trapezoid_mean(taus: &[f64], vals: &[f64]) -> f64 {
    let area: f64 = taus.windows(2).zip(vals.windows(2)).map(|(t, v)| (t[1] - t[0]) * (v[0] + v[1]) / 2.0).sum();
    area / (taus[taus.len() - 1] - taus[0])
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn ac1() -> (bool, String) {
    let mut table = 0.0_f64;
    for i in 1..=3 {
        for j in 1..=3 {
            for k in 1..=3 {
                for l in 1..=3 {
                    let lhs = generator(i, j).unwrap().commutator(&generator(k, l).unwrap());
                    let mut rhs = AtomOperator::zero();
                    if i == l {
                        rhs = rhs + generator(k, j).unwrap();
                    }
                    if k == j {
                        rhs = rhs - generator(i, l).unwrap();
                    }
                    table = table.max(lhs.distance(&rhs));
                }
            }
        }
    }
    let s13p = raising(Level::One, Level::Three);
    let coupling = s13p
        .commutator(&lowering(Level::Two, Level::Three))
        .distance(&(-raising(Level::One, Level::Two)))
        .max(s13p.commutator(&raising(Level::Two, Level::Three)).distance(&AtomOperator::zero()));
    let atomic = verify_polar_identity(Transition::OneThree)
        .unwrap()
        .max(verify_polar_identity(Transition::TwoThree).unwrap());
    let mut deformed = 0.0_f64;
    for na in 1..=12 {
        for nb in 1..=12 {
            deformed = deformed.max(verify_deformed_polar(SubspaceIndex::new(na, nb)).unwrap());
        }
    }
    let passed = table == 0.0 && coupling == 0.0 && atomic < 1e-12 && deformed < 1e-12;
    (
        passed,
        format!(
            "commutator table {table:e}, coupling relations {coupling:e} (need 0); atomic polar {atomic:.1e}, deformed polar {deformed:.1e} (< 1e-12)"
        ),
    )
}

fn ac2() -> (bool, String) {
    let exact = [0.0, FRAC_PI_2, -FRAC_PI_2];
    let mut labels_exact = true;
    let mut spectrum = 0.0_f64;
    let mut ortho = 0.0_f64;
    for t in [Transition::OneThree, Transition::TwoThree] {
        let sys = phase_eigensystem(t).unwrap();
        labels_exact &= sys.eigenvalues == exact;
        let phi = phase_operator(t).unwrap();
        let m = DMatrix::from_iterator(3, 3, phi.matrix().iter().copied());
        let mut vals = eigh(&m).unwrap().values;
        vals.sort_by(f64::total_cmp);
        for (v, w) in vals.iter().zip([-FRAC_PI_2, 0.0, FRAC_PI_2]) {
            spectrum = spectrum.max((v - w).abs());
        }
        let e = phase_exponential(t).unwrap();
        let em = DMatrix::from_iterator(3, 3, e.matrix().iter().copied());
        spectrum = spectrum.max(phase_spectrum_residual(&em).unwrap());
        for a in PhaseLabel::ALL {
            for b in PhaseLabel::ALL {
                let ip = sys.vector(a).dotc(sys.vector(b));
                let target = if a == b { 1.0 } else { 0.0 };
                ortho = ortho.max((ip - C64::new(target, 0.0)).norm());
            }
        }
    }
    for t in Transition::ALL {
        for &(na, nb) in &[(1, 1), (5, 2), (50, 50), (101, 11)] {
            let idx = SubspaceIndex::new(na, nb);
            let e = block_phase_exponential(t, idx).unwrap();
            spectrum = spectrum.max(phase_spectrum_residual(&e.matrix).unwrap());
            let states = rel_phase_eigenstates(t, idx).unwrap();
            for s in &states.states {
                labels_exact &= exact.contains(&s.label.angle());
                let lhs = e.apply(&s.vector);
                let phase = C64::from_polar(1.0, s.label.angle());
                for (x, y) in lhs.iter().zip(&s.vector) {
                    spectrum = spectrum.max((x - phase * y).norm());
                }
                for r in &states.states {
                    let ip: C64 = s.vector.iter().zip(&r.vector).map(|(x, y)| x.conj() * y).sum();
                    let target = if s.label == r.label { 1.0 } else { 0.0 };
                    ortho = ortho.max((ip - C64::new(target, 0.0)).norm());
                }
            }
        }
    }
    let passed = labels_exact && spectrum < 1e-12 && ortho < 1e-12;
    (
        passed,
        format!("labels exactly {{0, +pi/2, -pi/2}}: {labels_exact}; spectrum residual {spectrum:.1e}, orthonormality {ortho:.1e} (< 1e-12)"),
    )
}

fn ac3() -> (bool, String) {
    let p = SystemParams::resonant(1.0, 1.0, 1.0, SystemParams::ground(Level::One));
    let times: Vec<f64> = (0..50).map(|k| tau_to_time(2.0 * k as f64 / 49.0, p.g_a, p.nbar_a)).collect();
    let r = compare_block_and_full(&p, 8, 8, &times).unwrap();
    (
        r.max_amplitude_diff < 1e-8,
        format!("max |block - full| = {:.2e} (< 1e-8) over 50 points, dimension {}", r.max_amplitude_diff, r.dimension),
    )
}

fn ac4(runs: &BTreeMap<&str, TimeSeries>) -> (bool, String) {
    let mut sums = 0.0_f64;
    let mut ident = 0.0_f64;
    for series in runs.values() {
        let pops = ["pop1", "pop2", "pop3"].map(|c| column(series, c));
        for t in Transition::ALL {
            let cols = PhaseLabel::ALL.map(|l| column(series, &format!("p{}_{}", t.label(), l.suffix())));
            let spectator = pops[t.roles().spectator.index()].clone();
            for k in 0..series.rows.len() {
                sums = sums.max((cols[0][k] + cols[1][k] + cols[2][k] - 1.0).abs());
                ident = ident.max((cols[0][k] - spectator[k]).abs());
            }
        }
    }
    (
        sums < 1e-9 && ident < 1e-9,
        format!("over {} presets: max |sum - 1| = {sums:.1e}, max |P(Phi0) - population| = {ident:.1e} (< 1e-9)", runs.len()),
    )
}

fn ac5(fig2: &TimeSeries) -> (bool, String) {
    let corr = |t: &str| {
        let (_, p) = window(fig2, &format!("p{t}_p"), 0.0, 2.0);
        let (_, m) = window(fig2, &format!("p{t}_m"), 0.0, 2.0);
        pearson(&p, &m)
    };
    let (c13, c23) = (corr("13"), corr("23"));
    (c13 < 0.0 && c23 < 0.0, format!("corr(p13_p, p13_m) = {c13:.4}, corr(p23_p, p23_m) = {c23:.4} (< 0)"))
}

fn ac6(fig3a: &TimeSeries) -> (bool, String) {
    let (_, p13) = window(fig3a, "p13_0", 0.0, 2.0);
    let max13 = max_of(&p13);
    let (t, p23) = window(fig3a, "p23_0", 0.3, 0.8);
    let avg23 = trapezoid_mean(&t, &p23);
    (
        max13 < 0.05 && (avg23 - 0.5).abs() <= 0.1,
        format!("max P13_0 = {max13:.4} (< 0.05); mean P23_0 on [0.3, 0.8] = {avg23:.4} (0.5 +/- 0.1)"),
    )
}

fn ac7(fig3b: &TimeSeries) -> (bool, String) {
    let (t, p13) = window(fig3b, "p13_0", 0.3, 0.8);
    let (_, p23) = window(fig3b, "p23_0", 0.3, 0.8);
    let (a13, a23) = (trapezoid_mean(&t, &p13), trapezoid_mean(&t, &p23));
    (
        (a13 - 0.25).abs() <= 0.05 && (a23 - 0.5).abs() <= 0.05,
        format!("mean P13_0 = {a13:.4} (0.25 +/- 0.05), mean P23_0 = {a23:.4} (0.5 +/- 0.05) on [0.3, 0.8]"),
    )
}

fn ac8(fig4: &TimeSeries) -> (bool, String) {
    let (_, p12) = window(fig4, "p12_0", 0.0, 2.0);
    let trapped = max_of(&p12);
    let mut control_cfg = RunConfig::from_params(&trapping_config(0.0, 50.0), 2.0, 4001);
    control_cfg.transitions = vec![Transition::OneTwo];
    let control = run_scenario(&control_cfg).unwrap();
    let untrapped = max_of(&column(&control, "p12_0"));
    (
        trapped < 0.05 && untrapped >= 0.05,
        format!("trapped max P12_0 = {trapped:.2e} (< 0.05); control (phi = 0) max = {untrapped:.4} (>= 0.05)"),
    )
}

fn ac9(first: &BTreeMap<&str, TimeSeries>) -> (bool, String) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let mut identical = Vec::new();
    for name in PRESET_NAMES {
        let again = pool.install(|| run_scenario(&preset(name).unwrap()).unwrap());
        identical.push((name, again.to_csv() == first[name].to_csv()));
    }
    let all = identical.iter().all(|(_, same)| *same);
    let detail = identical.iter().map(|(n, s)| format!("{n}: {}", if *s { "identical" } else { "DIFFERS" })).collect::<Vec<_>>();
    (all, format!("second run on a 3-thread pool vs first run: {}", detail.join(", ")))
}

fn main() -> ExitCode {
    let mut outcomes = vec![
        timed("AC1", "algebra exactness", Some(1), ac1),
        timed("AC2", "phase spectra", Some(1), ac2),
        timed("AC3", "oracle equivalence", Some(30), ac3),
    ];
    outcomes.iter().for_each(Outcome::print);

    let mut runs = BTreeMap::new();
    let mut preset_time = BTreeMap::new();
    for name in PRESET_NAMES {
        let start = Instant::now();
        runs.insert(name, run_scenario(&preset(name).unwrap()).unwrap());
        preset_time.insert(name, start.elapsed());
    }
    let with_run = |id, title, limit: u64, name: &str, f: &dyn Fn(&TimeSeries) -> (bool, String)| {
        let mut o = timed(id, title, Some(limit), || f(&runs[name]));
        o.elapsed += preset_time[name];
        o
    };
    let rest = vec![
        timed("AC4", "normalization and identities", None, || ac4(&runs)),
        with_run("AC5", "weak-field anti-correlation (fig2)", 5, "fig2", &ac5),
        with_run("AC6", "strong/weak asymmetric fields (fig3a)", 120, "fig3a", &ac6),
        with_run("AC7", "strong symmetric fields (fig3b)", 180, "fig3b", &ac7),
        with_run("AC8", "coherent trapping (fig4)", 180, "fig4", &ac8),
        timed("AC9", "determinism", None, || ac9(&runs)),
    ];
    rest.iter().for_each(Outcome::print);
    outcomes.extend(rest);

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.ok()).map(|o| o.id).collect();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
