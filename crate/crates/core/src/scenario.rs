//! Scenario execution and file output.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::levels::{PhaseLabel, Transition};
use crate::simulation::{Sample, Simulation};

/// Per-row tolerance on `Σ_r P(Φ_r) = 1` and on the norm.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesRow {
    pub tau: f64,
    /// `[p0, p+, p−]` for each transition of the owning series.
    pub distributions: Vec<[f64; 3]>,
    pub populations: [f64; 3],
    pub norm: f64,
}

impl TimeSeriesRow {
    fn from_sample(tau: f64, sample: &Sample, transitions: &[Transition]) -> Self {
        TimeSeriesRow {
            tau,
            distributions: transitions.iter().map(|t| sample.distribution(*t).as_array()).collect(),
            populations: sample.populations,
            norm: sample.norm,
        }
    }

    pub fn check(&self) -> Result<()> {
        for d in &self.distributions {
            let sum: f64 = d.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::RowInvariant { tau: self.tau, reason: format!("phase probabilities sum to {sum}") });
            }
        }
        if (self.norm - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::RowInvariant { tau: self.tau, reason: format!("norm is {}", self.norm) });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub transitions: Vec<Transition>,
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["tau".to_string()];
        for t in &self.transitions {
            h.extend(PhaseLabel::ALL.iter().map(|l| format!("p{}_{}", t.label(), l.suffix())));
        }
        h.extend(["pop1", "pop2", "pop3", "norm"].map(String::from));
        h
    }

    /// Values of one named column, if present.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let pos = self.header().iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| row_values(r)[pos]).collect())
    }

    pub fn taus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tau).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row_values(row).iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Static line plot of every phase-probability column against τ.
    pub fn to_svg(&self) -> String {
        const W: f64 = 900.0;
        const H: f64 = 520.0;
        const LEFT: f64 = 60.0;
        const RIGHT: f64 = 170.0;
        const TOP: f64 = 20.0;
        const BOTTOM: f64 = 50.0;
        const COLORS: [&str; 9] =
            ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];

        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let tau_max = self.rows.last().map_or(1.0, |r| r.tau).max(f64::MIN_POSITIVE);
        let x = |tau: f64| LEFT + pw * tau / tau_max;
        let y = |p: f64| TOP + ph * (1.0 - p.clamp(0.0, 1.0));

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for k in 0..=4 {
            let p = k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{p:.2}</text>"#,
                LEFT - 6.0,
                y(p) + 4.0
            );
            let tau = tau_max * p;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{tau:.2}</text>"#,
                x(tau),
                H - BOTTOM + 18.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">τ</text>"#,
            LEFT + pw / 2.0,
            H - 10.0
        );

        let names = self.header();
        for (col, name) in names.iter().enumerate().skip(1).take(3 * self.transitions.len()) {
            let color = COLORS[(col - 1) % COLORS.len()];
            let points: Vec<String> =
                self.rows.iter().map(|r| format!("{:.2},{:.2}", x(r.tau), y(row_values(r)[col]))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                points.join(" ")
            );
            let ly = TOP + 16.0 * col as f64;
            let lx = W - RIGHT + 15.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{name}</text>"#, lx + 26.0, ly + 4.0);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn row_values(row: &TimeSeriesRow) -> Vec<f64> {
    let mut v = Vec::with_capacity(1 + 3 * row.distributions.len() + 4);
    v.push(row.tau);
    row.distributions.iter().for_each(|d| v.extend_from_slice(d));
    v.extend_from_slice(&row.populations);
    v.push(row.norm);
    v
}

/// Evolves the configured initial state over the τ grid and checks every row.
pub fn run_scenario(config: &RunConfig) -> Result<TimeSeries> {
    config.validate()?;
    let sim = Simulation::new(config.params())?;
    let taus = config.tau_grid();
    let times: Vec<f64> = taus.iter().map(|&tau| config.time_of(tau)).collect();
    let samples = sim.run(&times)?;
    let transitions = config.ordered_transitions();
    let rows: Vec<TimeSeriesRow> = taus
        .iter()
        .zip(&samples)
        .map(|(&tau, s)| TimeSeriesRow::from_sample(tau, s, &transitions))
        .collect();
    rows.iter().try_for_each(TimeSeriesRow::check)?;
    Ok(TimeSeries { transitions, rows })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_csv_file(series: &TimeSeries, path: &Path) -> Result<()> {
    write_file(path, &series.to_csv())
}

pub fn write_svg_file(series: &TimeSeries, path: &Path) -> Result<()> {
    write_file(path, &series.to_svg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn small() -> RunConfig {
        let mut cfg = preset("fig2").unwrap();
        cfg.tau_steps = 11;
        cfg
    }

    #[test]
    fn header_follows_requested_transitions() {
        let mut cfg = small();
        let full = run_scenario(&cfg).unwrap();
        assert_eq!(
            full.header().join(","),
            "tau,p13_0,p13_p,p13_m,p23_0,p23_p,p23_m,p12_0,p12_p,p12_m,pop1,pop2,pop3,norm"
        );
        cfg.transitions = vec![Transition::OneTwo, Transition::TwoThree];
        let part = run_scenario(&cfg).unwrap();
        assert_eq!(part.header().join(","), "tau,p23_0,p23_p,p23_m,p12_0,p12_p,p12_m,pop1,pop2,pop3,norm");
        assert_eq!(part.column("p23_0"), full.column("p23_0"));
        assert!(part.column("p13_0").is_none());
    }

    #[test]
    fn csv_formatting() {
        let series = run_scenario(&small()).unwrap();
        let csv = series.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0.0000000000000000e0,"), "{}", lines[1]);
        let first: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        let want = [0.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 1.0];
        assert!(first.iter().zip(want).all(|(x, y)| (x - y).abs() < 1e-12));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 14);
            for field in line.split(',') {
                let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
                assert_eq!(mantissa.len(), 18, "{field}");
                field.parse::<f64>().unwrap();
            }
        }
        assert_eq!(csv, run_scenario(&small()).unwrap().to_csv());
    }

    #[test]
    fn uncoupled_columns_are_constant() {
        let mut cfg = small();
        cfg.g_b = 0.0;
        let mut p = cfg.params();
        p.g_a = 0.0;
        // g_a must stay positive for τ, so check the simulation directly
        let sim = Simulation::new(p).unwrap();
        let a = sim.sample(0.0).unwrap();
        let b = sim.sample(123.0).unwrap();
        assert_eq!(a.populations, b.populations);
        let series = run_scenario(&cfg).unwrap();
        assert!(series.rows.iter().all(|r| (r.populations[1]).abs() < 1e-15));
    }

    #[test]
    fn row_checks() {
        let mut row = TimeSeriesRow { tau: 0.1, distributions: vec![[0.5, 0.25, 0.25]], populations: [1.0, 0.0, 0.0], norm: 1.0 };
        assert!(row.check().is_ok());
        row.distributions[0][0] = 0.6;
        assert!(matches!(row.check(), Err(Error::RowInvariant { .. })));
        row.distributions[0][0] = 0.5;
        row.norm = 0.99;
        assert!(row.check().is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_probability_column() {
        let series = run_scenario(&small()).unwrap();
        let svg = series.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 9);
        assert!(svg.contains("p12_m"));
    }
}
