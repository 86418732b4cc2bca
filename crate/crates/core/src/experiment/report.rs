use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Duration;

use super::ExperimentError;
use crate::space::HyperParams;

/// Text used for a dispersion that is undefined (a single repeat).
pub const NOT_AVAILABLE: &str = "NA";

/// Per-epoch accuracy statistics across repeats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    /// Mean test accuracy in percent.
    pub mean: f64,
    /// Sample variance of the accuracy percentages; `None` with one repeat.
    pub dispersion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// `baseline` or `ldwpso`.
    pub method: String,
    pub dataset: String,
    /// `accuracies[r][e]`: test accuracy in percent of repeat `r` after epoch `e + 1`.
    pub accuracies: Vec<Vec<f64>>,
    /// Configuration trained in each repeat.
    pub chosen: Vec<HyperParams>,
    /// Wall-clock time of each named phase, summed over repeats.
    pub timings: Vec<(String, Duration)>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (divisor `n - 1`); `None` for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

impl RunReport {
    pub fn repeats(&self) -> usize {
        self.accuracies.len()
    }

    pub fn epochs(&self) -> usize {
        self.accuracies.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> Vec<EpochRow> {
        (0..self.epochs())
            .map(|e| {
                let col: Vec<f64> = self.accuracies.iter().map(|run| run[e]).collect();
                EpochRow { epoch: e + 1, mean: mean(&col), dispersion: sample_variance(&col) }
            })
            .collect()
    }

    pub fn final_mean(&self) -> f64 {
        self.rows().last().map_or(f64::NAN, |r| r.mean)
    }

    /// Columns: `epoch,mean_accuracy,dispersion,run_1..run_R`, full precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["epoch".to_string(), "mean_accuracy".into(), "dispersion".into()];
        header.extend((1..=self.repeats()).map(|r| format!("run_{r}")));
        w.write_record(&header)?;
        for row in self.rows() {
            let mut rec =
                vec![row.epoch.to_string(), row.mean.to_string(), opt_text(row.dispersion, |v| v.to_string())];
            rec.extend(self.accuracies.iter().map(|run| run[row.epoch - 1].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: `repeat` followed by the twelve hyperparameter names.
    pub fn write_hyperparams_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["repeat"];
        header.extend(HyperParams::FIELD_NAMES);
        w.write_record(&header)?;
        for (r, p) in self.chosen.iter().enumerate() {
            let mut rec = vec![(r + 1).to_string()];
            rec.extend(p.fields().into_iter().map(|(_, v)| v));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} on {} ({} repeats)\n", self.method, self.dataset, self.repeats());
        s.push_str("epoch  accuracy%  dispersion\n");
        for r in self.rows() {
            let _ = writeln!(s, "{:>5}  {:>9}  {:>10}", r.epoch, sig6(r.mean), opt_text(r.dispersion, sig6));
        }
        for (phase, d) in &self.timings {
            let _ = writeln!(s, "{phase}: {:.1}s", d.as_secs_f64());
        }
        s
    }
}

fn opt_text(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| NOT_AVAILABLE.to_string(), f)
}

fn parse_opt(field: &str) -> Result<Option<f64>, ExperimentError> {
    if field == NOT_AVAILABLE {
        Ok(None)
    } else {
        parse_num(field).map(Some)
    }
}

fn parse_num(field: &str) -> Result<f64, ExperimentError> {
    field.trim().parse().map_err(|_| ExperimentError::Report(format!("`{field}` is not a number")))
}

/// Decimal text with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.5}");
    }
    // The exponent after rounding to six digits, so 99.9999995 counts as 1e2.
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Reads the per-epoch rows of a report written by [`RunReport::write_csv`].
pub fn read_report_rows<R: Read>(input: R) -> Result<Vec<EpochRow>, ExperimentError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ExperimentError::Report(format!("missing column `{name}`")))
    };
    let (ie, im, id) = (col("epoch")?, col("mean_accuracy")?, col("dispersion")?);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let epoch = rec[ie].parse().map_err(|_| ExperimentError::Report(format!("bad epoch `{}`", &rec[ie])))?;
        rows.push(EpochRow { epoch, mean: parse_num(&rec[im])?, dispersion: parse_opt(&rec[id])? });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub epoch: usize,
    pub baseline: EpochRow,
    pub ldwpso: EpochRow,
}

/// Pairs two reports epoch by epoch.
pub fn compare(baseline: &[EpochRow], ldwpso: &[EpochRow]) -> Result<Vec<ComparisonRow>, ExperimentError> {
    if baseline.len() != ldwpso.len() {
        return Err(ExperimentError::Report(format!(
            "baseline has {} epochs, ldwpso has {}",
            baseline.len(),
            ldwpso.len()
        )));
    }
    baseline
        .iter()
        .zip(ldwpso)
        .enumerate()
        .map(|(i, (b, l))| {
            if b.epoch != i + 1 || l.epoch != i + 1 {
                return Err(ExperimentError::Report(format!("epoch rows out of order at row {}", i + 1)));
            }
            Ok(ComparisonRow { epoch: i + 1, baseline: *b, ldwpso: *l })
        })
        .collect()
}

const COMPARISON_HEADER: [&str; 5] =
    ["epoch", "baseline_accuracy", "baseline_dispersion", "ldwpso_accuracy", "ldwpso_dispersion"];

fn comparison_fields(r: &ComparisonRow) -> [String; 5] {
    [
        r.epoch.to_string(),
        sig6(r.baseline.mean),
        opt_text(r.baseline.dispersion, sig6),
        sig6(r.ldwpso.mean),
        opt_text(r.ldwpso.dispersion, sig6),
    ]
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for r in rows {
        w.write_record(comparison_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_comparison_csv<R: Read>(input: R) -> Result<Vec<ComparisonRow>, ExperimentError> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(ExperimentError::Report(format!("expected 5 columns, found {}", rec.len())));
        }
        let epoch = rec[0].parse().map_err(|_| ExperimentError::Report(format!("bad epoch `{}`", &rec[0])))?;
        rows.push(ComparisonRow {
            epoch,
            baseline: EpochRow { epoch, mean: parse_num(&rec[1])?, dispersion: parse_opt(&rec[2])? },
            ldwpso: EpochRow { epoch, mean: parse_num(&rec[3])?, dispersion: parse_opt(&rec[4])? },
        });
    }
    Ok(rows)
}

/// Console rendering of the comparison.
pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut s = format!(
        "{:>5} | {:>12} {:>12} | {:>12} {:>12}\n",
        "epoch", "baseline %", "dispersion", "ldwpso %", "dispersion"
    );
    s.push_str(&"-".repeat(s.len() - 1));
    s.push('\n');
    for r in rows {
        let f = comparison_fields(r);
        let _ = writeln!(s, "{:>5} | {:>12} {:>12} | {:>12} {:>12}", f[0], f[1], f[2], f[3], f[4]);
    }
    s
}
