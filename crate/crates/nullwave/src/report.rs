//! CSV artifacts. Formatting is fixed to 17 significant digits so a
//! given config and seed always reproduces byte-identical files.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

pub const REPORT_HEADER: &str = "problem,N_u,N_z,N_x,N_y,order,T,lhs_norm,data_norm_char,\
                                 data_norm_transverse,volume_source,rhs_bound,margin,\
                                 balance_residual,c,cT,seed";

/// One estimate-report row; field names follow the CSV columns.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub problem: &'static str,
    pub n: [usize; 4],
    pub order: usize,
    pub t_final: f64,
    pub lhs_norm: f64,
    pub data_norm_char: f64,
    pub data_norm_transverse: f64,
    pub volume_source: f64,
    pub rhs_bound: f64,
    pub margin: f64,
    pub balance_residual: f64,
    /// coupling bound, cone derivative runs; 0 elsewhere
    pub c: f64,
    pub ct: f64,
    pub seed: u64,
}

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl ReportRow {
    pub fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.n[0],
            self.n[1],
            self.n[2],
            self.n[3],
            self.order,
            fmt(self.t_final),
            fmt(self.lhs_norm),
            fmt(self.data_norm_char),
            fmt(self.data_norm_transverse),
            fmt(self.volume_source),
            fmt(self.rhs_bound),
            fmt(self.margin),
            fmt(self.balance_residual),
            fmt(self.c),
            fmt(self.ct),
            self.seed,
        )
    }
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "{REPORT_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.line())?;
    }
    Ok(())
}

/// One refinement level: axis-0 resolution and the measured residual.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub residual: f64,
}

/// Ratio and observed order appear from the second level on; the first
/// row leaves them empty.
pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "resolution,residual,ratio,order")?;
    for (k, row) in rows.iter().enumerate() {
        if k == 0 {
            writeln!(out, "{},{},,", row.resolution, fmt(row.residual))?;
        } else {
            let ratio = rows[k - 1].residual / row.residual;
            let step = row.resolution as f64 / rows[k - 1].resolution as f64;
            let order = ratio.ln() / step.ln();
            writeln!(out, "{},{},{},{}", row.resolution, fmt(row.residual), fmt(ratio), fmt(order))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_stable() {
        assert_eq!(fmt(0.0), "0.0000000000000000e0");
        assert_eq!(fmt(1.0), "1.0000000000000000e0");
        assert_eq!(fmt(-0.125), "-1.2500000000000000e-1");
        // 17 significant digits round-trip f64 exactly
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn report_row_has_all_columns() {
        let row = ReportRow {
            problem: "nullplane",
            n: [16, 16, 16, 16],
            order: 2,
            t_final: 1.0,
            lhs_norm: 0.0,
            data_norm_char: 0.0,
            data_norm_transverse: 0.0,
            volume_source: 0.0,
            rhs_bound: 0.0,
            margin: 0.0,
            balance_residual: 0.0,
            c: 0.0,
            ct: 0.0,
            seed: 7,
        };
        let line = row.line();
        assert_eq!(line.matches(',').count(), REPORT_HEADER.matches(',').count());
        assert!(line.starts_with("nullplane,16,16,16,16,2,"));
        assert!(line.ends_with(",7"));
    }

    #[test]
    fn convergence_rows_carry_ratios() {
        let dir = std::env::temp_dir().join("nullwave-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("convergence.csv");
        write_convergence(
            &path,
            &[
                ConvergenceRow { resolution: 16, residual: 8.0 },
                ConvergenceRow { resolution: 32, residual: 2.0 },
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "resolution,residual,ratio,order");
        assert!(lines.next().unwrap().ends_with(",,"));
        let second = lines.next().unwrap();
        assert!(second.contains("4.0000000000000000e0"), "{second}");
        assert!(second.contains("2.0000000000000000e0"), "{second}");
    }
}
