//! Experiment report rows and their CSV serialization.

use crate::error::Result;
use crate::textfmt::fmt_g17;

/// One reconstruction run: configuration disclosures plus outcome metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub image_id: String,
    pub basis_tag: String,
    /// Solver: "bp" or "lasso".
    pub method: String,
    /// Radial-mask geometry; absent when the mask came from a file.
    pub lines: Option<usize>,
    pub points: Option<usize>,
    pub hermitian: bool,
    /// Realized measurement count M.
    pub measurements: usize,
    /// Coefficient dimension N = n_t * n_y.
    pub n: usize,
    pub iterations: usize,
    pub mu: f64,
    pub gamma: f64,
    pub psnr_db: f64,
    pub final_residual: f64,
    /// Lasso stationarity gap; absent for Basis Pursuit rows.
    pub kkt_residual: Option<f64>,
    /// Coefficients above 1e-3 of the max modulus in the solution.
    pub sparsity_k: usize,
    pub operator_norm: f64,
    /// Filter-bank slots whose effective exponent hit the clamp.
    pub lambda_clamped_pairs: usize,
    /// Relative imaginary part discarded when realizing the image.
    pub imag_residue: f64,
    /// `WxH->WxH` when the input was center-cropped; absent otherwise.
    pub crop: Option<String>,
    pub wall_time_seconds: f64,
}

pub const REPORT_HEADER: [&str; 20] = [
    "image_id",
    "basis_tag",
    "method",
    "lines",
    "points",
    "hermitian",
    "measurements",
    "n",
    "iterations",
    "mu",
    "gamma",
    "psnr_db",
    "final_residual",
    "kkt_residual",
    "sparsity_k",
    "operator_norm",
    "lambda_clamped_pairs",
    "imag_residue",
    "crop",
    "wall_time_seconds",
];

fn fields(r: &ExperimentReport) -> Vec<String> {
    let opt_usize = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        r.image_id.clone(),
        r.basis_tag.clone(),
        r.method.clone(),
        opt_usize(r.lines),
        opt_usize(r.points),
        r.hermitian.to_string(),
        r.measurements.to_string(),
        r.n.to_string(),
        r.iterations.to_string(),
        fmt_g17(r.mu),
        fmt_g17(r.gamma),
        fmt_g17(r.psnr_db),
        fmt_g17(r.final_residual),
        r.kkt_residual.map(fmt_g17).unwrap_or_default(),
        r.sparsity_k.to_string(),
        fmt_g17(r.operator_norm),
        r.lambda_clamped_pairs.to_string(),
        fmt_g17(r.imag_residue),
        r.crop.clone().unwrap_or_default(),
        fmt_g17(r.wall_time_seconds),
    ]
}

/// Fixed-schema CSV: header row plus one row per report, RFC-4180 quoting,
/// floats at 17 significant digits.
pub fn write_report_csv(reports: &[ExperimentReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(std::io::Error::other)?;
    for r in reports {
        w.write_record(fields(r)).map_err(std::io::Error::other)?;
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

/// The report schema plus a trailing `psnr_delta_db` column (each row's
/// PSNR minus the first basis' PSNR under the same solver).
pub fn write_comparison_csv(
    reports: &[ExperimentReport],
    deltas: &[Option<f64>],
) -> Result<Vec<u8>> {
    debug_assert_eq!(reports.len(), deltas.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    header.push("psnr_delta_db");
    w.write_record(&header).map_err(std::io::Error::other)?;
    for (r, d) in reports.iter().zip(deltas) {
        let mut row = fields(r);
        row.push(d.map(fmt_g17).unwrap_or_default());
        w.write_record(&row).map_err(std::io::Error::other)?;
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        ExperimentReport {
            image_id: "lena256".into(),
            basis_tag: "phsd-p2".into(),
            method: "bp".into(),
            lines: Some(50),
            points: Some(100),
            hermitian: true,
            measurements: 4735,
            n: 65536,
            iterations: 10,
            mu: 1.0,
            gamma: 100.0,
            psnr_db: 31.25,
            final_residual: 3.5e-13,
            kkt_residual: None,
            sparsity_k: 812,
            operator_norm: 1.0,
            lambda_clamped_pairs: 96,
            imag_residue: 2.0e-15,
            crop: None,
            wall_time_seconds: 4.25,
        }
    }

    #[test]
    fn empty_sequence_is_header_only() {
        let bytes = write_report_csv(&[]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("image_id,basis_tag,method,lines,points,hermitian,"));
    }

    #[test]
    fn one_report_makes_two_lines() {
        let bytes = write_report_csv(&[sample()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 2);
        let row = text.lines().nth(1).unwrap();
        assert!(row.contains("4735"));
        assert!(row.contains("3.5000000000000002e-13")); // 17 significant digits of 3.5e-13
        // kkt column empty for bp
        assert!(row.contains(",,"));
    }

    #[test]
    fn infinite_psnr_uses_the_inf_sentinel() {
        let mut r = sample();
        r.psnr_db = f64::INFINITY;
        let text = String::from_utf8(write_report_csv(&[r]).unwrap()).unwrap();
        assert!(text.contains(",inf,"));
    }

    #[test]
    fn comparison_adds_the_delta_column() {
        let bytes =
            write_comparison_csv(&[sample(), sample()], &[None, Some(-1.5)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.lines().next().unwrap().ends_with("psnr_delta_db"));
        assert!(text.lines().nth(2).unwrap().ends_with("-1.5000000000000000e0"));
    }

    #[test]
    fn header_matches_field_count() {
        assert_eq!(fields(&sample()).len(), REPORT_HEADER.len());
    }
}
