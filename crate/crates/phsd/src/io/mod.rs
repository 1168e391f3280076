//! Serialization: PGM images, FITS primary HDUs (read-only), mask files,
//! and CSV experiment reports.

mod fits;
mod maskfile;
mod pgm;
mod report;

pub use fits::read_fits_primary;
pub use maskfile::{read_mask, write_mask};
pub use pgm::{read_pgm, write_pgm};
pub use report::{write_comparison_csv, write_report_csv, ExperimentReport, REPORT_HEADER};
