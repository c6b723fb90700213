//! One line per acceptance criterion; exits nonzero when any fails.

use std::process::ExitCode;

use dirac_bag::verify::{self, CriterionRow, DiskSweep, Status, VerifyConfig};

fn report(rows: &mut Vec<CriterionRow>, row: CriterionRow) {
    println!("{}", row.line());
    rows.push(row);
}

fn main() -> ExitCode {
    let config = VerifyConfig::default();
    let sweep = DiskSweep::new();
    let mut rows = Vec::new();
    report(&mut rows, verify::identities_row(config.seed));
    report(&mut rows, verify::bessel_row());
    report(&mut rows, verify::disk_fd_row());
    report(&mut rows, verify::rate_row(&sweep));
    report(&mut rows, verify::first_order_row(&sweep));
    report(&mut rows, verify::any_order_row(&sweep));
    report(&mut rows, verify::layer_row());
    report(&mut rows, verify::quadratic_form_row(config.seed));
    for row in verify::grid_rows(&config) {
        report(&mut rows, row);
    }
    let determinism = verify::determinism_row(&config, &rows[..8]);
    report(&mut rows, determinism);

    let failed: Vec<usize> = rows.iter().filter(|r| r.status != Status::Pass).map(|r| r.id).collect();
    println!("{} of {} criteria passed", rows.len() - failed.len(), rows.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
