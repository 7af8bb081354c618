//! The full check suite, as `qbatt validate` runs it, printed as a report.

use qbatt::validation::{run_suite, Report};

pub fn run(seed: u64) -> qbatt::Result<Report> {
    Ok(run_suite(seed)?.0)
}

fn main() -> qbatt::Result<()> {
    let report = run(7)?;
    print!("{}", report.render());
    Ok(())
}
