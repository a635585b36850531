use std::process::ExitCode;

use nilgrade::verify::{run_suite, Suite};

fn main() -> ExitCode {
    let outcomes = run_suite(Suite::All);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
