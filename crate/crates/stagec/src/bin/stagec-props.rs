//! Standalone property runner: generates random well-typed programs and
//! drives the staging round-trip oracles for as many cases as asked.
//!
//! Failures print the offending seed so a case can be replayed exactly;
//! exit code 1 means an oracle rejected something.

use clap::{Parser, ValueEnum};
use stagec::fuel::Fuel;
use stagec::testkit;

#[derive(Parser)]
#[command(
    name = "stagec-props",
    about = "Randomized round-trip checks for the staging pipeline"
)]
struct Args {
    /// Base RNG seed; case i uses seed + i.
    #[arg(long, default_value_t = 0xC0FFEE)]
    seed: u64,
    /// How many cases to run per oracle.
    #[arg(long, default_value_t = 200)]
    cases: u64,
    /// Node-count ceiling for generated terms.
    #[arg(long, default_value_t = 30)]
    max_nodes: usize,
    /// Which oracle to run.
    #[arg(long, value_enum, default_value_t = Oracle::Both)]
    oracle: Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Stability,
    Soundness,
    Both,
}

fn main() {
    let args = Args::parse();
    let worker = std::thread::Builder::new()
        .name("props".to_string())
        .stack_size(64 * 1024 * 1024)
        .spawn(move || run(&args))
        .expect("failed to spawn worker thread");
    std::process::exit(worker.join().unwrap_or(101));
}

fn run(args: &Args) -> i32 {
    let fuel = Fuel::unlimited();
    let mut failed = false;
    let jobs: &[(&str, fn(u64, usize) -> testkit::Case, _)] = &[
        (
            "stability",
            testkit::gen_object_case as fn(u64, usize) -> testkit::Case,
            testkit::check_stability as fn(&Fuel, &testkit::Case) -> Result<(), String>,
        ),
        (
            "soundness",
            testkit::gen_staged_case,
            testkit::check_soundness,
        ),
    ];
    for (label, gen, oracle) in jobs {
        let wanted = match (*label, args.oracle) {
            (_, Oracle::Both) => true,
            ("stability", Oracle::Stability) => true,
            ("soundness", Oracle::Soundness) => true,
            _ => false,
        };
        if !wanted {
            continue;
        }
        match testkit::run_cases(&fuel, args.seed, args.cases, args.max_nodes, *gen, *oracle) {
            Ok(()) => println!(
                "{label}: {} cases up to {} nodes, all passed (seed {})",
                args.cases, args.max_nodes, args.seed
            ),
            Err(e) => {
                eprintln!("{label}: FAILED at {e}");
                failed = true;
            }
        }
    }
    if failed {
        1
    } else {
        0
    }
}
