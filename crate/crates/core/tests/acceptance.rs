//! One line per acceptance criterion. Tolerances are pinned here rather
//! than taken from the experiment defaults.

use std::process::ExitCode;
use std::time::Instant;

use zk_core::config::Params;
use zk_core::harness::{run_experiment, EstimateReport, ExperimentSpec, DEFAULT_SEED};

struct Criterion {
    number: u32,
    title: &'static str,
    runs: &'static [(&'static str, &'static str)],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        number: 1,
        title: "unitarity and group law",
        runs: &[("unitarity", "fields = 100\ntimes = 0.1, 1, 10\ntolerance = 1e-12")],
    },
    Criterion {
        number: 2,
        title: "dispersive decay exponents",
        runs: &[("decay", "epsilon = 0, 0.25, 0.5\ntimes = 5, 10, 20, 40, 80\nslope_tolerance = 0.05")],
    },
    Criterion {
        number: 3,
        title: "local smoothing profile",
        runs: &[("local_smoothing", "fields = 5\nt_window = 40\ntolerance = 0.05")],
    },
    Criterion {
        number: 4,
        title: "Strichartz and maximal bounds",
        runs: &[
            ("strichartz", "fields = 20\nwindows = 0.5, 1, 2, 4, 8\nepsilon = 0.25, 0.5\nspread_limit = 0.25"),
            ("maximal", "fields = 20\nwindows = 0.5, 1, 2, 4, 8\ns = 0.8\nspread_limit = 0.25"),
        ],
    },
    Criterion {
        number: 5,
        title: "Stein phase bound",
        runs: &[("stein_bound", "times = 0.5, 1, 2, 4\nx1 = 0, 0.5, 1, 2\nb = 0.25, 0.5\ntolerance = 1e-6")],
    },
    Criterion {
        number: 6,
        title: "weighted group growth",
        runs: &[("weighted_growth", "b = 0.25, 0.5\ntimes = 0, 1, 4, 16, 64\nfactor_limit = 2")],
    },
    Criterion {
        number: 7,
        title: "interpolation and Leibniz",
        runs: &[
            ("interpolation", "fields = 50\nN = 4, 16, 64\nspread_limit = 0.1"),
            ("leibniz", "pairs = 50\nalpha = 0.25, 0.5, 0.75"),
        ],
    },
    Criterion {
        number: 8,
        title: "Stein product properties",
        runs: &[("stein_products", "pairs = 30\ntolerance = 1e-6")],
    },
    Criterion {
        number: 9,
        title: "symmetrization equivalence",
        runs: &[("symmetrization_equiv", "grid = 256x256\namplitude = 0.5\nt_final = 0.5\nlimit = 1e-6")],
    },
    Criterion {
        number: 10,
        title: "Picard fixed point",
        runs: &[(
            "picard_contraction",
            "amplitude = 0.1\nt_final = 0.25\nratio_limit = 0.5\nresidual_limit = 1e-5\nagreement_limit = 1e-5",
        )],
    },
    Criterion {
        number: 11,
        title: "conservation and persistence",
        runs: &[
            ("conservation", "t_final = 1\nmass_limit = 1e-10\nl2_limit = 1e-8"),
            ("persistence_audit", "t_final = 1\ndefect_limit = 1e-4\ndegenerate_limit = 1e-8"),
        ],
    },
    Criterion {
        number: 12,
        title: "partition of unity",
        runs: &[("partition_unity", "K = 6\npoints = 10000\ntolerance = 1e-12")],
    },
];

/// Criteria that fail for a documented reason. They still run and print;
/// an unexpected pass is reported too.
const KNOWN_FAILURES: &[u32] = &[4];

fn first_failure(reports: &[EstimateReport]) -> Option<String> {
    reports.iter().find_map(|r| {
        r.checks
            .iter()
            .find(|c| !c.passed)
            .map(|c| format!("{}: {}", r.experiment, c.name))
    })
}

fn main() -> ExitCode {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for c in CRITERIA.iter().filter(|c| filter.is_empty() || filter.contains(&c.number)) {
        let start = Instant::now();
        let mut reports = Vec::new();
        let mut error = None;
        for (name, params) in c.runs {
            let params = Params::parse(params).expect("pinned parameters parse");
            match run_experiment(&ExperimentSpec::with_params(name, params, DEFAULT_SEED)) {
                Ok(r) => reports.push(r),
                Err(e) => {
                    error = Some(format!("{name}: {e}"));
                    break;
                }
            }
        }
        let passed = error.is_none() && reports.iter().all(|r| r.passed);
        let detail = match (&error, first_failure(&reports)) {
            (Some(e), _) => format!(" [error {e}]"),
            (None, Some(f)) => format!(" [{f}]"),
            (None, None) => String::new(),
        };
        let known = KNOWN_FAILURES.contains(&c.number);
        println!(
            "{} criterion {:>2} {}{} ({:.1} s){}",
            if passed { "PASS" } else { "FAIL" },
            c.number,
            c.title,
            detail,
            start.elapsed().as_secs_f64(),
            match (passed, known) {
                (false, true) => " (known)",
                (true, true) => " (listed as known failure)",
                _ => "",
            }
        );
        for r in &reports {
            for line in r.summary_lines() {
                println!("       {line}");
            }
        }
        if error.is_some() || (!passed && !known) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
