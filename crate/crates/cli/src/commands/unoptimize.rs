use serde::Serialize;
use unopt_core::circuit::qasm::to_qasm_with_comments;
use unopt_core::optimizer::optimize;
use unopt_core::unoptimizer::Provenance;
use unopt_core::{gate_count, unoptimize, GateCount, OptimizerConfig, RngStream, Strategy};

use super::{guard_inputs, read_qasm};
use crate::error::CliResult;
use crate::output::{sha256_hex, OutputDir, Stamp};
use crate::UnoptimizeArgs;

pub const QASM_FILE: &str = "unoptimized.qasm";
pub const REPORT_FILE: &str = "report.json";

#[derive(Serialize)]
struct Effective<'a> {
    command: &'a str,
    input_sha256: String,
    iterations: usize,
    strategy: Strategy,
    seed: u64,
    optimizer: OptimizerConfig,
}

#[derive(Serialize)]
struct GateCounts {
    input: GateCount,
    optimized: GateCount,
    unoptimized: GateCount,
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    stamp: Stamp,
    strategy: Strategy,
    iterations: usize,
    /// Relative to the optimized input.
    lambda: f64,
    gate_counts: GateCounts,
    provenance: Provenance,
}

pub fn run(args: &UnoptimizeArgs) -> CliResult<()> {
    let (text, c) = read_qasm(&args.input)?;
    let optimizer = OptimizerConfig::default();
    let effective = Effective {
        command: "unoptimize",
        input_sha256: sha256_hex(text.as_bytes()),
        iterations: args.iterations,
        strategy: args.strategy,
        seed: args.seed,
        optimizer: optimizer.clone(),
    };
    let stamp = Stamp { config_sha256: sha256_hex(&serde_json::to_vec(&effective).expect("serializable")), seed: args.seed };
    for name in [QASM_FILE, REPORT_FILE] {
        guard_inputs(&args.out.join(name), &[&args.input])?;
    }
    let mut dir = OutputDir::create(&args.out, "unoptimize", stamp)?;
    let result = (|| {
        let r = unoptimize(&c, args.iterations, args.strategy, &RngStream::new(args.seed, 0), &optimizer)?;
        let mut comments = dir.stamp().comment_lines();
        comments.push(format!("lambda={}", crate::output::fmt_f64(r.lambda)));
        dir.write(QASM_FILE, &to_qasm_with_comments(&r.circuit, &comments)?)?;
        let report = Report {
            stamp: dir.stamp().clone(),
            strategy: args.strategy,
            iterations: args.iterations,
            lambda: r.lambda,
            gate_counts: GateCounts {
                input: gate_count(&c)?,
                optimized: gate_count(&optimize(&c, &optimizer)?)?,
                unoptimized: gate_count(&r.circuit)?,
            },
            provenance: r.provenance,
        };
        dir.write_json(REPORT_FILE, &report)?;
        println!("lambda {}", crate::output::fmt_f64(r.lambda));
        dir.finish()
    })();
    if let Err(e) = &result {
        dir.abort(e);
    }
    result
}
