use serde::Serialize;
use unopt_core::circuit::qasm::to_qasm_with_comments;
use unopt_core::workloads::qaoa::DEFAULT_P2_ANGLES;
use unopt_core::workloads::{qaoa_circuit, qv_circuit, random_3regular, QaoaParams};
use unopt_core::RngStream;

use super::emit;
use crate::error::CliResult;
use crate::output::{fmt_f64, sha256_hex, Stamp};
use crate::{QaoaGenArgs, QvGenArgs};

fn stamp<T: Serialize>(effective: &T, seed: u64) -> Stamp {
    Stamp { config_sha256: sha256_hex(&serde_json::to_vec(effective).expect("serializable")), seed }
}

pub fn qv(args: &QvGenArgs) -> CliResult<()> {
    let c = qv_circuit(args.qubits, &mut RngStream::new(args.seed, 0))?;
    let s = stamp(&("qv-gen", args.qubits, args.seed), args.seed);
    let mut comments = s.comment_lines();
    comments.push(format!("quantum volume circuit, {} qubits", args.qubits));
    emit(args.out.as_deref(), &to_qasm_with_comments(&c, &comments)?)
}

pub fn qaoa(args: &QaoaGenArgs) -> CliResult<()> {
    let gammas = args.gammas.clone().unwrap_or_else(|| DEFAULT_P2_ANGLES[..2].to_vec());
    let betas = args.betas.clone().unwrap_or_else(|| DEFAULT_P2_ANGLES[2..].to_vec());
    let params = QaoaParams::new(gammas, betas)?;
    let g = random_3regular(args.vertices, &mut RngStream::new(args.seed, 0))?;
    let c = qaoa_circuit(&g, &params)?;
    let s = stamp(&("qaoa-gen", args.vertices, args.seed, &params.gammas, &params.betas), args.seed);
    let mut comments = s.comment_lines();
    let angles = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
    comments.push(format!("gammas={}", angles(&params.gammas)));
    comments.push(format!("betas={}", angles(&params.betas)));
    let edges: Vec<String> = g.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
    comments.push(format!("edges={}", edges.join(" ")));
    emit(args.out.as_deref(), &to_qasm_with_comments(&c, &comments)?)
}
