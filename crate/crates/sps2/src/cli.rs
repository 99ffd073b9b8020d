//! Command-line front end: instance generation, reconstruction runs with
//! JSON-lines reports, and pairwise circuit verification.  All randomness is
//! seeded; re-running a command with the same seed reproduces its outputs
//! byte for byte.
//!
//! Exit codes: 0 success, 1 reconstruction failed or circuits inequivalent
//! (honest negative), 2 usage/parse/configuration error, 3 internal
//! invariant violation.

use crate::circuit::{
    decompose, random_instance, structural_match, Gate, InstanceMode, SpsCircuit,
};
use crate::field::{extension_degree_for_bits, Field};
use crate::reconstruct::{
    corner_case_reconstruct, high_rank_reconstruct, low_rank_reconstruct, ReconResult,
    ReconStatus, ReconstructionConfig,
};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::rc::Rc;

/// Reconstruction of depth-3 powering-free circuits with top fan-in two
/// from black-box evaluations over finite fields.
#[derive(Parser)]
#[command(name = "sps2", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded random fan-in-2 instances as circuit JSON files.
    Generate(GenerateArgs),
    /// Reconstruct circuits from the black boxes of the given circuit files.
    Reconstruct(ReconstructArgs),
    /// Compare two circuit files: randomized identity test plus a
    /// structural comparison when both have top fan-in two.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of variables.
    #[arg(long)]
    n: usize,
    /// Product-gate degree.
    #[arg(long)]
    d: usize,
    /// Base field characteristic (prime).
    #[arg(long)]
    q: u64,
    /// Extension degree of the evaluation field.
    #[arg(long, default_value_t = 1)]
    ext: usize,
    /// Target rank of the non-shared factor span (default: min(n, 2d)).
    #[arg(long)]
    rank: Option<usize>,
    /// Instance flavor: general | corner | low-rank.
    #[arg(long, default_value = "general")]
    mode: String,
    /// Number of instances.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed; instance i uses a seed derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for instance files and the manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Input circuit JSON files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Driver selection: auto | low | high | corner.
    #[arg(long, default_value = "auto")]
    algo: String,
    /// Master seed; file i uses a seed derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials for the final identity test of every returned circuit.
    #[arg(long)]
    pit_trials: Option<usize>,
    /// Minimum ordinary-line count per candidate in the high-rank path.
    #[arg(long)]
    tau_x: Option<usize>,
    /// Part size when partitioning the ordinary-line set.
    #[arg(long)]
    tau_b: Option<usize>,
    /// Target independent-set size for the known-factors routine.
    #[arg(long)]
    tau_r: Option<usize>,
    /// Low-rank search cap on the subset size r.
    #[arg(long)]
    rmax: Option<usize>,
    /// Evaluation-field size floor: lift to q^k >= 2^ext_bits.
    #[arg(long, default_value_t = 20)]
    ext_bits: u32,
    /// Directory for reconstructed circuit files (default: next to input).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append JSON-lines run reports here (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    circuit_a: PathBuf,
    circuit_b: PathBuf,
    /// Identity-test trials.
    #[arg(long, default_value_t = 40)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// One line of the reconstruction report stream.
#[derive(Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    pub mode: String,
    /// success | not-applicable | failed | error
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fan_in: Option<usize>,
    pub queries: u64,
    pub wall_ms: u128,
    pub pit_trials: usize,
    /// Present when the input file itself has top fan-in two.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_match: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    rank: usize,
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    n: usize,
    d: usize,
    q: u64,
    ext: usize,
    rank: usize,
    mode: String,
    count: usize,
    files: Vec<ManifestEntry>,
}

fn derived_seed(master: u64, i: usize) -> u64 {
    // SplitMix64-style stream split so per-instance seeds are decorrelated.
    let mut z = master ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Precondition(_) | Error::ConfigGate(_) => 2,
        Error::Internal(_) => 3,
        _ => 1,
    }
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version via this path with code 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<i32> {
    let mode: InstanceMode = a.mode.parse()?;
    let rank = a.rank.unwrap_or_else(|| a.n.min(2 * a.d));
    std::fs::create_dir_all(&a.out)
        .map_err(|e| Error::Parse(format!("cannot create {}: {e}", a.out.display())))?;
    let mut files = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let s = derived_seed(a.seed, i);
        let mut rng = ChaCha12Rng::seed_from_u64(s);
        let field = Rc::new(Field::extension(a.q, a.ext, &mut rng)?);
        let inst = random_instance(a.n, a.d, &field, rank, mode, &mut rng)?;
        let name = format!("instance_{i:03}.json");
        let path = a.out.join(&name);
        std::fs::write(&path, inst.circuit.to_json())
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
        files.push(ManifestEntry {
            file: name,
            seed: s,
            rank: inst.truth.rank,
        });
    }
    let manifest = Manifest {
        seed: a.seed,
        n: a.n,
        d: a.d,
        q: a.q,
        ext: a.ext,
        rank,
        mode: a.mode.clone(),
        count: a.count,
        files,
    };
    let mpath = a.out.join("manifest.json");
    std::fs::write(
        &mpath,
        serde_json::to_string_pretty(&manifest).expect("serialization cannot fail"),
    )
    .map_err(|e| Error::Parse(format!("cannot write {}: {e}", mpath.display())))?;
    println!("wrote {} instance file(s) + manifest to {}", a.count, a.out.display());
    Ok(0)
}

/// Rebuild the circuit over an evaluation field of size at least 2^bits,
/// keeping the data (factors and base gate scalars) unchanged.  The
/// original field is kept when it already meets the floor.
fn lift_for_evaluation(
    c: &SpsCircuit,
    bits: u32,
    rng: &mut impl rand::Rng,
) -> Result<SpsCircuit> {
    let q = c.field.q();
    let need = extension_degree_for_bits(q, bits);
    if c.field.k() >= need {
        return Ok(c.clone());
    }
    let field = Rc::new(Field::extension(q, need, rng)?);
    let gates = c
        .gates
        .iter()
        .map(|g| {
            let coeffs = g.coeff.coeffs();
            if coeffs.iter().skip(1).any(|&x| x != 0) {
                return Err(Error::ConfigGate(
                    "gate coefficient lies outside the base field; cannot lift the \
                     evaluation field — rerun with --ext-bits 0"
                        .into(),
                ));
            }
            Ok(Gate {
                coeff: field.embed(coeffs[0]),
                factors: g.factors.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SpsCircuit::new(field, c.n, c.d, gates)
}

fn run_driver(
    algo: &str,
    oracle: &crate::oracle::PolyOracle,
    cfg: &ReconstructionConfig,
    rng: &mut impl rand::Rng,
) -> Result<(ReconResult, String)> {
    match algo {
        "low" => Ok((low_rank_reconstruct(oracle, cfg, rng)?, "low".into())),
        "high" => Ok((high_rank_reconstruct(oracle, cfg, rng)?, "high".into())),
        "corner" => Ok((corner_case_reconstruct(oracle, cfg, rng)?, "corner".into())),
        "auto" => {
            // The high-rank driver tries the pure-power corner path first,
            // so it covers corner inputs too; fall back to the low-rank
            // search when it comes up empty.
            let hi = high_rank_reconstruct(oracle, cfg, rng)?;
            if hi.status == ReconStatus::Success {
                return Ok((hi, "high".into()));
            }
            Ok((low_rank_reconstruct(oracle, cfg, rng)?, "low".into()))
        }
        other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
    }
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<i32> {
    if !matches!(a.algo.as_str(), "auto" | "low" | "high" | "corner") {
        return Err(Error::Parse(format!("unknown algorithm {:?}", a.algo)));
    }
    let mut report_file = match &a.report {
        Some(p) => Some(
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::Parse(format!("cannot open {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut emit = |r: &RunReport| -> Result<()> {
        let line = serde_json::to_string(r).expect("serialization cannot fail");
        match &mut report_file {
            Some(f) => writeln!(f, "{line}")
                .map_err(|e| Error::Parse(format!("cannot write report: {e}"))),
            None => {
                println!("{line}");
                Ok(())
            }
        }
    };
    let mut worst = 0i32;
    for (i, input) in a.inputs.iter().enumerate() {
        let s = derived_seed(a.seed, i);
        let instance = input
            .file_stem()
            .map(|x| x.to_string_lossy().into_owned())
            .unwrap_or_else(|| input.display().to_string());
        let mut error_report = |msg: String, code: i32, worst: &mut i32| -> Result<()> {
            *worst = (*worst).max(code);
            emit(&RunReport {
                instance: instance.clone(),
                seed: s,
                mode: a.algo.clone(),
                status: "error".into(),
                fan_in: None,
                queries: 0,
                wall_ms: 0,
                pit_trials: 0,
                structural_match: None,
                output: None,
                message: Some(msg),
            })
        };
        let text = match std::fs::read_to_string(input) {
            Ok(t) => t,
            Err(e) => {
                error_report(format!("cannot read {}: {e}", input.display()), 2, &mut worst)?;
                continue;
            }
        };
        let circuit = match SpsCircuit::from_json(&text) {
            Ok(c) => c,
            Err(e) => {
                error_report(format!("parse: {e}"), 2, &mut worst)?;
                continue;
            }
        };
        let mut rng = ChaCha12Rng::seed_from_u64(s);
        let lifted = match lift_for_evaluation(&circuit, a.ext_bits, &mut rng) {
            Ok(c) => c,
            Err(e) => {
                error_report(format!("field lift: {e}"), exit_code_for(&e), &mut worst)?;
                continue;
            }
        };
        // Ground truth for the structural verdict, when the input itself
        // is fan-in 2.  The reconstruction call below sees only the oracle.
        let truth = decompose(&lifted).ok();
        let oracle = lifted.oracle();
        let mut cfg = ReconstructionConfig::for_degree(lifted.d);
        if let Some(v) = a.pit_trials {
            cfg.pit_trials = v;
        }
        if let Some(v) = a.tau_x {
            cfg.tau_x = v;
        }
        if let Some(v) = a.tau_b {
            cfg.tau_b = v;
        }
        if let Some(v) = a.tau_r {
            cfg.tau_r = v;
        }
        if let Some(v) = a.rmax {
            cfg.r_max = v;
        }
        let (result, mode_used) = match run_driver(&a.algo, &oracle, &cfg, &mut rng) {
            Ok(x) => x,
            Err(e) => {
                error_report(format!("{e}"), exit_code_for(&e), &mut worst)?;
                continue;
            }
        };
        let status = match result.status {
            ReconStatus::Success => "success",
            ReconStatus::NotApplicable => "not-applicable",
            ReconStatus::Failed => "failed",
        };
        let mut out_path = None;
        let mut verdict = None;
        if let Some(c) = &result.circuit {
            if let Some(t) = &truth {
                verdict = decompose(c).ok().map(|got| structural_match(&got, t));
            }
            let dir = a
                .out
                .clone()
                .unwrap_or_else(|| input.parent().unwrap_or(Path::new(".")).to_path_buf());
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::Parse(format!("cannot create {}: {e}", dir.display())))?;
            let p = dir.join(format!("{instance}.reconstructed.json"));
            std::fs::write(&p, c.to_json())
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", p.display())))?;
            out_path = Some(p.display().to_string());
        }
        if result.status != ReconStatus::Success {
            worst = worst.max(1);
        }
        emit(&RunReport {
            instance,
            seed: s,
            mode: mode_used,
            status: status.into(),
            fan_in: result.fan_in,
            queries: result.queries,
            wall_ms: result.elapsed.as_millis(),
            pit_trials: cfg.pit_trials,
            structural_match: verdict,
            output: out_path,
            message: None,
        })?;
    }
    Ok(worst)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let read = |p: &Path| -> Result<SpsCircuit> {
        let t = std::fs::read_to_string(p)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
        SpsCircuit::from_json(&t)
    };
    let ca = read(&a.circuit_a)?;
    let cb = read(&a.circuit_b)?;
    if ca.field.q() != cb.field.q()
        || ca.field.k() != cb.field.k()
        || ca.field.modulus() != cb.field.modulus()
    {
        return Err(Error::Precondition("field mismatch between the two files".into()));
    }
    if ca.n != cb.n || ca.d != cb.d {
        return Err(Error::Precondition(format!(
            "shape mismatch: ({}, {}) vs ({}, {})",
            ca.n, ca.d, cb.n, cb.d
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(a.seed);
    let equivalent =
        crate::circuit::equivalent_pit(&ca.oracle(), &cb.oracle(), a.trials, &mut rng)?;
    let structural = match (decompose(&ca), decompose(&cb)) {
        (Ok(da), Ok(db)) => Some(structural_match(&da, &db)),
        _ => None,
    };
    let verdict = serde_json::json!({
        "equivalent": equivalent,
        "trials": a.trials,
        "structural_match": structural,
    });
    println!("{}", serde_json::to_string_pretty(&verdict).expect("serialization cannot fail"));
    Ok(if equivalent { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_dir_sorted(p: &Path) -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(p)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn generate_is_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        for d in [d1.path(), d2.path()] {
            let code = run([
                "sps2", "generate", "--n", "5", "--d", "4", "--q", "7", "--ext", "2",
                "--rank", "5", "--count", "2", "--seed", "7",
                "--out", d.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        let names = read_dir_sorted(d1.path());
        assert_eq!(names, vec!["instance_000.json", "instance_001.json", "manifest.json"]);
        for name in names {
            let a = std::fs::read(d1.path().join(&name)).unwrap();
            let b = std::fs::read(d2.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between identically seeded runs");
        }
    }

    #[test]
    fn generate_rejects_infeasible_rank() {
        let d = tempfile::tempdir().unwrap();
        let code = run([
            "sps2", "generate", "--n", "4", "--d", "2", "--q", "5", "--rank", "6",
            "--out", d.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn reconstruct_reports_parse_error() {
        let d = tempfile::tempdir().unwrap();
        let bad = d.path().join("bad.json");
        std::fs::write(&bad, "{ not json").unwrap();
        let report = d.path().join("report.jsonl");
        let code = run([
            "sps2", "reconstruct", bad.to_str().unwrap(),
            "--report", report.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
        let line = std::fs::read_to_string(&report).unwrap();
        let r: RunReport = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert_eq!(r.status, "error");
    }

    #[test]
    fn end_to_end_generate_reconstruct_verify() {
        let d = tempfile::tempdir().unwrap();
        let gen = d.path().join("gen");
        assert_eq!(
            run([
                "sps2", "generate", "--n", "6", "--d", "3", "--q", "7", "--ext", "8",
                "--rank", "5", "--mode", "low-rank", "--count", "1", "--seed", "43",
                "--out", gen.to_str().unwrap(),
            ]),
            0
        );
        let input = gen.join("instance_000.json");
        let report = d.path().join("report.jsonl");
        let code = run([
            "sps2", "reconstruct", input.to_str().unwrap(), "--algo", "low",
            "--seed", "1", "--report", report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let line = std::fs::read_to_string(&report).unwrap();
        let r: RunReport = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert_eq!(r.status, "success");
        let out = r.output.expect("success writes a circuit file");
        assert_eq!(
            run(["sps2", "verify", input.to_str().unwrap(), &out, "--trials", "20"]),
            0
        );
    }
}
