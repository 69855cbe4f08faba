//! `qdalt` command line: generate QD alternant keys, run the key-recovery
//! attack, verify keys, estimate work factors, and emit the degree-2
//! polynomial system.
//!
//! Exit codes: 0 success, 2 exhausted search / failed verification,
//! 1 usage or I/O errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdalt::attack::{
    estimate_workfactor, run_attack, verify_key, AttackConfig, AttackError, CondMode, RecoveredKey,
    Variant,
};
use qdalt::field::fe_from_hex;
use qdalt::keyio::{read_public_key, read_secret_key, write_public_key, write_secret_key};
use qdalt::polysys::emit_polysys;
use qdalt::presets::{preset, ParamPreset, PRESETS};
use qdalt::qd::{qd_keygen, KeygenError, QdPublicKey};
use qdalt::{make_field, Multiplier, Support};

#[derive(Parser)]
#[command(name = "qdalt")]
#[command(about = "Quasi-dyadic alternant key generation and conductor-based key recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair and write QDALT1 key files.
    Keygen {
        /// Named parameter set: TOY, DAGS_0, DAGS_1, DAGS_3, DAGS_5.
        #[arg(long, conflicts_with = "params")]
        preset: Option<String>,
        /// Raw parameters as ell,gamma,n0,r0.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_sk: PathBuf,
        #[arg(long)]
        out_pk: PathBuf,
    },
    /// Recover an equivalent secret key from a public key file.
    Attack {
        #[arg(long)]
        pk: PathBuf,
        /// bruteforce, random, or shortened.
        #[arg(long, default_value = "bruteforce")]
        variant: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// 0 picks a variant-appropriate default.
        #[arg(long, default_value_t = 0)]
        max_trials: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Conductor computation: exact or randomized.
        #[arg(long, default_value = "exact")]
        conductor: String,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Check a secret key or a recovered-key report against a public key.
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long, conflicts_with = "recovered")]
        sk: Option<PathBuf>,
        #[arg(long)]
        recovered: Option<PathBuf>,
    },
    /// Print the log2 work factor of the brute-force attack variant.
    Estimate {
        #[arg(long)]
        preset: String,
    },
    /// Emit the degree-2 polynomial system for external solvers.
    Polysys {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_EXHAUSTED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Keygen {
            preset,
            params,
            seed,
            out_sk,
            out_pk,
        } => cmd_keygen(preset, params, seed, &out_sk, &out_pk),
        Command::Attack {
            pk,
            variant,
            seed,
            max_trials,
            jobs,
            conductor,
            out_report,
        } => cmd_attack(
            &pk,
            &variant,
            seed,
            max_trials,
            jobs,
            &conductor,
            out_report.as_deref(),
        ),
        Command::Verify { pk, sk, recovered } => {
            cmd_verify(&pk, sk.as_deref(), recovered.as_deref())
        }
        Command::Estimate { preset } => cmd_estimate(&preset),
        Command::Polysys { pk, out } => cmd_polysys(&pk, &out),
    };
    ExitCode::from(code)
}

fn fail(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn resolve_params(
    preset_name: Option<String>,
    params: Option<Vec<usize>>,
) -> Result<(u32, u32, usize, usize), String> {
    match (preset_name, params) {
        (Some(name), None) => {
            let p: &ParamPreset = preset(&name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                format!("unknown preset '{name}'; known: {}", names.join(", "))
            })?;
            Ok((p.ell, p.gamma, p.n0, p.r0))
        }
        (None, Some(v)) => {
            if v.len() != 4 {
                return Err("--params needs exactly ell,gamma,n0,r0".into());
            }
            Ok((v[0] as u32, v[1] as u32, v[2], v[3]))
        }
        _ => Err("exactly one of --preset or --params is required".into()),
    }
}

fn cmd_keygen(
    preset_name: Option<String>,
    params: Option<Vec<usize>>,
    seed: u64,
    out_sk: &std::path::Path,
    out_pk: &std::path::Path,
) -> u8 {
    let (ell, gamma, n0, r0) = match resolve_params(preset_name, params) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let field = match make_field(ell) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let (sk, pk) = match qd_keygen(&field, gamma, n0, r0, seed) {
        Ok(pair) => pair,
        Err(e @ KeygenError::SamplingExhausted(_)) => {
            eprintln!("error: {e}");
            return EXIT_EXHAUSTED;
        }
        Err(e) => return fail(e),
    };
    if let Err(e) = fs::write(out_sk, write_secret_key(&sk)) {
        return fail(format!("{}: {e}", out_sk.display()));
    }
    if let Err(e) = fs::write(out_pk, write_public_key(&pk)) {
        return fail(format!("{}: {e}", out_pk.display()));
    }
    println!(
        "keygen: q=2^{ell} gamma={gamma} n={} k={} r={} seed={seed}",
        pk.n(),
        pk.dim(),
        sk.r()
    );
    EXIT_OK
}

fn default_trials(variant: Variant, pk: &QdPublicKey) -> u64 {
    match variant {
        // Enumerated searches stop on their own when exhausted.
        Variant::Bruteforce | Variant::Shortened => u64::MAX,
        Variant::RandomPairs => {
            let c = qdalt::attack::hidden_codim(pk.field(), pk.gamma()) as u32;
            let per_trial = (pk.field().q() as u64).saturating_pow(2 * c);
            per_trial.saturating_mul(16)
        }
    }
}

fn cmd_attack(
    pk_path: &std::path::Path,
    variant: &str,
    seed: u64,
    max_trials: u64,
    jobs: usize,
    conductor: &str,
    out_report: Option<&std::path::Path>,
) -> u8 {
    let text = match fs::read_to_string(pk_path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", pk_path.display())),
    };
    let pk = match read_public_key(&text) {
        Ok(pk) => pk,
        Err(e) => return fail(e),
    };
    let variant: Variant = match variant.parse() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let conductor_mode = match conductor {
        "exact" => CondMode::Exact,
        "randomized" => CondMode::Randomized,
        other => return fail(format!("unknown conductor mode '{other}'")),
    };
    let cfg = AttackConfig {
        variant,
        seed,
        max_trials: if max_trials == 0 {
            default_trials(variant, &pk)
        } else {
            max_trials
        },
        jobs: jobs.max(1),
        conductor_mode,
    };
    match run_attack(&pk, &cfg) {
        Ok(report) => {
            let text = report.to_text();
            print!("{text}");
            if let Some(path) = out_report {
                if let Err(e) = fs::write(path, &text) {
                    return fail(format!("{}: {e}", path.display()));
                }
            }
            EXIT_OK
        }
        Err(AttackError::SearchExhausted(tested)) => {
            eprintln!("error: search exhausted after {tested} candidates");
            EXIT_EXHAUSTED
        }
        Err(e) => fail(e),
    }
}

/// Pull `r`, `x`, `y` back out of an attack report.
fn parse_report_key(
    field: &std::sync::Arc<qdalt::Field>,
    text: &str,
) -> Result<RecoveredKey, String> {
    let mut r = None;
    let mut x = None;
    let mut y = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let hex_vec = |v: &str| -> Result<Vec<qdalt::Fe>, String> {
            v.split_whitespace()
                .map(|w| fe_from_hex(w).ok_or_else(|| format!("bad hex '{w}'")))
                .collect()
        };
        match key {
            "r" => r = Some(value.parse::<usize>().map_err(|e| e.to_string())?),
            "x" => x = Some(hex_vec(value)?),
            "y" => y = Some(hex_vec(value)?),
            _ => {}
        }
    }
    let (Some(r), Some(x), Some(y)) = (r, x, y) else {
        return Err("report is missing r, x, or y".into());
    };
    if x.iter().chain(&y).any(|e| (e.0 as u32) >= field.qsq()) {
        return Err("report entry outside the field".into());
    }
    let x = Support::new(x).map_err(|e| e.to_string())?;
    let y = Multiplier::new(y).map_err(|e| e.to_string())?;
    Ok(RecoveredKey { x, y, r })
}

fn cmd_verify(
    pk_path: &std::path::Path,
    sk_path: Option<&std::path::Path>,
    recovered_path: Option<&std::path::Path>,
) -> u8 {
    let pk_text = match fs::read_to_string(pk_path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", pk_path.display())),
    };
    let pk = match read_public_key(&pk_text) {
        Ok(pk) => pk,
        Err(e) => return fail(e),
    };
    let key = match (sk_path, recovered_path) {
        (Some(path), None) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            };
            match read_secret_key(&text) {
                Ok(sk) => RecoveredKey {
                    x: sk.support(),
                    y: sk.multiplier(),
                    r: sk.r(),
                },
                Err(e) => return fail(e),
            }
        }
        (None, Some(path)) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            };
            match parse_report_key(pk.field(), &text) {
                Ok(k) => k,
                Err(e) => return fail(e),
            }
        }
        _ => return fail("exactly one of --sk or --recovered is required"),
    };
    if verify_key(&key, &pk) {
        println!("verification: OK");
        EXIT_OK
    } else {
        println!("verification: FAIL");
        EXIT_EXHAUSTED
    }
}

fn cmd_estimate(preset_name: &str) -> u8 {
    let Some(p) = preset(preset_name) else {
        return fail(format!("unknown preset '{preset_name}'"));
    };
    let wf = estimate_workfactor(p.ell, p.gamma, p.n0);
    println!("log2_workfactor \u{2248} {}", wf.round() as i64);
    EXIT_OK
}

fn cmd_polysys(pk_path: &std::path::Path, out: &std::path::Path) -> u8 {
    let text = match fs::read_to_string(pk_path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", pk_path.display())),
    };
    let pk = match read_public_key(&text) {
        Ok(pk) => pk,
        Err(e) => return fail(e),
    };
    let sys = match emit_polysys(&pk) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if let Err(e) = fs::write(out, sys.to_text()) {
        return fail(format!("{}: {e}", out.display()));
    }
    println!(
        "polysys: U={} A={} T={} equations={}",
        sys.n_u(),
        sys.n_a,
        sys.n_t,
        sys.equations.len()
    );
    EXIT_OK
}
