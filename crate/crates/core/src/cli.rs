//! Batch runner behind the `qlspec` binary.
//!
//! Every command writes `<prefix>.csv` and `<prefix>.manifest.json`. The CSV
//! holds only values derived from the config, so reruns are byte-identical;
//! wall time goes to the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunCommand, RunConfig};
use crate::error::{Error, Result};
use crate::matter::build_system;
use crate::operator::C64;
use crate::oracle::oracle_validate;
use crate::response::{chi3, chi3_ordered, gate_table, signal_scan, Order, SignalKind};
use crate::superop::{fdt_check, two_atom_demo, Driving, TwoAtomParams};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `[output] directory`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub verbose: bool,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub command: &'static str,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
    /// `key = value` lines also written as CSV metadata.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: String,
    version: &'a str,
    csv: String,
    rows: usize,
    threads: usize,
    wall_time_seconds: f64,
}

/// Tabular output with `#` metadata lines.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    pub meta: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for m in &self.meta {
            let _ = writeln!(s, "# {m}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cplx(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one configured command and writes its outputs.
pub fn run(cfg: &RunConfig, config_text: &str, opts: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = opts.threads {
            if n == 0 {
                return Err(Error::Config("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
    };
    let mut csv = pool.install(|| compute(cfg, opts.verbose))?;
    let threads = pool.current_num_threads();

    let hash = sha256_hex(config_text.as_bytes());
    let version = env!("CARGO_PKG_VERSION");
    let notes = csv.meta.clone();
    let mut meta = vec![
        format!("command = {}", cfg.run.name()),
        format!("config_sha256 = {hash}"),
        format!("qlspec_version = {version}"),
    ];
    meta.append(&mut csv.meta);
    csv.meta = meta;

    let dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output.directory.clone());
    fs::create_dir_all(&dir)?;
    let prefix = cfg.prefix();
    let csv_path = dir.join(format!("{prefix}.csv"));
    let manifest_path = dir.join(format!("{prefix}.manifest.json"));
    fs::write(&csv_path, csv.render())?;
    let manifest = Manifest {
        command: cfg.run.name(),
        config_sha256: hash,
        version,
        csv: file_name(&csv_path),
        rows: csv.rows.len(),
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(&manifest_path, json + "\n")?;
    Ok(RunSummary { command: cfg.run.name(), csv_path, manifest_path, rows: csv.rows.len(), notes })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn log(verbose: bool, msg: impl AsRef<str>) {
    if verbose {
        eprintln!("[qlspec] {}", msg.as_ref());
    }
}

fn compute(cfg: &RunConfig, verbose: bool) -> Result<Csv> {
    let sys = cfg.matter_system()?;
    let state0 = cfg.matter_state(&sys)?;
    log(verbose, format!("matter {} with {} levels, epsilon {}", sys.label(), sys.dim(), sys.epsilon()));
    match &cfg.run {
        RunCommand::Chi3Scan { frequencies, pattern } => {
            let grid = frequencies.values()?;
            let mut csv = Csv::new(&[
                "omega", "omega1", "omega2", "omega3", "chi3_re", "chi3_im", "chi3_ordered_re", "chi3_ordered_im",
            ]);
            csv.rows = grid
                .par_iter()
                .map(|&w| {
                    let t = pattern.map(|p| p * w);
                    let om = t[0] + t[1] + t[2];
                    let x = chi3(&sys, &state0, om, t)?;
                    let y = chi3_ordered(&sys, &state0, om, t)?;
                    let mut r = vec![num(om), num(t[0]), num(t[1]), num(t[2])];
                    r.extend(cplx(x));
                    r.extend(cplx(y));
                    Ok(r)
                })
                .collect::<Result<_>>()?;
            csv.meta.push(format!("pattern = {} {} {}", pattern[0], pattern[1], pattern[2]));
            Ok(csv)
        }
        RunCommand::SignalCompare { frequencies, detect } => {
            let field = cfg.field_state()?;
            let grid = frequencies.values()?;
            log(verbose, format!("field {} of dimension {}", field.kind_tag(), field.dim()));
            let scan = |kind, order| signal_scan(&sys, &state0, &field, *detect, kind, order, &grid);
            let q = scan(SignalKind::Quantum, Order::Third)?;
            let c = scan(SignalKind::Classical, Order::Third)?;
            let p = scan(SignalKind::PAveraged, Order::Third).map_err(|e| match e {
                Error::Unsupported(m) => Error::Unsupported(format!(
                    "{m}. signal-compare needs a P-representable field; use correlator-table for the quantum gates alone"
                )),
                other => other,
            })?;
            let q1 = scan(SignalKind::Quantum, Order::Linear)?;
            let c1 = scan(SignalKind::Classical, Order::Linear)?;
            let p1 = scan(SignalKind::PAveraged, Order::Linear)?;
            let mut csv = Csv::new(&[
                "omega", "S_quantum", "S_classical", "S_p_averaged", "delta_p_vs_quantum",
                "S1_quantum", "S1_classical", "S1_p_averaged",
                "gate_i_re", "gate_i_im", "gate_ii_re", "gate_ii_im",
                "gate_iii_re", "gate_iii_im", "gate_iv_re", "gate_iv_im",
            ]);
            for k in 0..grid.len() {
                let mut r = vec![
                    num(q.rows[k].omega),
                    num(q.rows[k].total),
                    num(c.rows[k].total),
                    num(p.rows[k].total),
                    num(p.rows[k].total - q.rows[k].total),
                    num(q1.rows[k].total),
                    num(c1.rows[k].total),
                    num(p1.rows[k].total),
                ];
                for g in &q.rows[k].gates {
                    r.extend(cplx(*g));
                }
                csv.rows.push(r);
            }
            csv.meta.push(format!("field = {}", field.kind_tag()));
            csv.meta.push(format!("detect = {detect}"));
            Ok(csv)
        }
        RunCommand::FdtCheck { beta_t, frequencies } => {
            let grid = frequencies.values()?;
            let mut csv = Csv::new(&["kind", "beta_t", "omega", "C_pp", "C_pm", "ratio", "half_coth"]);
            let mut worst = 0.0f64;
            for &b in beta_t {
                let t = fdt_check(&sys, b, &grid)?;
                for l in &t.lines {
                    csv.rows.push(vec![
                        "line".into(), num(b), num(l.omega), num(l.weight_plus_plus),
                        num(l.weight_plus_minus), num(l.ratio), num(l.expected),
                    ]);
                    if l.weight_plus_minus != 0.0 {
                        worst = worst.max(l.relative_error());
                    }
                }
                for r in &t.rows {
                    csv.rows.push(vec![
                        "grid".into(), num(b), num(r.omega), num(r.c_plus_plus),
                        num(r.c_plus_minus), num(r.ratio), num(r.expected),
                    ]);
                }
            }
            csv.meta.push(format!("max_line_relative_error = {}", num(worst)));
            Ok(csv)
        }
        RunCommand::CorrelatorTable { detect, frequencies } => {
            let field = cfg.field_state()?;
            let grid = match frequencies {
                Some(g) => g.values()?,
                None => vec![field
                    .modes()
                    .get(*detect)
                    .ok_or_else(|| Error::Config(format!("detect mode {detect} out of range")))?
                    .frequency],
            };
            let mut csv = Csv::new(&[
                "omega", "tuple", "omega1", "omega2", "omega3",
                "gate_i_re", "gate_i_im", "gate_ii_re", "gate_ii_im",
                "gate_iii_re", "gate_iii_im", "gate_iv_re", "gate_iv_im",
                "classical_re", "classical_im",
            ]);
            let blocks = grid
                .par_iter()
                .map(|&w| {
                    let f = field.with_mode_frequency(*detect, w)?;
                    let rows = gate_table(&f, *detect)?;
                    Ok(rows
                        .into_iter()
                        .map(|g| {
                            let label = g.tuple.iter().map(|x| x.label()).collect::<Vec<_>>().join(" ");
                            let mut r = vec![num(w), label, num(g.frequencies[0]), num(g.frequencies[1]), num(g.frequencies[2])];
                            for q in g.quantum {
                                r.extend(cplx(q));
                            }
                            r.extend(cplx(g.classical));
                            r
                        })
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            csv.rows = blocks.into_iter().flatten().collect();
            csv.meta.push(format!("field = {}", field.kind_tag()));
            csv.meta.push("tuple = signed mode per field factor E(w1) E(w2) E(w3); + annihilates, - creates".into());
            Ok(csv)
        }
        RunCommand::TwoAtomDemo { atom2, time, steps, atom2_scales } => {
            let field = cfg.field_state()?;
            let a2 = match atom2 {
                Some(p) => build_system(p, sys.epsilon())?,
                None => sys.clone(),
            };
            let params = TwoAtomParams { time: *time, steps: *steps, atom2_scales: atom2_scales.values()?, max_dim: cfg.max_dim };
            let mut csv = Csv::new(&["driving", "atom2_scale", "population", "relative_shift"]);
            for (d, name) in [(Driving::Classical, "classical"), (Driving::Quantum, "quantum")] {
                log(verbose, format!("two-atom run, {name} driving"));
                let rep = two_atom_demo(&sys, &a2, &field, d, &params)?;
                let base = rep.rows[0].population;
                for r in &rep.rows {
                    csv.rows.push(vec![
                        name.into(),
                        r.atom2_scale.map(num).unwrap_or_else(|| "absent".into()),
                        num(r.population),
                        num((r.population - base) / base),
                    ]);
                }
                csv.meta.push(format!("{name}_max_relative_shift = {}", num(rep.max_relative_shift)));
            }
            Ok(csv)
        }
        RunCommand::OracleValidate { detect, couplings } => {
            let field = cfg.field_state()?;
            let cs = couplings.values()?;
            let r = oracle_validate(&sys, &state0, &field, *detect, &cs, cfg.max_dim)?;
            let mut csv = Csv::new(&["coupling", "windowed_flux", "fit", "perturbative"]);
            for (c, y) in r.couplings.iter().zip(&r.fluxes) {
                let fit = r.fit.a2 * c * c + r.fit.a4 * c.powi(4) + r.fit.a6 * c.powi(6);
                let pert = r.a2_predicted * c * c + r.a4_predicted * c.powi(4);
                csv.rows.push(vec![num(*c), num(*y), num(fit), num(pert)]);
            }
            csv.meta.extend([
                format!("window = {}", num(sys.epsilon())),
                format!("a2_fit = {}", num(r.fit.a2)),
                format!("a2_predicted = {}", num(r.a2_predicted)),
                format!("a2_relative_error = {}", num(r.a2_relative_error())),
                format!("a4_fit = {}", num(r.fit.a4)),
                format!("a4_predicted = {}", num(r.a4_predicted)),
                format!("a4_relative_error = {}", num(r.a4_relative_error())),
                format!("a4_sign_agrees = {}", r.a4_sign_agrees()),
                format!("fit_condition = {}", num(r.fit.condition)),
                format!("fit_residual = {}", num(r.fit.residual)),
            ]);
            Ok(csv)
        }
    }
}
