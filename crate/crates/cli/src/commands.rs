//! The four scenario commands. Each returns a report and writes its CSV
//! tables into the output directory.

use crate::config::{ScenarioConfig, VariantChoice};
use crate::report::{CheckResult, Provenance, RunReport};
use dilaton_np::background::{background_jets, background_residuals};
use dilaton_np::conserved::{
    angular_eigenvalue_pair, conservation_trace, continuity_scan, ContinuityReport, ContinuityVariant,
};
use dilaton_np::harmonics::{
    angular_eigenvalue, commutation_check, inner_product, ladder_numeric_check, RadialTestFn,
};
use dilaton_np::opalg::identities::verify_identities_with;
use dilaton_np::reconstruct::{verify_algebraic_relations, verify_decoupled, verify_decoupled_plus};
use dilaton_np::solver::{fmt17, integrate, PotentialState, SolutionTrace, Tolerances};
use dilaton_np::ModeSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

pub const BACKGROUND_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const DECOUPLED_TOL: f64 = 1e-6;
pub const ALGEBRAIC_TOL: f64 = 1e-12;
pub const CONSTANCY_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const CONTINUITY_TOL: f64 = 1e-7;
pub const CONTINUITY_FACTOR: f64 = 1e3;
pub const LADDER_TOL: f64 = 1e-6;
pub const COMMUTATION_TOL: f64 = 1e-7;
pub const EIGENVALUE_NUMERIC_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Background,
    Identities,
    Evolve,
    Harmonics,
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Background => "background",
            Command::Identities => "identities",
            Command::Evolve => "evolve",
            Command::Harmonics => "harmonics",
            Command::All => "all",
        }
    }
}

/// Wall times per command, kept out of the report so reruns compare equal.
pub type Timings = BTreeMap<String, f64>;

#[derive(Debug)]
pub struct RunError(pub String);

impl<E: std::fmt::Display> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError(e.to_string())
    }
}

type Out<T> = Result<T, RunError>;

fn provenance(cfg: &ScenarioConfig, command: &str) -> Provenance {
    Provenance { command: command.to_string(), version: env!("CARGO_PKG_VERSION"), seed: cfg.seed, config: cfg.clone() }
}

fn coupling_tag(i: usize) -> String {
    format!("a{i}")
}

fn mode_tag(ai: usize, m: &ModeSpec) -> String {
    let w = format!("{}", m.omega).replace('-', "n").replace('.', "p");
    format!("a{ai}_l{}_m{}_w{w}", m.l, m.m).replace("m-", "mn")
}

fn csv_writer(dir: &Path, name: &str) -> Out<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn evenly(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Run one command, writing tables into `dir`.
pub fn run(cfg: &ScenarioConfig, cmd: Command, dir: &Path, timings: &mut Timings) -> Out<RunReport> {
    std::fs::create_dir_all(dir)?;
    let parts: Vec<Command> = match cmd {
        Command::All => vec![Command::Background, Command::Identities, Command::Harmonics, Command::Evolve],
        c => vec![c],
    };
    let mut report = RunReport::new(provenance(cfg, cmd.name()));
    for c in parts {
        let t0 = Instant::now();
        let r = match c {
            Command::Background => cmd_background(cfg, dir)?,
            Command::Identities => cmd_identities(cfg)?,
            Command::Evolve => cmd_evolve(cfg, dir)?,
            Command::Harmonics => cmd_harmonics(cfg)?,
            Command::All => unreachable!(),
        };
        timings.insert(c.name().to_string(), t0.elapsed().as_secs_f64());
        report.merge(r);
    }
    write_schema(dir)?;
    Ok(report)
}

pub fn cmd_background(cfg: &ScenarioConfig, dir: &Path) -> Out<RunReport> {
    let mut rep = RunReport::new(provenance(cfg, "background"));
    let radii = evenly(cfg.r_inner(), cfg.r_outer(), cfg.background_radii);
    for (ai, &a) in cfg.couplings.iter().enumerate() {
        let mut p = cfg.params(a);
        if let Some(q) = cfg.charge_override {
            p = p.with_charge(q);
        }
        let mut w = csv_writer(dir, &format!("background_{}.csv", coupling_tag(ai)))?;
        w.write_record(BACKGROUND_COLUMNS)?;
        let mut worst = [0.0f64; 3];
        for &r in &radii {
            let res = background_residuals(&p, r)?;
            let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
            let parts = [
                rel(res.maxwell_d.norm(), res.scale[0]),
                rel(res.maxwell_delta.norm(), res.scale[1]),
                rel(res.dilaton.abs(), res.scale[2]),
            ];
            for k in 0..3 {
                worst[k] = worst[k].max(parts[k]);
            }
            let bg = background_jets(&p, r, 0)?;
            let mut rec = vec![fmt17(r)];
            for v in [bg.chi2, bg.rr, bg.phi, bg.dphi, bg.rho, bg.mu, bg.gamma] {
                rec.push(fmt17(v.re()));
            }
            rec.extend(parts.iter().map(|&x| fmt17(x)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        for (k, name) in ["maxwell D", "maxwell Delta", "dilaton"].iter().enumerate() {
            rep.checks.push(CheckResult::below(format!("background a={a:.6} {name}"), worst[k], BACKGROUND_TOL));
        }
    }
    Ok(rep)
}

pub fn cmd_identities(cfg: &ScenarioConfig) -> Out<RunReport> {
    let mut rep = RunReport::new(provenance(cfg, "identities"));
    let probe = cfg.probe.map(|p| p.perturbation());
    let cells = cfg.cells();
    let results: Vec<_> = cells
        .par_iter()
        .enumerate()
        .map(|(k, (_, a, mode))| {
            let p = cfg.params(*a);
            verify_identities_with(&p, mode, cfg.identity_trials, cfg.seed.wrapping_add(k as u64), probe.as_ref(), None)
        })
        .collect();
    for ((_, a, mode), res) in cells.iter().zip(results) {
        let res = res?;
        let worst = res.results.iter().max_by(|x, y| x.max_residual.total_cmp(&y.max_residual));
        let label = worst.map(|w| w.name.as_str()).unwrap_or("-");
        rep.checks.push(CheckResult::below(
            format!("identities a={a:.6} l={} w={} ({} identities, worst: {label})", mode.l, mode.omega, res.results.len()),
            res.max_residual(),
            IDENTITY_TOL,
        ));
    }
    Ok(rep)
}

pub fn cmd_harmonics(cfg: &ScenarioConfig) -> Out<RunReport> {
    let mut rep = RunReport::new(provenance(cfg, "harmonics"));
    let lmax = cfg.harmonics_l_max;
    let grid = cfg.harmonics_grid;

    let mut ortho = 0.0f64;
    for s in -2i32..=2 {
        let lmin = s.unsigned_abs().max(2).min(lmax);
        for l1 in lmin..=lmax {
            for l2 in lmin..=lmax {
                for m in -(l1.min(l2) as i32)..=(l1.min(l2) as i32) {
                    let v = inner_product(s, l1, m, l2, m, grid)?;
                    let target = if l1 == l2 { 1.0 } else { 0.0 };
                    ortho = ortho.max((v - target).norm());
                }
                let v = inner_product(s, l1, 0, l2, 1, grid)?;
                ortho = ortho.max(v.norm());
            }
        }
    }
    rep.checks.push(CheckResult::below(format!("harmonics orthonormality l<={lmax} grid={grid}"), ortho, cfg.orthonormality_tol()));

    let mut ladder = 0.0f64;
    for s in -1i32..=1 {
        for l in (s.unsigned_abs() + 1).max(2)..=lmax {
            for m in -(l as i32)..=(l as i32) {
                ladder = ladder.max(ladder_numeric_check(s, l, m, grid)?);
            }
        }
    }
    rep.checks.push(CheckResult::below(format!("harmonics ladder l<={lmax}"), ladder, LADDER_TOL));

    for (l, want) in [(2u32, 4.0), (3, 10.0)] {
        let got = angular_eigenvalue(l)?;
        rep.checks.push(CheckResult::below(format!("harmonics L^2(l={l}) = {want}"), (got - want).abs(), f64::MIN_POSITIVE));
    }
    let mut eig = 0.0f64;
    let mut pair = 0.0f64;
    for l in 2..=lmax.min(4) {
        for theta in [0.7, 1.3, 2.2] {
            let (minus, plus) = angular_eigenvalue_pair(l, 1, theta)?;
            let target = Complex64::new(-angular_eigenvalue(l)?, 0.0);
            eig = eig.max((minus - target).norm() / target.norm());
            pair = pair.max((minus - plus).norm() / target.norm());
        }
    }
    rep.checks.push(CheckResult::below("harmonics composite eigenvalue (numeric)", eig, EIGENVALUE_NUMERIC_TOL));
    rep.checks.push(CheckResult::below("harmonics spin -2 / +2 eigenvalue equality", pair, EIGENVALUE_NUMERIC_TOL));

    let bh = cfg.params(cfg.couplings[0]);
    let mut comm = 0.0f64;
    for (p, q, pp) in [(0.0, 0.0, 0.0), (1.0, 2.0, -1.0), (-2.0, 1.0, 3.0)] {
        for f in [RadialTestFn::One, RadialTestFn::DecayingExp] {
            for (s, l, m) in [(-2, 2, 1), (0, 3, -2), (1, 3, 0)] {
                comm = comm.max(commutation_check(&bh, p, q, pp, f, s, l, m, 12)?);
            }
        }
    }
    rep.checks.push(CheckResult::below("harmonics commutation", comm, COMMUTATION_TOL));
    Ok(rep)
}

/// Initial data of scenario cell `k`: deterministic in the seed.
pub fn initial_state(seed: u64, k: usize, zero: bool) -> PotentialState {
    if zero {
        return PotentialState::zero();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    PotentialState { psi: std::array::from_fn(|_| c()), dpsi: std::array::from_fn(|_| c()) }
}

/// Everything measured on one integrated mode.
#[derive(Clone, Debug, Serialize)]
pub struct EvolveCell {
    pub coupling: f64,
    pub mode: ModeSpec,
    pub tag: String,
    pub decoupled: f64,
    pub decoupled_plus: f64,
    pub algebraic: f64,
    pub constancy_plus: f64,
    pub constancy_minus: f64,
    pub constancy_plus_unit_map: f64,
    pub closed_form_gap: f64,
    pub continuity: ContinuityReport,
}

pub fn evolve_cell(cfg: &ScenarioConfig, k: usize, ai: usize, a: f64, mode: ModeSpec) -> Out<(EvolveCell, SolutionTrace, dilaton_np::conserved::ConservationReport)> {
    let p = cfg.params(a);
    let init = initial_state(cfg.seed, k, cfg.zero_init);
    let tol = Tolerances { rel_tol: cfg.solver.rel_tol, abs_tol: cfg.solver.abs_tol };
    let trace = integrate(&p, &mode, &init, cfg.r_inner(), cfg.r_outer(), tol)?;
    let radii = trace.sample_radii(cfg.continuity_samples);
    let decoupled = verify_decoupled(&trace, &radii)?.max();
    let decoupled_plus = verify_decoupled_plus(&trace, &radii)?.max();
    let mut algebraic = 0.0f64;
    for &r in &radii {
        let s = trace.eval(r)?;
        algebraic = verify_algebraic_relations(&s.psi, &p, &mode, r)?.iter().copied().fold(algebraic, f64::max);
    }
    let cons = conservation_trace(&trace, cfg.conservation_samples)?;
    let continuity = continuity_scan(&trace, &radii)?;
    let cell = EvolveCell {
        coupling: a,
        mode,
        tag: mode_tag(ai, &mode),
        decoupled,
        decoupled_plus,
        algebraic,
        constancy_plus: cons.constancy_plus,
        constancy_minus: cons.constancy_minus,
        constancy_plus_unit_map: cons.constancy_plus_unit_map,
        closed_form_gap: cons.closed_form_gap,
        continuity,
    };
    Ok((cell, trace, cons))
}

pub fn cmd_evolve(cfg: &ScenarioConfig, dir: &Path) -> Out<RunReport> {
    let mut rep = RunReport::new(provenance(cfg, "evolve"));
    let cells = cfg.cells();
    let results: Vec<_> = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(ai, a, mode))| evolve_cell(cfg, k, ai, a, mode))
        .collect();
    for res in results {
        let (cell, trace, cons) = res?;
        write_trace_tables(dir, &cell, &trace, &cons)?;
        push_cell_checks(&mut rep, cfg.continuity_variant, &cell);
    }
    Ok(rep)
}

fn write_trace_tables(dir: &Path, cell: &EvolveCell, trace: &SolutionTrace, cons: &dilaton_np::conserved::ConservationReport) -> Out<()> {
    let f = std::fs::File::create(dir.join(format!("trace_{}.csv", cell.tag)))?;
    trace.write_csv(std::io::BufWriter::new(f), &cons.radii)?;
    let mut w = csv_writer(dir, &format!("conserved_{}.csv", cell.tag))?;
    w.write_record(CONSERVED_COLUMNS)?;
    for i in 0..cons.radii.len() {
        let mut rec = vec![fmt17(cons.radii[i])];
        for c in [cons.k_plus[i], cons.k_minus[i], cons.k_minus_closed[i], cons.k_plus_unit_map[i]] {
            rec.push(fmt17(c.re));
            rec.push(fmt17(c.im));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn push_cell_checks(rep: &mut RunReport, choice: VariantChoice, c: &EvolveCell) {
    let id = format!("a={:.6} l={} m={} w={}", c.coupling, c.mode.l, c.mode.m, c.mode.omega);
    rep.checks.push(CheckResult::below(format!("decoupled rows {id}"), c.decoupled, DECOUPLED_TOL));
    rep.checks.push(CheckResult::below(format!("algebraic relations {id}"), c.algebraic, ALGEBRAIC_TOL));
    rep.checks.push(CheckResult::below(format!("K- constancy {id}"), c.constancy_minus, CONSTANCY_TOL));
    rep.checks.push(CheckResult::below(format!("K+ constancy {id}"), c.constancy_plus, CONSTANCY_TOL));
    rep.checks.push(CheckResult::below(format!("K- closed form {id}"), c.closed_form_gap, CLOSED_FORM_TOL));
    rep.checks.push(CheckResult::diagnostic(format!("plus-sector decoupled rows {id}"), c.decoupled_plus));
    rep.checks.push(CheckResult::diagnostic(format!("K+ constancy, unit-map plus sector {id}"), c.constancy_plus_unit_map));
    let cont = &c.continuity;
    for v in ContinuityVariant::ALL {
        rep.checks.push(CheckResult::diagnostic(
            format!("continuity {} incl. reconstructed plus sector {id}", v.name()),
            cont.worst(v),
        ));
    }
    match choice {
        VariantChoice::Both => {
            let g = cont.worst_exact(ContinuityVariant::Gamma);
            let r = cont.worst_exact(ContinuityVariant::Rho);
            let degenerate = g == 0.0 && r == 0.0;
            let winner = cont.winner(CONTINUITY_TOL, CONTINUITY_FACTOR);
            let best = g.min(r);
            let mut check = CheckResult::below(format!("continuity winner {id} (gamma {g:.1e}, rho {r:.1e})"), best, CONTINUITY_TOL);
            check.pass = winner.is_some() || degenerate;
            rep.checks.push(check);
            match winner {
                Some(w) => rep.notes.push(format!("continuity winner {id}: {}", w.name())),
                None if degenerate => rep.notes.push(format!("continuity {id}: zero trace, no winner")),
                None => rep.notes.push(format!("continuity {id}: no unique winner")),
            }
        }
        single => {
            for v in single.variants() {
                rep.checks.push(CheckResult::below(format!("continuity {} {id}", v.name()), cont.worst_exact(v), CONTINUITY_TOL));
            }
        }
    }
}

pub const BACKGROUND_COLUMNS: [&str; 11] = [
    "r", "chi2", "R", "phi", "dphi", "rho", "mu", "gamma", "rel_res_maxwell_d", "rel_res_maxwell_delta", "rel_res_dilaton",
];

pub const CONSERVED_COLUMNS: [&str; 9] = [
    "r",
    "re_k_plus",
    "im_k_plus",
    "re_k_minus",
    "im_k_minus",
    "re_k_minus_closed",
    "im_k_minus_closed",
    "re_k_plus_unit_map",
    "im_k_plus_unit_map",
];

#[derive(Serialize)]
struct TableSchema {
    file_pattern: &'static str,
    columns: Vec<(String, &'static str)>,
}

/// Write `schema.json` describing every CSV table.
pub fn write_schema(dir: &Path) -> Out<()> {
    let bg_desc = [
        "radius",
        "chi^2",
        "areal radius R",
        "dilaton phi",
        "d phi / dr",
        "spin coefficient rho",
        "spin coefficient mu",
        "spin coefficient gamma",
        "relative residual of the Maxwell D equation",
        "relative residual of the Maxwell Delta equation",
        "relative residual of the dilaton equation",
    ];
    let k_desc = [
        "radius",
        "K+",
        "K+",
        "K-",
        "K-",
        "K- closed form in psi_g psi_h",
        "K- closed form in psi_g psi_h",
        "K+ with the unit-map plus sector",
        "K+ with the unit-map plus sector",
    ];
    let mut trace_cols = vec![("r".to_string(), "radius")];
    for part in ["psi", "dpsi"] {
        for n in dilaton_np::solver::POTENTIAL_NAMES {
            for ri in ["re", "im"] {
                trace_cols.push((format!("{ri}_{part}_{n}"), if part == "psi" { "potential" } else { "radial derivative of the potential" }));
            }
        }
    }
    let tables = vec![
        TableSchema {
            file_pattern: "background_a<coupling index>.csv",
            columns: BACKGROUND_COLUMNS.iter().zip(bg_desc).map(|(c, d)| (c.to_string(), d)).collect(),
        },
        TableSchema { file_pattern: "trace_a<i>_l<l>_m<m>_w<omega>.csv", columns: trace_cols },
        TableSchema {
            file_pattern: "conserved_a<i>_l<l>_m<m>_w<omega>.csv",
            columns: CONSERVED_COLUMNS.iter().zip(k_desc).map(|(c, d)| (c.to_string(), d)).collect(),
        },
    ];
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "number_format": "17 significant digits",
        "tables": tables,
    }))?;
    std::fs::write(dir.join("schema.json"), text + "\n")?;
    Ok(())
}

/// Write `report.json`, `report.txt` and `timing.json`.
pub fn write_report(dir: &Path, rep: &RunReport, timings: &Timings) -> Out<()> {
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(rep)? + "\n")?;
    std::fs::write(dir.join("report.txt"), rep.to_text())?;
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(timings)? + "\n")?;
    Ok(())
}
