//! Batch driver behind the `commutant-lab` binary.
//!
//! Every command writes `report.json` (schema 1) and `summary.csv`
//! (`name,value,tolerance,pass`) into the output directory; `--dump` adds
//! matrix CSVs. The run passes iff every check in the summary passes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::discretization::{build_grid, collocation_l, kernel_matrix, GridKind, OperatorMatrix};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::families::{
    check_admissibility, classify_trivial, make_pair, CommutingPair, FamilyParams,
};
use crate::normality::{adjoint_coeffs, galerkin_selfadjoint_defect, is_normal, is_selfadjoint};
use crate::residual::{
    chebyshev_points, lemma_coeff_check, normalize_gauge, phi_decay_slope, residual_r1,
    residual_r2, singular_relation_check, taylor_relation_check, ResidualGrid,
};
use crate::spectra::{commutator_norm, commutator_norm_interior, joint_diagonalization, ModeOrder};

type C = Complex64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Pair,
    Verify,
    Commutator,
    Spectrum,
    Normality,
    Sweep,
}

fn default_n() -> usize {
    64
}

fn default_grid_kind() -> GridKind {
    GridKind::LegendreGaussLobatto
}

fn default_m() -> usize {
    8
}

fn default_seed() -> u64 {
    42
}

fn default_draws() -> usize {
    25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; the command given on the command line takes precedence.
    #[serde(default)]
    pub command: Option<Command>,
    /// Required for every command except `sweep`.
    #[serde(default)]
    pub params: Option<FamilyParams>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_grid_kind")]
    pub grid_kind: GridKind,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub mode_order: ModeOrder,
    /// Overrides of the default tolerance per check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Output directory used when `--out` is absent.
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of accepted draws for `sweep`.
    #[serde(default = "default_draws")]
    pub draws: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n = {} must be >= 2", self.n)));
        }
        if let Some((k, v)) = self
            .tolerances
            .iter()
            .find(|(_, v)| v.is_nan() || **v <= 0.0)
        {
            return Err(Error::Config(format!("tolerance {k} = {v} must be > 0")));
        }
        Ok(())
    }

    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    fn params(&self) -> Result<&FamilyParams> {
        self.params
            .as_ref()
            .ok_or_else(|| Error::Config("missing \"params\"".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

#[derive(Default)]
struct Checks {
    items: Vec<Check>,
}

impl Checks {
    fn push(&mut self, cfg: &RunConfig, name: &str, value: f64, default: f64, relation: Relation) {
        let tolerance = cfg.tolerance(name, default);
        let pass = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
        };
        self.items.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            relation,
            pass,
        });
    }

    fn at_most(&mut self, cfg: &RunConfig, name: &str, value: f64, default: f64) {
        self.push(cfg, name, value, default, Relation::AtMost);
    }

    fn at_least(&mut self, cfg: &RunConfig, name: &str, value: f64, default: f64) {
        self.push(cfg, name, value, default, Relation::AtLeast);
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub dump: bool,
    pub quiet: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub out_dir: PathBuf,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn write_matrix(dir: &Path, name: &str, m: &OperatorMatrix) -> Result<()> {
    m.write_csv(BufWriter::new(File::create(dir.join(name))?))?;
    Ok(())
}

fn pair_command(cfg: &RunConfig, checks: &mut Checks, dir: &Path) -> Result<Value> {
    let params = cfg.params()?;
    let pair = make_pair(params)?;
    checks.at_most(cfg, "boundary_defect", pair.op.boundary_defect(), 1e-12);
    let r1 = residual_r1(&pair, &ResidualGrid::standard())?;
    checks.at_most(cfg, "residual_r1", r1.relative(), 1e-9);

    let mut kernel = BufWriter::new(File::create(dir.join("kernel.csv"))?);
    writeln!(kernel, "z,re_k,im_k")?;
    // even count keeps z = 0 out of the sample
    for z in chebyshev_points(40, -2.0, 2.0) {
        let k = pair.kernel.eval_real(z)?;
        writeln!(kernel, "{z:.16e},{:.16e},{:.16e}", k.re, k.im)?;
    }
    kernel.flush()?;
    let mut coeffs = BufWriter::new(File::create(dir.join("coeffs.csv"))?);
    writeln!(coeffs, "y,re_a,im_a,re_b,im_b,re_c,im_c")?;
    for y in chebyshev_points(41, -1.0, 1.0) {
        let (a, b, cc) = (pair.op.a.eval(y), pair.op.b.eval(y), pair.op.c.eval(y));
        writeln!(
            coeffs,
            "{y:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            a.re, a.im, b.re, b.im, cc.re, cc.im
        )?;
    }
    coeffs.flush()?;

    Ok(json!({
        "admissibility": check_admissibility(params),
        "trivial": classify_trivial(params),
        "singular": pair.kernel.singular(),
        "series": pair.kernel.series(),
        "nu": pair.nu,
        "residual_r1": r1,
    }))
}

fn verify_command(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let pair = make_pair(cfg.params()?)?;
    let grid = ResidualGrid::standard();
    let r1 = residual_r1(&pair, &grid)?;
    checks.at_most(cfg, "residual_r1", r1.relative(), 1e-9);
    let shifted = pair.op.shifted(c(3.0, 0.0));
    let r2 = residual_r2(&pair.kernel, &shifted, &shifted, &grid)?;
    checks.at_most(cfg, "residual_r2_shifted", r2.relative(), 1e-9);
    let mut out = json!({ "residual_r1": r1, "residual_r2_shifted": r2 });

    if pair.kernel.singular() {
        let normalized = normalize_gauge(&pair)?;
        let rel = singular_relation_check(&normalized)?;
        checks.at_most(cfg, "singular_relation", rel.residual, 1e-10);
        let y = Expr::var();
        let slope = phi_decay_slope(&pair, &(y.clone() * y), 0.3, &[1e-4, 1e-3, 1e-2])?;
        checks.at_least(cfg, "phi_decay_slope", slope, 0.9);
        out["singular_relation"] = json!(rel);
        out["phi_decay_slope"] = json!(slope);
    } else {
        let taylor = taylor_relation_check(&pair, 6)?;
        checks.at_most(
            cfg,
            "taylor_relation",
            taylor.iter().cloned().fold(0.0, f64::max),
            1e-10,
        );
        out["taylor_relation"] = json!(taylor);
        // the lemma relations describe the symmetric form c = nu a
        if pair.nu.is_some() {
            let normalized = normalize_gauge(&pair)?;
            let lemma = lemma_coeff_check(&normalized)?;
            checks.at_most(cfg, "lemma_b_eq_aprime", lemma.b_eq_aprime, 1e-9);
            checks.at_most(cfg, "lemma_c_eq_nu_a", lemma.c_eq_nu_a, 1e-9);
            checks.at_most(cfg, "lemma_a_ode", lemma.a_ode, 1e-9);
            out["lemma"] = json!(lemma);
        }
    }
    Ok(out)
}

fn matrices(cfg: &RunConfig, pair: &CommutingPair) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let grid = build_grid(cfg.n, cfg.grid_kind)?;
    Ok((kernel_matrix(pair, &grid)?, collocation_l(&pair.op, &grid)?))
}

fn commutator_command(
    cfg: &RunConfig,
    checks: &mut Checks,
    dir: &Path,
    dump: bool,
) -> Result<Value> {
    let pair = make_pair(cfg.params()?)?;
    let (k, l) = matrices(cfg, &pair)?;
    let full = commutator_norm(&k, &l)?;
    let interior = commutator_norm_interior(&k, &l)?;
    if pair.kernel.singular() {
        checks.at_most(cfg, "commutator_norm_interior", interior, 1e-3);
    } else {
        checks.at_most(cfg, "commutator_norm", full, 1e-8);
    }
    if dump {
        write_matrix(dir, "K.csv", &k)?;
        write_matrix(dir, "L.csv", &l)?;
    }
    Ok(json!({
        "n": cfg.n,
        "grid_kind": cfg.grid_kind,
        "commutator_norm": full,
        "commutator_norm_interior": interior,
        "endpoint_rows_truncated": k.endpoint_rows_truncated,
    }))
}

fn spectrum_command(cfg: &RunConfig, checks: &mut Checks, dir: &Path, dump: bool) -> Result<Value> {
    let pair = make_pair(cfg.params()?)?;
    let (k, l) = matrices(cfg, &pair)?;
    let rep = joint_diagonalization(&k, &l, cfg.m, cfg.mode_order)?;
    checks.at_most(cfg, "offdiag_energy", rep.offdiag_energy, 1e-6);
    checks.at_most(cfg, "rayleigh_vs_direct", rep.rayleigh_vs_direct, 1e-6);
    rep.write_csv(BufWriter::new(File::create(dir.join("modes.csv"))?))?;
    if dump {
        write_matrix(dir, "K.csv", &k)?;
        write_matrix(dir, "L.csv", &l)?;
    }
    Ok(json!({ "n": cfg.n, "m": cfg.m, "spectral": rep }))
}

fn normality_command(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let pair = make_pair(cfg.params()?)?;
    let op = &pair.op;
    let tol = cfg.tolerance("normality", 1e-10);
    let report = is_normal(op, tol);
    let sa = is_selfadjoint(op, tol);
    let galerkin = galerkin_selfadjoint_defect(op, 64, 10)?;
    let twice = adjoint_coeffs(&adjoint_coeffs(op));
    let involution = chebyshev_points(21, -1.0, 1.0)
        .into_iter()
        .map(|y| {
            let (u, v) = (twice.at(y, 0), op.at(y, 0));
            (u.a[0] - v.a[0])
                .norm()
                .max((u.b[0] - v.b[0]).norm())
                .max((u.c[0] - v.c[0]).norm())
        })
        .fold(0.0, f64::max);
    checks.at_most(cfg, "adjoint_involution", involution, 1e-13);
    let agree = sa.selfadjoint == (galerkin <= 1e-8);
    checks.at_most(
        cfg,
        "selfadjoint_matrix_disagreement",
        if agree { 0.0 } else { 1.0 },
        0.5,
    );
    Ok(json!({
        "normality": report,
        "selfadjointness": sa,
        "galerkin_selfadjoint_defect": galerkin,
        "adjoint_involution": involution,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub params: FamilyParams,
    pub reason: String,
}

/// Seeded General-family parameters: `lambda`, `mu`, `alpha1`, `alpha2`
/// uniform in `[-3,3]^2`, `[-3,3]^2`, `[-1,1]^2`, `[-1,1]^2` (re, im), with
/// inadmissible and trivial draws rejected.
pub fn sweep_draws(seed: u64, count: usize) -> (Vec<FamilyParams>, Vec<Rejection>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut box_draw = |h: f64| c(rng.gen_range(-h..=h), rng.gen_range(-h..=h));
    let mut accepted = Vec::with_capacity(count);
    let mut rejected = Vec::new();
    while accepted.len() < count && rejected.len() < 100 * count.max(1) {
        let params =
            FamilyParams::general(box_draw(3.0), box_draw(3.0), box_draw(1.0), box_draw(1.0));
        let adm = check_admissibility(&params);
        if !adm.ok {
            rejected.push(Rejection {
                params,
                reason: adm.reason,
            });
        } else if classify_trivial(&params) {
            rejected.push(Rejection {
                params,
                reason: "trivial kernel".into(),
            });
        } else {
            accepted.push(params);
        }
    }
    (accepted, rejected)
}

fn sweep_command(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let (draws, rejected) = sweep_draws(cfg.seed, cfg.draws);
    if draws.len() < cfg.draws {
        return Err(Error::Config(format!(
            "only {} of {} draws accepted",
            draws.len(),
            cfg.draws
        )));
    }
    let grid = ResidualGrid::standard();
    let mut rows = Vec::new();
    for (i, params) in draws.iter().enumerate() {
        let pair = make_pair(params)?;
        let r1 = residual_r1(&pair, &grid)?;
        let tol = cfg.tolerance("residual_r1", 1e-9);
        checks.at_most(cfg, &format!("draw_{i:02}_residual_r1"), r1.relative(), tol);
        checks.at_most(
            cfg,
            &format!("draw_{i:02}_boundary_defect"),
            pair.op.boundary_defect(),
            1e-12,
        );
        rows.push(json!({ "index": i, "params": params, "residual_r1": r1 }));
    }
    Ok(json!({ "seed": cfg.seed, "draws": rows, "rejections": rejected }))
}

/// Runs one command and writes its report files.
pub fn run(cfg: &RunConfig, command: Command, opts: &RunOptions) -> Result<Outcome> {
    cfg.validate()?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    let mut checks = Checks::default();
    let results = match command {
        Command::Pair => pair_command(cfg, &mut checks, &out_dir)?,
        Command::Verify => verify_command(cfg, &mut checks)?,
        Command::Commutator => commutator_command(cfg, &mut checks, &out_dir, opts.dump)?,
        Command::Spectrum => spectrum_command(cfg, &mut checks, &out_dir, opts.dump)?,
        Command::Normality => normality_command(cfg, &mut checks)?,
        Command::Sweep => sweep_command(cfg, &mut checks)?,
    };
    let outcome = Outcome {
        checks: checks.items,
        out_dir: out_dir.clone(),
    };
    let report = json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "params": cfg.params,
        "pass": outcome.passed(),
        "checks": outcome.checks,
        "results": results,
    });
    let mut f = BufWriter::new(File::create(out_dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    writeln!(f)?;
    f.flush()?;

    let mut s = BufWriter::new(File::create(out_dir.join("summary.csv"))?);
    writeln!(s, "name,value,tolerance,pass")?;
    for ch in &outcome.checks {
        writeln!(
            s,
            "{},{:.16e},{:.16e},{}",
            ch.name, ch.value, ch.tolerance, ch.pass
        )?;
    }
    s.flush()?;

    if !opts.quiet {
        for ch in &outcome.checks {
            let rel = match ch.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let verdict = if ch.pass { "ok  " } else { "FAIL" };
            println!(
                "{verdict} {:<34} {:.3e} {rel} {:.1e}",
                ch.name, ch.value, ch.tolerance
            );
        }
    }
    Ok(outcome)
}
