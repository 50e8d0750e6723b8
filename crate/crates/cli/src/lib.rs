//! Experiment driver behind the `mlcfem` binary: run configuration,
//! direct/two-grid/multi-level convergence studies on the unit square,
//! analytic references, rate estimation, and CSV emission.

// Positivity checks are written `!(x > 0.0)` so that NaN also fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mlcfem_core::correction::{Hierarchy, ReferenceSolution, Way};
use mlcfem_core::fem::{
    apply_dirichlet, assemble_mass, assemble_stiffness, energy_error, expand_free, l2_error,
    CoefficientField, FeSpace,
};
use mlcfem_core::linalg::{smallest_eigenpairs, EigenPair};
use mlcfem_core::mesh::refine_regular;
use mlcfem_core::Error;

pub const CSV_HEADER: &str =
    "level,h_or_p,dofs,lambda,err_lambda,err_energy,err_l2,rate_lambda,rate_energy,wall_ms";

const LAMBDA_1: f64 = 2.0 * PI * PI;

/// Solver errors plus the one failure mode the driver detects itself: a
/// computed eigenvalue below the continuum one, which conforming spaces can
/// never produce.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    LowerBound { lambda: f64, bound: f64 },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::LowerBound { lambda, bound } => write!(
                f,
                "computed eigenvalue {lambda} undercuts the min-max lower bound {bound}; \
                 the solver returned garbage"
            ),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 2 = configuration, 3 = solver, 4 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::LowerBound { .. } => 3,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::UnsupportedLadder(_)
                | Error::Dimension { .. } => 2,
                Error::IterationLimit { .. }
                | Error::NotSpd(_)
                | Error::DegenerateVector
                | Error::DegenerateAugmentation
                | Error::NestingViolation(_) => 3,
                Error::Io { .. } => 4,
            },
        }
    }
}

pub type RunResult<T> = std::result::Result<T, CliError>;

/// Coefficient preset: a positive constant or the smooth non-constant field
/// 1 + sin(πx)sin(πy)/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coeff {
    Constant(f64),
    Wavy,
}

impl Coeff {
    pub fn parse(s: &str) -> Result<Coeff, Error> {
        if s == "wavy" {
            return Ok(Coeff::Wavy);
        }
        match s.parse::<f64>() {
            Ok(c) if c > 0.0 && c.is_finite() => Ok(Coeff::Constant(c)),
            _ => Err(Error::InvalidArgument(format!(
                "coefficient must be a positive number or \"wavy\", got {s:?}"
            ))),
        }
    }

    pub fn field(self) -> CoefficientField {
        match self {
            Coeff::Constant(c) => CoefficientField::constant(c),
            Coeff::Wavy => {
                CoefficientField::new(|x, y| 1.0 + 0.5 * (PI * x).sin() * (PI * y).sin(), 4)
            }
        }
    }

    fn is_one(self) -> bool {
        self == Coeff::Constant(1.0)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Constant(c) => write!(f, "{c}"),
            Coeff::Wavy => write!(f, "wavy"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub way: Way,
    /// Subdivisions per side of the coarsest mesh.
    pub m: usize,
    /// Ladder depth for mlc, sweep length for direct runs.
    pub levels: usize,
    /// 1-based eigenvalue index.
    pub index: usize,
    pub order: usize,
    /// Relative eigensolver tolerance.
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub coeff_a: Coeff,
    pub rho: Coeff,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            way: Way::Multigrid,
            m: 4,
            levels: 2,
            index: 1,
            order: 1,
            tol: 1e-10,
            out: None,
            coeff_a: Coeff::Constant(1.0),
            rho: Coeff::Constant(1.0),
        }
    }
}

pub fn parse_way(s: &str) -> Result<Way, Error> {
    match s {
        "multigrid" => Ok(Way::Multigrid),
        "multispace" => Ok(Way::Multispace),
        _ => Err(Error::InvalidArgument(format!(
            "way must be multigrid or multispace, got {s:?}"
        ))),
    }
}

impl RunConfig {
    /// One `key = value` assignment, as used by both the config file and the
    /// command-line overrides.
    pub fn apply_pair(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let bad = |what: &str| Error::InvalidArgument(format!("{key}: {what}, got {value:?}"));
        match key {
            "way" => self.way = parse_way(value)?,
            "m" => self.m = value.parse().map_err(|_| bad("expected a positive integer"))?,
            "levels" => {
                self.levels = value.parse().map_err(|_| bad("expected a positive integer"))?
            }
            "index" => {
                self.index = value.parse().map_err(|_| bad("expected a positive integer"))?
            }
            "order" => self.order = value.parse().map_err(|_| bad("expected 1, 2 or 3"))?,
            "tol" => self.tol = value.parse().map_err(|_| bad("expected a number"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "coeff_a" => self.coeff_a = Coeff::parse(value)?,
            "rho" => self.rho = Coeff::parse(value)?,
            "domain" => {
                if value != "unit-square" {
                    return Err(bad("only the unit-square domain is supported"));
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key {key:?}"
                )))
            }
        }
        Ok(())
    }

    /// Flat `key = value` file; `#` comments and blank lines are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), Error> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            self.apply_pair(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [
            ("m", self.m),
            ("levels", self.levels),
            ("index", self.index),
            ("order", self.order),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Observed convergence order between two consecutive measurements, or a
/// flag that the error already sits on the floating-point floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Saturated,
    Value(f64),
}

/// Slopes ln(e_{k−1}/e_k) / ln(s_{k−1}/s_k) between consecutive entries;
/// one fewer slope than inputs. Zero or negative errors mark the slope
/// saturated instead of producing a value.
pub fn estimate_rate(errors: &[f64], sizes: &[f64]) -> Result<Vec<Rate>, Error> {
    if errors.len() != sizes.len() {
        return Err(Error::Dimension {
            expected: errors.len(),
            actual: sizes.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::InvalidArgument(
            "rate estimation needs at least two measurements".into(),
        ));
    }
    if sizes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let mut slopes = Vec::with_capacity(errors.len() - 1);
    for k in 1..errors.len() {
        if sizes[k - 1] == sizes[k] {
            return Err(Error::InvalidArgument(
                "consecutive sizes must differ".into(),
            ));
        }
        if errors[k - 1] <= 0.0 || errors[k] <= 0.0 {
            slopes.push(Rate::Saturated);
        } else {
            slopes.push(Rate::Value(
                (errors[k - 1] / errors[k]).ln() / (sizes[k - 1] / sizes[k]).ln(),
            ));
        }
    }
    Ok(slopes)
}

/// Eigenpair (j,k) of the Dirichlet Laplacian on the unit square:
/// λ = (j²+k²)π², u = 2 sin(jπx) sin(kπy) (unit L² norm).
pub fn analytic_reference(j: usize, k: usize) -> Result<ReferenceSolution, Error> {
    if j == 0 || k == 0 {
        return Err(Error::InvalidArgument(
            "mode numbers must be at least 1".into(),
        ));
    }
    let (jf, kf) = (j as f64, k as f64);
    Ok(ReferenceSolution {
        lambda: (jf * jf + kf * kf) * PI * PI,
        func: Some(Box::new(move |x, y| {
            2.0 * (jf * PI * x).sin() * (kf * PI * y).sin()
        })),
        grad: Some(Box::new(move |x, y| {
            [
                2.0 * jf * PI * (jf * PI * x).cos() * (kf * PI * y).sin(),
                2.0 * kf * PI * (jf * PI * x).sin() * (kf * PI * y).cos(),
            ]
        })),
    })
}

/// i-th smallest Laplace eigenvalue on the unit square, multiplicities
/// counted.
pub fn unit_square_eigenvalue(i: usize) -> Result<f64, Error> {
    const K: usize = 24;
    if i == 0 || i > K * K / 2 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue index {i} out of the tabulated range"
        )));
    }
    let mut values: Vec<f64> = Vec::with_capacity(K * K);
    for j in 1..=K {
        for k in 1..=K {
            values.push(((j * j + k * k) as f64) * PI * PI);
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values[i - 1])
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_or_p: f64,
    pub dofs: usize,
    pub lambda: f64,
    pub err_lambda: Option<f64>,
    pub err_energy: Option<f64>,
    pub err_l2: Option<f64>,
    pub rate_lambda: Option<Rate>,
    pub rate_energy: Option<Rate>,
    pub wall_ms: f64,
}

pub struct RunOutput {
    pub rows: Vec<ConvergenceRow>,
    pub reference_label: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_rate(r: Option<Rate>) -> String {
    match r {
        None => String::new(),
        Some(Rate::Saturated) => "saturated".into(),
        Some(Rate::Value(v)) => v.to_string(),
    }
}

pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.3}\n",
            r.level,
            r.h_or_p,
            r.dofs,
            r.lambda,
            fmt_opt(r.err_lambda),
            fmt_opt(r.err_energy),
            fmt_opt(r.err_l2),
            fmt_rate(r.rate_lambda),
            fmt_rate(r.rate_energy),
            r.wall_ms,
        ));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ConvergenceRow]) -> RunResult<()> {
    fs::write(path, to_csv(rows)).map_err(|source| {
        CliError::Core(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

/// Human-readable counterpart of the CSV for standard output.
pub fn summary_table(title: &str, reference_label: &str, rows: &[ConvergenceRow]) -> String {
    let mut out = format!("{title}\nreference: {reference_label}\n");
    out.push_str(&format!(
        "{:>5} {:>10} {:>8} {:>18} {:>12} {:>12} {:>12} {:>9} {:>9} {:>9}\n",
        "level", "h_or_p", "dofs", "lambda", "err_lambda", "err_energy", "err_l2", "rate_l",
        "rate_en", "wall_ms"
    ));
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
    let rate = |r: Option<Rate>| match r {
        None => "-".to_string(),
        Some(Rate::Saturated) => "sat".into(),
        Some(Rate::Value(v)) => format!("{v:.2}"),
    };
    for r in rows {
        out.push_str(&format!(
            "{:>5} {:>10.6} {:>8} {:>18.12} {:>12} {:>12} {:>12} {:>9} {:>9} {:>9.3}\n",
            r.level,
            r.h_or_p,
            r.dofs,
            r.lambda,
            opt(r.err_lambda),
            opt(r.err_energy),
            opt(r.err_l2),
            rate(r.rate_lambda),
            rate(r.rate_energy),
            r.wall_ms,
        ));
    }
    out
}

struct RunReference {
    solution: ReferenceSolution,
    label: String,
}

/// Analytic reference for the pure Laplace problem; otherwise one direct
/// solve on the finest mesh refined twice more, carrying only λ.
fn reference_for(cfg: &RunConfig, finest: &FeSpace) -> RunResult<RunReference> {
    if cfg.coeff_a.is_one() && cfg.rho.is_one() {
        let lambda = unit_square_eigenvalue(cfg.index)?;
        let solution = if cfg.index == 1 {
            analytic_reference(1, 1)?
        } else {
            // repeated eigenvalues make the eigenfunction non-unique, so
            // function-space errors are only reported for the first mode
            ReferenceSolution {
                lambda,
                func: None,
                grad: None,
            }
        };
        Ok(RunReference {
            solution,
            label: format!("analytic, lambda = {lambda}"),
        })
    } else {
        let mesh = refine_regular(&refine_regular(&finest.mesh));
        let space = FeSpace::new(mesh, finest.order)?;
        let a = apply_dirichlet(&assemble_stiffness(&space, &cfg.coeff_a.field())?, &space);
        let b = apply_dirichlet(&assemble_mass(&space, &cfg.rho.field())?, &space);
        let pairs = smallest_eigenpairs(&a, &b, cfg.index, cfg.tol)?;
        let lambda = pairs[cfg.index - 1].value;
        Ok(RunReference {
            solution: ReferenceSolution {
                lambda,
                func: None,
                grad: None,
            },
            label: format!(
                "direct solve on the finest mesh refined twice ({} free dofs), lambda = {lambda}",
                space.free_dofs.len()
            ),
        })
    }
}

/// One-level hierarchy over an `m`-subdivision mesh: the direct-solve path.
fn single_level(cfg: &RunConfig, m: usize) -> RunResult<Hierarchy> {
    let mut h = Hierarchy::build(
        Way::Multigrid,
        m,
        1,
        cfg.order,
        &cfg.coeff_a.field(),
        &cfg.rho.field(),
    )?;
    apply_tolerances(&mut h, cfg);
    Ok(h)
}

fn apply_tolerances(h: &mut Hierarchy, cfg: &RunConfig) {
    h.eig_tol = cfg.tol;
    h.cg_tol = (0.1 * cfg.tol).clamp(1e-15, 1e-12);
}

fn row_from_pair(
    space: &FeSpace,
    pair: &EigenPair,
    reference: &ReferenceSolution,
    level: usize,
    h_or_p: f64,
    wall_ms: f64,
) -> ConvergenceRow {
    let full = expand_free(space, &pair.vector);
    ConvergenceRow {
        level,
        h_or_p,
        dofs: space.free_dofs.len(),
        lambda: pair.value,
        err_lambda: Some((pair.value - reference.lambda).abs()),
        err_energy: reference
            .grad
            .as_ref()
            .map(|g| energy_error(space, &full, g)),
        err_l2: reference.func.as_ref().map(|f| l2_error(space, &full, f)),
        rate_lambda: None,
        rate_energy: None,
        wall_ms,
    }
}

/// Multispace levels rise in order on a fixed mesh, so the rate denominator
/// uses 1/p as the size proxy; everywhere else h_or_p already is h.
fn rate_sizes(way: Way, rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.iter()
        .map(|r| match way {
            Way::Multigrid => r.h_or_p,
            Way::Multispace => 1.0 / r.h_or_p,
        })
        .collect()
}

fn attach_rates(rows: &mut [ConvergenceRow], sizes: &[f64]) -> Result<(), Error> {
    if rows.len() < 2 {
        return Ok(());
    }
    let lam: Vec<f64> = rows.iter().map(|r| r.err_lambda.unwrap_or(-1.0)).collect();
    if lam.iter().all(|&e| e >= 0.0) {
        for (row, rate) in rows.iter_mut().skip(1).zip(estimate_rate(&lam, sizes)?) {
            row.rate_lambda = Some(rate);
        }
    }
    let en: Vec<f64> = rows.iter().map(|r| r.err_energy.unwrap_or(-1.0)).collect();
    if en.iter().all(|&e| e >= 0.0) {
        for (row, rate) in rows.iter_mut().skip(1).zip(estimate_rate(&en, sizes)?) {
            row.rate_energy = Some(rate);
        }
    }
    Ok(())
}

/// Discrete eigenvalues of a conforming space can only overshoot the
/// continuum; for the tracked first Laplace eigenvalue this is checked on
/// every emitted row.
fn check_lower_bound(cfg: &RunConfig, rows: &[ConvergenceRow]) -> RunResult<()> {
    if cfg.index != 1 || !cfg.coeff_a.is_one() || !cfg.rho.is_one() {
        return Ok(());
    }
    for r in rows {
        if r.lambda < LAMBDA_1 * (1.0 - 1e-10) {
            return Err(CliError::LowerBound {
                lambda: r.lambda,
                bound: LAMBDA_1,
            });
        }
    }
    Ok(())
}

fn finish(
    cfg: &RunConfig,
    mut rows: Vec<ConvergenceRow>,
    sizes: &[f64],
    reference: RunReference,
) -> RunResult<RunOutput> {
    attach_rates(&mut rows, sizes)?;
    check_lower_bound(cfg, &rows)?;
    if let Some(out) = &cfg.out {
        write_csv(out, &rows)?;
    }
    Ok(RunOutput {
        rows,
        reference_label: reference.label,
    })
}

/// Direct eigensolves on the sweep of meshes m, 2m, 4m, ... (`levels`
/// entries), all at the configured order.
pub fn run_direct(cfg: &RunConfig) -> RunResult<RunOutput> {
    cfg.validate()?;
    let mut ladders = Vec::with_capacity(cfg.levels);
    for j in 0..cfg.levels {
        let mj = cfg
            .m
            .checked_mul(1usize << j)
            .ok_or_else(|| Error::InvalidArgument("mesh subdivision overflow".into()))?;
        ladders.push((mj, single_level(cfg, mj)?));
    }
    let reference = reference_for(cfg, &ladders.last().unwrap().1.levels[0].space)?;
    let mut rows = Vec::with_capacity(cfg.levels);
    for (j, (mj, h)) in ladders.iter().enumerate() {
        let t = Instant::now();
        let pair = h.solve_coarse(cfg.index)?;
        let wall = t.elapsed().as_secs_f64() * 1e3;
        rows.push(row_from_pair(
            &h.levels[0].space,
            &pair,
            &reference.solution,
            j + 1,
            1.0 / (*mj as f64),
            wall,
        ));
    }
    let sizes = rate_sizes(Way::Multigrid, &rows);
    finish(cfg, rows, &sizes, reference)
}

fn run_hierarchy(cfg: &RunConfig, way: Way, levels: usize) -> RunResult<RunOutput> {
    cfg.validate()?;
    let mut h = Hierarchy::build(
        way,
        cfg.m,
        levels,
        cfg.order,
        &cfg.coeff_a.field(),
        &cfg.rho.field(),
    )?;
    apply_tolerances(&mut h, cfg);
    let reference = reference_for(cfg, &h.levels.last().unwrap().space)?;
    let (_, trace) = h.multi_level_solve(cfg.index, Some(&reference.solution))?;
    let rows: Vec<ConvergenceRow> = trace
        .records
        .iter()
        .map(|rec| ConvergenceRow {
            level: rec.level,
            h_or_p: rec.h_or_p,
            dofs: rec.dofs,
            lambda: rec.lambda,
            err_lambda: rec.err_lambda,
            err_energy: rec.err_energy,
            err_l2: rec.err_l2,
            rate_lambda: None,
            rate_energy: None,
            wall_ms: rec.wall_ms,
        })
        .collect();
    let sizes = rate_sizes(way, &rows);
    finish(cfg, rows, &sizes, reference)
}

/// Coarse eigensolve, one source solve on the fine mesh (h = H²), Rayleigh
/// quotient. Equivalent to the two-level correction ladder, which runs no
/// augmented eigenproblem.
pub fn run_two_grid(cfg: &RunConfig) -> RunResult<RunOutput> {
    run_hierarchy(cfg, Way::Multigrid, 2)
}

/// Full multi-level correction run with the configured way and depth.
pub fn run_multilevel(cfg: &RunConfig) -> RunResult<RunOutput> {
    run_hierarchy(cfg, cfg.way, cfg.levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlcfem_core::fem::integrate;
    use mlcfem_core::mesh::unit_square_mesh;

    #[test]
    fn rate_of_clean_second_order_data() {
        let rates = estimate_rate(&[1e-2, 2.5e-3], &[0.25, 0.125]).unwrap();
        assert_eq!(rates.len(), 1);
        match rates[0] {
            Rate::Value(v) => assert!((v - 2.0).abs() < 1e-12, "{v}"),
            Rate::Saturated => panic!("unexpected saturation"),
        }
    }

    #[test]
    fn rate_of_constant_errors_is_zero() {
        let rates = estimate_rate(&[3.0, 3.0, 3.0], &[0.4, 0.2, 0.1]).unwrap();
        for r in rates {
            assert_eq!(r, Rate::Value(0.0));
        }
    }

    #[test]
    fn rate_flags_saturation_on_zero_error() {
        let rates = estimate_rate(&[1e-3, 0.0], &[0.2, 0.1]).unwrap();
        assert_eq!(rates[0], Rate::Saturated);
    }

    #[test]
    fn rate_validates_input() {
        assert!(estimate_rate(&[1.0], &[0.5]).is_err());
        assert!(estimate_rate(&[1.0, 2.0], &[0.5]).is_err());
        assert!(estimate_rate(&[1.0, 2.0], &[0.5, -0.25]).is_err());
        assert!(estimate_rate(&[1.0, 2.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn analytic_eigenvalues() {
        let r11 = analytic_reference(1, 1).unwrap();
        assert!((r11.lambda - 2.0 * PI * PI).abs() < 1e-13);
        let r12 = analytic_reference(1, 2).unwrap();
        assert!((r12.lambda - 5.0 * PI * PI).abs() < 1e-13);
        assert!(analytic_reference(0, 1).is_err());
    }

    #[test]
    fn analytic_eigenfunction_has_unit_l2_norm() {
        let r = analytic_reference(1, 1).unwrap();
        let f = r.func.unwrap();
        let space = FeSpace::new(unit_square_mesh(32).unwrap(), 1).unwrap();
        let norm2 = integrate(&space, 10, |x, y| f(x, y).powi(2)).unwrap();
        assert!((norm2.sqrt() - 1.0).abs() <= 1e-10, "{norm2}");
    }

    #[test]
    fn spectrum_index_respects_multiplicity() {
        assert!((unit_square_eigenvalue(1).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((unit_square_eigenvalue(2).unwrap() - 5.0 * PI * PI).abs() < 1e-12);
        assert!((unit_square_eigenvalue(3).unwrap() - 5.0 * PI * PI).abs() < 1e-12);
        assert!((unit_square_eigenvalue(4).unwrap() - 8.0 * PI * PI).abs() < 1e-12);
        assert!(unit_square_eigenvalue(0).is_err());
    }

    #[test]
    fn config_defaults_and_pairs() {
        let mut cfg = RunConfig::default();
        cfg.apply_pair("way", "multispace").unwrap();
        cfg.apply_pair("m", "8").unwrap();
        cfg.apply_pair("levels", "3").unwrap();
        cfg.apply_pair("tol", "1e-9").unwrap();
        cfg.apply_pair("coeff_a", "wavy").unwrap();
        cfg.apply_pair("domain", "unit-square").unwrap();
        assert_eq!(cfg.way, Way::Multispace);
        assert_eq!(cfg.m, 8);
        assert_eq!(cfg.levels, 3);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.coeff_a, Coeff::Wavy);
        assert!(cfg.apply_pair("solver", "magic").is_err());
        assert!(cfg.apply_pair("m", "-3").is_err());
        assert!(cfg.apply_pair("domain", "disk").is_err());
    }

    #[test]
    fn config_file_parses_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(
            &path,
            "# study\nway = multigrid\nm = 8   # coarse side\n\nlevels = 2\nrho = 2.5\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.m, 8);
        assert_eq!(cfg.levels, 2);
        assert_eq!(cfg.rho, Coeff::Constant(2.5));
    }

    #[test]
    fn config_file_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "m = 4\nnot a pair\n").unwrap();
        let mut cfg = RunConfig::default();
        match cfg.apply_file(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match cfg.apply_file(Path::new("/nonexistent/run.cfg")) {
            Err(Error::Io { .. }) => {}
            other => panic!("expected io error, got {other:?}"),
        }
    }

    #[test]
    fn csv_header_and_optional_cells() {
        let rows = vec![ConvergenceRow {
            level: 1,
            h_or_p: 0.25,
            dofs: 9,
            lambda: 20.5,
            err_lambda: Some(0.75),
            err_energy: None,
            err_l2: None,
            rate_lambda: None,
            rate_energy: Some(Rate::Saturated),
            wall_ms: 1.2345,
        }];
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "1,0.25,9,20.5,0.75,,,,saturated,1.234");
        assert!(lines.next().is_none());
    }

    #[test]
    fn coefficient_parsing() {
        assert_eq!(Coeff::parse("2.5").unwrap(), Coeff::Constant(2.5));
        assert_eq!(Coeff::parse("wavy").unwrap(), Coeff::Wavy);
        assert!(Coeff::parse("-1").is_err());
        assert!(Coeff::parse("0").is_err());
        assert!(Coeff::parse("zebra").is_err());
        assert!(Coeff::Wavy.field().eval(0.5, 0.5) > 1.0);
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(CliError::Core(Error::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(Error::UnsupportedLadder("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::Core(Error::IterationLimit {
                iterations: 1,
                residual: 1.0
            })
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::LowerBound {
                lambda: 1.0,
                bound: 2.0
            }
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(Error::Io {
                path: PathBuf::from("x"),
                source: std::io::Error::other("x")
            })
            .exit_code(),
            4
        );
    }
}
