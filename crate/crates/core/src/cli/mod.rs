//! Command-line front end.

mod vtk;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::analysis::{convergence_study, AnalysisError, ManufacturedProblem, StabilityConstants};
use crate::complex::{hodge_decompose, Cochain, ComplexError, GradedComplex, HarmonicBasis, DEFAULT_RANK_TOL};
use crate::expr::{parse_expression, EvalError, Expr};
use crate::linalg::SpdFactor;
use crate::mesh::{generate_mesh, Domain, MeshError, SimplicialMesh};
use crate::solvers::{laplace_via_dirac_with, DiracSolver, DiracSource, LaplaceSolver, SolverError};
use crate::whitney::{sample_field, AnalyticForm, BoundaryCondition, GradedForm, WhitneyError};

pub use vtk::{write_vtk, VtkField};

/// Largest accepted `--levels` for a convergence study.
pub const MAX_LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write a mesh in the text format.
    Mesh,
    /// Solve the Dirac problem for the given source.
    SolveDirac,
    /// Solve the mixed Laplace problem for the given source.
    SolveLaplace,
    /// Split the interpolated field into exact, harmonic and coexact parts.
    Decompose,
    /// Print the Poincaré and inf-sup constants.
    Constants,
    /// Run a convergence study and write the CSV report.
    Convergence,
    /// Solve for a 1-form with zero divergence and curl x·y on the unit
    /// disk, for both boundary conditions.
    DemoDisk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Square,
    Disk,
    Annulus,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Square => Domain::Square,
            DomainArg::Disk => Domain::Disk,
            DomainArg::Annulus => Domain::Annulus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    Natural,
    Essential,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Natural => BoundaryCondition::Natural,
            BcArg::Essential => BoundaryCondition::Essential,
        }
    }
}

/// Options of one invocation.
#[derive(Debug, Clone, Parser)]
#[command(name = "hodgedirac", version, about = "Discrete Hodge–Dirac problems with Whitney forms")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = DomainArg::Square)]
    pub domain: DomainArg,
    #[arg(long, default_value_t = 8)]
    pub resolution: usize,
    /// Refinement levels of a convergence study.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Natural)]
    pub bc: BcArg,
    /// 0-form component of the source.
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<String>,
    /// x component of the 1-form source.
    #[arg(long, allow_hyphen_values = true)]
    pub f1x: Option<String>,
    /// y component of the 1-form source.
    #[arg(long, allow_hyphen_values = true)]
    pub f1y: Option<String>,
    /// 2-form component of the source, as a density.
    #[arg(long, allow_hyphen_values = true)]
    pub f2: Option<String>,
    /// Read the mesh from a file instead of generating it.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Output file, or output directory for `demo-disk`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bound on relative solver residuals.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Solve the Laplace problem by two Dirac solves.
    #[arg(long)]
    pub via_dirac: bool,
    /// Built-in manufactured problem for `convergence`.
    #[arg(long, default_value = "smooth1")]
    pub problem: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Mesh(String),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Mesh(_) => "mesh",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Mesh(_) => 4,
            CliError::Solver(_) => 5,
            CliError::Io { .. } => 6,
        }
    }

    /// The one-line diagnostic `error[class]: message`.
    pub fn diagnostic(&self) -> String {
        let message = self.to_string().replace('\n', " ");
        format!("error[{}]: {message}", self.class())
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Mesh(e.to_string())
    }
}

impl From<WhitneyError> for CliError {
    fn from(e: WhitneyError) -> Self {
        match e {
            WhitneyError::Mesh(_) | WhitneyError::DegenerateTriangle { .. } => CliError::Mesh(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::Mesh(e) => e.into(),
            ComplexError::Whitney(e) => e.into(),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Complex(e) => e.into(),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Complex(e) => e.into(),
            AnalysisError::Solver(e) => e.into(),
            AnalysisError::Whitney(e) => e.into(),
            AnalysisError::UnsupportedProblem { .. } | AnalysisError::TooFewLevels(_) => CliError::Usage(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl RunConfig {
    /// Checks option combinations that clap cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.resolution == 0 {
            return Err(CliError::Usage("--resolution must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage("--tol must be a positive number".into()));
        }
        if self.f1x.is_some() != self.f1y.is_some() {
            return Err(CliError::Usage("--f1x and --f1y must be given together".into()));
        }
        if self.command == Command::Convergence {
            if !(2..=MAX_LEVELS).contains(&self.levels) {
                return Err(CliError::Usage(format!("--levels must be between 2 and {MAX_LEVELS}")));
            }
            if self.mesh.is_some() {
                return Err(CliError::Usage("convergence generates its own meshes; --mesh is not allowed".into()));
            }
        }
        if self.command == Command::Decompose && self.f0.is_none() && self.f1x.is_none() && self.f2.is_none() {
            return Err(CliError::Usage("decompose needs a field: give --f0, --f1x/--f1y or --f2".into()));
        }
        Ok(())
    }

    fn output(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn build_mesh(&self) -> Result<SimplicialMesh, CliError> {
        match &self.mesh {
            Some(path) => {
                let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
                SimplicialMesh::read_text(BufReader::new(file)).map_err(|e| match e {
                    MeshError::Io(source) => CliError::io(path, source),
                    e => CliError::Mesh(format!("{}: {e}", path.display())),
                })
            }
            None => Ok(generate_mesh(self.domain.into(), self.resolution)),
        }
    }
}

/// Records the first evaluation error raised inside a form closure.
#[derive(Debug, Clone, Default)]
struct EvalErrors(Arc<Mutex<Option<(String, EvalError)>>>);

impl EvalErrors {
    fn function(&self, flag: &str, expr: Expr) -> impl Fn(f64, f64) -> f64 + Send + Sync + 'static {
        let slot = self.0.clone();
        let flag = flag.to_string();
        move |x, y| match expr.eval(x, y) {
            Ok(v) => v,
            Err(e) => {
                let mut slot = slot.lock().expect("evaluation lock poisoned");
                slot.get_or_insert((flag.clone(), e));
                f64::NAN
            }
        }
    }

    fn check(&self) -> Result<(), CliError> {
        match self.0.lock().expect("evaluation lock poisoned").take() {
            Some((flag, e)) => Err(CliError::Parse(format!("in --{flag}: {e}"))),
            None => Ok(()),
        }
    }
}

fn parse_flag(flag: &str, text: &str) -> Result<Expr, CliError> {
    parse_expression(text).map_err(|e| CliError::Parse(format!("in --{flag}: {e}")))
}

fn source_form(config: &RunConfig, errors: &EvalErrors) -> Result<GradedForm, CliError> {
    let mut form = GradedForm::zero();
    if let Some(text) = &config.f0 {
        form = form.with_zero(AnalyticForm::zero_form(errors.function("f0", parse_flag("f0", text)?)));
    }
    if let (Some(tx), Some(ty)) = (&config.f1x, &config.f1y) {
        let fx = errors.function("f1x", parse_flag("f1x", tx)?);
        let fy = errors.function("f1y", parse_flag("f1y", ty)?);
        form = form.with_one(AnalyticForm::one_form(move |x, y| [fx(x, y), fy(x, y)]));
    }
    if let Some(text) = &config.f2 {
        form = form.with_two(AnalyticForm::two_form(errors.function("f2", parse_flag("f2", text)?)));
    }
    Ok(form)
}

/// Degree-wise VTK fields `prefix0`, `prefix1`, `prefix2` of a cochain.
pub fn cochain_fields(complex: &GradedComplex, x: &Cochain, prefix: &str) -> Result<Vec<VtkField>, CliError> {
    (0..3)
        .map(|k| {
            let samples = sample_field(complex.mesh(), k, &complex.extend_component(x, k))?;
            Ok(VtkField::new(format!("{prefix}{k}"), samples))
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn check_residual(residual: f64, tol: f64) -> Result<(), CliError> {
    if residual > tol {
        return Err(CliError::Solver(format!("residual {residual:e} exceeds tolerance {tol:e}")));
    }
    Ok(())
}

fn emit(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Executes one subcommand, writing a short summary to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    match config.command {
        Command::Mesh => run_mesh(config, out),
        Command::SolveDirac => run_solve_dirac(config, out),
        Command::SolveLaplace => run_solve_laplace(config, out),
        Command::Decompose => run_decompose(config, out),
        Command::Constants => run_constants(config, out),
        Command::Convergence => run_convergence(config, out),
        Command::DemoDisk => run_demo_disk(config, out),
    }
}

fn setup(config: &RunConfig) -> Result<(GradedComplex, HarmonicBasis), CliError> {
    let complex = GradedComplex::build(&config.build_mesh()?, config.bc.into())?;
    let harmonic = complex.harmonic_basis(DEFAULT_RANK_TOL)?;
    Ok((complex, harmonic))
}

fn run_mesh(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mesh = config.build_mesh()?;
    let path = config.output("mesh.txt");
    write_file(&path, &mesh.to_text())?;
    emit(
        out,
        format!("wrote {} ({} vertices, {} edges, {} triangles)", path.display(), mesh.count(0), mesh.count(1), mesh.count(2)),
    )
}

fn run_solve_dirac(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (complex, harmonic) = setup(config)?;
    let errors = EvalErrors::default();
    let source = DiracSource::analytic(&complex, &source_form(config, &errors)?)?;
    errors.check()?;
    let sol = DiracSolver::new(&complex, &harmonic)?.with_tol(config.tol).solve(&source)?;
    let mut fields = cochain_fields(&complex, &sol.u, "u")?;
    fields.extend(cochain_fields(&complex, &sol.p_cochain(&harmonic), "p")?);
    let path = config.output("dirac.vtk");
    write_file(&path, &write_vtk(complex.mesh(), "Dirac solution", &fields))?;
    emit(out, format!("residual {:.3e}", sol.residual))?;
    emit(out, format!("norm_V(u) {:.16e}", complex.norm_v(&sol.u)))?;
    emit(out, format!("norm(p) {:.16e}", sol.p.norm()))?;
    emit(out, format!("wrote {}", path.display()))
}

fn run_solve_laplace(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (complex, harmonic) = setup(config)?;
    let errors = EvalErrors::default();
    let source = DiracSource::analytic(&complex, &source_form(config, &errors)?)?;
    errors.check()?;
    let sol = if config.via_dirac {
        let solver = DiracSolver::new(&complex, &harmonic)?.with_tol(config.tol);
        laplace_via_dirac_with(&solver, &complex, &harmonic, &source)?
    } else {
        LaplaceSolver::new(&complex, &harmonic)?.with_tol(config.tol).solve(&source)?
    };
    check_residual(sol.residual, config.tol)?;
    let mut fields = cochain_fields(&complex, &sol.sigma, "sigma")?;
    fields.extend(cochain_fields(&complex, &sol.u, "u")?);
    fields.extend(cochain_fields(&complex, &harmonic.cochain(&sol.p), "p")?);
    let path = config.output("laplace.vtk");
    write_file(&path, &write_vtk(complex.mesh(), "Laplace solution", &fields))?;
    let method = if config.via_dirac { "two Dirac solves" } else { "mixed system" };
    emit(out, format!("method {method}"))?;
    emit(out, format!("residual {:.3e}", sol.residual))?;
    emit(out, format!("wrote {}", path.display()))
}

fn run_decompose(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (complex, harmonic) = setup(config)?;
    let errors = EvalErrors::default();
    let x = complex.interpolate(&source_form(config, &errors)?)?;
    errors.check()?;
    let parts = hodge_decompose(&complex, &harmonic, &x)?;
    check_residual(parts.residual, config.tol)?;
    let mut fields = cochain_fields(&complex, &parts.b_part, "exact")?;
    fields.extend(cochain_fields(&complex, &parts.h_part, "harmonic")?);
    fields.extend(cochain_fields(&complex, &parts.bstar_part, "coexact")?);
    let path = config.output("decompose.vtk");
    write_file(&path, &write_vtk(complex.mesh(), "Hodge decomposition", &fields))?;
    emit(out, format!("residual {:.3e}", parts.residual))?;
    for (name, part) in [("exact", &parts.b_part), ("harmonic", &parts.h_part), ("coexact", &parts.bstar_part)] {
        emit(out, format!("norm_W({name}) {:.16e}", complex.norm_w(part)))?;
    }
    emit(out, format!("wrote {}", path.display()))
}

fn run_constants(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (complex, harmonic) = setup(config)?;
    let s = StabilityConstants::compute(&complex, &harmonic)?;
    emit(out, format!("c_P {:.16e}", s.c_p))?;
    emit(out, format!("gamma_h {:.16e}", s.gamma_h))?;
    emit(out, format!("h {:.16e}", s.h))?;
    emit(out, format!("harmonic_dims {:?}", harmonic.dims()))
}

fn run_convergence(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let bc: BoundaryCondition = config.bc.into();
    let problem = ManufacturedProblem::by_name(&config.problem, bc)
        .ok_or_else(|| CliError::Usage(format!("unknown problem '{}' (known: smooth1, harmonic)", config.problem)))?;
    let report = convergence_study(config.domain.into(), bc, &problem, config.levels)?;
    let residual = report.levels.iter().fold(0.0f64, |m, l| m.max(l.residual));
    check_residual(residual, config.tol)?;
    let path = config.output("convergence.csv");
    write_file(&path, &report.to_csv())?;
    emit(out, format!("residual {residual:.3e}"))?;
    if let Some(r) = report.final_rates() {
        emit(out, format!("rates errW_u {:.3} errV_u {:.3} err_du {:.3}", r[0], r[1], r[2]))?;
    }
    emit(out, format!("wrote {}", path.display()))
}

/// Diagnostics of one `demo-disk` solve.
#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub bc: BoundaryCondition,
    pub path: PathBuf,
    /// `‖(u₀, 0, u₂)‖_W / ‖u‖_W`.
    pub side_components: f64,
    /// `maxᵢ |⟨u, qᵢ⟩|` over the harmonic basis.
    pub harmonic_constraint: f64,
    /// `max_v ⟨u, dv⟩ / ‖v‖_V` over 0-forms `v`.
    pub weak_divergence: f64,
    pub residual: f64,
    pub norm_u: f64,
}

/// File name of the `demo-disk` output for one boundary condition.
pub fn demo_file_name(bc: BoundaryCondition) -> String {
    format!("demo_disk_{bc}.vtk")
}

/// Solves `D u + p = x·y dx∧dy` on the disk and writes the VTK file into `dir`.
pub fn demo_disk(resolution: usize, bc: BoundaryCondition, tol: f64, dir: &Path) -> Result<DemoOutcome, CliError> {
    let complex = GradedComplex::build(&generate_mesh(Domain::Disk, resolution), bc)?;
    let harmonic = complex.harmonic_basis(DEFAULT_RANK_TOL)?;
    let source = GradedForm::zero()
        .with_zero(AnalyticForm::zero_form(|_, _| 0.0))
        .with_two(AnalyticForm::two_form(|x, y| x * y));
    let sol = DiracSolver::new(&complex, &harmonic)?
        .with_tol(tol)
        .solve(&DiracSource::Analytic(source))?;
    let u = &sol.u;
    let dims = complex.dims();
    let side = Cochain::from_components([
        u.component(0).into_owned(),
        nalgebra::DVector::zeros(dims[1]),
        u.component(2).into_owned(),
    ]);
    let norm_u = complex.norm_w(u);
    let side_components = if norm_u > 0.0 { complex.norm_w(&side) / norm_u } else { 0.0 };
    let harmonic_constraint = harmonic.coefficients(&complex, u).amax();

    // sup over v of ⟨u₁, dv⟩ / ‖v‖_V is √(rᵀ K⁻¹ r) with r = D₀ᵀ M₁ u₁
    let weak_divergence = if dims[0] == 0 {
        0.0
    } else {
        let (d0, m1) = (complex.d_block(0), complex.m_block(1));
        let r = d0.tr_mul_vec(&m1.mul_vec(&u.component(1).into_owned()));
        let k = complex.m_block(0).add_scaled(1.0, &d0.transpose().matmul(&m1.matmul(d0)));
        let factor = SpdFactor::new(&k).map_err(|e| CliError::Solver(e.to_string()))?;
        r.dot(&factor.solve(&r)).max(0.0).sqrt()
    };

    let mut fields = cochain_fields(&complex, u, "u")?;
    fields.push(VtkField::new("du", sample_field(complex.mesh(), 2, &complex.extend_component(&complex.apply_d(u), 2))?));
    let path = dir.join(demo_file_name(bc));
    write_file(&path, &write_vtk(complex.mesh(), &format!("demo disk, {bc} boundary conditions"), &fields))?;
    Ok(DemoOutcome {
        bc,
        path,
        side_components,
        harmonic_constraint,
        weak_divergence,
        residual: sol.residual,
        norm_u,
    })
}

fn run_demo_disk(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = config.output(".");
    for bc in [BoundaryCondition::Natural, BoundaryCondition::Essential] {
        let d = demo_disk(config.resolution, bc, config.tol, &dir)?;
        emit(
            out,
            format!(
                "{bc}: residual {:.3e} side_components {:.3e} harmonic_constraint {:.3e} weak_divergence {:.3e} wrote {}",
                d.residual,
                d.side_components,
                d.harmonic_constraint,
                d.weak_divergence,
                d.path.display()
            ),
        )?;
    }
    Ok(())
}
