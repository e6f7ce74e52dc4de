use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{best_approx_error, squared_field_error, AnalysisError};
use crate::complex::{GradedComplex, DEFAULT_RANK_TOL};
use crate::mesh::{generate_mesh, Domain};
use crate::solvers::{DiracSolver, DiracSource};
use crate::whitney::{AnalyticForm, BoundaryCondition, GradedForm, QuadratureRule};

/// Header row of [`ConvergenceReport::to_csv`].
pub const CSV_HEADER: &str = "h,errW_u,errV_u,err_du,err_p,err_Bpart,err_Bstarpart";

/// Resolution of the coarsest level of a study.
pub const BASE_RESOLUTION: usize = 4;

/// A Dirac problem with known solution `(u, p)` and source
/// `f = du + d*u + p`, all given analytically.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub u: GradedForm,
    /// Exterior derivative of `u`.
    pub du: GradedForm,
    /// Harmonic part of the solution.
    pub p: GradedForm,
    pub f: GradedForm,
    domains: Vec<Domain>,
    bcs: Vec<BoundaryCondition>,
}

impl ManufacturedProblem {
    /// `u = (sin(πx) eʸ, sin(πy) cos x)` on the unit square with natural
    /// boundary conditions. `u·n = 0` on the boundary, `p = 0`, and
    /// `f = −div u + curl u dx∧dy`.
    pub fn smooth1() -> Self {
        let u = AnalyticForm::one_form(|x, y| [(PI * x).sin() * y.exp(), (PI * y).sin() * x.cos()]);
        let curl = |x: f64, y: f64| -(PI * y).sin() * x.sin() - (PI * x).sin() * y.exp();
        let div = |x: f64, y: f64| PI * (PI * x).cos() * y.exp() + PI * (PI * y).cos() * x.cos();
        Self {
            name: "smooth1".into(),
            u: GradedForm::zero().with_one(u),
            du: GradedForm::zero().with_two(AnalyticForm::two_form(curl)),
            p: GradedForm::zero(),
            f: GradedForm::zero()
                .with_zero(AnalyticForm::zero_form(move |x, y| -div(x, y)))
                .with_two(AnalyticForm::two_form(curl)),
            domains: vec![Domain::Square],
            bcs: vec![BoundaryCondition::Natural],
        }
    }

    /// `u = 0` and `f = p` a constant harmonic form: the constant 0-form for
    /// natural and the constant 2-form for essential boundary conditions.
    pub fn harmonic(bc: BoundaryCondition) -> Self {
        let p = match bc {
            BoundaryCondition::Natural => GradedForm::zero().with_zero(AnalyticForm::zero_form(|_, _| 1.0)),
            BoundaryCondition::Essential => GradedForm::zero().with_two(AnalyticForm::two_form(|_, _| 1.0)),
        };
        Self {
            name: "harmonic".into(),
            u: GradedForm::zero(),
            du: GradedForm::zero(),
            p: p.clone(),
            f: p,
            domains: vec![Domain::Square, Domain::Disk, Domain::Annulus],
            bcs: vec![bc],
        }
    }

    /// Built-in problem by name.
    pub fn by_name(name: &str, bc: BoundaryCondition) -> Option<Self> {
        match name {
            "smooth1" => Some(Self::smooth1()),
            "harmonic" => Some(Self::harmonic(bc)),
            _ => None,
        }
    }

    pub fn supports(&self, domain: Domain, bc: BoundaryCondition) -> bool {
        self.domains.contains(&domain) && self.bcs.contains(&bc)
    }
}

/// Errors on one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub resolution: usize,
    /// Maximum edge length.
    pub h: f64,
    pub err_w_u: f64,
    pub err_v_u: f64,
    pub err_du: f64,
    pub err_p: f64,
    /// Exact part of the discrete decomposition of `π_h u − u_h`.
    pub err_b_part: f64,
    /// Coexact part of the discrete decomposition of `π_h u − u_h`.
    pub err_bstar_part: f64,
    /// Best approximation error `E(du)` of the 2-form component of `du`.
    pub best_du: f64,
    pub residual: f64,
}

impl ConvergenceLevel {
    fn columns(&self) -> [f64; 6] {
        [
            self.err_w_u,
            self.err_v_u,
            self.err_du,
            self.err_p,
            self.err_b_part,
            self.err_bstar_part,
        ]
    }
}

/// Per-level errors of a convergence study and observed rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub domain: Domain,
    pub bc: BoundaryCondition,
    pub levels: Vec<ConvergenceLevel>,
}

impl ConvergenceReport {
    /// Observed rates `ln(eᵢ/eᵢ₊₁) / ln(hᵢ/hᵢ₊₁)` for consecutive levels, in
    /// CSV column order.
    pub fn rates(&self) -> Vec<[f64; 6]> {
        self.levels
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].columns(), w[1].columns());
                let scale = (w[0].h / w[1].h).ln();
                std::array::from_fn(|i| (a[i] / b[i]).ln() / scale)
            })
            .collect()
    }

    /// Rates on the finest level pair.
    pub fn final_rates(&self) -> Option<[f64; 6]> {
        self.rates().last().copied()
    }

    /// CSV with [`CSV_HEADER`], one row per level and a `rates` trailer for
    /// the finest pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        for level in &self.levels {
            write!(out, "{:.16e}", level.h).unwrap();
            for v in level.columns() {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        if let Some(rates) = self.final_rates() {
            out.push_str("rates");
            for v in rates {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Solves `problem` on `levels` successively doubled meshes starting at
/// resolution 4 and measures the errors.
pub fn convergence_study(
    domain: Domain,
    bc: BoundaryCondition,
    problem: &ManufacturedProblem,
    levels: usize,
) -> Result<ConvergenceReport, AnalysisError> {
    if levels < 2 {
        return Err(AnalysisError::TooFewLevels(levels));
    }
    if !problem.supports(domain, bc) {
        return Err(AnalysisError::UnsupportedProblem {
            problem: problem.name.clone(),
            domain,
            bc,
        });
    }
    let levels = (0..levels)
        .map(|i| study_level(domain, bc, problem, BASE_RESOLUTION << i))
        .collect::<Result<_, _>>()?;
    Ok(ConvergenceReport {
        problem: problem.name.clone(),
        domain,
        bc,
        levels,
    })
}

fn study_level(
    domain: Domain,
    bc: BoundaryCondition,
    problem: &ManufacturedProblem,
    resolution: usize,
) -> Result<ConvergenceLevel, AnalysisError> {
    let complex = GradedComplex::build(&generate_mesh(domain, resolution), bc)?;
    let harmonic = complex.harmonic_basis(DEFAULT_RANK_TOL)?;
    let solver = DiracSolver::new(&complex, &harmonic)?;
    let sol = solver.solve(&DiracSource::analytic(&complex, &problem.f)?)?;
    let rule = QuadratureRule::fine();

    let err_w_u = squared_field_error(&complex, &sol.u, &problem.u, &rule)?;
    let du_h = complex.apply_d(&sol.u);
    let err_du = squared_field_error(&complex, &du_h, &problem.du, &rule)?;
    let err_p = squared_field_error(&complex, &sol.p_cochain(&harmonic), &problem.p, &rule)?;

    // discrete Hodge decomposition of π_h u − u_h, reusing the factorization
    let e = &complex.interpolate(&problem.u)? - &sol.u;
    let split = solver.solve(&DiracSource::Cochain(e.clone()))?;
    let b_part = complex.apply_d(&split.u);
    let bstar_part = &(&e - &b_part) - &split.p_cochain(&harmonic);

    let best_du = match problem.du.component(2) {
        Some(w) => best_approx_error(&complex, w)?,
        None => 0.0,
    };
    Ok(ConvergenceLevel {
        resolution,
        h: complex.mesh().h(),
        err_w_u: err_w_u.sqrt(),
        err_v_u: (err_w_u + err_du).sqrt(),
        err_du: err_du.sqrt(),
        err_p: err_p.sqrt(),
        err_b_part: complex.norm_w(&b_part),
        err_bstar_part: complex.norm_w(&bstar_part),
        best_du,
        residual: sol.residual,
    })
}
