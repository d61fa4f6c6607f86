//! Manufactured-solution harness: build a case, solve a ladder of levels,
//! measure the six table norms, and report observed convergence orders.

mod cases;
mod norms;
mod table;

pub use cases::{
    case_by_name, case_one, case_two, CaseFamily, ManufacturedCase, ScalarField, TensorField,
    VectorField, CASE_FAMILIES,
};
pub use norms::{error_norms, field_errors, projected_gaps, ErrorNorms};
pub use table::{ConvergenceRow, ConvergenceTable, CSV_HEADER, ORDER_FLOOR};

use std::ops::RangeInclusive;

use crate::mesh::Mesh;
use crate::system::{self, CoupledSystem, Solution, SolveReport};
use crate::wg_stokes::DegreeProfile;
use crate::{Error, Result};

/// Default cap on unknowns per level.
pub const DEFAULT_DOF_BUDGET: usize = 500_000;

/// Assemble, constrain, and solve one level of a case.
pub fn solve_level(
    case: &ManufacturedCase,
    profile: &DegreeProfile,
    level: u32,
) -> Result<(CoupledSystem, Solution, SolveReport)> {
    let mesh = Mesh::at_level(case.domain, level)?;
    let mut sys = system::assemble(
        &mesh,
        profile,
        case.coeffs,
        |p| (case.f_s)(p),
        |p| (case.f_d)(p),
    )?;
    system::apply_boundary_data(&mut sys, |p| case.g_s(p), |p| case.g_d(p))?;
    let (sol, report) = sys
        .solve()
        .map_err(|e| Error::SingularSystem(format!("level {level}: {e}")))?;
    Ok((sys, sol, report))
}

/// Run a ladder of levels, recording the six norms per level; `on_level` sees
/// every solved level (for field dumps or inspection).
pub fn convergence_study_with(
    case: &ManufacturedCase,
    profile: &DegreeProfile,
    levels: RangeInclusive<u32>,
    dof_budget: usize,
    mut on_level: impl FnMut(u32, &CoupledSystem, &Solution, &SolveReport),
) -> Result<ConvergenceTable> {
    if levels.is_empty() {
        return Err(Error::InvalidDomain("empty level range".into()));
    }
    let mut tbl = ConvergenceTable::new(case.name, profile.max_degree());
    for level in levels {
        let mesh = Mesh::at_level(case.domain, level)?;
        let n_lambda = mesh.interface_edges().len() * (profile.alpha_d + 1);
        let dofs = system::DofMap::new(&mesh, profile, n_lambda);
        if dofs.n_total > dof_budget {
            return Err(Error::BudgetExceeded {
                level,
                dofs: dofs.n_total,
                budget: dof_budget,
            });
        }
        let (sys, sol, report) = solve_level(case, profile, level)?;
        let e = error_norms(&sys, &sol, case);
        on_level(level, &sys, &sol, &report);
        tbl.push_level(level, report.n_total, e.as_array());
        tbl.reports.push(report);
    }
    Ok(tbl)
}

pub fn convergence_study(
    case: &ManufacturedCase,
    profile: &DegreeProfile,
    levels: RangeInclusive<u32>,
    dof_budget: usize,
) -> Result<ConvergenceTable> {
    convergence_study_with(case, profile, levels, dof_budget, |_, _, _, _| {})
}
