//! Per-level error tables with observed orders and CSV/Markdown rendering.

use crate::system::SolveReport;

pub const CSV_HEADER: &str =
    "level,e_u0,k_u0,e_utb,k_utb,e_ps,k_ps,e_ud,k_ud,e_div,k_div,e_pd,k_pd";

/// Below this floor an error is treated as round-off and its order is
/// undefined.
pub const ORDER_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: u32,
    pub n_dofs: usize,
    pub errors: [f64; 6],
    /// log₂ ratio against the previous level; absent on the first row or at
    /// the round-off floor.
    pub orders: [Option<f64>; 6],
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceTable {
    pub case_name: String,
    /// Degree k of the coupled P_k pair.
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
    pub reports: Vec<SolveReport>,
}

impl ConvergenceTable {
    pub fn new(case_name: &str, degree: usize) -> Self {
        Self {
            case_name: case_name.to_string(),
            degree,
            ..Self::default()
        }
    }

    pub fn push_level(&mut self, level: u32, n_dofs: usize, errors: [f64; 6]) {
        let orders = match self.rows.last() {
            Some(prev) => {
                let mut k = [None; 6];
                for i in 0..6 {
                    if prev.errors[i] > ORDER_FLOOR && errors[i] > ORDER_FLOOR {
                        k[i] = Some((prev.errors[i] / errors[i]).log2());
                    }
                }
                k
            }
            None => [None; 6],
        };
        self.rows.push(ConvergenceRow {
            level,
            n_dofs,
            errors,
            orders,
        });
    }

    /// Observed orders at the finest step (last row), if available.
    pub fn final_orders(&self) -> Option<[Option<f64>; 6]> {
        self.rows.last().map(|r| r.orders)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.level.to_string());
            for i in 0..6 {
                out.push(',');
                out.push_str(&sci(row.errors[i]));
                out.push(',');
                if let Some(k) = row.orders[i] {
                    out.push_str(&format!("{k:.1}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Two stacked pipe tables, free-flow norms then porous norms, in the
    /// layout of the reference tables.
    pub fn markdown(&self) -> String {
        let mut out = format!(
            "Errors and observed orders O(h^k), {} with the P{} pair\n\n",
            self.case_name, self.degree
        );
        let halves: [[usize; 3]; 2] = [[0, 1, 2], [3, 4, 5]];
        let heads = [
            ["‖us − us,h‖0", "⦀us − us,h⦀", "‖ps − ps,h‖0"],
            ["‖ud − ud,h‖0", "‖∇(ud − ud,h)‖0", "‖Ih pd − pd,h‖0"],
        ];
        for (cols, head) in halves.iter().zip(&heads) {
            out.push_str("| level |");
            for h in head {
                out.push_str(&format!(" {h} | k |"));
            }
            out.push_str("\n|---|");
            out.push_str("---|---|---|---|---|---|\n");
            for row in &self.rows {
                out.push_str(&format!("| {} |", row.level));
                for &i in cols {
                    let k = row.orders[i]
                        .map(|k| format!("{k:.1}"))
                        .unwrap_or_else(|| "-".into());
                    out.push_str(&format!(" {} | {k} |", sci(row.errors[i])));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out.push_str(&self.l2_velocity_note());
        out
    }

    /// Observation-only note on the L² velocity orders: superconvergence of
    /// one extra order shows up for some cases and degrees, but no estimate
    /// backs it, so nothing is ever asserted about it.
    pub fn l2_velocity_note(&self) -> String {
        let Some(orders) = self.final_orders() else {
            return String::new();
        };
        let k = self.degree as f64;
        let mut note = String::new();
        if let Some(k_u0) = orders[0] {
            if k_u0 > k + 0.7 {
                note.push_str(&format!(
                    "observed: free-flow velocity L2 order {k_u0:.1} exceeds the proven order {k:.0} (reported only, not asserted)\n"
                ));
            }
        }
        if let Some(k_ud) = orders[3] {
            if k_ud > k + 0.7 {
                note.push_str(&format!(
                    "observed: porous velocity L2 order {k_ud:.1} exceeds the proven order {k:.0} (reported only, not asserted)\n"
                ));
            }
        }
        note
    }
}

/// Scientific notation with a fixed-width exponent, e.g. 3.6430E-01.
fn sci(x: f64) -> String {
    if x == 0.0 {
        return "0.0000E+00".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let mant = x / 10f64.powi(exp);
    // guard against log10 round-off at powers of ten
    let (mant, exp) = if mant.abs() >= 10.0 {
        (mant / 10.0, exp + 1)
    } else if mant.abs() < 1.0 {
        (mant * 10.0, exp - 1)
    } else {
        (mant, exp)
    };
    format!("{mant:.4}E{exp:+03}")
}
