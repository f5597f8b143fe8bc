//! Conserved quantities, error norms and convergence orders.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::grid::CellField;
use crate::math::{ln, sqrt};
use crate::{Error, Result};

/// Quantities of one field at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub energy: f64,
}

/// `Σ f ΔxΔy`, `Σ |f| ΔxΔy`, `(Σ f² ΔxΔy)^½` plus a model energy.
pub fn record(f: &CellField, energy: f64) -> DiagnosticsRow {
    let area = f.grid.cell_area();
    let (mut m, mut a, mut s) = (0.0, 0.0, 0.0);
    for v in &f.values {
        m += v;
        a += v.abs();
        s += v * v;
    }
    DiagnosticsRow { t: f.time, mass: m * area, l1: a * area, l2: sqrt(s * area), energy }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mass,
    L1,
    L2,
    Energy,
}

/// Time series of [`DiagnosticsRow`]s with strictly increasing times.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub energy: Vec<f64>,
}

impl DiagnosticsSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, row: DiagnosticsRow) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(row.t > last) {
                return Err(Error::Usage(format!("diagnostics time {} does not follow {last}", row.t)));
            }
        }
        self.times.push(row.t);
        self.mass.push(row.mass);
        self.l1.push(row.l1);
        self.l2.push(row.l2);
        self.energy.push(row.energy);
        Ok(())
    }

    pub fn row(&self, k: usize) -> DiagnosticsRow {
        DiagnosticsRow { t: self.times[k], mass: self.mass[k], l1: self.l1[k], l2: self.l2[k], energy: self.energy[k] }
    }

    pub fn values(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Mass => &self.mass,
            Quantity::L1 => &self.l1,
            Quantity::L2 => &self.l2,
            Quantity::Energy => &self.energy,
        }
    }

    /// `(q(t) - q(0)) / |q(0)|`; absolute deviation when `q(0) = 0`.
    pub fn relative_deviation(&self, q: Quantity) -> Vec<f64> {
        let v = self.values(q);
        let Some(&q0) = v.first() else {
            return Vec::new();
        };
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        v.iter().map(|x| (x - q0) / scale).collect()
    }

    /// Largest absolute relative deviation over the series.
    pub fn max_relative_deviation(&self, q: Quantity) -> f64 {
        self.relative_deviation(q).into_iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Largest relative change between consecutive rows.
    pub fn max_step_deviation(&self, q: Quantity) -> f64 {
        let v = self.values(q);
        v.windows(2).map(|w| (w[1] - w[0]).abs() / if w[0] == 0.0 { 1.0 } else { w[0].abs() }).fold(0.0, f64::max)
    }

    /// CSV with header `t,mass,l1,l2,energy`, full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,l1,l2,energy\n");
        for k in 0..self.len() {
            let r = self.row(k);
            let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", r.t, r.mass, r.l1, r.l2, r.energy);
        }
        s
    }
}

/// `(Σ (f̄ - f̄_exact)² ΔxΔy)^½`.
pub fn l2_error(f: &CellField, exact: &CellField) -> Result<f64> {
    if f.grid != exact.grid {
        return Err(Error::Usage("error norm needs fields on the same grid".into()));
    }
    let s: f64 = f.values.iter().zip(&exact.values).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sqrt(s * f.grid.cell_area()))
}

/// Errors on successively doubled meshes and the observed orders.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub meshes: Vec<usize>,
    pub errors: Vec<f64>,
    /// `orders[k] = log₂(e_{k-1}/e_k)`; `None` for the first mesh.
    pub orders: Vec<Option<f64>>,
}

pub fn convergence_orders(meshes: &[usize], errors: &[f64]) -> Result<ConvergenceReport> {
    if meshes.len() < 2 || meshes.len() != errors.len() {
        return Err(Error::Usage("convergence needs at least two meshes with one error each".into()));
    }
    for w in meshes.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Usage(format!("meshes {} and {} are not a doubling", w[0], w[1])));
        }
    }
    let mut orders = Vec::with_capacity(errors.len());
    orders.push(None);
    for w in errors.windows(2) {
        orders.push(Some(ln(w[0] / w[1]) / core::f64::consts::LN_2));
    }
    Ok(ConvergenceReport { meshes: meshes.to_vec(), errors: errors.to_vec(), orders })
}

impl ConvergenceReport {
    /// Aligned text table; `reference` adds the expected error and order
    /// columns when given.
    pub fn to_table(&self, reference: Option<(&[f64], &[Option<f64>])>) -> String {
        let mut s = String::new();
        match reference {
            Some(_) => {
                let _ = writeln!(s, "{:>8}  {:>12}  {:>7}  {:>12}  {:>7}", "mesh", "L2 error", "order", "reference", "ref.ord");
            }
            None => {
                let _ = writeln!(s, "{:>8}  {:>12}  {:>7}", "mesh", "L2 error", "order");
            }
        }
        for k in 0..self.meshes.len() {
            let mesh = format!("{0}x{0}", self.meshes[k]);
            let order = fmt_order(self.orders[k]);
            let _ = write!(s, "{:>8}  {:>12.3e}  {:>7}", mesh, self.errors[k], order);
            if let Some((e, o)) = reference {
                let re = e.get(k).map_or(String::from("-"), |v| format!("{v:.3e}"));
                let ro = fmt_order(o.get(k).copied().flatten());
                let _ = write!(s, "  {re:>12}  {ro:>7}");
            }
            s.push('\n');
        }
        s
    }
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or(String::from("-"), |v| format!("{v:.2}"))
}
