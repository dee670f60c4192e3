//! Versioned CSV tables. Every table starts with a `# gapmodes <name> v<N>`
//! comment, reals are printed with 12 significant digits, and every row ends
//! with the hash of the tolerance profile that produced it.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::bloch::RatioProfile;
use crate::interface::{Eigenfunction, InterfaceEigenvalue, Parity};
use crate::spectrum::{BandStructure, BoundaryKind, SpectralGap};

pub const SCHEMA_VERSION: u32 = 1;

/// A real with 12 significant digits; infinities as `inf`/`-inf`.
pub fn real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

pub fn kind_name(k: BoundaryKind) -> &'static str {
    match k {
        BoundaryKind::Dirichlet => "dirichlet",
        BoundaryKind::Neumann => "neumann",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, tol_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# gapmodes {} v{SCHEMA_VERSION}", self.name);
        let _ = writeln!(s, "{},tol_hash", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{},{tol_hash}", r.join(","));
        }
        s
    }

    pub fn write<W: Write>(&self, mut w: W, tol_hash: &str) -> io::Result<()> {
        w.write_all(self.render(tol_hash).as_bytes())
    }
}

/// Band edges `s₁, s₂, …` labeled by the boundary eigenvalue each one is.
pub fn edges_table(bs: &BandStructure) -> Table {
    let mut t = Table::new("edges", &["kind", "index", "lambda"]);
    for e in &bs.labeled_edges {
        t.push(vec![kind_name(e.kind).into(), e.index.to_string(), real(e.lambda)]);
    }
    t
}

/// `μ_k` and `ν_k` in one list, Dirichlet first.
pub fn boundary_table(dirichlet: &[f64], neumann: &[f64]) -> Table {
    let mut t = Table::new("boundary_eigenvalues", &["kind", "index", "lambda"]);
    for (kind, vals) in [(BoundaryKind::Dirichlet, dirichlet), (BoundaryKind::Neumann, neumann)] {
        for (i, v) in vals.iter().enumerate() {
            t.push(vec![kind_name(kind).into(), (i + 1).to_string(), real(*v)]);
        }
    }
    t
}

pub fn gaps_table(gaps: &[SpectralGap]) -> Table {
    let mut t = Table::new(
        "gaps",
        &["index", "lower", "upper", "lower_kind", "upper_kind", "polarity", "theorem_backed"],
    );
    for g in gaps {
        t.push(vec![
            g.index.to_string(),
            real(g.lower),
            real(g.upper),
            g.lower_edge_kind.map_or("none", kind_name).into(),
            kind_name(g.upper_edge_kind).into(),
            format!("{:?}", g.polarity),
            g.theorem_backed.to_string(),
        ]);
    }
    t
}

pub fn eigenfunction_table(xs: &[f64], psi: &[f64]) -> Table {
    let mut t = Table::new("eigenfunction", &["x", "psi"]);
    for (x, y) in xs.iter().zip(psi) {
        t.push(vec![real(*x), real(*y)]);
    }
    t
}

pub fn interface_eigenfunction_table(e: &Eigenfunction) -> Table {
    eigenfunction_table(&e.xs, &e.psi)
}

pub fn ratio_profile_table(profile: &RatioProfile) -> Table {
    let mut t = Table::new("ratio_profile", &["lambda", "R", "is_pole"]);
    for v in &profile.values {
        t.push(vec![real(v.lambda), real(v.value), v.is_pole.to_string()]);
    }
    t
}

/// One row of an eigenvalue scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub param: f64,
    pub lambda: f64,
    pub gap_left: usize,
    pub gap_right: usize,
    pub parity: Parity,
    pub residual: f64,
}

impl ScanRow {
    pub fn from_eigenvalue(param: f64, e: &InterfaceEigenvalue) -> Self {
        Self {
            param,
            lambda: e.lambda,
            gap_left: e.left_gap_index,
            gap_right: e.right_gap_index,
            parity: e.parity,
            residual: e.matching_residual,
        }
    }
}

pub fn scan_table(name: &str, rows: &[ScanRow]) -> Table {
    let mut t = Table::new(name, &["param", "lambda", "gap_left", "gap_right", "parity", "residual"]);
    for r in rows {
        t.push(vec![
            real(r.param),
            real(r.lambda),
            r.gap_left.to_string(),
            r.gap_right.to_string(),
            r.parity.as_str().into(),
            real(r.residual),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(real(0.283170112157), "2.83170112157e-1");
        assert_eq!(real(-2.5), "-2.50000000000e0");
        assert_eq!(real(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn header_and_hash_column() {
        let t = boundary_table(&[1.0], &[0.5, 2.0]);
        let s = t.render("abc");
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# gapmodes boundary_eigenvalues v1");
        assert_eq!(lines[1], "kind,index,lambda,tol_hash");
        assert_eq!(lines[3], "neumann,1,5.00000000000e-1,abc");
        assert_eq!(lines.len(), 5);
    }
}
