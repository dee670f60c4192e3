use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use gapmodes::export::{self, ScanRow, Table};
use gapmodes::fd_oracle::{self, FdOptions};
use gapmodes::interface::{
    self, DislocationMode, InterfaceEigenvalue, InterfaceKind, InterfaceProblem, OverlapOutcome, SolveOptions,
};
use gapmodes::spectrum::{self, BandStructure, BoundaryKind, SpectralGap};
use gapmodes::{bloch, PeriodicPotential, Tolerances};

use crate::config::{self, CliError, CliResult, Grid};
use crate::{Common, FdArgs, ProblemArgs};

pub struct Context {
    potential: Option<PeriodicPotential>,
    pub tol: Tolerances,
    pub hash: String,
    pub seed: u64,
    out: Option<PathBuf>,
}

impl Context {
    pub fn new(common: &Common) -> CliResult<Self> {
        let tol = config::load_tolerances(&common.tol)?;
        if let Some(n) = common.workers {
            if n == 0 {
                return Err(CliError::Config("--workers must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
        }
        let potential = common.potential.as_deref().map(config::load_potential).transpose()?;
        Ok(Self {
            potential,
            hash: config::tolerance_hash(&tol),
            tol,
            seed: common.seed,
            out: common.out.clone(),
        })
    }

    pub fn base(&self) -> CliResult<&PeriodicPotential> {
        self.potential
            .as_ref()
            .ok_or_else(|| CliError::Config("--potential is required for this command".into()))
    }

    fn writer(&self, path: Option<&Path>) -> CliResult<Box<dyn Write>> {
        Ok(match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    pub fn emit(&self, table: &Table) -> CliResult<()> {
        self.emit_to(table, self.out.as_deref())
    }

    pub fn emit_to(&self, table: &Table, path: Option<&Path>) -> CliResult<()> {
        let mut w = self.writer(path)?;
        table.write(&mut w, &self.hash)?;
        w.flush()?;
        Ok(())
    }

    pub fn emit_json(&self, value: &serde_json::Value) -> CliResult<()> {
        let mut w = self.writer(self.out.as_deref())?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn fd_options(&self, fd: &FdArgs) -> FdOptions {
        FdOptions {
            half_width_periods: fd.half_width_periods,
            points_per_period: fd.points_per_period,
            seed: self.seed,
            ..FdOptions::default()
        }
    }
}

/// Default spectral window of the band commands.
fn band_window(p: &PeriodicPotential) -> f64 {
    p.upper_bound() + 1.5
}

/// `s₄`, the top of the second band, when it exists; otherwise a little above `max V`.
pub fn scan_window(p: &PeriodicPotential, tol: &Tolerances) -> CliResult<f64> {
    let edges = spectrum::band_edges(p, p.upper_bound() + 2.0, tol)?;
    Ok(edges.get(3).copied().unwrap_or(p.upper_bound() + 1.0))
}

pub fn bands(ctx: &Context, lambda_max: Option<f64>) -> CliResult<()> {
    let p = ctx.base()?;
    let bs = BandStructure::compute(p, lambda_max.unwrap_or_else(|| band_window(p)), &ctx.tol)?;
    ctx.emit(&export::edges_table(&bs))
}

pub fn gaps(ctx: &Context, lambda_max: Option<f64>) -> CliResult<()> {
    let p = ctx.base()?;
    let g = spectrum::gaps(p, lambda_max.unwrap_or_else(|| band_window(p)), &ctx.tol)?;
    ctx.emit(&export::gaps_table(&g))
}

pub fn boundary_eigs(ctx: &Context, count: usize) -> CliResult<()> {
    let p = ctx.base()?;
    if count == 0 {
        return Err(CliError::Config("--count must be at least 1".into()));
    }
    let mu = spectrum::boundary_eigenvalues(p, BoundaryKind::Dirichlet, count, &ctx.tol)?;
    let nu = spectrum::boundary_eigenvalues(p, BoundaryKind::Neumann, count, &ctx.tol)?;
    ctx.emit(&export::boundary_table(&mu, &nu))
}

fn find_gap(p: &PeriodicPotential, index: usize, tol: &Tolerances) -> CliResult<SpectralGap> {
    let mut lambda_max = band_window(p);
    for _ in 0..6 {
        let gaps = spectrum::gaps(p, lambda_max, tol)?;
        if let Some(g) = gaps.iter().find(|g| g.index == index) {
            return Ok(*g);
        }
        if gaps.last().is_some_and(|g| g.index > index) {
            break;
        }
        lambda_max = 2.0 * lambda_max + 1.0;
    }
    Err(CliError::Config(format!("gap {index} is closed or out of reach")))
}

pub fn ratio_profile(ctx: &Context, gap: usize, t: f64, samples: usize) -> CliResult<()> {
    let p = ctx.base()?;
    let g = find_gap(p, gap, &ctx.tol)?;
    let prof = bloch::ratio_profile(p, &g, t, samples, bloch::semi_infinite_cutoff(p), &ctx.tol)?;
    ctx.emit(&export::ratio_profile_table(&prof))
}

pub fn build_problem(ctx: &Context, args: &ProblemArgs) -> CliResult<InterfaceProblem> {
    let p = ctx.base()?.clone();
    let given = [args.right.is_some(), args.alpha.is_some(), args.t.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        return Err(CliError::Config("give exactly one of --right, --alpha, --t".into()));
    }
    let prob = if let Some(r) = &args.right {
        InterfaceProblem::two_potential(p, config::load_potential(r)?)?
    } else if let Some(a) = args.alpha {
        InterfaceProblem::additive(&p, a)?
    } else {
        InterfaceProblem::dislocation(&p, args.mode.into(), args.t.unwrap_or(0.0))?
    };
    Ok(prob)
}

/// All eigenvalues of `prob` up to `lambda_max`, in increasing order.
pub fn interface_eigenvalues(
    prob: &InterfaceProblem,
    base: &PeriodicPotential,
    mode: DislocationMode,
    lambda_max: f64,
    tol: &Tolerances,
) -> CliResult<Vec<InterfaceEigenvalue>> {
    let opts = SolveOptions::default();
    let mut out = Vec::new();
    match prob.kind {
        InterfaceKind::TwoPotential | InterfaceKind::Additive => {
            // a negative jump pulls gaps of V₀ from above lambda_max into range
            let reach = lambda_max + prob.alpha.map_or(0.0, f64::abs) + 2.0;
            let left = spectrum::gaps(&prob.left, reach, tol)?;
            let right: Vec<SpectralGap> = match prob.alpha {
                Some(a) if prob.kind == InterfaceKind::Additive => left.iter().map(|g| g.shifted(a)).collect(),
                _ => spectrum::gaps(&prob.right, reach, tol)?,
            };
            for gl in &left {
                for gr in &right {
                    let Some((lo, _)) = gl.overlap(gr) else { continue };
                    if lo >= lambda_max {
                        continue;
                    }
                    if let OverlapOutcome::Eigenvalue(e) = interface::solve_overlap(prob, gl, gr, &opts, tol)? {
                        out.push(e);
                    }
                }
            }
        }
        InterfaceKind::DislocationSymmetric | InterfaceKind::DislocationOneSided => {
            let t = prob.t.unwrap_or(0.0);
            let cutoff = bloch::semi_infinite_cutoff(base);
            for g in spectrum::gaps(base, lambda_max, tol)? {
                out.extend(interface::solve_dislocation(base, mode, t, &g, cutoff, &opts, tol)?);
            }
        }
    }
    out.retain(|e| e.lambda <= lambda_max);
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

fn problem_param(prob: &InterfaceProblem) -> f64 {
    prob.alpha.or(prob.t).unwrap_or(0.0)
}

pub fn interface(ctx: &Context, args: &ProblemArgs, lambda_max: Option<f64>, psi_out: Option<&Path>) -> CliResult<()> {
    let prob = build_problem(ctx, args)?;
    let base = ctx.base()?;
    let lambda_max = match lambda_max {
        Some(l) => l,
        None => scan_window(base, &ctx.tol)?,
    };
    let eigs = interface_eigenvalues(&prob, base, args.mode.into(), lambda_max, &ctx.tol)?;
    let param = problem_param(&prob);
    let rows: Vec<ScanRow> = eigs.iter().map(|e| ScanRow::from_eigenvalue(param, e)).collect();
    ctx.emit(&export::scan_table("interface", &rows))?;
    if let Some(path) = psi_out {
        let mut t = Table::new("interface_eigenfunctions", &["index", "lambda", "x", "psi"]);
        for (i, e) in eigs.iter().enumerate() {
            let ef = &e.eigenfunction;
            for (x, y) in ef.xs.iter().zip(&ef.psi) {
                t.push(vec![i.to_string(), export::real(e.lambda), export::real(*x), export::real(*y)]);
            }
        }
        ctx.emit_to(&t, Some(path))?;
    }
    Ok(())
}

pub fn additive_scan(ctx: &Context, grid: Grid, lambda_max: Option<f64>) -> CliResult<()> {
    let p = ctx.base()?;
    let lambda_max = match lambda_max {
        Some(l) => l,
        None => scan_window(p, &ctx.tol)?,
    };
    let scan = interface::additive_scan(p, &grid.points(), lambda_max, &SolveOptions::default(), &ctx.tol)?;
    let rows: Vec<ScanRow> = scan
        .iter()
        .flat_map(|pt| pt.eigenvalues(lambda_max).into_iter().map(|e| ScanRow::from_eigenvalue(pt.alpha, e)))
        .collect();
    ctx.emit(&export::scan_table("additive_scan", &rows))
}

/// `n` points over one period, `t = d·i/n`.
pub fn period_grid(p: &PeriodicPotential, n: usize) -> Vec<f64> {
    (0..n).map(|i| p.period() * i as f64 / n as f64).collect()
}

pub fn dislocation_scan(ctx: &Context, mode: DislocationMode, grid: Option<Grid>, lambda_max: Option<f64>) -> CliResult<()> {
    let p = ctx.base()?;
    let lambda_max = match lambda_max {
        Some(l) => l,
        None => scan_window(p, &ctx.tol)?,
    };
    let ts = grid.map_or_else(|| period_grid(p, 64), |g| g.points());
    let scan = interface::dislocation_scan(p, mode, &ts, lambda_max, &SolveOptions::default(), &ctx.tol)?;
    let rows: Vec<ScanRow> = scan
        .points
        .iter()
        .flat_map(|pt| pt.eigenvalues.iter().map(|e| ScanRow::from_eigenvalue(pt.t, e)))
        .collect();
    let name = match mode {
        DislocationMode::Symmetric => "dislocation_scan_symmetric",
        DislocationMode::OneSided => "dislocation_scan_one_sided",
    };
    ctx.emit(&export::scan_table(name, &rows))
}

pub fn oracle(ctx: &Context, args: &ProblemArgs, fd: &FdArgs, lambda_max: Option<f64>, all: bool) -> CliResult<()> {
    let prob = build_problem(ctx, args)?;
    let base = ctx.base()?;
    let hi = match lambda_max {
        Some(l) => l,
        None => scan_window(base, &ctx.tol)?,
    };
    let lo = prob.left.lower_bound().min(prob.right.lower_bound()) - 1.0;
    let opts = ctx.fd_options(fd);
    let op = fd_oracle::assemble_default(&prob, &opts)?;
    let pairs = fd_oracle::eigenvalues_in_window(&op, lo, hi, &opts)?;
    let mut t = Table::new("fd_oracle", &["lambda", "outer_mass", "localized"]);
    for q in &pairs {
        let mass = op.outer_mass_fraction(&q.vector);
        let localized = mass < fd_oracle::LOCALIZED_MASS;
        if localized || all {
            t.push(vec![export::real(q.lambda), export::real(mass), localized.to_string()]);
        }
    }
    ctx.emit(&t)
}
