use std::fmt::Write as _;

use coarse_grain::bath::{Bath, BathModel};
use coarse_grain::liouvillians::{build_generator, cg_tables, CgTables};
use coarse_grain::qmatrix::{eigh, CMatrix, EnergyBasis, C64};
use coarse_grain::solvers::{
    adaptive_cg_evolve, born_exponential_solver, evolve_constant_with, uniform_grid, DensityMatrix, EvolveOptions,
    Method, Trajectory,
};
use coarse_grain::spinsys::{bitstring_index, build_hamiltonian, coupling_operators, CouplingOperators};
use serde::Serialize;

use crate::config::{GeneratorChoice, InitialState, OutputBasis, RunConfig};
use crate::error::CliError;

/// Everything a run needs, built once from a config.
pub struct System {
    pub h: CMatrix,
    pub couplings: CouplingOperators,
    pub bath: Bath,
    pub basis: EnergyBasis,
}

impl System {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let h = build_hamiltonian(&cfg.system);
        let couplings = coupling_operators(&cfg.system);
        let bath = Bath::new(cfg.bath).map_err(|e| CliError::Config(e.to_string()))?;
        let basis = eigh(&h).map_err(CliError::solver("diagonalizing H_S"))?;
        Ok(Self { h, couplings, bath, basis })
    }
}

pub fn initial_state(cfg: &RunConfig, h: &CMatrix) -> Result<DensityMatrix, CliError> {
    let dim = h.nrows();
    let bad = |e: coarse_grain::Error| CliError::Config(format!("initial state: {e}"));
    match &cfg.initial {
        InitialState::UniformPure => Ok(DensityMatrix::uniform_pure(dim)),
        InitialState::Ground => DensityMatrix::ground(h).map_err(bad),
        InitialState::Gibbs { beta0 } => DensityMatrix::gibbs(h, *beta0).map_err(bad),
        InitialState::Computational { bits } => {
            if bits.len() != cfg.system.n {
                return Err(CliError::Config(format!("initial.bits '{bits}' needs {} bits", cfg.system.n)));
            }
            DensityMatrix::computational(bitstring_index(bits).map_err(bad)?, dim).map_err(bad)
        }
        InitialState::Matrix(m) => DensityMatrix::new(CMatrix::from_row_slice(dim, dim, m)).map_err(bad),
    }
}

/// Runs the configured scheme; `method` and `abort` override the config when given.
pub fn run(cfg: &RunConfig, method: Option<Method>, abort: Option<bool>) -> Result<Trajectory, CliError> {
    let sys = System::new(cfg)?;
    let rho0 = initial_state(cfg, &sys.h)?;
    let grid = uniform_grid(cfg.t_max, cfg.points).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = EvolveOptions {
        method: method.unwrap_or(cfg.method),
        abort_on_unphysical: abort.unwrap_or(cfg.abort_on_unphysical),
        ..EvolveOptions::default()
    };
    let label = generator_label(cfg.generator);
    match cfg.generator {
        GeneratorChoice::Fixed(kind) => {
            let l = build_generator(kind, &sys.h, &sys.couplings, &sys.bath)
                .map_err(CliError::solver(format!("building the {label} generator")))?;
            evolve_constant_with(&l, &rho0, &grid, opts).map_err(CliError::solver(format!("evolving under {label}")))
        }
        GeneratorChoice::CgAdaptive => adaptive_cg_evolve(&sys.h, &sys.couplings, &sys.bath, &rho0, &grid)
            .map_err(CliError::solver("adaptive coarse-graining")),
        GeneratorChoice::BornExp { axis } => {
            let BathModel::DrudeExp { tau_b } = cfg.bath.model else { unreachable!("checked at parse time") };
            born_exponential_solver(axis, tau_b, cfg.bath.lambda, &rho0, &grid).map_err(CliError::solver("Born solver"))
        }
    }
}

pub fn generator_label(g: GeneratorChoice) -> String {
    use coarse_grain::liouvillians::GeneratorKind;
    match g {
        GeneratorChoice::Fixed(GeneratorKind::Bm) => "bm".into(),
        GeneratorChoice::Fixed(GeneratorKind::Bms) => "bms".into(),
        GeneratorChoice::Fixed(GeneratorKind::Cg { tau }) => format!("cg(tau = {tau})"),
        GeneratorChoice::CgAdaptive => "cg-adaptive".into(),
        GeneratorChoice::BornExp { .. } => "born-exp".into(),
    }
}

fn in_basis(rho: &CMatrix, basis: Option<&EnergyBasis>) -> CMatrix {
    match basis {
        Some(b) => b.to_energy(rho),
        None => rho.clone(),
    }
}

/// CSV with columns time, eig_1..eig_N (largest first), trace_err, min_eig,
/// then |rho_ij| for each requested element.
pub fn trajectory_csv(
    traj: &Trajectory,
    eigenvalues: bool,
    elements: &[(usize, usize)],
    basis: Option<&EnergyBasis>,
) -> String {
    let n = traj.states.first().map_or(0, |s| s.nrows());
    let mut o = String::from("time");
    if eigenvalues {
        for k in 1..=n {
            let _ = write!(o, ",eig_{k}");
        }
    }
    o.push_str(",trace_err,min_eig");
    for (i, j) in elements {
        let _ = write!(o, ",abs_rho_{i}_{j}");
    }
    o.push('\n');
    for ((t, rho), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let _ = write!(o, "{t}");
        if eigenvalues {
            for e in &d.eigenvalues {
                let _ = write!(o, ",{e}");
            }
        }
        let _ = write!(o, ",{},{}", d.trace_error, d.min_eigenvalue);
        if !elements.is_empty() {
            let m = in_basis(rho, basis);
            for &(i, j) in elements {
                let _ = write!(o, ",{}", m[(i, j)].norm());
            }
        }
        o.push('\n');
    }
    o
}

pub fn run_csv(cfg: &RunConfig, traj: &Trajectory) -> Result<String, CliError> {
    let basis = energy_basis(cfg)?;
    Ok(trajectory_csv(traj, cfg.output.eigenvalues, &cfg.output.elements, basis.as_ref()))
}

fn energy_basis(cfg: &RunConfig) -> Result<Option<EnergyBasis>, CliError> {
    match cfg.output.basis {
        OutputBasis::Energy => {
            Ok(Some(eigh(&build_hamiltonian(&cfg.system)).map_err(CliError::solver("diagonalizing H_S"))?))
        }
        OutputBasis::Computational => Ok(None),
    }
}

#[derive(Serialize)]
struct StateDump<'a> {
    basis: &'a str,
    times: &'a [f64],
    /// Row-major [re, im] pairs per grid point.
    states: Vec<Vec<[f64; 2]>>,
}

pub fn states_json(cfg: &RunConfig, traj: &Trajectory) -> Result<String, CliError> {
    let basis = energy_basis(cfg)?;
    let states = traj
        .states
        .iter()
        .map(|rho| {
            let m = in_basis(rho, basis.as_ref());
            let n = m.nrows();
            (0..n * n).map(|k| m[(k / n, k % n)]).map(|z: C64| [z.re, z.im]).collect()
        })
        .collect();
    let name = if basis.is_some() { "energy" } else { "computational" };
    serde_json::to_string_pretty(&StateDump { basis: name, times: &traj.times, states })
        .map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Serialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub degeneracy_tol: f64,
    /// Level of each degeneracy class and the eigenvector indices in it.
    pub classes: Vec<SpectrumClass>,
}

#[derive(Serialize)]
pub struct SpectrumClass {
    pub level: f64,
    pub members: Vec<usize>,
    /// Computational basis state with the largest weight in each member.
    pub dominant: Vec<String>,
}

pub fn spectrum(cfg: &RunConfig) -> Result<Spectrum, CliError> {
    let h = build_hamiltonian(&cfg.system);
    let b = eigh(&h).map_err(CliError::solver("diagonalizing H_S"))?;
    let classes = b
        .classes
        .iter()
        .zip(&b.levels)
        .map(|(members, &level)| SpectrumClass {
            level,
            members: members.clone(),
            dominant: members
                .iter()
                .map(|&a| {
                    let col = b.vectors.column(a);
                    let k = (0..col.len())
                        .fold(0, |best, k| if col[k].norm() > col[best].norm() + 1e-12 { k } else { best });
                    coarse_grain::spinsys::index_bitstring(k, cfg.system.n)
                })
                .collect(),
        })
        .collect();
    Ok(Spectrum { energies: b.energies.clone(), degeneracy_tol: b.degeneracy_tol, classes })
}

pub fn liouvillian_tables(cfg: &RunConfig, tau: f64) -> Result<CgTables, CliError> {
    let sys = System::new(cfg)?;
    cg_tables(&sys.h, &sys.couplings, &sys.bath, tau).map_err(CliError::solver(format!("tables at tau = {tau}")))
}
