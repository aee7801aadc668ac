//! Presets reproducing the parameter sets of the reference figures.
//!
//! Every curve is an ordinary [`RunConfig`], so `figures` also writes the
//! configs next to the CSVs and any curve can be rerun with `run`.

use std::path::Path;

use coarse_grain::bath::{Bath, BathSpec};
use coarse_grain::liouvillians::{bm_generator, bm_stability, GeneratorKind};
use coarse_grain::qmatrix::{eigh, max_abs_diff, CMatrix, Superoperator, C64};
use coarse_grain::solvers::{exact_dephasing, uniform_grid, BornAxis, DensityMatrix, Method, Trajectory};
use coarse_grain::spinsys::{build_hamiltonian, coupling_operators, exact_cover_spec, Axis, SpinSpec};
use serde_json::{json, Value};

use crate::config::{GeneratorChoice, InitialState, OutputBasis, OutputSpec, RunConfig};
use crate::error::CliError;
use crate::run::{run, run_csv, trajectory_csv};

pub const NAMES: [&str; 7] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];
pub const CG_TAUS: [f64; 4] = [1.0, 2.0, 5.0, 10.0];
/// Times of the energy-basis snapshots of the two-qubit runs.
pub const FIG6_SNAPSHOTS: [f64; 5] = [0.0, 25.0, 50.0, 100.0, 500.0];
pub const FIG7_T: f64 = 500.0;
pub const EC3_CLAUSES: [[usize; 3]; 4] = [[2, 3, 4], [1, 2, 5], [1, 4, 5], [3, 4, 5]];

pub struct Curve {
    pub name: String,
    pub config: Option<RunConfig>,
    pub trajectory: Trajectory,
    pub csv: String,
}

pub struct Figure {
    pub name: String,
    pub curves: Vec<Curve>,
    /// Extra JSON files (snapshots, stability data) by file stem.
    pub extras: Vec<(String, Value)>,
    pub summary: Value,
}

impl Figure {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let mut written = Vec::new();
        let mut put = |file: String, text: String| -> Result<(), CliError> {
            let p = dir.join(file);
            std::fs::write(&p, text).map_err(CliError::io(&p))?;
            written.push(p);
            Ok(())
        };
        for c in &self.curves {
            put(format!("{}_{}.csv", self.name, c.name), c.csv.clone())?;
            if let Some(cfg) = &c.config {
                put(format!("{}_{}.conf", self.name, c.name), cfg.to_text())?;
            }
        }
        for (stem, v) in &self.extras {
            put(format!("{}_{stem}.json", self.name), pretty(v))?;
        }
        put(format!("{}_summary.json", self.name), pretty(&self.summary))?;
        Ok(written)
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

pub fn figure(name: &str, method: Option<Method>) -> Result<Figure, CliError> {
    match name {
        "fig1" => fig1(method),
        "fig2" => fig_born(2, method),
        "fig3" => fig_born(3, method),
        "fig4" => fig4(method),
        "fig5" => fig5(method),
        "fig6" => fig6(method),
        "fig7" => fig7(method),
        _ => Err(CliError::Config(format!("unknown figure '{name}', expected one of {}", NAMES.join(", ")))),
    }
}

fn diagonal() -> [C64; 3] {
    let r = 1.0 / 2f64.sqrt();
    [C64::new(r, r); 3]
}

fn unit(axis: Axis) -> [C64; 3] {
    let mut n = [C64::from(0.0); 3];
    n[axis.index()] = C64::from(1.0);
    n
}

/// n copies of (1 - sigma_z)/2 with the same coupling on every spin.
fn free_spins(n: usize, coupling: [C64; 3]) -> SpinSpec {
    let mut s = SpinSpec::new(n);
    s.gamma0 = 0.5 * n as f64;
    for i in 0..n {
        s.set_linear(i, Axis::Z, -0.5);
    }
    s.with_uniform_coupling(coupling)
}

fn ohmic(s: f64, beta: f64, lambda: f64) -> BathSpec {
    BathSpec::ohmic(s, 1.0, 5.0, beta, lambda)
}

fn drude() -> BathSpec {
    BathSpec::drude(1.0, 1.0, 0.1)
}

fn base(system: SpinSpec, bath: BathSpec, generator: GeneratorChoice, t_max: f64, points: usize) -> RunConfig {
    RunConfig {
        system,
        exact_cover: None,
        bath,
        generator,
        method: Method::Expm,
        abort_on_unphysical: false,
        initial: InitialState::UniformPure,
        t_max,
        points,
        output: OutputSpec::default(),
    }
}

fn cg(tau: f64) -> GeneratorChoice {
    GeneratorChoice::Fixed(GeneratorKind::Cg { tau })
}

const BMS: GeneratorChoice = GeneratorChoice::Fixed(GeneratorKind::Bms);
const BM: GeneratorChoice = GeneratorChoice::Fixed(GeneratorKind::Bm);

fn tau_name(tau: f64) -> String {
    format!("cg_tau{tau}")
}

/// Runs the curves concurrently; results keep the input order.
fn run_curves(cfgs: Vec<(String, RunConfig)>, method: Option<Method>) -> Result<Vec<Curve>, CliError> {
    let results: Vec<Result<Curve, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfgs
            .into_iter()
            .map(|(name, cfg)| {
                s.spawn(move || {
                    let traj = run(&cfg, method, None).map_err(|e| match e {
                        CliError::Solver { context, source } => {
                            CliError::Solver { context: format!("{name}: {context}"), source }
                        }
                        e => e,
                    })?;
                    let csv = run_csv(&cfg, &traj)?;
                    Ok(Curve { name, config: Some(cfg), trajectory: traj, csv })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("curve thread panicked")).collect()
    });
    results.into_iter().collect()
}

fn value_at(traj: &Trajectory, t: f64) -> Option<&CMatrix> {
    traj.times.iter().position(|&x| x == t).map(|k| &traj.states[k])
}

/// Pure dephasing: exact solution, fixed-tau CG, BMS and adaptive CG.
fn fig1(method: Option<Method>) -> Result<Figure, CliError> {
    let system = free_spins(1, unit(Axis::Z));
    let bath = ohmic(1.0, 1.0, 0.1);
    let elements = vec![(0, 1)];
    let mk = |g, points| {
        let mut c = base(system.clone(), bath, g, 20.0, points);
        c.output.elements = elements.clone();
        c
    };
    let mut cfgs: Vec<(String, RunConfig)> = CG_TAUS.iter().map(|&t| (tau_name(t), mk(cg(t), 201))).collect();
    cfgs.push(("bms".into(), mk(BMS, 201)));
    cfgs.push(("cg_adaptive".into(), mk(GeneratorChoice::CgAdaptive, 41)));
    let mut curves = run_curves(cfgs, method)?;

    // rho01(t) = rho01(0) e^{it} e^{-Gamma(t)}; only the modulus enters the comparisons.
    let b = Bath::new(bath).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = uniform_grid(20.0, 201).map_err(|e| CliError::Config(e.to_string()))?;
    let mut exact = Trajectory::default();
    for &t in &grid {
        let g = exact_dephasing(&b, t).map_err(CliError::solver(format!("exact dephasing at t = {t}")))?;
        let c = C64::from_polar(0.5 * (-g).exp(), t);
        let m = CMatrix::from_row_slice(2, 2, &[C64::from(0.5), c, c.conj(), C64::from(0.5)]);
        exact.push(t, m).map_err(CliError::solver("exact dephasing"))?;
    }
    let exact_abs = |t: f64| value_at(&exact, t).map(|m| m[(0, 1)].norm());

    let intersections: Vec<Value> = CG_TAUS
        .iter()
        .map(|&tau| {
            let c = curves.iter().find(|c| c.name == tau_name(tau)).unwrap();
            let got = value_at(&c.trajectory, tau).unwrap()[(0, 1)].norm();
            let want = exact_abs(tau).unwrap();
            json!({ "tau": tau, "cg": got, "exact": want, "abs_diff": (got - want).abs() })
        })
        .collect();
    let adaptive = curves.iter().find(|c| c.name == "cg_adaptive").unwrap();
    let adaptive_err = adaptive
        .trajectory
        .times
        .iter()
        .zip(&adaptive.trajectory.states)
        .map(|(&t, m)| (m[(0, 1)].norm() - exact_abs(t).unwrap()).abs())
        .fold(0.0, f64::max);
    let csv = trajectory_csv(&exact, true, &elements, None);
    curves.insert(0, Curve { name: "exact".into(), config: None, trajectory: exact, csv });
    Ok(Figure {
        name: "fig1".into(),
        curves,
        extras: Vec::new(),
        summary: json!({ "intersections": intersections, "adaptive_max_abs_error": adaptive_err }),
    })
}

/// Dissipative qubit with exponential memory: Born vs CG, from |0><0| (2) or the uniform state (3).
fn fig_born(which: u8, method: Option<Method>) -> Result<Figure, CliError> {
    let system = free_spins(1, unit(Axis::X));
    let (initial, elements) = if which == 2 {
        (InitialState::Computational { bits: "0".into() }, vec![(1, 1)])
    } else {
        (InitialState::UniformPure, vec![(0, 1)])
    };
    let mk = |g, points| {
        let mut c = base(system.clone(), drude(), g, 50.0, points);
        c.initial = initial.clone();
        c.output.elements = elements.clone();
        c
    };
    let mut cfgs = vec![("born".to_string(), mk(GeneratorChoice::BornExp { axis: BornAxis::X }, 101))];
    cfgs.extend(CG_TAUS.iter().map(|&t| (tau_name(t), mk(cg(t), 101))));
    cfgs.push(("cg_adaptive".into(), mk(GeneratorChoice::CgAdaptive, 51)));
    cfgs.push(("bm".into(), mk(BM, 101)));
    cfgs.push(("bms".into(), mk(BMS, 101)));
    let curves = run_curves(cfgs, method)?;
    let born = &curves[0].trajectory;
    let adaptive = &curves.iter().find(|c| c.name == "cg_adaptive").unwrap().trajectory;
    let sup = sup_distance(adaptive, born);
    let name = format!("fig{which}");
    Ok(Figure { name, curves, extras: Vec::new(), summary: json!({ "adaptive_vs_born_sup_distance": sup }) })
}

/// Entrywise sup distance over the times of `a` (all of which must be in `b`).
pub fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.times
        .iter()
        .zip(&a.states)
        .map(|(&t, m)| max_abs_diff(m, value_at(b, t).expect("grids are nested")))
        .fold(0.0, f64::max)
}

/// Thermalization of the diagonal-coupling qubit.
fn fig4(method: Option<Method>) -> Result<Figure, CliError> {
    let system = free_spins(1, diagonal());
    let bath = ohmic(1.0, 1.0, 0.1);
    let mut cfgs: Vec<(String, RunConfig)> = vec![("bms".into(), base(system.clone(), bath, BMS, 200.0, 201))];
    cfgs.extend(CG_TAUS.iter().map(|&t| (tau_name(t), base(system.clone(), bath, cg(t), 200.0, 201))));
    cfgs.push(("cg_adaptive".into(), base(system.clone(), bath, GeneratorChoice::CgAdaptive, 200.0, 41)));
    let curves = run_curves(cfgs, method)?;
    let gibbs = DensityMatrix::gibbs(&build_hamiltonian(&system), 1.0).map_err(CliError::solver("Gibbs state"))?;
    let dist = |name: &str| {
        let c = curves.iter().find(|c| c.name == name).unwrap();
        max_abs_diff(c.trajectory.last().unwrap(), gibbs.matrix())
    };
    let summary = json!({
        "bms_final_gibbs_distance": dist("bms"),
        "adaptive_final_gibbs_distance": dist("cg_adaptive"),
        "cg_final_gibbs_distance": CG_TAUS.iter().map(|&t| json!({ "tau": t, "distance": dist(&tau_name(t)) })).collect::<Vec<_>>(),
    });
    Ok(Figure { name: "fig4".into(), curves, extras: Vec::new(), summary })
}

pub const FIG5_LAMBDAS: [f64; 6] = [0.1, 0.2, 0.22, 0.23, 0.24, 0.3];
pub const SWEEP: (f64, f64, f64) = (0.2, 0.26, 1e-4);

/// First sweep point whose BM spectrum has a positive real part, and the point before it.
pub fn lambda_crit_bracket(bath: BathSpec) -> Result<Option<(f64, f64)>, CliError> {
    let system = free_spins(1, unit(Axis::X));
    let h = build_hamiltonian(&system);
    let c = coupling_operators(&system);
    let unit_bath = Bath::new(BathSpec { lambda: 1.0, ..bath }).map_err(|e| CliError::Config(e.to_string()))?;
    // L(lambda) = L_H + lambda^2 D.
    let lh = Superoperator::hamiltonian(&h);
    let d = bm_generator(&h, &c, &unit_bath).map_err(CliError::solver("BM generator"))?.into_matrix() - lh.matrix();
    let (lo, hi, step) = SWEEP;
    let count = ((hi - lo) / step).round() as usize;
    let mut prev = lo;
    for k in 0..=count {
        let lam = lo + k as f64 * step;
        let l = Superoperator::from_matrix(2, lh.matrix() + &d * C64::from(lam * lam))
            .map_err(CliError::solver("BM sweep"))?;
        let growth =
            l.eigenvalues().map_err(CliError::solver("BM spectrum"))?.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        if growth > 1e-10 {
            return Ok(if k == 0 { None } else { Some((prev, lam)) });
        }
        prev = lam;
    }
    Ok(None)
}

/// BM instability: largest eigenvalue for one and two qubits across lambda.
fn fig5(method: Option<Method>) -> Result<Figure, CliError> {
    let mut cfgs = Vec::new();
    for n in [1, 2] {
        for &lam in &FIG5_LAMBDAS {
            cfgs.push((
                format!("n{n}_lambda{lam}"),
                base(free_spins(n, unit(Axis::X)), ohmic(2.0, 1.0, lam), BM, 100.0, 401),
            ));
        }
    }
    let curves = run_curves(cfgs, method)?;
    let bath = ohmic(2.0, 1.0, 0.1);
    let st = bm_stability(&Bath::new(bath).map_err(|e| CliError::Config(e.to_string()))?)
        .map_err(CliError::solver("BM stability"))?;
    let bracket = lambda_crit_bracket(bath)?;
    let stability = json!({
        "A": st.a,
        "B": st.b,
        "lambda_crit": st.lambda_crit,
        "numeric_lambda_crit": st.numeric_lambda_crit,
        "sweep": { "from": SWEEP.0, "to": SWEEP.1, "step": SWEEP.2, "bracket": bracket.map(|(a, b)| vec![a, b]) },
    });
    let growth: Vec<Value> = curves
        .iter()
        .map(|c| json!({ "curve": c.name, "max_eigenvalue": c.trajectory.max_eigenvalue(), "min_eigenvalue": c.trajectory.min_eigenvalue() }))
        .collect();
    Ok(Figure {
        name: "fig5".into(),
        curves,
        extras: vec![("stability".into(), stability.clone())],
        summary: json!({ "stability": stability, "curves": growth }),
    })
}

/// Two spins with gamma0 = 1 and gamma^z = -1/2 +- split; degenerate at split = 0.
pub fn degenerate_pair(split: f64) -> SpinSpec {
    let mut s = SpinSpec::new(2);
    s.gamma0 = 1.0;
    s.set_linear(0, Axis::Z, -0.5 + split).set_linear(1, Axis::Z, -0.5 - split);
    s.with_uniform_coupling(diagonal())
}

fn snapshots(traj: &Trajectory, h: &CMatrix, times: &[f64], size: usize) -> Result<Value, CliError> {
    let b = eigh(h).map_err(CliError::solver("diagonalizing H_S"))?;
    let snaps: Vec<Value> = times
        .iter()
        .map(|&t| {
            let m = b.to_energy(value_at(traj, t).expect("snapshot times lie on the grid"));
            let abs: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|j| m[(i, j)].norm()).collect()).collect();
            json!({ "t": t, "abs_rho": abs })
        })
        .collect();
    Ok(json!({ "basis": "energy, ground state first", "energies": b.energies, "snapshots": snaps }))
}

fn fig6(method: Option<Method>) -> Result<Figure, CliError> {
    let bath = ohmic(1.0, 10.0, 0.1);
    let all: Vec<(usize, usize)> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
    let mk = |system: SpinSpec, initial| {
        let mut c = base(system, bath, BMS, 500.0, 501);
        c.initial = initial;
        c.output = OutputSpec { elements: all.clone(), basis: OutputBasis::Energy, ..OutputSpec::default() };
        c
    };
    let cfgs = vec![
        ("uniform".to_string(), mk(degenerate_pair(0.0), InitialState::UniformPure)),
        ("gibbs_beta0_1".to_string(), mk(degenerate_pair(0.0), InitialState::Gibbs { beta0: 1.0 })),
        ("split_uniform".to_string(), mk(degenerate_pair(0.01), InitialState::UniformPure)),
    ];
    let curves = run_curves(cfgs, method)?;
    let mut extras = Vec::new();
    let mut dist = serde_json::Map::new();
    for c in &curves {
        let h = build_hamiltonian(&c.config.as_ref().unwrap().system);
        extras.push((format!("{}_snapshots", c.name), snapshots(&c.trajectory, &h, &FIG6_SNAPSHOTS, 4)?));
        let g = DensityMatrix::gibbs(&h, 10.0).map_err(CliError::solver("Gibbs state"))?;
        dist.insert(c.name.clone(), json!(max_abs_diff(c.trajectory.last().unwrap(), g.matrix())));
    }
    Ok(Figure { name: "fig6".into(), curves, extras, summary: json!({ "final_gibbs_distance": dist }) })
}

pub fn ec3_system() -> SpinSpec {
    exact_cover_spec(5, &EC3_CLAUSES).expect("fixed instance is valid").with_uniform_coupling(diagonal())
}

fn fig7(method: Option<Method>) -> Result<Figure, CliError> {
    let bath = ohmic(1.0, 10.0, 0.1);
    let plain = base(free_spins(5, diagonal()), bath, BMS, FIG7_T, 51);
    let mut ec3 = base(ec3_system(), bath, BMS, FIG7_T, 51);
    ec3.exact_cover = Some(EC3_CLAUSES.to_vec());
    let curves = run_curves(vec![("plain".into(), plain), ("ec3".into(), ec3)], method)?;
    let mut extras = Vec::new();
    let mut ground = serde_json::Map::new();
    for c in &curves {
        let h = build_hamiltonian(&c.config.as_ref().unwrap().system);
        let b = eigh(&h).map_err(CliError::solver("diagonalizing H_S"))?;
        let m = b.to_energy(c.trajectory.last().unwrap());
        ground.insert(c.name.clone(), json!(m[(0, 0)].re));
        extras.push((format!("{}_snapshot", c.name), snapshots(&c.trajectory, &h, &[FIG7_T], 7)?));
    }
    Ok(Figure { name: "fig7".into(), curves, extras, summary: json!({ "ground_population_final": ground }) })
}
