//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dotted section
//! paths. Spin indices in keys and clauses are 1-based; matrix element
//! indices in `output.elements` are 0-based. The guide's configuration
//! chapter lists every key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coarse_grain::bath::{BathModel, BathSpec};
use coarse_grain::liouvillians::GeneratorKind;
use coarse_grain::qmatrix::C64;
use coarse_grain::solvers::{BornAxis, Method};
use coarse_grain::spinsys::{exact_cover_spec, Axis, SpinSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorChoice {
    Fixed(GeneratorKind),
    /// tau = t at every grid point.
    CgAdaptive,
    /// Non-Markovian Born solution of the exponential-memory qubit.
    BornExp {
        axis: BornAxis,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Every entry 1/2^n.
    UniformPure,
    Ground,
    Gibbs {
        beta0: f64,
    },
    Computational {
        bits: String,
    },
    /// Row-major entries.
    Matrix(Vec<C64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputBasis {
    Computational,
    /// Energy eigenbasis, ground state first.
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub eigenvalues: bool,
    pub elements: Vec<(usize, usize)>,
    pub basis: OutputBasis,
    pub state_dump: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { eigenvalues: true, elements: Vec::new(), basis: OutputBasis::Computational, state_dump: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SpinSpec,
    /// Clauses the system was encoded from, kept for re-emission.
    pub exact_cover: Option<Vec<[usize; 3]>>,
    pub bath: BathSpec,
    pub generator: GeneratorChoice,
    pub method: Method,
    pub abort_on_unphysical: bool,
    pub initial: InitialState,
    pub t_max: f64,
    pub points: usize,
    pub output: OutputSpec,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("line {}: expected 'key = value', got '{line}'", k + 1)));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(err(format!("line {}: empty key", k + 1)));
            }
            if let Some((first, _)) = map.insert(key.clone(), (k + 1, value.trim().to_string())) {
                return Err(err(format!("line {}: '{key}' already set on line {first}", k + 1)));
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, usize, String)> {
        let keys: Vec<String> = self.map.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        keys.into_iter()
            .map(|k| {
                let (line, v) = self.map.remove(&k).unwrap();
                (k[prefix.len()..].to_string(), line, v)
            })
            .collect()
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), CliError> {
        self.take(key).ok_or_else(|| err(format!("missing required key '{key}'")))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.take(key).map(|(line, v)| number(key, line, &v)).transpose()
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some((_, v)) if v == "true" => Ok(true),
            Some((_, v)) if v == "false" => Ok(false),
            Some((line, v)) => Err(err(format!("line {line}: '{key}' must be true or false, got '{v}'"))),
        }
    }
}

fn number(key: &str, line: usize, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>().map_err(|_| err(format!("line {line}: '{key}' is not a number: '{v}'")))
}

fn numbers(key: &str, line: usize, v: &str) -> Result<Vec<f64>, CliError> {
    v.split_whitespace().map(|x| number(key, line, x)).collect()
}

fn spin_index(key: &str, line: usize, s: &str, n: usize) -> Result<usize, CliError> {
    match s.parse::<usize>() {
        Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
        _ => Err(err(format!("line {line}: '{key}': spin index must be in 1..={n}, got '{s}'"))),
    }
}

fn axis(key: &str, line: usize, c: char) -> Result<Axis, CliError> {
    Axis::from_label(c).ok_or_else(|| err(format!("line {line}: '{key}': unknown axis '{c}'")))
}

/// Six reals `x_re x_im y_re y_im z_re z_im`.
fn coupling_vector(key: &str, line: usize, v: &str) -> Result<[C64; 3], CliError> {
    let x = numbers(key, line, v)?;
    if x.len() != 6 {
        return Err(err(format!("line {line}: '{key}' needs six reals, got {}", x.len())));
    }
    Ok([C64::new(x[0], x[1]), C64::new(x[2], x[3]), C64::new(x[4], x[5])])
}

/// `a b; c d; ...` lists of integers.
fn groups(key: &str, line: usize, v: &str) -> Result<Vec<Vec<usize>>, CliError> {
    v.split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| {
            g.split_whitespace()
                .map(|x| x.parse::<usize>().map_err(|_| err(format!("line {line}: '{key}': bad integer '{x}'"))))
                .collect()
        })
        .collect()
}

fn parse_system(e: &mut Entries) -> Result<(SpinSpec, Option<Vec<[usize; 3]>>), CliError> {
    let (line, v) = e.required("system.n")?;
    let n: usize = v.parse().map_err(|_| err(format!("line {line}: 'system.n' must be an integer")))?;
    if !(1..=5).contains(&n) {
        return Err(err(format!("line {line}: 'system.n' must be 1..=5, got {n}")));
    }
    let mut clauses = None;
    let mut spec = match e.take("system.exact_cover") {
        Some((line, v)) => {
            let mut list = Vec::new();
            for g in groups("system.exact_cover", line, &v)? {
                let c: [usize; 3] = g
                    .try_into()
                    .map_err(|_| err(format!("line {line}: 'system.exact_cover' clauses need three positions")))?;
                list.push(c);
            }
            let spec = exact_cover_spec(n, &list).map_err(|e| err(format!("line {line}: {e}")))?;
            clauses = Some(list);
            spec
        }
        None => SpinSpec::new(n),
    };
    if let Some(g) = e.f64("system.gamma")? {
        spec.gamma0 = g;
    }
    for (rest, line, v) in e.take_prefixed("system.field.") {
        let key = format!("system.field.{rest}");
        let Some((i, a)) = rest.split_once('.') else {
            return Err(err(format!("line {line}: expected 'system.field.<spin>.<axis>', got '{key}'")));
        };
        let i = spin_index(&key, line, i, n)?;
        let mut chars = a.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(err(format!("line {line}: '{key}': axis must be x, y or z")));
        };
        spec.set_linear(i, axis(&key, line, c)?, number(&key, line, &v)?);
    }
    for (rest, line, v) in e.take_prefixed("system.pair.") {
        let key = format!("system.pair.{rest}");
        let parts: Vec<&str> = rest.split('.').collect();
        let [i, j, ab] = parts[..] else {
            return Err(err(format!("line {line}: expected 'system.pair.<i>.<j>.<ab>', got '{key}'")));
        };
        let (i, j) = (spin_index(&key, line, i, n)?, spin_index(&key, line, j, n)?);
        let axes: Vec<char> = ab.chars().collect();
        if i == j || axes.len() != 2 {
            return Err(err(format!("line {line}: '{key}' needs two distinct spins and two axes")));
        }
        let (a, b) = (axis(&key, line, axes[0])?, axis(&key, line, axes[1])?);
        spec.set_quadratic(i, j, a, b, number(&key, line, &v)?);
    }
    if let Some((line, v)) = e.take("system.coupling") {
        spec = spec.with_uniform_coupling(coupling_vector("system.coupling", line, &v)?);
    }
    for (rest, line, v) in e.take_prefixed("system.coupling.") {
        let key = format!("system.coupling.{rest}");
        let i = spin_index(&key, line, &rest, n)?;
        spec.set_coupling(i, coupling_vector(&key, line, &v)?);
    }
    spec.validate().map_err(|e| err(e.to_string()))?;
    Ok((spec, clauses))
}

fn parse_bath(e: &mut Entries) -> Result<BathSpec, CliError> {
    let (line, model) = e.required("bath.model")?;
    let beta = e.f64_or("bath.beta", 1.0)?;
    let lambda = e.f64_or("bath.lambda", 0.1)?;
    let spec = match model.as_str() {
        "ohmic" => BathSpec::ohmic(
            e.f64_or("bath.s", 1.0)?,
            e.f64_or("bath.omega_ph", 1.0)?,
            e.f64_or("bath.omega_ct", 5.0)?,
            beta,
            lambda,
        ),
        "drude" => BathSpec::drude(e.f64_or("bath.tau_b", 1.0)?, beta, lambda),
        other => return Err(err(format!("line {line}: 'bath.model' must be ohmic or drude, got '{other}'"))),
    };
    for key in ["bath.s", "bath.omega_ph", "bath.omega_ct", "bath.tau_b"] {
        if let Some((line, _)) = e.take(key) {
            return Err(err(format!("line {line}: '{key}' does not apply to the {model} model")));
        }
    }
    spec.validate().map_err(|e| err(e.to_string()))?;
    Ok(spec)
}

fn parse_generator(e: &mut Entries) -> Result<GeneratorChoice, CliError> {
    let (line, kind) = e.required("generator.kind")?;
    let tau = e.f64("generator.tau")?;
    let axis = e.take("generator.axis");
    let choice = match kind.as_str() {
        "bm" => GeneratorChoice::Fixed(GeneratorKind::Bm),
        "bms" => GeneratorChoice::Fixed(GeneratorKind::Bms),
        "cg" => {
            let tau = tau.ok_or_else(|| err("generator.kind = cg needs 'generator.tau'"))?;
            let kind = GeneratorKind::Cg { tau };
            kind.validate().map_err(|e| err(e.to_string()))?;
            return if axis.is_some() {
                Err(err("'generator.axis' only applies to born-exp"))
            } else {
                Ok(GeneratorChoice::Fixed(kind))
            };
        }
        "cg-adaptive" => GeneratorChoice::CgAdaptive,
        "born-exp" => {
            let (aline, a) = axis.ok_or_else(|| err("generator.kind = born-exp needs 'generator.axis'"))?;
            let axis = match a.as_str() {
                "x" => BornAxis::X,
                "z" => BornAxis::Z,
                _ => return Err(err(format!("line {aline}: 'generator.axis' must be x or z, got '{a}'"))),
            };
            if tau.is_some() {
                return Err(err("'generator.tau' does not apply to born-exp"));
            }
            return Ok(GeneratorChoice::BornExp { axis });
        }
        other => {
            return Err(err(format!(
                "line {line}: 'generator.kind' must be bm, bms, cg, cg-adaptive or born-exp, got '{other}'"
            )))
        }
    };
    if tau.is_some() {
        return Err(err(format!("'generator.tau' does not apply to {kind}")));
    }
    if axis.is_some() {
        return Err(err("'generator.axis' only applies to born-exp"));
    }
    Ok(choice)
}

fn parse_initial(e: &mut Entries, dim: usize) -> Result<InitialState, CliError> {
    let kind = e.take("initial.kind");
    let beta0 = e.f64("initial.beta0")?;
    let bits = e.take("initial.bits");
    let matrix = e.take("initial.matrix");
    let state = match kind.as_ref().map(|(l, k)| (*l, k.as_str())) {
        None | Some((_, "uniform-pure")) => InitialState::UniformPure,
        Some((_, "ground")) => InitialState::Ground,
        Some((_, "gibbs")) => {
            InitialState::Gibbs { beta0: beta0.ok_or_else(|| err("initial.kind = gibbs needs 'initial.beta0'"))? }
        }
        Some((_, "computational")) => {
            let (_, b) = bits.clone().ok_or_else(|| err("initial.kind = computational needs 'initial.bits'"))?;
            InitialState::Computational { bits: b }
        }
        Some((_, "matrix")) => {
            let (line, v) = matrix.clone().ok_or_else(|| err("initial.kind = matrix needs 'initial.matrix'"))?;
            let x = numbers("initial.matrix", line, &v)?;
            if x.len() != 2 * dim * dim {
                return Err(err(format!(
                    "line {line}: 'initial.matrix' needs {} reals (re im per entry)",
                    2 * dim * dim
                )));
            }
            InitialState::Matrix(x.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
        }
        Some((line, other)) => return Err(err(format!(
            "line {line}: 'initial.kind' must be uniform-pure, ground, gibbs, computational or matrix, got '{other}'"
        ))),
    };
    let stray = [
        ("initial.beta0", beta0.is_some() && !matches!(state, InitialState::Gibbs { .. })),
        ("initial.bits", bits.is_some() && !matches!(state, InitialState::Computational { .. })),
        ("initial.matrix", matrix.is_some() && !matches!(state, InitialState::Matrix(_))),
    ];
    if let Some((key, _)) = stray.iter().find(|(_, bad)| *bad) {
        return Err(err(format!("'{key}' does not apply to the chosen initial.kind")));
    }
    Ok(state)
}

fn parse_output(e: &mut Entries, dim: usize) -> Result<OutputSpec, CliError> {
    let mut out = OutputSpec {
        eigenvalues: e.bool_or("output.eigenvalues", true)?,
        state_dump: e.bool_or("output.state_dump", false)?,
        ..OutputSpec::default()
    };
    if let Some((line, v)) = e.take("output.elements") {
        for g in groups("output.elements", line, &v)? {
            match g[..] {
                [i, j] if i < dim && j < dim => out.elements.push((i, j)),
                _ => {
                    return Err(err(format!("line {line}: 'output.elements' entries are 'i j' with 0 <= i, j < {dim}")))
                }
            }
        }
    }
    if let Some((line, v)) = e.take("output.basis") {
        out.basis = match v.as_str() {
            "computational" => OutputBasis::Computational,
            "energy" => OutputBasis::Energy,
            _ => return Err(err(format!("line {line}: 'output.basis' must be computational or energy, got '{v}'"))),
        };
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut e = Entries::parse(text)?;
        let (system, exact_cover) = parse_system(&mut e)?;
        let bath = parse_bath(&mut e)?;
        let generator = parse_generator(&mut e)?;
        let method = match e.take("solver.method") {
            None => Method::Rk4,
            Some((_, m)) if m == "rk4" => Method::Rk4,
            Some((_, m)) if m == "expm" => Method::Expm,
            Some((line, m)) => return Err(err(format!("line {line}: 'solver.method' must be rk4 or expm, got '{m}'"))),
        };
        let abort_on_unphysical = e.bool_or("solver.abort_on_unphysical", false)?;
        let dim = system.dim();
        let initial = parse_initial(&mut e, dim)?;
        let t_max = number("grid.t_max", 0, &e.required("grid.t_max")?.1)?;
        let (line, p) = e.required("grid.points")?;
        let points: usize = p.parse().map_err(|_| err(format!("line {line}: 'grid.points' must be an integer")))?;
        if points < 2 || !(t_max > 0.0 && t_max.is_finite()) {
            return Err(err(format!("grid needs t_max > 0 and at least 2 points, got {t_max} and {points}")));
        }
        let output = parse_output(&mut e, dim)?;
        if let Some((key, (line, _))) = e.map.iter().next() {
            return Err(err(format!("line {line}: unknown key '{key}'")));
        }
        let cfg =
            Self { system, exact_cover, bath, generator, method, abort_on_unphysical, initial, t_max, points, output };
        cfg.check_born()?;
        Ok(cfg)
    }

    /// The Born solver only knows H = (1 - sigma_z)/2 with a unit Pauli coupling.
    fn check_born(&self) -> Result<(), CliError> {
        let GeneratorChoice::BornExp { axis } = self.generator else { return Ok(()) };
        let s = &self.system;
        if s.n != 1 || s.gamma0 != 0.5 || s.linear[0] != [0.0, 0.0, -0.5] {
            return Err(err("born-exp needs n = 1, system.gamma = 0.5 and system.field.1.z = -0.5 only"));
        }
        let mut unit = [C64::from(0.0); 3];
        unit[match axis {
            BornAxis::X => 0,
            BornAxis::Z => 2,
        }] = C64::from(1.0);
        if s.couplings[0] != unit {
            return Err(err("born-exp needs the unit coupling on generator.axis (e.g. system.coupling = 1 0 0 0 0 0)"));
        }
        if !matches!(self.bath.model, BathModel::DrudeExp { tau_b } if tau_b > 0.0) {
            return Err(err("born-exp needs bath.model = drude with bath.tau_b > 0"));
        }
        Ok(())
    }

    /// Renders the configuration back into the key-value format.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let s = &self.system;
        let _ = writeln!(o, "system.n = {}", s.n);
        // Exact Cover systems are re-derived from their clauses; only deviations are written.
        let base = match &self.exact_cover {
            Some(c) => {
                let list: Vec<String> = c.iter().map(|k| format!("{} {} {}", k[0], k[1], k[2])).collect();
                let _ = writeln!(o, "system.exact_cover = {}", list.join("; "));
                exact_cover_spec(s.n, c).expect("clauses were validated")
            }
            None => SpinSpec::new(s.n),
        };
        if s.gamma0 != base.gamma0 {
            let _ = writeln!(o, "system.gamma = {}", s.gamma0);
        }
        for i in 0..s.n {
            for a in Axis::ALL {
                let v = s.linear[i][a.index()];
                if v != base.linear[i][a.index()] {
                    let _ = writeln!(o, "system.field.{}.{} = {v}", i + 1, a.label());
                }
            }
        }
        for (k, v) in &s.quadratic {
            if base.quadratic.get(k) != Some(v) {
                let _ = writeln!(o, "system.pair.{}.{}.{}{} = {v}", k.i + 1, k.j + 1, k.alpha.label(), k.beta.label());
            }
        }
        for k in base.quadratic.keys() {
            if !s.quadratic.contains_key(k) {
                let _ = writeln!(o, "system.pair.{}.{}.{}{} = 0", k.i + 1, k.j + 1, k.alpha.label(), k.beta.label());
            }
        }
        for (i, c) in s.couplings.iter().enumerate() {
            let _ = writeln!(
                o,
                "system.coupling.{} = {} {} {} {} {} {}",
                i + 1,
                c[0].re,
                c[0].im,
                c[1].re,
                c[1].im,
                c[2].re,
                c[2].im
            );
        }
        match self.bath.model {
            BathModel::OhmicExp { s, omega_ph, omega_ct } => {
                let _ = writeln!(
                    o,
                    "bath.model = ohmic\nbath.s = {s}\nbath.omega_ph = {omega_ph}\nbath.omega_ct = {omega_ct}"
                );
            }
            BathModel::DrudeExp { tau_b } => {
                let _ = writeln!(o, "bath.model = drude\nbath.tau_b = {tau_b}");
            }
        }
        let _ = writeln!(o, "bath.beta = {}\nbath.lambda = {}", self.bath.beta, self.bath.lambda);
        match self.generator {
            GeneratorChoice::Fixed(GeneratorKind::Bm) => o.push_str("generator.kind = bm\n"),
            GeneratorChoice::Fixed(GeneratorKind::Bms) => o.push_str("generator.kind = bms\n"),
            GeneratorChoice::Fixed(GeneratorKind::Cg { tau }) => {
                let _ = writeln!(o, "generator.kind = cg\ngenerator.tau = {tau}");
            }
            GeneratorChoice::CgAdaptive => o.push_str("generator.kind = cg-adaptive\n"),
            GeneratorChoice::BornExp { axis } => {
                let a = if axis == BornAxis::X { "x" } else { "z" };
                let _ = writeln!(o, "generator.kind = born-exp\ngenerator.axis = {a}");
            }
        }
        let m = if self.method == Method::Rk4 { "rk4" } else { "expm" };
        let _ = writeln!(o, "solver.method = {m}\nsolver.abort_on_unphysical = {}", self.abort_on_unphysical);
        match &self.initial {
            InitialState::UniformPure => o.push_str("initial.kind = uniform-pure\n"),
            InitialState::Ground => o.push_str("initial.kind = ground\n"),
            InitialState::Gibbs { beta0 } => {
                let _ = writeln!(o, "initial.kind = gibbs\ninitial.beta0 = {beta0}");
            }
            InitialState::Computational { bits } => {
                let _ = writeln!(o, "initial.kind = computational\ninitial.bits = {bits}");
            }
            InitialState::Matrix(m) => {
                let v: Vec<String> = m.iter().map(|z| format!("{} {}", z.re, z.im)).collect();
                let _ = writeln!(o, "initial.kind = matrix\ninitial.matrix = {}", v.join(" "));
            }
        }
        let _ = writeln!(o, "grid.t_max = {}\ngrid.points = {}", self.t_max, self.points);
        let _ = writeln!(o, "output.eigenvalues = {}", self.output.eigenvalues);
        if !self.output.elements.is_empty() {
            let v: Vec<String> = self.output.elements.iter().map(|(i, j)| format!("{i} {j}")).collect();
            let _ = writeln!(o, "output.elements = {}", v.join("; "));
        }
        let b = if self.output.basis == OutputBasis::Energy { "energy" } else { "computational" };
        let _ = writeln!(o, "output.basis = {b}\noutput.state_dump = {}", self.output.state_dump);
        o
    }
}
