use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lindbladkit::linalg::{hermitian_eig, ComplexMatrix, C64};
use lindbladkit::lindblad::superoperator_residual;
use lindbladkit::models::{sample_ensemble, ModelSpec};
use lindbladkit::states::validate_density;
use lindbladkit::superop::{
    choi_matrix, region_scan, spectral_decompose, superop_from_action, trace_constraint_defect,
    RegionClass,
};
use lindbladkit::{DensityMatrix, LinearMap};

use crate::format::{chop, join, num};
use crate::io::{
    from_matrix, read_json, write_json, CanonicalFile, CanonicalMatrices, ChannelFile,
    GeneratorFile, StateFile,
};
use crate::{CliError, MapArgs, Method, ModelName, SampleArgs};

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Domain(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_err(e: io::Error) -> CliError {
    CliError::Domain(format!("write failed: {e}"))
}

pub fn validate(path: &Path, tol: f64) -> Result<u8, CliError> {
    let file: StateFile = read_json(path)?;
    let report = validate_density(&file.matrix()?, tol)?;
    println!("hermiticity_defect: {}", num(report.hermiticity_defect));
    println!("trace_defect: {}", num(report.trace_defect));
    println!("min_eigenvalue: {}", num(report.min_eigenvalue));
    if report.is_valid() {
        println!("valid");
        Ok(0)
    } else {
        println!("invalid: {}", report.reason());
        Ok(1)
    }
}

fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("re_{i}_{j}"));
            cols.push(format!("im_{i}_{j}"));
        }
    }
    cols.join(",")
}

fn csv_row(t: f64, rho: &ComplexMatrix) -> String {
    let mut cols = vec![num(t)];
    for z in rho.as_slice() {
        cols.push(num(z.re));
        cols.push(num(z.im));
    }
    cols.join(",")
}

/// Rows at every step for RK4 (the step is shrunk so steps land on `t_max`),
/// or at 100 evenly spaced times for the exponential.
pub fn evolve(
    generator: &Path,
    initial: &Path,
    t_max: f64,
    dt: f64,
    method: Method,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let g = read_json::<GeneratorFile>(generator)?.generator()?;
    let rho0 = read_json::<StateFile>(initial)?.density()?;
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(CliError::Usage(format!(
            "--t-max must be >= 0, got {t_max}"
        )));
    }
    let rows: Vec<(f64, DensityMatrix)> = if t_max == 0.0 {
        vec![(0.0, rho0)]
    } else {
        match method {
            Method::Rk4 => {
                if !(dt > 0.0) {
                    return Err(CliError::Usage(format!("--dt must be positive, got {dt}")));
                }
                let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
                let h = t_max / steps as f64;
                g.evolve_rk4(&rho0, h, steps)?
                    .into_iter()
                    .enumerate()
                    .map(|(k, rho)| (if k == steps { t_max } else { k as f64 * h }, rho))
                    .collect()
            }
            Method::Expm => (0..100)
                .map(|k| {
                    let t = t_max * k as f64 / 99.0;
                    Ok((t, g.evolve_exact(&rho0, t)?))
                })
                .collect::<Result<_, CliError>>()?,
        }
    };
    let mut w = output(out)?;
    writeln!(w, "{}", csv_header(rho0_dim(&rows))).map_err(write_err)?;
    for (t, rho) in &rows {
        writeln!(w, "{}", csv_row(*t, rho.matrix())).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    Ok(0)
}

fn rho0_dim(rows: &[(f64, DensityMatrix)]) -> usize {
    rows[0].1.dim()
}

/// Resolve `--channel` / `--generator [--t]` to a map and run `f` on it.
fn with_map<T>(
    args: &MapArgs,
    f: impl FnOnce(&dyn LinearMap) -> Result<T, CliError>,
) -> Result<T, CliError> {
    match (&args.channel, &args.generator) {
        (Some(path), None) => {
            let channel = read_json::<ChannelFile>(path)?.channel()?;
            f(channel.as_map())
        }
        (None, Some(path)) => {
            let g = read_json::<GeneratorFile>(path)?.generator()?;
            match args.t {
                Some(t) => f(&g.propagator(t)?),
                None => f(&g),
            }
        }
        _ => Err(CliError::Usage(
            "give exactly one of --channel or --generator".into(),
        )),
    }
}

pub fn choi(args: &MapArgs, tol: f64, require_cp: bool) -> Result<u8, CliError> {
    let eig = with_map(args, |m| Ok(choi_matrix(m)?.eigenvalues()?))?;
    let min = eig[0];
    let cp = min >= -tol;
    println!("eigenvalues: {}", join(&chop(&eig)));
    println!("min_eigenvalue: {}", num(chop(&eig)[0]));
    println!("verdict: {}", if cp { "CP" } else { "not CP" });
    Ok(if require_cp && !cp { 1 } else { 0 })
}

pub fn canonical(generator: &Path, out: Option<&Path>, tol: f64) -> Result<u8, CliError> {
    let g = read_json::<GeneratorFile>(generator)?.generator()?;
    let c = g.canonicalize(tol)?;
    let back = c.to_generator()?;
    let residual = superoperator_residual(&g, &back)?;
    let n = g.hamiltonian().rows();
    println!("input_ops: {}", g.lindblad_ops().len());
    println!("ops: {} (at most {})", c.ops().len(), n * n - 1);
    println!("rates: {}", join(c.rates()));
    println!("residual: {}", num(residual));
    if let Some(path) = out {
        let file = CanonicalFile {
            dim: n,
            rates: c.rates().to_vec(),
            matrices: CanonicalMatrices {
                hamiltonian: from_matrix(c.hamiltonian()),
                canonical_ops: c.ops().iter().map(from_matrix).collect(),
                lindblad_ops: back.lindblad_ops().iter().map(from_matrix).collect(),
            },
        };
        write_json(path, &file)?;
    }
    Ok(0)
}

pub fn region(resolution: usize, out: Option<&Path>) -> Result<u8, CliError> {
    if resolution < 2 {
        return Err(CliError::Usage(format!(
            "--resolution must be >= 2, got {resolution}"
        )));
    }
    let points = region_scan(resolution)?;
    let mut w = output(out)?;
    writeln!(w, "l1,l3,l4,class").map_err(write_err)?;
    for p in &points {
        writeln!(w, "{},{},{},{}", num(p.l1), num(p.l3), num(p.l4), p.class).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    if out.is_some() {
        for class in [
            RegionClass::Invalid,
            RegionClass::PositiveOnly,
            RegionClass::CompletelyPositive,
        ] {
            let count = points.iter().filter(|p| p.class == class).count();
            println!("{class}: {count}");
        }
    }
    Ok(0)
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{key}: cannot parse {s:?} as a number")))
        })
        .collect()
}

fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("--psi: cannot parse {s:?}; use re or re:im"));
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    Ok(C64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

fn model_spec(name: ModelName, params: &[String]) -> Result<ModelSpec, CliError> {
    let mut rate = 1.0;
    let mut rates = None;
    let mut g = None;
    let mut p = None;
    for kv in params {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter {kv:?} is not key=value")))?;
        let allowed: &[&str] = match name {
            ModelName::RandomPhases => &["rates"],
            ModelName::UnitaryJump | ModelName::RandomUnitary => &["rate", "g"],
            ModelName::StateExchange => &["rate"],
            ModelName::StateTransitions => &["rate", "p"],
        };
        if !allowed.contains(&key) {
            return Err(CliError::Usage(format!(
                "unknown parameter {key:?}; expected one of {allowed:?}"
            )));
        }
        match key {
            "rate" => rate = parse_list(key, value)?.first().copied().unwrap_or(f64::NAN),
            "rates" => rates = Some(parse_list(key, value)?),
            "g" => g = Some(parse_list(key, value)?),
            _ => p = Some(parse_list(key, value)?),
        }
    }
    let need = |what: &str| CliError::Usage(format!("missing parameter {what}"));
    let spec = match name {
        ModelName::RandomPhases => ModelSpec::RandomPhases {
            rates: rates.ok_or_else(|| need("rates"))?,
        },
        ModelName::UnitaryJump => ModelSpec::UnitaryJump {
            rate,
            g: ComplexMatrix::real_diag(&g.ok_or_else(|| need("g"))?),
        },
        ModelName::RandomUnitary => ModelSpec::RandomUnitary {
            rate,
            g: ComplexMatrix::real_diag(&g.ok_or_else(|| need("g"))?),
        },
        ModelName::StateExchange => ModelSpec::StateExchange { rate },
        ModelName::StateTransitions => ModelSpec::StateTransitions {
            rate,
            populations: p.ok_or_else(|| need("p"))?,
        },
    };
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

pub fn sample(args: &SampleArgs) -> Result<u8, CliError> {
    let spec = model_spec(args.model, &args.params)?;
    let n = spec.dim();
    let psi: Vec<C64> = match &args.psi {
        Some(s) => {
            let v = s
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>, _>>()?;
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if v.len() != n || !(norm > 0.0) {
                return Err(CliError::Usage(format!(
                    "--psi needs {n} amplitudes, not all zero"
                )));
            }
            v.into_iter().map(|z| z / norm).collect()
        }
        None => (0..n)
            .map(|k| {
                if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect(),
    };
    let times = parse_list("--times", &args.times)?;
    let ens = sample_ensemble(&spec, &psi, &times, args.dt, args.trajectories, args.seed)?;
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "time,i,j,mean_re,mean_im,std_err").map_err(write_err)?;
    for (k, t) in ens.times.iter().enumerate() {
        let rho = ens.mean_density[k].matrix();
        for i in 0..n {
            for j in 0..n {
                writeln!(
                    w,
                    "{},{i},{j},{},{},{}",
                    num(*t),
                    num(rho[(i, j)].re),
                    num(rho[(i, j)].im),
                    num(ens.standard_error[k][i * n + j])
                )
                .map_err(write_err)?;
            }
        }
    }
    w.flush().map_err(write_err)?;
    Ok(0)
}

pub fn spectral(args: &MapArgs, out: Option<&Path>) -> Result<u8, CliError> {
    let sc = with_map(args, |m| Ok(spectral_decompose(&superop_from_action(m)?)?))?;
    let n = sc.dim();
    println!("eigenvalues: {}", join(&chop(sc.eigenvalues())));
    println!("sum: {} (N = {n})", num(sc.eigenvalue_sum()));
    println!(
        "trace_constraint_defect: {}",
        num(trace_constraint_defect(&sc))
    );
    if let Some(path) = out {
        write_json(path, &ChannelFile::from_spectral(&sc))?;
    }
    Ok(0)
}

pub fn kraus_step(generator: &Path, dt: f64, out: Option<&Path>) -> Result<u8, CliError> {
    let g = read_json::<GeneratorFile>(generator)?.generator()?;
    let k = g.dt_kraus(dt)?;
    println!("ops: {}", k.ops().len());
    println!("completeness_defect: {}", num(k.completeness_defect()));
    // smallest eigenvalue of Σ M†M, to see how far from a contraction the step is
    let mut sum = ComplexMatrix::zeros(k.dim(), k.dim());
    for m in k.ops() {
        sum += &(&m.adjoint() * m);
    }
    let eig = hermitian_eig(&sum.hermitian_part(), f64::INFINITY)?;
    println!(
        "max_eigenvalue_of_sum: {}",
        num(*eig.values.last().expect("non-empty"))
    );
    if let Some(path) = out {
        write_json(path, &ChannelFile::from_kraus(&k))?;
    }
    Ok(0)
}
