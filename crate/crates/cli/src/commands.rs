use std::path::Path;

use capwater_core::coherent::{gain, gain_sweep, GainChannel, GainPoint};
use capwater_core::input_state::{entanglement_witness, input_fourier_coefficients};
use capwater_core::multi_mode::{solve_mu, ModeEnsemble};
use capwater_core::one_mode::{lambda_threshold, solve_one_mode};
use capwater_core::oracle::{
    brute_force_one_mode, concavity_probe, cross_term_spot_check, hessian_check, stationarity_residuals, GridSpec,
};
use capwater_core::spectral::{solve_mu_spectral, NoiseModel, SetLabel, SpectralSolution};
use capwater_core::{InputEnergy, OneModeNoise, Regime, SolverTolerances};
use rayon::prelude::*;

use crate::args::{Channel, Cli, Command, CommonArgs, EnergyArgs, Format, ModelArgs};
use crate::error::CliError;
use crate::output::{encode, Record};
use crate::records::*;

pub fn tolerances(c: &CommonArgs) -> Result<SolverTolerances, CliError> {
    let tol = SolverTolerances { root_tol: c.root_tol, mu_tol: c.mu_tol, grid_size: c.grid_size, max_iter: c.max_iter };
    tol.validate()?;
    Ok(tol)
}

/// Parses `lo:hi:steps`; log spacing requires `lo > 0`.
pub fn parse_grid(text: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must look like lo:hi:steps, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    if log && !(lo > 0.0) {
        return Err(CliError::Usage(format!("log grid needs lo > 0, got {lo}")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            if i == steps - 1 {
                hi
            } else if log {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect())
}

fn read_model(path: &Path) -> Result<NoiseModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let model: NoiseModel =
        serde_json::from_str(&text).map_err(|source| CliError::ModelJson { path: path.into(), source })?;
    model.validate()?;
    Ok(model)
}

fn parse_pair(s: &str, sep: char, what: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("{what} must look like a{sep}b, got {s:?}"));
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn load_model(args: &ModelArgs) -> Result<NoiseModel, CliError> {
    match (&args.model, &args.gm) {
        (Some(path), _) => read_model(path),
        (None, Some(gm)) => {
            let (n, phi) = parse_pair(gm, ',', "--gm")?;
            Ok(NoiseModel::gauss_markov(n, phi)?)
        }
        (None, None) => Err(CliError::Usage("a noise model is required".into())),
    }
}

fn model_phi(model: &NoiseModel) -> f64 {
    match model {
        NoiseModel::GaussMarkov { phi, .. } => *phi,
        _ => f64::NAN,
    }
}

fn energy(args: &EnergyArgs) -> Result<InputEnergy, CliError> {
    match (args.nbar, args.lambda) {
        (Some(nbar), _) => Ok(InputEnergy::from_nbar(nbar)?),
        (None, Some(lambda)) => Ok(InputEnergy::new(lambda)?),
        (None, None) => Err(CliError::Usage("--nbar or --lambda is required".into())),
    }
}

fn nonnegative_nbar(nbar: f64) -> Result<f64, CliError> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(CliError::Usage(format!("nbar must be >= 0, got {nbar}")));
    }
    Ok(nbar)
}

fn spectral_record(model: &NoiseModel, s: &SpectralSolution) -> SpectralRecord {
    SpectralRecord {
        phi: model_phi(model),
        nbar: s.nbar,
        mu: s.mu,
        capacity: s.capacity,
        frac_n1: s.set_fraction(SetLabel::N1),
        frac_n2: s.set_fraction(SetLabel::N2),
        frac_n3: s.set_fraction(SetLabel::N3),
        global_wf: s.rate_is_global_wf,
    }
}

fn gain_record(p: &GainPoint) -> GainRecord {
    GainRecord { nbar: p.nbar, snr: p.snr, phi: p.phi, capacity: p.capacity, rate: p.rate, gain: p.gain }
}

fn emit<R: Record>(records: &[R], format: Format) -> Result<Vec<u8>, CliError> {
    encode(records, format)
}

/// Runs the selected command and returns the serialized output.
pub fn run(cli: &Cli) -> Result<Vec<u8>, CliError> {
    let tol = tolerances(&cli.common)?;
    let format = cli.common.format;
    match &cli.command {
        Command::OneMode { gq, gp, energy: e } => {
            let noise = OneModeNoise::new(*gq, *gp)?;
            let energy = energy(e)?;
            let s = solve_one_mode(&noise, energy)?;
            emit(
                &[OneModeRecord {
                    gq: *gq,
                    gp: *gp,
                    lambda: energy.lambda(),
                    nbar: energy.nbar(),
                    regime: s.regime.as_str(),
                    gin_q: s.gin_q,
                    gin_p: s.gin_p,
                    gmod_q: s.gmod_q,
                    gmod_p: s.gmod_p,
                    mu: s.mu,
                    nu_bar: s.nu_bar,
                    nu_out: s.nu_out,
                    chi: s.chi,
                }],
                format,
            )
        }
        Command::Finite { modes, model, nbar, lambda, summary } => {
            let list = match (modes, model) {
                (Some(text), _) => text
                    .split(',')
                    .map(|m| parse_pair(m, ':', "--modes entry").and_then(|(q, p)| Ok(OneModeNoise::new(q, p)?)))
                    .collect::<Result<Vec<_>, _>>()?,
                (None, Some(path)) => match read_model(path)? {
                    NoiseModel::Modes { modes } => modes,
                    _ => return Err(CliError::Usage("finite needs a model of type \"modes\"".into())),
                },
                (None, None) => return Err(CliError::Usage("--modes or --model is required".into())),
            };
            let ensemble = ModeEnsemble::new(list)?;
            let total = match (nbar, lambda) {
                (Some(nbar), _) => ensemble.len() as f64 * (2.0 * nonnegative_nbar(*nbar)? + 1.0),
                (None, Some(l)) => *l,
                (None, None) => return Err(CliError::Usage("--nbar or --lambda is required".into())),
            };
            let s = solve_mu(&ensemble, total, &tol)?;
            if *summary {
                return emit(
                    &[FiniteSummary {
                        modes: ensemble.len(),
                        lambda: total,
                        mu: s.mu,
                        c1: s.c1,
                        c1_per_mode: s.c1_per_mode,
                        n1: s.partition.n1.len(),
                        n2: s.partition.n2.len(),
                        n3: s.partition.n3.len(),
                    }],
                    format,
                );
            }
            let rows: Vec<ModeRecord> = ensemble
                .modes()
                .iter()
                .zip(&s.per_mode)
                .zip(&s.lambdas)
                .enumerate()
                .map(|(i, ((m, sol), l))| ModeRecord {
                    index: i,
                    gq: m.gq(),
                    gp: m.gp(),
                    set: SetLabel::from(sol.regime).as_str(),
                    lambda: *l,
                    gin_q: sol.gin_q,
                    gin_p: sol.gin_p,
                    gmod_q: sol.gmod_q,
                    gmod_p: sol.gmod_p,
                    mu: sol.mu,
                    chi: sol.chi,
                })
                .collect();
            emit(&rows, format)
        }
        Command::Spectral { model, nbar, spectra } => {
            let model = load_model(model)?;
            let s = solve_mu_spectral(&model, nonnegative_nbar(*nbar)?, &tol)?;
            if !*spectra {
                return emit(&[spectral_record(&model, &s)], format);
            }
            let rows: Vec<NodeRecord> = (0..s.grid.len())
                .map(|i| NodeRecord {
                    x: s.grid.nodes[i],
                    weight: s.grid.weights[i],
                    gq: s.noise_q[i],
                    gp: s.noise_p[i],
                    gin_q: s.gin_q[i],
                    gin_p: s.gin_p[i],
                    gmod_q: s.gmod_q[i],
                    gmod_p: s.gmod_p[i],
                    nu_bar: s.nu_bar[i],
                    nu_out: s.nu_out[i],
                    set: s.labels[i].as_str(),
                })
                .collect();
            emit(&rows, format)
        }
        Command::Gain { model, nbar_grid, log, snr, channel } => {
            let model = load_model(model)?;
            let grid = parse_grid(nbar_grid, *log)?;
            let points = match (snr, &model) {
                (Some(snr), NoiseModel::GaussMarkov { phi, .. }) => {
                    let ch = match channel {
                        Channel::Infinite => GainChannel::InfiniteMode,
                        Channel::TwoMode => GainChannel::TwoMode,
                    };
                    gain_sweep(ch, *snr, *phi, &grid, &tol)?
                }
                (Some(_), _) => return Err(CliError::Usage("--snr needs a Gauss-Markov model".into())),
                (None, NoiseModel::GaussMarkov { n, phi }) if *channel == Channel::TwoMode => grid
                    .par_iter()
                    .map(|&nbar| capwater_core::coherent::two_mode_gain(*n, *phi, nbar))
                    .collect::<Result<Vec<_>, _>>()?,
                (None, _) if *channel == Channel::TwoMode => {
                    return Err(CliError::Usage("--channel two-mode needs a Gauss-Markov model".into()))
                }
                (None, _) => grid.par_iter().map(|&nbar| gain(&model, nbar, &tol)).collect::<Result<Vec<_>, _>>()?,
            };
            let rows: Vec<GainRecord> = points.iter().map(gain_record).collect();
            emit(&rows, format)
        }
        Command::InputCov { model, nbar, k_max } => {
            let model = load_model(model)?;
            let s = solve_mu_spectral(&model, nonnegative_nbar(*nbar)?, &tol)?;
            let cov = input_fourier_coefficients(&s, *k_max);
            let w = entanglement_witness(&cov);
            eprintln!(
                "note: truncation_error={:.3e} det0={} entangled={}",
                cov.truncation_error, w.det0, w.entangled
            );
            let rows: Vec<DiagonalRecord> = (0..=cov.k_max())
                .map(|k| DiagonalRecord { k, q: cov.q_diagonals[k], p: cov.p_diagonals[k] })
                .collect();
            emit(&rows, format)
        }
        Command::Sweep { model, nbar_grid, log, phi_grid } => {
            let model = load_model(model)?;
            let nbars = parse_grid(nbar_grid, *log)?;
            let models: Vec<NoiseModel> = match (phi_grid, &model) {
                (None, _) => vec![model.clone()],
                (Some(text), NoiseModel::GaussMarkov { n, .. }) => parse_grid(text, false)?
                    .into_iter()
                    .map(|phi| NoiseModel::gauss_markov(*n, phi))
                    .collect::<Result<Vec<_>, _>>()?,
                (Some(_), _) => return Err(CliError::Usage("--phi-grid needs a Gauss-Markov model".into())),
            };
            let jobs: Vec<(&NoiseModel, f64)> =
                models.iter().flat_map(|m| nbars.iter().map(move |&nb| (m, nb))).collect();
            let rows = jobs
                .par_iter()
                .map(|(m, nbar)| solve_mu_spectral(m, *nbar, &tol).map(|s| spectral_record(m, &s)))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&rows, format)
        }
        Command::Verify { gq, gp, energy: e, grid_points } => {
            let noise = OneModeNoise::new(*gq, *gp)?;
            let energy = energy(e)?;
            let rows = verify(&noise, energy.lambda(), *grid_points)?;
            let out = emit(&rows, format)?;
            let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.check).collect();
            if failed.is_empty() {
                Ok(out)
            } else {
                // report the table, then fail
                crate::output::write_output(&out, cli.common.output.as_deref())?;
                Err(CliError::Verification(failed.join(", ")))
            }
        }
    }
}

fn verify(noise: &OneModeNoise, lambda: f64, points: usize) -> Result<Vec<CheckRecord>, CliError> {
    let s = solve_one_mode(noise, InputEnergy::new(lambda)?)?;
    let grid = GridSpec::new(points, points, 3)?;
    let o = brute_force_one_mode(noise, lambda, &grid)?;
    let mut rows = vec![
        CheckRecord { check: "oracle_abs_diff", value: (s.chi - o.chi).abs(), limit: 1e-4, passed: false },
        CheckRecord { check: "oracle_excess", value: o.chi - s.chi, limit: 1e-6, passed: false },
    ];
    if s.regime == Regime::WaterFilling {
        let r = stationarity_residuals(noise, &s)?;
        rows.push(CheckRecord { check: "stationarity_max", value: r.max_abs(), limit: 1e-8, passed: false });
    }
    if s.regime != Regime::Vacuum {
        let h = hessian_check(noise, &s)?;
        let top = h.cov_eigenvalues.iter().chain(&h.var_eigenvalues).fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        rows.push(CheckRecord { check: "hessian_max_eigenvalue", value: top, limit: 0.0, passed: top < 0.0 });
    }
    let thr = lambda_threshold(noise).unwrap_or(f64::INFINITY);
    let upper = if thr.is_finite() { (2.0 * thr).max(2.0 * lambda).max(3.0) } else { (2.0 * lambda).max(3.0) };
    let lgrid: Vec<f64> = (0..200).map(|k| 1.0 + (upper - 1.0) * k as f64 / 199.0).collect();
    let c = concavity_probe(noise, &lgrid)?;
    rows.push(CheckRecord {
        check: "mu_decreasing",
        value: if c.mu_strictly_decreasing { 1.0 } else { 0.0 },
        limit: 1.0,
        passed: c.mu_strictly_decreasing,
    });
    rows.push(CheckRecord { check: "chi_second_difference", value: c.max_second_difference, limit: 1e-8, passed: false });
    if let Some(j) = c.threshold_jump {
        rows.push(CheckRecord { check: "threshold_jump", value: j, limit: 1e-8, passed: false });
    }
    let x = cross_term_spot_check(noise, lambda, 9)?;
    rows.push(CheckRecord { check: "cross_term_excess", value: x.excess, limit: 1e-9, passed: false });
    for r in rows.iter_mut() {
        if !matches!(r.check, "hessian_max_eigenvalue" | "mu_decreasing") {
            r.passed = r.value <= r.limit;
        }
    }
    Ok(rows)
}
