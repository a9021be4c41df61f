//! Single-mode phase-dependent additive noise channel.
//!
//! All internal work happens in the canonical orientation where the q
//! quadrature is the noisier one. Public results are reported in the caller's
//! orientation; `swap_applied` records whether the quadratures were exchanged.

use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::numeric::entropy::{entropy_nu, g_prime_raw, kappa_raw, nu_from_mu_raw};
use crate::numeric::{find_root, Bracket};

const EDGE: f64 = 1e-12;

/// Noise variances of one mode, vacuum = 1/2 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise", into = "RawNoise")]
pub struct OneModeNoise {
    gq: f64,
    gp: f64,
}

#[derive(Serialize, Deserialize)]
struct RawNoise {
    gq: f64,
    gp: f64,
}

impl TryFrom<RawNoise> for OneModeNoise {
    type Error = CapacityError;
    fn try_from(raw: RawNoise) -> Result<Self> {
        OneModeNoise::new(raw.gq, raw.gp)
    }
}

impl From<OneModeNoise> for RawNoise {
    fn from(n: OneModeNoise) -> Self {
        RawNoise { gq: n.gq, gp: n.gp }
    }
}

impl OneModeNoise {
    pub fn new(gq: f64, gp: f64) -> Result<Self> {
        if !(gq >= 0.0) || !(gp >= 0.0) || !gq.is_finite() || !gp.is_finite() {
            return Err(CapacityError::Domain(format!(
                "noise variances must be finite and nonnegative, got ({gq}, {gp})"
            )));
        }
        Ok(OneModeNoise { gq, gp })
    }

    pub fn gq(&self) -> f64 {
        self.gq
    }

    pub fn gp(&self) -> f64 {
        self.gp
    }

    /// True when the canonical orientation exchanges the quadratures.
    pub fn swapped(&self) -> bool {
        self.gp > self.gq
    }

    /// `(larger, smaller)` noise variance.
    pub fn canonical(&self) -> (f64, f64) {
        if self.swapped() {
            (self.gp, self.gq)
        } else {
            (self.gq, self.gp)
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.gq == self.gp
    }
}

/// Total per-mode input energy `lambda = 2 nbar + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputEnergy {
    lambda: f64,
}

impl InputEnergy {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(CapacityError::Domain(format!(
                "input energy must satisfy lambda >= 1, got {lambda}"
            )));
        }
        Ok(InputEnergy { lambda })
    }

    pub fn from_nbar(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(CapacityError::Domain(format!("nbar must be >= 0, got {nbar}")));
        }
        InputEnergy::new(2.0 * nbar + 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nbar(&self) -> f64 {
        0.5 * (self.lambda - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    WaterFilling,
    SingleQuadrature,
    Vacuum,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::WaterFilling => "water_filling",
            Regime::SingleQuadrature => "single_quadrature",
            Regime::Vacuum => "vacuum",
        }
    }
}

/// Optimal one-mode input and modulation variances. Cross terms are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneModeSolution {
    pub regime: Regime,
    pub gin_q: f64,
    pub gin_p: f64,
    pub gmod_q: f64,
    pub gmod_p: f64,
    pub mu: f64,
    pub nu_bar: f64,
    pub nu_out: f64,
    pub chi: f64,
    pub swap_applied: bool,
}

impl OneModeSolution {
    /// Energy spent on this mode, `gin_q + gin_p + gmod_q + gmod_p`.
    pub fn lambda(&self) -> f64 {
        self.gin_q + self.gin_p + self.gmod_q + self.gmod_p
    }

    /// Overall modulated output variances `(gbar_q, gbar_p)`.
    pub fn gbar(&self, noise: &OneModeNoise) -> (f64, f64) {
        (
            self.gin_q + self.gmod_q + noise.gq(),
            self.gin_p + self.gmod_p + noise.gp(),
        )
    }

    /// Nonmodulated output variances `(gout_q, gout_p)`.
    pub fn gout(&self, noise: &OneModeNoise) -> (f64, f64) {
        (self.gin_q + noise.gq(), self.gin_p + noise.gp())
    }

    /// Values in the canonical orientation (noisier quadrature first).
    pub(crate) fn canonical_parts(&self) -> (f64, f64, f64, f64) {
        if self.swap_applied {
            (self.gin_p, self.gin_q, self.gmod_p, self.gmod_q)
        } else {
            (self.gin_q, self.gin_p, self.gmod_q, self.gmod_p)
        }
    }
}

pub(crate) fn lambda_threshold_canon(cq: f64, cp: f64) -> f64 {
    if cq == cp {
        1.0
    } else if cp == 0.0 {
        f64::INFINITY
    } else {
        (cq / cp).sqrt() + cq - cp
    }
}

pub(crate) fn mu_threshold_canon(cq: f64, cp: f64) -> f64 {
    let lt = lambda_threshold_canon(cq, cp);
    if lt.is_infinite() {
        return 0.0;
    }
    0.5 * g_prime_raw(0.5 * (lt + cq + cp) - 0.5)
}

pub(crate) fn mu_zero_canon(cq: f64, cp: f64) -> f64 {
    let s = ((cq + 0.5) * (cp + 0.5)).sqrt();
    0.5 * g_prime_raw(s - 0.5) * ((cq + 0.5) / (cp + 0.5)).sqrt()
}

/// Water-filling symplectic eigenvalue at threshold, `sqrt(gq/gp)/2 + gq` in
/// canonical orientation.
pub(crate) fn nu_bar_threshold_canon(cq: f64, cp: f64) -> f64 {
    0.5 * (lambda_threshold_canon(cq, cp) + cq + cp)
}

/// Input energy at which the water-filling regime starts.
pub fn lambda_threshold(noise: &OneModeNoise) -> Result<f64> {
    let (cq, cp) = noise.canonical();
    let lt = lambda_threshold_canon(cq, cp);
    if lt.is_infinite() {
        return Err(CapacityError::DivergentThreshold { gq: cq });
    }
    Ok(lt)
}

/// Multiplier at the water-filling threshold.
pub fn mu_threshold(noise: &OneModeNoise) -> Result<f64> {
    lambda_threshold(noise)?;
    let (cq, cp) = noise.canonical();
    Ok(mu_threshold_canon(cq, cp))
}

/// Multiplier at and above which the mode stays in the vacuum. Infinite for
/// noise-free modes.
pub fn mu_zero(noise: &OneModeNoise) -> f64 {
    let (cq, cp) = noise.canonical();
    mu_zero_canon(cq, cp)
}

/// Regime selected by a global multiplier.
pub fn regime_for_mu(noise: &OneModeNoise, mu: f64) -> Regime {
    let (cq, cp) = noise.canonical();
    if mu <= mu_threshold_canon(cq, cp) {
        Regime::WaterFilling
    } else if mu >= mu_zero_canon(cq, cp) {
        Regime::Vacuum
    } else {
        Regime::SingleQuadrature
    }
}

struct Canon {
    gin_q: f64,
    gin_p: f64,
    gmod_q: f64,
    gmod_p: f64,
    mu: f64,
    nu_bar: f64,
    nu_out: f64,
    chi: f64,
}

fn finish(regime: Regime, c: Canon, swapped: bool) -> OneModeSolution {
    let (gin_q, gin_p, gmod_q, gmod_p) = if swapped {
        (c.gin_p, c.gin_q, c.gmod_p, c.gmod_q)
    } else {
        (c.gin_q, c.gin_p, c.gmod_q, c.gmod_p)
    };
    OneModeSolution {
        regime,
        gin_q,
        gin_p,
        gmod_q,
        gmod_p,
        mu: c.mu,
        nu_bar: c.nu_bar,
        nu_out: c.nu_out,
        chi: c.chi,
        swap_applied: swapped,
    }
}

fn water_filling_canon(cq: f64, cp: f64, nu_bar: f64, mu: f64) -> Canon {
    let r = if cq == cp { 1.0 } else { (cq / cp).sqrt() };
    let gin_q = 0.5 * r;
    let gin_p = 0.5 / r;
    let gmod_q = (nu_bar - gin_q - cq).max(0.0);
    let gmod_p = (nu_bar - gin_p - cp).max(0.0);
    let nu_out = 0.5 + (cq * cp).sqrt();
    Canon {
        gin_q,
        gin_p,
        gmod_q,
        gmod_p,
        mu,
        nu_bar,
        nu_out,
        chi: (entropy_nu(nu_bar) - entropy_nu(nu_out)).max(0.0),
    }
}

fn vacuum_canon(cq: f64, cp: f64) -> Canon {
    let nu = ((0.5 + cq) * (0.5 + cp)).sqrt();
    Canon {
        gin_q: 0.5,
        gin_p: 0.5,
        gmod_q: 0.0,
        gmod_p: 0.0,
        mu: mu_zero_canon(cq, cp),
        nu_bar: nu,
        nu_out: nu,
        chi: 0.0,
    }
}

/// Vacuum-input solution for a mode that receives no modulation energy.
pub fn vacuum_solution(noise: &OneModeNoise) -> OneModeSolution {
    let (cq, cp) = noise.canonical();
    finish(Regime::Vacuum, vacuum_canon(cq, cp), noise.swapped())
}

/// Water-filling solution, valid for `lambda >= lambda_threshold`.
pub fn solve_above_threshold(noise: &OneModeNoise, energy: InputEnergy) -> Result<OneModeSolution> {
    let (cq, cp) = noise.canonical();
    let lambda = energy.lambda();
    let lt = lambda_threshold_canon(cq, cp);
    if lambda < lt {
        return Err(CapacityError::Regime(format!(
            "lambda = {lambda} is below the water-filling threshold {lt}"
        )));
    }
    let nu_bar = 0.5 * (lambda + cq + cp);
    let mu = 0.5 * g_prime_raw(nu_bar - 0.5);
    Ok(finish(
        Regime::WaterFilling,
        water_filling_canon(cq, cp, nu_bar, mu),
        noise.swapped(),
    ))
}

/// Residual of the single-quadrature stationarity condition, in canonical
/// orientation, as a function of the noisier quadrature's input variance `a`.
/// Equals the derivative of the Holevo quantity along the constraint surface.
#[inline]
pub(crate) fn residual_canon(cq: f64, cp: f64, lambda: f64, a: f64) -> f64 {
    let gbar_q = a + cq;
    let gbar_p = lambda - a + cp;
    let nu_bar = (gbar_q * gbar_p).sqrt();
    let gout_p = 0.25 / a + cp;
    let nu_out = (gbar_q * gout_p).sqrt();
    kappa_raw(nu_bar) * (gbar_p - gbar_q) - kappa_raw(nu_out) * (cp - cq / (4.0 * a * a))
}

/// Largest `a` for which the p modulation stays nonnegative.
pub(crate) fn a_max(lambda: f64) -> f64 {
    0.5 * (lambda + (lambda * lambda - 1.0).max(0.0).sqrt())
}

/// Stationarity residual `F` below threshold (positive means increasing the
/// input antisqueezing `gin_q` still raises the Holevo quantity).
///
/// `gin_q` is the input variance of the noisier quadrature and must lie in
/// `[1/2, sqrt(gq/gp)/2]`.
pub fn residual_f(noise: &OneModeNoise, lambda: f64, gin_q: f64) -> Result<f64> {
    let (cq, cp) = noise.canonical();
    if !(lambda >= 1.0) {
        return Err(CapacityError::Domain(format!("lambda must be >= 1, got {lambda}")));
    }
    let upper = if cp == 0.0 {
        f64::INFINITY
    } else if cq == cp {
        0.5
    } else {
        0.5 * (cq / cp).sqrt()
    };
    let slack = 1e-12 * upper.min(1e12).max(1.0);
    if !(gin_q >= 0.5 - slack && gin_q <= upper + slack) {
        return Err(CapacityError::Domain(format!(
            "gin_q = {gin_q} outside [1/2, {upper}]"
        )));
    }
    if gin_q + 0.25 / gin_q > lambda * (1.0 + 1e-12) {
        return Err(CapacityError::Domain(format!(
            "gin_q = {gin_q} needs more than lambda = {lambda} of input energy"
        )));
    }
    Ok(residual_canon(cq, cp, lambda, gin_q))
}

fn scan_for_sign_change<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Option<Bracket> {
    const POINTS: usize = 64;
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    for i in 1..=POINTS {
        let x = lo + (hi - lo) * i as f64 / POINTS as f64;
        let fx = f(x);
        if prev_f.is_finite() && fx.is_finite() && prev_f.signum() != fx.signum() {
            return Bracket::new(prev_x, x).ok();
        }
        prev_x = x;
        prev_f = fx;
    }
    None
}

fn single_quadrature_canon(cq: f64, cp: f64, lambda: f64, a: f64) -> Canon {
    let gin_p = 0.25 / a;
    let gmod_p = (lambda - a - gin_p).max(0.0);
    let gbar_q = a + cq;
    let gbar_p = gin_p + gmod_p + cp;
    let nu_bar = (gbar_q * gbar_p).sqrt();
    let nu_out = (gbar_q * (gin_p + cp)).sqrt();
    Canon {
        gin_q: a,
        gin_p,
        gmod_q: 0.0,
        gmod_p,
        mu: kappa_raw(nu_bar) * gbar_q,
        nu_bar,
        nu_out,
        chi: (entropy_nu(nu_bar) - entropy_nu(nu_out)).max(0.0),
    }
}

/// Solution with modulation confined to the less noisy quadrature, valid for
/// `1 < lambda < lambda_threshold` and asymmetric noise.
pub fn solve_below_threshold(noise: &OneModeNoise, energy: InputEnergy) -> Result<OneModeSolution> {
    let (cq, cp) = noise.canonical();
    let lambda = energy.lambda();
    if cq <= cp {
        return Err(CapacityError::Regime(
            "symmetric noise has no single-quadrature regime".into(),
        ));
    }
    let lt = lambda_threshold_canon(cq, cp);
    if !(lambda > 1.0 && lambda < lt) {
        return Err(CapacityError::Regime(format!(
            "lambda = {lambda} outside the single-quadrature range (1, {lt})"
        )));
    }
    let r_half = 0.5 * (cq / cp).sqrt();
    let upper = r_half.min(a_max(lambda));
    let f = |a: f64| residual_canon(cq, cp, lambda, a);
    let mut lo = 0.5 + EDGE;
    let mut hi = upper - EDGE;
    if !(hi > lo) {
        lo = 0.5;
        hi = upper;
    }
    let mut bracket = Bracket::new(lo, hi)?;
    let (f_lo, f_hi) = (f(bracket.lo), f(bracket.hi));
    if !(f_lo > 0.0 && f_hi < 0.0) {
        bracket = scan_for_sign_change(&f, 0.5, upper).ok_or_else(|| {
            CapacityError::Solver(format!(
                "residual has no sign change on [0.5, {upper}] (F = {f_lo} .. {f_hi}) for noise ({cq}, {cp}), lambda = {lambda}"
            ))
        })?;
    }
    let xtol = 1e-15 * bracket.hi.max(1.0);
    let a = find_root(f, bracket, xtol, 0.0, 400)?;
    Ok(finish(
        Regime::SingleQuadrature,
        single_quadrature_canon(cq, cp, lambda, a),
        noise.swapped(),
    ))
}

/// Dispatches to the vacuum, single-quadrature or water-filling solution.
pub fn solve_one_mode(noise: &OneModeNoise, energy: InputEnergy) -> Result<OneModeSolution> {
    let (cq, cp) = noise.canonical();
    let lambda = energy.lambda();
    if lambda == 1.0 {
        return Ok(vacuum_solution(noise));
    }
    if cq == cp || lambda >= lambda_threshold_canon(cq, cp) {
        solve_above_threshold(noise, energy)
    } else {
        solve_below_threshold(noise, energy)
    }
}

/// Inverse of the multiplier map: the energy `lambda_i` a mode consumes at
/// global multiplier `mu`, and the corresponding optimal solution.
pub fn solve_for_mu(noise: &OneModeNoise, mu: f64) -> Result<(f64, OneModeSolution)> {
    if !(mu > 0.0) || mu.is_nan() {
        return Err(CapacityError::Domain(format!("mu must be positive, got {mu}")));
    }
    let (cq, cp) = noise.canonical();
    let swapped = noise.swapped();
    if mu <= mu_threshold_canon(cq, cp) {
        let nu_bar = nu_from_mu_raw(mu);
        let lambda = (2.0 * nu_bar - cq - cp).max(1.0);
        let sol = water_filling_canon(cq, cp, nu_bar, mu);
        return Ok((lambda, finish(Regime::WaterFilling, sol, swapped)));
    }
    if mu >= mu_zero_canon(cq, cp) {
        return Ok((1.0, finish(Regime::Vacuum, vacuum_canon(cq, cp), swapped)));
    }
    let a = solve_gin_for_mu(cq, cp, mu)?;
    let (lambda, sol) = single_quadrature_at(cq, cp, mu, a);
    Ok((lambda, finish(Regime::SingleQuadrature, sol, swapped)))
}

/// `f(a) = kappa(nu_out) (gp - gq/(4a^2))`; the stationarity condition says
/// `kappa(nu_bar)(gbar_p - gbar_q) = f(a)`.
#[inline]
fn f_of_a(cq: f64, cp: f64, a: f64) -> f64 {
    let nu_out = ((a + cq) * (0.25 / a + cp)).sqrt();
    kappa_raw(nu_out) * (cp - cq / (4.0 * a * a))
}

/// Stationarity at fixed `mu` reduced to one equation in `a`. Positive
/// infinity marks points where no admissible `nu_bar` exists.
#[inline]
fn h_of_a(cq: f64, cp: f64, mu: f64, a: f64) -> f64 {
    let gout_q = a + cq;
    let s = 1.0 + f_of_a(cq, cp, a) / mu;
    if !(s > 0.0) {
        return f64::INFINITY;
    }
    let nu_bar = gout_q * s.sqrt();
    if !(nu_bar > 0.5) {
        return f64::INFINITY;
    }
    kappa_raw(nu_bar) * gout_q - mu
}

fn solve_gin_for_mu(cq: f64, cp: f64, mu: f64) -> Result<f64> {
    let h = |a: f64| h_of_a(cq, cp, mu, a);
    let lo = 0.5 + EDGE;
    let hi = if cp == 0.0 {
        let mut hi = (2.0 * cq).max(1.0);
        let mut tries = 0;
        while h(hi) >= 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(CapacityError::Solver(format!(
                    "no upper bracket for gin_q at mu = {mu}, noise ({cq}, 0)"
                )));
            }
        }
        hi
    } else {
        0.5 * (cq / cp).sqrt() - EDGE
    };
    let mut bracket = Bracket::new(lo, hi.max(lo + EDGE))?;
    let (h_lo, h_hi) = (h(bracket.lo), h(bracket.hi));
    if !(h_lo > 0.0 && h_hi < 0.0) {
        // Within rounding of a regime boundary the root sits at a bracket end.
        let round = 1e-8 * mu;
        if h_lo <= 0.0 && h_lo >= -round {
            return Ok(bracket.lo);
        }
        if h_hi >= 0.0 && h_hi <= round {
            return Ok(bracket.hi);
        }
        bracket = scan_for_sign_change(&h, 0.5 + EDGE, bracket.hi).ok_or_else(|| {
            CapacityError::Solver(format!(
                "no root of the multiplier equation on [{}, {}] (h = {h_lo} .. {h_hi}) for noise ({cq}, {cp}), mu = {mu}",
                bracket.lo, bracket.hi
            ))
        })?;
    }
    let xtol = 1e-15 * bracket.hi.max(1.0);
    find_root(h, bracket, xtol, 0.0, 400)
}

fn single_quadrature_at(cq: f64, cp: f64, mu: f64, a: f64) -> (f64, Canon) {
    let gin_p = 0.25 / a;
    let gbar_q = a + cq;
    let f = f_of_a(cq, cp, a);
    let gbar_p = gbar_q + gbar_q * f / mu;
    let lambda = (gbar_p + a - cp).max(1.0);
    let gmod_p = (gbar_p - cp - gin_p).max(0.0);
    let nu_bar = (gbar_q * gbar_p).sqrt();
    let nu_out = (gbar_q * (gin_p + cp)).sqrt();
    let canon = Canon {
        gin_q: a,
        gin_p,
        gmod_q: 0.0,
        gmod_p,
        mu,
        nu_bar,
        nu_out,
        chi: (entropy_nu(nu_bar) - entropy_nu(nu_out)).max(0.0),
    };
    (lambda, canon)
}

/// Holevo quantity for given input and modulation variances with zero cross
/// terms, in bits.
pub fn holevo_chi(noise: &OneModeNoise, gin_q: f64, gin_p: f64, gmod_q: f64, gmod_p: f64) -> f64 {
    let gbar = ((gin_q + gmod_q + noise.gq()) * (gin_p + gmod_p + noise.gp())).sqrt();
    let gout = ((gin_q + noise.gq()) * (gin_p + noise.gp())).sqrt();
    entropy_nu(gbar) - entropy_nu(gout)
}
