//! Average user rate of the overlaid cellular + D2D system, the subchannel
//! count that maximizes it, and the longest D2D link that still beats a
//! cellular-only network.
//!
//! Cellular receivers share their cell by TDMA and occupy a `1 - eta` share
//! of the band; D2D links use the remaining `eta` split into `N`
//! subchannels. Per-user rates are `E[1/K_c] P(SIR_c >= theta0) log(1 + theta0)`
//! and `P(SIR_d >= theta0) log(1 + theta0) / N`, weighted by the share of
//! each population.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::analytic::{coordinated_ccdf, uncoordinated_ccdf, AnalyticParams, CellApprox, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::SimWindow;
use crate::ppp::PppConfig;
use crate::scalar::Real;
use crate::scheduler::{ScheduleConfig, ScheduleMode};
use crate::sir::{run_cellular_batch, run_d2d_batch, CellularConfig, D2dBatchConfig, DEFAULT_CELLULAR_APS};

/// Rates are in b/s/Hz.
pub const DEFAULT_LOG_BASE: f64 = 2.0;
pub const DEFAULT_N_MAX: u32 = 64;

/// Where `P(SIR_d >= theta0)` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateBackend<T> {
    Analytic(CellApprox),
    MonteCarlo { trials: u64, seed: u64, window_aps: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams<T> {
    pub lambda_a: T,
    pub lambda_c: T,
    pub lambda_d: T,
    pub eta: T,
    /// Linear SIR threshold.
    pub theta0: T,
    pub alpha: T,
    pub r_d: T,
    pub n_min: u32,
    pub n_max: u32,
    pub mode: ScheduleMode,
    pub backend: RateBackend<T>,
    pub log_base: T,
    pub quad: QuadratureSpec<T>,
}

impl<T: Real> RateParams<T> {
    /// Fair bandwidth split `eta = lambda_d / (lambda_c + lambda_d)`,
    /// coordinated scheduling, analytic B2 backend, `N` in `1..=64`.
    pub fn new(lambda_a: T, lambda_c: T, lambda_d: T, theta0: T, alpha: T, r_d: T) -> Result<Self> {
        let p = Self {
            lambda_a,
            lambda_c,
            lambda_d,
            eta: lambda_d / (lambda_c + lambda_d),
            theta0,
            alpha,
            r_d,
            n_min: 1,
            n_max: DEFAULT_N_MAX,
            mode: ScheduleMode::Coordinated,
            backend: RateBackend::Analytic(CellApprox::B2),
            log_base: T::of(DEFAULT_LOG_BASE),
            quad: QuadratureSpec::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("lambda_a", self.lambda_a),
            ("lambda_c", self.lambda_c),
            ("lambda_d", self.lambda_d),
            ("theta0", self.theta0),
            ("r_d", self.r_d),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.eta >= T::zero() && self.eta <= T::one()) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.alpha > T::of(2.0)) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be finite and > 2, got {}", self.alpha)));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::param("n_range", format!("need 1 <= n_min <= n_max, got {}..={}", self.n_min, self.n_max)));
        }
        if !(self.log_base > T::one()) {
            return Err(Error::param("log_base", "must be > 1"));
        }
        if let RateBackend::MonteCarlo { trials, window_aps, .. } = self.backend {
            if trials == 0 {
                return Err(Error::param("trials", "must be >= 1"));
            }
            if !(window_aps > T::zero()) {
                return Err(Error::param("window_aps", "must be > 0"));
            }
        }
        self.quad.validate()
    }

    pub fn with_r_d(self, r_d: T) -> Self {
        Self { r_d, ..self }
    }

    pub fn with_mode(self, mode: ScheduleMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_eta(self, eta: T) -> Self {
        Self { eta, ..self }
    }

    pub fn with_n_range(self, n_min: u32, n_max: u32) -> Self {
        Self { n_min, n_max, ..self }
    }

    pub fn with_backend(self, backend: RateBackend<T>) -> Self {
        Self { backend, ..self }
    }

    /// Share of users that are cellular, `lambda_c / (lambda_c + lambda_d)`.
    pub fn cellular_weight(&self) -> T {
        self.lambda_c / (self.lambda_c + self.lambda_d)
    }

    pub fn d2d_weight(&self) -> T {
        self.lambda_d / (self.lambda_c + self.lambda_d)
    }

    fn rate_factor(&self) -> T {
        (T::one() + self.theta0).log(self.log_base)
    }
}

/// Cellular-side inputs to the rate, independent of `r_d` and `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularStats<T> {
    pub e_inv_kc: T,
    pub e_inv_kc_half_width: T,
    pub p_cov: T,
    pub p_cov_half_width: T,
}

/// Monte Carlo settings for the cellular side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularSettings<T> {
    pub trials: u64,
    pub seed: u64,
    pub window_aps: T,
}

impl<T: Real> Default for CellularSettings<T> {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            window_aps: T::of(DEFAULT_CELLULAR_APS),
        }
    }
}

type CellKey = [u64; 4];

/// Memoizes cellular Monte Carlo estimates per `(lambda_a, lambda_c, alpha, theta0)`.
#[derive(Debug)]
pub struct CellularCache<T> {
    pub settings: CellularSettings<T>,
    entries: Mutex<HashMap<CellKey, CellularStats<T>>>,
}

impl<T: Real> CellularCache<T> {
    pub fn new(settings: CellularSettings<T>) -> Self {
        Self {
            settings,
            entries: Mutex::new(HashMap::new()),
        }
    }

    fn key(lambda_a: T, lambda_c: T, alpha: T, theta0: T) -> CellKey {
        [lambda_a, lambda_c, alpha, theta0].map(|v| v.as_f64().to_bits())
    }

    /// Pins the statistics for a parameter set instead of simulating them.
    pub fn insert(&self, lambda_a: T, lambda_c: T, alpha: T, theta0: T, stats: CellularStats<T>) {
        self.entries
            .lock()
            .expect("cache lock")
            .insert(Self::key(lambda_a, lambda_c, alpha, theta0), stats);
    }

    pub fn get(&self, lambda_a: T, lambda_c: T, alpha: T, theta0: T) -> Result<CellularStats<T>> {
        let key = Self::key(lambda_a, lambda_c, alpha, theta0);
        if let Some(s) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(*s);
        }
        let mut cfg = CellularConfig::new(lambda_a, lambda_c, alpha, self.settings.seed)?;
        cfg.window = SimWindow::for_expected_count(lambda_a, self.settings.window_aps)?;
        let est = run_cellular_batch(&cfg, &[theta0], self.settings.trials)?;
        let stats = CellularStats {
            e_inv_kc: est.inv_k.mean,
            e_inv_kc_half_width: est.inv_k.half_width,
            p_cov: est.coverage.survival[0],
            p_cov_half_width: est.coverage.half_width[0],
        };
        self.entries.lock().expect("cache lock").insert(key, stats);
        Ok(stats)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: Real> Default for CellularCache<T> {
    fn default() -> Self {
        Self::new(CellularSettings::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown<T> {
    /// Per cellular user.
    pub r_cellular: T,
    /// Per D2D link.
    pub r_d2d: T,
    pub r_total: T,
    pub n_opt: u32,
    pub eta: T,
    pub e_inv_kc: T,
    pub p_cov_cellular: T,
    pub p_cov_d2d: T,
}

/// `P(SIR_d >= theta0)` with `N` subchannels.
pub fn d2d_coverage<T: Real>(params: &RateParams<T>, n: u32) -> Result<T> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    match params.backend {
        RateBackend::Analytic(approx) => {
            let ap = AnalyticParams::new(params.lambda_a, params.lambda_d, n, params.r_d, params.alpha, approx)?;
            match params.mode {
                ScheduleMode::Uncoordinated => uncoordinated_ccdf(&ap, params.theta0),
                ScheduleMode::Coordinated => coordinated_ccdf(&ap, params.theta0, &params.quad),
            }
        }
        RateBackend::MonteCarlo { trials, seed, window_aps } => {
            let ppp = PppConfig::new(params.lambda_a, params.lambda_d, params.r_d, seed)?
                .with_window(SimWindow::for_expected_count(params.lambda_a, window_aps)?);
            let cfg = D2dBatchConfig {
                ppp,
                schedule: ScheduleConfig::new(n, params.mode)?,
                alpha: params.alpha,
            };
            Ok(run_d2d_batch(&cfg, &[params.theta0], trials)?.survival[0])
        }
    }
}

/// Combines the two per-user rates with the population and band weights.
pub fn assemble_rate<T: Real>(params: &RateParams<T>, n: u32, cellular: &CellularStats<T>, p_cov_d2d: T) -> RateBreakdown<T> {
    let factor = params.rate_factor();
    let r_cellular = cellular.e_inv_kc * cellular.p_cov * factor;
    let r_d2d = p_cov_d2d * factor / T::from_u32(n).expect("u32 fits");
    let r_total = params.cellular_weight() * (T::one() - params.eta) * r_cellular + params.d2d_weight() * params.eta * r_d2d;
    RateBreakdown {
        r_cellular,
        r_d2d,
        r_total,
        n_opt: n,
        eta: params.eta,
        e_inv_kc: cellular.e_inv_kc,
        p_cov_cellular: cellular.p_cov,
        p_cov_d2d,
    }
}

pub fn average_rate<T: Real>(params: &RateParams<T>, n: u32, cache: &CellularCache<T>) -> Result<RateBreakdown<T>> {
    params.validate()?;
    let cellular = cache.get(params.lambda_a, params.lambda_c, params.alpha, params.theta0)?;
    Ok(assemble_rate(params, n, &cellular, d2d_coverage(params, n)?))
}

/// Exhaustive search of `n_min..=n_max`; ties go to the smaller `N`.
pub fn optimize_subchannels<T: Real>(params: &RateParams<T>, cache: &CellularCache<T>) -> Result<RateBreakdown<T>> {
    params.validate()?;
    let cellular = cache.get(params.lambda_a, params.lambda_c, params.alpha, params.theta0)?;
    let coverages: Vec<T> = (params.n_min..=params.n_max)
        .into_par_iter()
        .map(|n| d2d_coverage(params, n))
        .collect::<Result<_>>()?;
    let mut best: Option<RateBreakdown<T>> = None;
    for (n, p) in (params.n_min..=params.n_max).zip(coverages) {
        let r = assemble_rate(params, n, &cellular, p);
        if best.is_none_or(|b| r.r_total > b.r_total) {
            best = Some(r);
        }
    }
    Ok(best.expect("non-empty range"))
}

/// Best `eta` on a 0.01 grid for a fixed `N`; ties go to the smaller `eta`.
pub fn optimize_eta<T: Real>(params: &RateParams<T>, n: u32, cache: &CellularCache<T>) -> Result<RateBreakdown<T>> {
    params.validate()?;
    let cellular = cache.get(params.lambda_a, params.lambda_c, params.alpha, params.theta0)?;
    let p = d2d_coverage(params, n)?;
    let mut best: Option<RateBreakdown<T>> = None;
    for k in 0..=100u32 {
        let eta = T::from_u32(k).expect("u32 fits") / T::of(100.0);
        let r = assemble_rate(&params.with_eta(eta), n, &cellular, p);
        if best.is_none_or(|b| r.r_total > b.r_total) {
            best = Some(r);
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Average rate with no D2D: every one of `lambda_c_total` users is cellular.
pub fn baseline_rate<T: Real>(lambda_a: T, lambda_c_total: T, theta0: T, alpha: T, log_base: T, cache: &CellularCache<T>) -> Result<T> {
    if !(theta0 > T::zero()) {
        return Err(Error::param("theta0", "must be > 0"));
    }
    if !(log_base > T::one()) {
        return Err(Error::param("log_base", "must be > 1"));
    }
    let c = cache.get(lambda_a, lambda_c_total, alpha, theta0)?;
    Ok(c.e_inv_kc * c.p_cov * (T::one() + theta0).log(log_base))
}

/// Baseline for the scenario in `params`: `lambda_c + lambda_d` cellular users.
pub fn scenario_baseline<T: Real>(params: &RateParams<T>, cache: &CellularCache<T>) -> Result<T> {
    baseline_rate(
        params.lambda_a,
        params.lambda_c + params.lambda_d,
        params.theta0,
        params.alpha,
        params.log_base,
        cache,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Bracketed crossing refined by bisection.
    Found,
    /// D2D loses already at the lower bracket edge.
    BelowBracket,
    /// D2D still wins at the upper bracket edge.
    AboveBracket,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeneficialDistance<T> {
    pub r_d: T,
    pub crossing: Crossing,
    pub baseline: T,
    /// Optimized rate at the returned distance.
    pub rate: RateBreakdown<T>,
}

/// Default bisection bracket `[0.025, 1] / sqrt(lambda_a)`.
pub fn default_bracket<T: Real>(lambda_a: T) -> (T, T) {
    let unit = lambda_a.sqrt().recip();
    (T::of(0.025) * unit, unit)
}

/// Largest `r_d` in `bracket` at which the optimized rate is at least the
/// cellular-only baseline. The optimized rate is non-increasing in `r_d`,
/// so bisection on the sign of the difference is exact to `1e-3 / sqrt(lambda_a)`.
pub fn max_beneficial_distance<T: Real>(params: &RateParams<T>, bracket: (T, T), cache: &CellularCache<T>) -> Result<BeneficialDistance<T>> {
    params.validate()?;
    let (mut lo, mut hi) = bracket;
    if !(lo > T::zero() && hi > lo) {
        return Err(Error::param("bracket", "need 0 < lo < hi"));
    }
    let baseline = scenario_baseline(params, cache)?;
    let eval = |r_d: T| optimize_subchannels(&params.with_r_d(r_d), cache);
    let at_lo = eval(lo)?;
    if at_lo.r_total < baseline {
        return Ok(BeneficialDistance {
            r_d: lo,
            crossing: Crossing::BelowBracket,
            baseline,
            rate: at_lo,
        });
    }
    let at_hi = eval(hi)?;
    if at_hi.r_total >= baseline {
        return Ok(BeneficialDistance {
            r_d: hi,
            crossing: Crossing::AboveBracket,
            baseline,
            rate: at_hi,
        });
    }
    let tol = T::of(1e-3) / params.lambda_a.sqrt();
    let mut rate = at_lo;
    while hi - lo > tol {
        let mid = T::of(0.5) * (lo + hi);
        let r = eval(mid)?;
        if r.r_total >= baseline {
            lo = mid;
            rate = r;
        } else {
            hi = mid;
        }
    }
    Ok(BeneficialDistance {
        r_d: lo,
        crossing: Crossing::Found,
        baseline,
        rate,
    })
}
