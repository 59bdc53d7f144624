//! Monte Carlo SIR measurement at the typical receivers.
//!
//! Trials are independent and run in parallel; every per-trial result is
//! collected in trial order and reduced with integer counts, so a batch is
//! a pure function of its configuration, seed and trial count.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cell_area_in_window, nearest_brute_force, voronoi_cell, Point2, SimWindow};
use crate::ppp::{sample_network, sample_ppp, sample_unassociated, NetworkRealization, PppConfig};
use crate::rng::{Purpose, StreamKey};
use crate::scalar::{db_to_linear, Real};
use crate::scheduler::{
    cochannel_interferers, schedule, schedule_uncoordinated, CochannelInterferers, ScheduleConfig, ScheduleMode,
};

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Linear thresholds uniformly spaced in dB, endpoints included.
pub fn threshold_grid_db<T: Real>(lo_db: T, hi_db: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![db_to_linear(lo_db)],
        _ => {
            let step = (hi_db - lo_db) / T::of_usize(points - 1);
            (0..points)
                .map(|k| db_to_linear(lo_db + step * T::of_usize(k)))
                .collect()
        }
    }
}

/// 41 thresholds from -20 dB to +20 dB.
pub fn default_thresholds<T: Real>() -> Vec<T> {
    threshold_grid_db(T::of(-20.0), T::of(20.0), 41)
}

fn exp1<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let g: f64 = Exp1.sample(rng);
    T::of(g)
}

/// `d^-alpha` from a squared distance.
#[inline]
fn path_gain<T: Real>(dist_sq: T, alpha: T) -> T {
    if alpha == T::of(4.0) {
        (dist_sq * dist_sq).recip()
    } else {
        dist_sq.powf(-alpha / T::of(2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirSample<T> {
    /// Linear SIR; `+inf` when nothing interferes.
    pub sir: T,
    pub r_a: T,
    pub intracell_count: usize,
    pub intercell_count: usize,
}

/// SIR at the origin for the typical link with Rayleigh fading on every link.
pub fn compute_sir<T: Real, R: Rng + ?Sized>(
    realization: &NetworkRealization<T>,
    interferers: &CochannelInterferers<T>,
    alpha: T,
    rng: &mut R,
) -> Result<SirSample<T>> {
    if !(alpha > T::of(2.0)) {
        return Err(Error::param("alpha", format!("must be > 2, got {alpha}")));
    }
    let link_sq = realization.typical_tx.dist_sq(realization.typical_rx);
    if !(link_sq > T::zero()) {
        return Err(Error::param("r_d", "typical link distance must be > 0 (path loss is singular at 0)"));
    }
    let signal = exp1::<T, R>(rng) * path_gain(link_sq, alpha);
    let mut interference = T::zero();
    for &p in interferers.iter() {
        interference = interference + exp1::<T, R>(rng) * path_gain(p.dist_sq(realization.typical_rx), alpha);
    }
    let sir = if interference > T::zero() {
        signal / interference
    } else {
        T::infinity()
    };
    Ok(SirSample {
        sir,
        r_a: realization.r_a,
        intracell_count: interferers.intracell.len(),
        intercell_count: interferers.intercell.len(),
    })
}

/// Survival function estimate `P(SIR >= theta)` on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCcdf<T> {
    pub thresholds: Vec<T>,
    pub survival: Vec<T>,
    /// 95% normal-approximation half widths.
    pub half_width: Vec<T>,
    pub successes: Vec<u64>,
    pub n_trials: u64,
}

impl<T: Real> EmpiricalCcdf<T> {
    pub fn from_values<I>(thresholds: &[T], values: I) -> Self
    where
        I: IntoIterator<Item = T>,
    {
        let mut sorted = thresholds.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("thresholds are not NaN"));
        let mut successes = vec![0u64; sorted.len()];
        let mut n = 0u64;
        for v in values {
            n += 1;
            // Thresholds are sorted, so successes form a prefix.
            let passed = sorted.partition_point(|&t| v >= t);
            for s in &mut successes[..passed] {
                *s += 1;
            }
        }
        Self::from_counts(sorted, successes, n)
    }

    pub fn from_counts(thresholds: Vec<T>, successes: Vec<u64>, n_trials: u64) -> Self {
        let n = T::from_u64(n_trials.max(1)).expect("u64 fits");
        let survival: Vec<T> = successes
            .iter()
            .map(|&s| T::from_u64(s).expect("u64 fits") / n)
            .collect();
        let half_width = survival
            .iter()
            .map(|&p| T::of(Z_95) * (p * (T::one() - p) / n).sqrt())
            .collect();
        Self {
            thresholds,
            survival,
            half_width,
            successes,
            n_trials,
        }
    }

    /// Outage `P(SIR < theta)` at each threshold.
    pub fn outage(&self) -> Vec<T> {
        self.survival.iter().map(|&p| T::one() - p).collect()
    }

    /// Largest threshold in dB whose survival is at least `level`, linearly
    /// interpolated in dB between grid points.
    pub fn quantile_db(&self, level: T) -> Option<T> {
        let db: Vec<T> = self.thresholds.iter().map(|&t| crate::scalar::linear_to_db(t)).collect();
        let i = self.survival.iter().rposition(|&p| p >= level)?;
        if i + 1 == self.survival.len() {
            return Some(db[i]);
        }
        let (p0, p1) = (self.survival[i], self.survival[i + 1]);
        if p0 == p1 {
            return Some(db[i]);
        }
        Some(db[i] + (db[i + 1] - db[i]) * (p0 - level) / (p0 - p1))
    }
}

/// Everything one D2D batch needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2dBatchConfig<T> {
    pub ppp: PppConfig<T>,
    pub schedule: ScheduleConfig,
    pub alpha: T,
}

/// One trial with the realization-level bookkeeping kept.
#[derive(Debug, Clone, PartialEq)]
pub struct D2dTrial<T> {
    pub sample: SirSample<T>,
    pub realization: NetworkRealization<T>,
    /// Non-typical transmitters in the typical transmitter's cell.
    pub k0: usize,
}

pub fn run_d2d_trial<T: Real>(config: &D2dBatchConfig<T>, trial: u64) -> Result<D2dTrial<T>> {
    let ppp = config.ppp.with_trial(trial);
    let realization = sample_network(&ppp)?;
    let assignment = schedule(&realization, &config.schedule, &mut ppp.stream(Purpose::Schedule).rng())?;
    let interferers = cochannel_interferers(&realization, &assignment);
    let sample = compute_sir(&realization, &interferers, config.alpha, &mut ppp.stream(Purpose::Fading).rng())?;
    let k0 = realization.count_in_cell(realization.cell_of_typical_tx);
    Ok(D2dTrial {
        sample,
        realization,
        k0,
    })
}

/// SIR of one trial; equal to `run_d2d_trial(config, trial)?.sample`.
pub fn run_d2d_sample<T: Real>(config: &D2dBatchConfig<T>, trial: u64) -> Result<SirSample<T>> {
    let independent = config.schedule.mode == ScheduleMode::Uncoordinated || config.schedule.n_subchannels == 1;
    if !independent {
        return run_d2d_trial(config, trial).map(|tr| tr.sample);
    }
    // Independent choices never look at cell membership, so only the
    // co-channel transmitters need to be located.
    let ppp = config.ppp.with_trial(trial);
    let (realization, index) = sample_unassociated(&ppp)?;
    let assignment = schedule_uncoordinated(&realization, &config.schedule, &mut ppp.stream(Purpose::Schedule).rng())?;
    let mut interferers = CochannelInterferers::default();
    for (&p, &sc) in realization.d2d_txs.iter().zip(&assignment.sc_of_tx) {
        if sc != assignment.typical_sc {
            continue;
        }
        if index.nearest(p) == Some(realization.cell_of_typical_rx) {
            interferers.intracell.push(p);
        } else {
            interferers.intercell.push(p);
        }
    }
    compute_sir(&realization, &interferers, config.alpha, &mut ppp.stream(Purpose::Fading).rng())
}

/// Per-trial SIR samples in trial order.
pub fn run_d2d_samples<T: Real>(config: &D2dBatchConfig<T>, n_trials: u64) -> Result<Vec<SirSample<T>>> {
    (0..n_trials)
        .into_par_iter()
        .map(|t| run_d2d_sample(config, t))
        .collect()
}

pub fn run_d2d_batch<T: Real>(config: &D2dBatchConfig<T>, thresholds: &[T], n_trials: u64) -> Result<EmpiricalCcdf<T>> {
    if n_trials == 0 {
        return Err(Error::param("n_trials", "must be >= 1"));
    }
    let samples = run_d2d_samples(config, n_trials)?;
    Ok(EmpiricalCcdf::from_values(thresholds, samples.iter().map(|s| s.sir)))
}

/// Co-channel bookkeeping used to check interferer densities. Counts are
/// split twice: around the typical receiver's cell and around the typical
/// transmitter's cell, the one it is scheduled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTrial<T> {
    pub rx_intracell_count: usize,
    pub rx_intercell_count: usize,
    pub tx_intracell_count: usize,
    pub tx_intercell_count: usize,
    pub r_a: T,
    /// Non-typical transmitters in the typical transmitter's cell.
    pub k0: usize,
    pub rx_cell_area: T,
    pub tx_cell_area: T,
    pub window_area: T,
}

pub fn run_density_trials<T: Real>(config: &D2dBatchConfig<T>, n_trials: u64) -> Result<Vec<DensityTrial<T>>> {
    (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let ppp = config.ppp.with_trial(t);
            let net = sample_network(&ppp)?;
            let assignment = schedule(&net, &config.schedule, &mut ppp.stream(Purpose::Schedule).rng())?;
            let (mut rx_in, mut tx_in, mut total) = (0, 0, 0);
            for (&cell, &sc) in net.cell_of_tx.iter().zip(&assignment.sc_of_tx) {
                if sc == assignment.typical_sc {
                    total += 1;
                    rx_in += usize::from(cell == net.cell_of_typical_rx);
                    tx_in += usize::from(cell == net.cell_of_typical_tx);
                }
            }
            Ok(DensityTrial {
                rx_intracell_count: rx_in,
                rx_intercell_count: total - rx_in,
                tx_intracell_count: tx_in,
                tx_intercell_count: total - tx_in,
                r_a: net.r_a,
                k0: net.count_in_cell(net.cell_of_typical_tx),
                rx_cell_area: net.typical_cell_area(),
                tx_cell_area: cell_area_in_window(&net.aps, net.cell_of_typical_tx, &net.window),
                window_area: net.window.area(),
            })
        })
        .collect()
}

/// Expected AP count of the default cellular window; large enough that the
/// missing far-field interference moves coverage by well under 0.002.
pub const DEFAULT_CELLULAR_APS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularConfig<T> {
    pub lambda_a: T,
    pub lambda_c: T,
    pub alpha: T,
    pub window: SimWindow<T>,
    pub seed: u64,
}

impl<T: Real> CellularConfig<T> {
    pub fn new(lambda_a: T, lambda_c: T, alpha: T, seed: u64) -> Result<Self> {
        let cfg = Self {
            lambda_a,
            lambda_c,
            alpha,
            window: SimWindow::for_expected_count(lambda_a, T::of(DEFAULT_CELLULAR_APS))?,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a > T::zero()) {
            return Err(Error::param("lambda_a", "must be > 0"));
        }
        if !(self.lambda_c > T::zero()) {
            return Err(Error::param("lambda_c", "must be > 0"));
        }
        if !(self.alpha > T::of(2.0)) {
            return Err(Error::param("alpha", "must be > 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularTrial<T> {
    pub sir_c: T,
    /// Cellular receivers in the typical user's cell, the user included.
    pub k_c: u64,
}

pub fn run_cellular_trial<T: Real>(config: &CellularConfig<T>, trial: u64) -> Result<CellularTrial<T>> {
    let mut key = StreamKey::new(config.seed, trial, Purpose::Cellular);
    let (mut rng, aps) = loop {
        let mut rng = key.rng();
        let aps = sample_ppp(config.lambda_a, &config.window, &mut rng)?;
        if !aps.is_empty() {
            break (rng, aps);
        }
        key = key.next_attempt();
    };
    let user = Point2::origin();
    let serving = nearest_brute_force(&aps, user).expect("non-empty");
    let signal = exp1::<T, _>(&mut rng) * path_gain(aps[serving].dist_sq(user), config.alpha);
    let mut interference = T::zero();
    for (j, &p) in aps.iter().enumerate() {
        if j != serving {
            interference = interference + exp1::<T, _>(&mut rng) * path_gain(p.dist_sq(user), config.alpha);
        }
    }
    let sir_c = if interference > T::zero() {
        signal / interference
    } else {
        T::infinity()
    };

    // Other users only matter inside the serving cell, which fits in the
    // disc around its AP reaching the farthest cell vertex.
    let cell = voronoi_cell(&aps, serving, &config.window.bounding_square());
    let reach = cell.max_distance_from(aps[serving]);
    let mut k_c = 1u64;
    if reach > T::zero() {
        let disc = SimWindow::new(aps[serving], reach)?;
        for p in sample_ppp(config.lambda_c, &disc, &mut rng)? {
            if cell.contains(p) {
                k_c += 1;
            }
        }
    }
    Ok(CellularTrial { sir_c, k_c })
}

/// Sample mean with a 95% half width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate<T> {
    pub mean: T,
    pub half_width: T,
    pub n: u64,
}

impl<T: Real> MeanEstimate<T> {
    pub fn from_values(values: &[T]) -> Self {
        let n = values.len().max(1);
        let nf = T::of_usize(n);
        let mean = values.iter().copied().sum::<T>() / nf;
        let var = if n > 1 {
            values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / T::of_usize(n - 1)
        } else {
            T::zero()
        };
        Self {
            mean,
            half_width: T::of(Z_95) * (var / nf).sqrt(),
            n: values.len() as u64,
        }
    }

    pub fn standard_error(&self) -> T {
        self.half_width / T::of(Z_95)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellularEstimate<T> {
    pub coverage: EmpiricalCcdf<T>,
    pub inv_k: MeanEstimate<T>,
}

/// SIR ccdf of the typical cellular user and the mean TDMA share `E[1/K_c]`.
pub fn run_cellular_batch<T: Real>(config: &CellularConfig<T>, thresholds: &[T], n_trials: u64) -> Result<CellularEstimate<T>> {
    config.validate()?;
    if n_trials == 0 {
        return Err(Error::param("n_trials", "must be >= 1"));
    }
    let trials: Vec<CellularTrial<T>> = (0..n_trials)
        .into_par_iter()
        .map(|t| run_cellular_trial(config, t))
        .collect::<Result<_>>()?;
    let inv: Vec<T> = trials
        .iter()
        .map(|t| T::one() / T::from_u64(t.k_c).expect("u64 fits"))
        .collect();
    Ok(CellularEstimate {
        coverage: EmpiricalCcdf::from_values(thresholds, trials.iter().map(|t| t.sir_c)),
        inv_k: MeanEstimate::from_values(&inv),
    })
}
