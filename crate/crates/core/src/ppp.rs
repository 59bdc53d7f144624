//! Poisson point process sampling and the conditioned network realization.
//!
//! The typical D2D receiver sits at the origin. Its transmitter is added to
//! the D2D field at distance `r_d` in a uniformly random direction; by
//! Slivnyak's theorem the remaining transmitters are an ordinary PPP.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{cell_area_in_window, NearestIndex, Point2, SimWindow};
use crate::rng::{Purpose, StreamKey};
use crate::scalar::Real;

/// Redraws allowed before an AP-less window is reported as an error.
const MAX_ATTEMPTS: u32 = 64;

/// Samples a homogeneous PPP of `density` points per unit area on `window`.
pub fn sample_ppp<T: Real, R: Rng + ?Sized>(density: T, window: &SimWindow<T>, rng: &mut R) -> Result<Vec<Point2<T>>> {
    if !(density > T::zero()) || !density.is_finite() {
        return Err(Error::param("density", format!("must be finite and > 0, got {density}")));
    }
    if !(window.radius > T::zero()) {
        return Err(Error::param("radius", format!("must be > 0, got {}", window.radius)));
    }
    let mean = (density * window.area()).as_f64();
    let count = Poisson::new(mean)
        .map_err(|e| Error::param("density", e.to_string()))?
        .sample(rng) as usize;
    // Rejection from the bounding square: uniform on the disc without
    // trigonometry.
    let radius = window.radius.as_f64();
    let (cx, cy) = (window.center.x.as_f64(), window.center.y.as_f64());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.random::<f64>() * 2.0 - 1.0;
        let y = rng.random::<f64>() * 2.0 - 1.0;
        if x * x + y * y <= 1.0 {
            out.push(Point2::new(T::of(cx + radius * x), T::of(cy + radius * y)));
        }
    }
    Ok(out)
}

/// Inputs for one network realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PppConfig<T> {
    pub lambda_a: T,
    pub lambda_d: T,
    pub r_d: T,
    pub window: SimWindow<T>,
    pub seed: u64,
    pub trial_index: u64,
}

impl<T: Real> PppConfig<T> {
    /// Configuration with the default 30-AP window around the origin.
    pub fn new(lambda_a: T, lambda_d: T, r_d: T, seed: u64) -> Result<Self> {
        let cfg = Self {
            lambda_a,
            lambda_d,
            r_d,
            window: SimWindow::default_for(lambda_a)?,
            seed,
            trial_index: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window(mut self, window: SimWindow<T>) -> Self {
        self.window = window;
        self
    }

    pub fn with_trial(mut self, trial_index: u64) -> Self {
        self.trial_index = trial_index;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a > T::zero()) || !self.lambda_a.is_finite() {
            return Err(Error::param("lambda_a", format!("must be finite and > 0, got {}", self.lambda_a)));
        }
        if !(self.lambda_d > T::zero()) || !self.lambda_d.is_finite() {
            return Err(Error::param("lambda_d", format!("must be finite and > 0, got {}", self.lambda_d)));
        }
        if !(self.r_d >= T::zero()) || !self.r_d.is_finite() {
            return Err(Error::param("r_d", format!("must be finite and >= 0, got {}", self.r_d)));
        }
        if !(self.window.radius > T::zero()) {
            return Err(Error::param("radius", "must be > 0"));
        }
        Ok(())
    }

    pub fn stream(&self, purpose: Purpose) -> StreamKey {
        StreamKey::new(self.seed, self.trial_index, purpose)
    }
}

/// One sampled world seen from the typical D2D receiver at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization<T> {
    pub aps: Vec<Point2<T>>,
    /// D2D transmitters other than the typical one.
    pub d2d_txs: Vec<Point2<T>>,
    pub typical_tx: Point2<T>,
    pub typical_rx: Point2<T>,
    /// Nearest AP of each entry in `d2d_txs`.
    pub cell_of_tx: Vec<usize>,
    pub cell_of_typical_tx: usize,
    /// Nearest AP to the origin.
    pub cell_of_typical_rx: usize,
    /// Distance from the origin to `aps[cell_of_typical_rx]`.
    pub r_a: T,
    pub window: SimWindow<T>,
    /// Number of redraws needed to get at least one AP.
    pub attempts: u32,
}

impl<T: Real> NetworkRealization<T> {
    pub fn typical_link_distance(&self) -> T {
        self.typical_tx.dist(self.typical_rx)
    }

    /// Number of non-typical transmitters associated with `cell`.
    pub fn count_in_cell(&self, cell: usize) -> usize {
        count_in_cell(self, cell)
    }

    /// Area of the typical receiver's cell inside the window.
    pub fn typical_cell_area(&self) -> T {
        cell_area_in_window(&self.aps, self.cell_of_typical_rx, &self.window)
    }
}

/// Samples the APs, the D2D field and the typical link for `config`.
///
/// A window without APs is redrawn from the next substream.
pub fn sample_network<T: Real>(config: &PppConfig<T>) -> Result<NetworkRealization<T>> {
    sample_with(config, true).map(|(net, _)| net)
}

/// Same draws as [`sample_network`] but `cell_of_tx` is left empty; the
/// returned index answers membership queries on demand.
pub(crate) fn sample_unassociated<T: Real>(config: &PppConfig<T>) -> Result<(NetworkRealization<T>, NearestIndex<T>)> {
    sample_with(config, false)
}

fn sample_with<T: Real>(config: &PppConfig<T>, associate: bool) -> Result<(NetworkRealization<T>, NearestIndex<T>)> {
    config.validate()?;
    let mut key = config.stream(Purpose::Geometry);
    loop {
        let mut rng = key.rng();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        let aps = sample_ppp(config.lambda_a, &config.window, &mut rng)?;
        let d2d_txs = sample_ppp(config.lambda_d, &config.window, &mut rng)?;
        if aps.is_empty() {
            if key.attempt + 1 >= MAX_ATTEMPTS {
                return Err(Error::param(
                    "radius",
                    format!("window produced no AP in {MAX_ATTEMPTS} draws"),
                ));
            }
            key = key.next_attempt();
            continue;
        }
        let typical_rx = Point2::origin();
        let typical_tx = Point2::from_polar(config.r_d, T::of(phi));
        let index = NearestIndex::new(&aps, &config.window);
        let nearest = |p| index.nearest(p).expect("at least one AP");
        let cell_of_tx = if associate {
            index.nearest_all(&d2d_txs).expect("at least one AP")
        } else {
            Vec::new()
        };
        let cell_of_typical_rx = nearest(typical_rx);
        let net = NetworkRealization {
            cell_of_typical_tx: nearest(typical_tx),
            r_a: aps[cell_of_typical_rx].dist(typical_rx),
            cell_of_typical_rx,
            cell_of_tx,
            aps,
            d2d_txs,
            typical_tx,
            typical_rx,
            window: config.window,
            attempts: key.attempt,
        };
        return Ok((net, index));
    }
}

/// Number of non-typical D2D transmitters whose nearest AP is `cell`.
pub fn count_in_cell<T>(realization: &NetworkRealization<T>, cell: usize) -> usize {
    realization.cell_of_tx.iter().filter(|&&c| c == cell).count()
}
