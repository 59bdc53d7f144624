//! Stochastic-geometry model of D2D links underlaid on a Poisson cellular
//! network: sampling, subchannel scheduling, Monte Carlo SIR, closed-form
//! and integral ccdfs, and the average-rate optimizer.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod ppp;
pub mod rate;
pub mod rng;
pub mod scalar;
pub mod scheduler;
pub mod sir;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, NearestIndex, Point2, SimWindow};
pub use ppp::{sample_network, sample_ppp, NetworkRealization, PppConfig};
pub use rng::{Purpose, StreamKey, TrialRng};
pub use scalar::{db_to_linear, linear_to_db, Real};
pub use scheduler::{
    cochannel_interferers, schedule, CochannelInterferers, ScheduleConfig, ScheduleMode, SubchannelAssignment, TxId,
};
pub use sir::{
    compute_sir, run_cellular_batch, run_d2d_batch, CellularConfig, CellularEstimate, D2dBatchConfig, EmpiricalCcdf,
    SirSample,
};

pub type Point = Point2<f64>;
pub type Window = SimWindow<f64>;
pub type Polygon = ConvexPolygon<f64>;
pub type Network = NetworkRealization<f64>;
pub type Ppp = PppConfig<f64>;
pub type Params = analytic::AnalyticParams<f64>;
pub type Quadrature = analytic::QuadratureSpec<f64>;
pub type Ccdf = EmpiricalCcdf<f64>;
pub type D2dBatch = D2dBatchConfig<f64>;
pub type Cellular = CellularConfig<f64>;
pub type Rate = rate::RateParams<f64>;
pub type Breakdown = rate::RateBreakdown<f64>;
