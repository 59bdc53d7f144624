//! SIR ccdf expressions for the typical D2D link and the cellular downlink.

use crate::analytic::quadrature::{integrate, integrate_fn, QuadratureSpec};
use crate::analytic::special::{kappa, regularized_upper_gamma};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Circular stand-in for the typical cell, parameterised by the distance
/// `r_a` from the typical receiver to its nearest AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellApprox {
    /// Disc of radius `r_a/2` with the receiver on its boundary. Boundary
    /// in polar form `r_a cos(phi)`, area `pi (r_a/2)^2`.
    B1,
    /// Disc of radius `r_a` centred on the receiver.
    B2,
    /// B1 area with the boundary `2 r_a cos(phi)`, i.e. a disc of radius
    /// `r_a` through the receiver. Kept to reproduce that parameterisation.
    B1Literal,
}

impl CellApprox {
    pub fn area<T: Real>(self, r_a: T) -> T {
        match self {
            CellApprox::B2 => T::PI() * r_a * r_a,
            CellApprox::B1 | CellApprox::B1Literal => T::PI() * r_a * r_a / T::of(4.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellApprox::B1 => "B1",
            CellApprox::B2 => "B2",
            CellApprox::B1Literal => "B1-literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams<T> {
    pub lambda_a: T,
    pub lambda_d: T,
    pub n_subchannels: u32,
    pub r_d: T,
    pub alpha: T,
    pub cell_approx: CellApprox,
}

impl<T: Real> AnalyticParams<T> {
    pub fn new(lambda_a: T, lambda_d: T, n_subchannels: u32, r_d: T, alpha: T, cell_approx: CellApprox) -> Result<Self> {
        let p = Self {
            lambda_a,
            lambda_d,
            n_subchannels,
            r_d,
            alpha,
            cell_approx,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda_a", self.lambda_a)?;
        positive("lambda_d", self.lambda_d)?;
        positive("r_d", self.r_d)?;
        if self.n_subchannels == 0 {
            return Err(Error::param("n_subchannels", "must be >= 1"));
        }
        if !(self.alpha > T::of(2.0)) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be finite and > 2, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn with_n(self, n_subchannels: u32) -> Self {
        Self { n_subchannels, ..self }
    }

    pub fn with_r_d(self, r_d: T) -> Self {
        Self { r_d, ..self }
    }

    pub fn with_approx(self, cell_approx: CellApprox) -> Self {
        Self { cell_approx, ..self }
    }

    /// Per-subchannel D2D density `lambda_d / N`.
    pub fn thinned_density(&self) -> T {
        self.lambda_d / T::from_u32(self.n_subchannels).expect("u32 fits")
    }

    fn require_coordination(&self) -> Result<()> {
        if self.n_subchannels < 2 {
            return Err(Error::Unsupported(
                "coordinated analysis needs at least 2 subchannels; with N = 1 both schemes coincide".into(),
            ));
        }
        Ok(())
    }
}

fn positive<T: Real>(field: &'static str, v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::zero()) {
        return Err(Error::param("theta", format!("must be >= 0, got {theta}")));
    }
    Ok(())
}

/// Exponent `(lambda_d/N) kappa r_d^2 theta^(2/alpha)` of the uncoordinated ccdf.
fn uncoordinated_exponent<T: Real>(params: &AnalyticParams<T>, theta: T) -> Result<T> {
    Ok(params.thinned_density() * kappa(params.alpha)? * params.r_d * params.r_d * theta.powf(T::of(2.0) / params.alpha))
}

/// `P(SIR >= theta)` under uncoordinated scheduling (exact).
pub fn uncoordinated_ccdf<T: Real>(params: &AnalyticParams<T>, theta: T) -> Result<T> {
    params.validate()?;
    check_theta(theta)?;
    if theta == T::zero() {
        return Ok(T::one());
    }
    Ok((-uncoordinated_exponent(params, theta)?).exp())
}

/// Densities of co-channel interferers outside and inside the typical cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererDensities<T> {
    /// `lambda_d / N`.
    pub intercell: T,
    pub intracell: T,
    /// `intercell - intracell`, computed directly so it stays exact when
    /// the two densities agree to machine precision.
    pub deficit: T,
}

pub fn interferer_densities<T: Real>(params: &AnalyticParams<T>, r_a: T) -> Result<InterfererDensities<T>> {
    params.validate()?;
    params.require_coordination()?;
    positive("r_a", r_a)?;
    densities_unchecked(params, r_a)
}

fn densities_unchecked<T: Real>(params: &AnalyticParams<T>, r_a: T) -> Result<InterfererDensities<T>> {
    let outside = params.thinned_density();
    let mean_in_cell = params.lambda_d * params.cell_approx.area(r_a);
    let q = regularized_upper_gamma(params.n_subchannels - 1, mean_in_cell)?;
    Ok(InterfererDensities {
        intercell: outside,
        intracell: outside * (T::one() - q),
        deficit: outside * q,
    })
}

/// `int_0^{r0} u / (1 + (u/r_d)^alpha / theta) du`.
fn radial_integral<T: Real>(r0: T, theta: T, r_d: T, alpha: T, quad: &QuadratureSpec<T>) -> Result<T> {
    if !(r0 > T::zero()) {
        return Ok(T::zero());
    }
    if alpha == T::of(4.0) {
        let c = theta.sqrt() * r_d * r_d;
        return Ok(c / T::of(2.0) * (r0 * r0 / c).atan());
    }
    radial_by_quadrature(r0, theta, r_d, alpha, quad)
}

fn radial_by_quadrature<T: Real>(r0: T, theta: T, r_d: T, alpha: T, quad: &QuadratureSpec<T>) -> Result<T> {
    let inv_theta = theta.recip();
    Ok(integrate_fn(|u| u / (T::one() + inv_theta * (u / r_d).powf(alpha)), T::zero(), r0, quad)?.value)
}

/// The double integral over the approximated cell, in polar coordinates
/// around the typical receiver.
pub fn coordination_integral<T: Real>(params: &AnalyticParams<T>, theta: T, r_a: T, quad: &QuadratureSpec<T>) -> Result<T> {
    params.validate()?;
    quad.validate()?;
    check_theta(theta)?;
    if !(r_a >= T::zero()) {
        return Err(Error::param("r_a", format!("must be >= 0, got {r_a}")));
    }
    coordination_integral_unchecked(params, theta, r_a, quad)
}

fn coordination_integral_unchecked<T: Real>(
    params: &AnalyticParams<T>,
    theta: T,
    r_a: T,
    quad: &QuadratureSpec<T>,
) -> Result<T> {
    if theta == T::zero() || r_a == T::zero() {
        return Ok(T::zero());
    }
    let (r_d, alpha) = (params.r_d, params.alpha);
    let inner = quad.tightened(T::of(0.1));
    let reach = match params.cell_approx {
        CellApprox::B2 => return Ok(T::TAU() * radial_integral(r_a, theta, r_d, alpha, &inner)?),
        CellApprox::B1 => r_a,
        CellApprox::B1Literal => r_a + r_a,
    };
    // Symmetric in phi: integrate the upper half.
    let half = integrate(
        |phi: T| radial_integral(reach * phi.cos(), theta, r_d, alpha, &inner),
        T::zero(),
        T::FRAC_PI_2(),
        quad,
    )?;
    Ok(half.value + half.value)
}

fn conditional_unchecked<T: Real>(params: &AnalyticParams<T>, theta: T, r_a: T, quad: &QuadratureSpec<T>) -> Result<T> {
    if theta == T::zero() {
        return Ok(T::one());
    }
    let base = uncoordinated_exponent(params, theta)?;
    let densities = densities_unchecked(params, r_a)?;
    let correction = densities.deficit * coordination_integral_unchecked(params, theta, r_a, quad)?;
    Ok((correction - base).min(T::zero()).exp())
}

/// `P(SIR >= theta | r_a)` under coordinated scheduling.
pub fn conditional_ccdf<T: Real>(params: &AnalyticParams<T>, theta: T, r_a: T, quad: &QuadratureSpec<T>) -> Result<T> {
    params.validate()?;
    params.require_coordination()?;
    quad.validate()?;
    check_theta(theta)?;
    positive("r_a", r_a)?;
    conditional_unchecked(params, theta, r_a, quad)
}

/// `P(SIR >= theta)` under coordinated scheduling, averaged over a
/// Rayleigh-distributed `r_a` with mean `1/(2 sqrt(lambda_a))`.
///
/// Integrated in `t = pi lambda_a r_a^2`, where the weight becomes `e^-t`.
pub fn unconditional_ccdf<T: Real>(params: &AnalyticParams<T>, theta: T, quad: &QuadratureSpec<T>) -> Result<T> {
    params.validate()?;
    params.require_coordination()?;
    quad.validate()?;
    check_theta(theta)?;
    if theta == T::zero() {
        return Ok(T::one());
    }
    let scale = T::PI() * params.lambda_a;
    let t_max = T::PI() * quad.outer_truncation * quad.outer_truncation;
    let r = integrate(
        |t: T| {
            let r_a = (t / scale).sqrt();
            Ok((-t).exp() * conditional_unchecked(params, theta, r_a, quad)?)
        },
        T::zero(),
        t_max,
        quad,
    )?;
    Ok(r.value.max(T::zero()).min(T::one()))
}

/// Coordinated ccdf for any `N`: the uncoordinated expression at `N = 1`.
pub fn coordinated_ccdf<T: Real>(params: &AnalyticParams<T>, theta: T, quad: &QuadratureSpec<T>) -> Result<T> {
    if params.n_subchannels == 1 {
        uncoordinated_ccdf(params, theta)
    } else {
        unconditional_ccdf(params, theta, quad)
    }
}

/// Downlink coverage `P(SIR_c >= theta)` of a user served by its nearest AP
/// in a Poisson AP field with Rayleigh fading and no noise. Independent of
/// `lambda_a`.
pub fn cellular_ccdf<T: Real>(lambda_a: T, alpha: T, theta: T) -> Result<T> {
    cellular_ccdf_with(lambda_a, alpha, theta, &QuadratureSpec::default())
}

pub fn cellular_ccdf_with<T: Real>(lambda_a: T, alpha: T, theta: T, quad: &QuadratureSpec<T>) -> Result<T> {
    positive("lambda_a", lambda_a)?;
    check_theta(theta)?;
    kappa(alpha)?;
    if theta == T::zero() {
        return Ok(T::one());
    }
    Ok(T::one() / (T::one() + cellular_rho(alpha, theta, quad)?))
}

/// `rho = theta^(2/alpha) int_{theta^(-2/alpha)}^inf du / (1 + u^(alpha/2))`.
fn cellular_rho<T: Real>(alpha: T, theta: T, quad: &QuadratureSpec<T>) -> Result<T> {
    if alpha == T::of(4.0) {
        let s = theta.sqrt();
        return Ok(s * s.atan());
    }
    cellular_rho_by_quadrature(alpha, theta, quad)
}

// With u = theta^(-1/b) s^(-1/(b-1)), b = alpha/2, the integral maps onto
// (0, 1] with a bounded integrand.
fn cellular_rho_by_quadrature<T: Real>(alpha: T, theta: T, quad: &QuadratureSpec<T>) -> Result<T> {
    let b = alpha / T::of(2.0);
    let p = b / (b - T::one());
    let inv_theta = theta.recip();
    let r = integrate_fn(|s: T| T::one() / (s.powf(p) + inv_theta), T::zero(), T::one(), quad)?;
    Ok(r.value / (b - T::one()))
}
