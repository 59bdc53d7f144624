//! Adaptive 15-point Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

// Kronrod abscissae (non-negative half) and weights; odd entries are the
// 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for every numerical integral in the analytic module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
    /// Upper limit of the `r_a` integral in units of `1/sqrt(lambda_a)`.
    pub outer_truncation: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::of(1e-10),
            abs_tol: T::of(1e-14),
            max_subdivisions: 400,
            outer_truncation: T::of(5.0),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::param("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > T::zero()) {
            return Err(Error::param("abs_tol", "must be > 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::param("max_subdivisions", "must be >= 1"));
        }
        if !(self.outer_truncation > T::zero()) {
            return Err(Error::param("outer_truncation", "must be > 0"));
        }
        Ok(())
    }

    /// Same spec with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: T) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    /// Roundoff floor of `error`; splitting cannot push below it.
    round: T,
}

fn gauss_kronrod<T: Real, F>(f: &mut F, a: T, b: T) -> Result<Segment<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let half = T::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center)?;
    let mut kronrod = f_center * T::of(WGK[7]);
    let mut gauss = f_center * T::of(WG[3]);
    let mut abs_sum = kronrod.abs();
    let mut values = [(T::zero(), T::zero()); 7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half_len * T::of(XGK[j]);
        let (lo, hi) = (f(center - dx)?, f(center + dx)?);
        *slot = (lo, hi);
        kronrod = kronrod + T::of(WGK[j]) * (lo + hi);
        abs_sum = abs_sum + T::of(WGK[j]) * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss = gauss + T::of(WG[j / 2]) * (lo + hi);
        }
    }
    let mean = kronrod * half;
    let mut asc = T::of(WGK[7]) * (f_center - mean).abs();
    for (j, &(lo, hi)) in values.iter().enumerate() {
        asc = asc + T::of(WGK[j]) * ((lo - mean).abs() + (hi - mean).abs());
    }
    let scale = half_len.abs();
    let value = kronrod * half_len;
    let res_abs = abs_sum * scale;
    let res_asc = asc * scale;
    let mut error = ((kronrod - gauss) * half_len).abs();
    if res_asc > T::zero() && error > T::zero() {
        let ratio = (T::of(200.0) * error / res_asc).powf(T::of(1.5));
        error = res_asc * ratio.min(T::one());
    }
    let round = T::of(50.0) * T::epsilon() * res_abs;
    if round > error {
        error = round;
    }
    Ok(Segment { a, b, value, error, round })
}

/// Integrates a fallible integrand over `[a, b]`.
pub fn integrate<T: Real, F>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<Integral<T>>
where
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            subdivisions: 0,
        });
    }
    let rel = spec.rel_tol.max(T::of(50.0) * T::epsilon());
    let mut segments = vec![gauss_kronrod(&mut f, a, b)?];
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        let round: T = segments.iter().map(|s| s.round).sum();
        let target = spec.abs_tol.max(rel * value.abs());
        // Accept once the estimate is at the roundoff floor of the scalar type.
        if error <= target || error <= T::of(2.0) * round {
            return Ok(Integral {
                value,
                error,
                subdivisions: segments.len(),
            });
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                subdivisions: segments.len(),
                estimate: value.as_f64(),
                error: error.as_f64(),
                tolerance: target.as_f64(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = T::of(0.5) * (seg.a + seg.b);
        if !(mid > seg.a.min(seg.b) && mid < seg.a.max(seg.b)) {
            return Err(Error::Quadrature {
                subdivisions: segments.len() + 1,
                estimate: value.as_f64(),
                error: error.as_f64(),
                tolerance: target.as_f64(),
            });
        }
        segments.push(gauss_kronrod(&mut f, seg.a, mid)?);
        segments.push(gauss_kronrod(&mut f, mid, seg.b)?);
    }
}

/// [`integrate`] for an infallible integrand.
pub fn integrate_fn<T: Real, F>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<Integral<T>>
where
    F: FnMut(T) -> T,
{
    integrate(|x| Ok(f(x)), a, b, spec)
}
