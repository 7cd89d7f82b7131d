//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The vector form integrates several integrands on one shared node set:
//! every component sees the same subintervals and the same positive weights,
//! so pointwise `f_i ≤ f_j` carries over to the computed integrals exactly,
//! rounding included.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge on [{a}, {b}] after {intervals} subintervals \
         (estimate {estimate:e}, error {error:e})"
    )]
    NotConverged { a: f64, b: f64, intervals: usize, estimate: f64, error: f64 },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-13, max_intervals: 2000 }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

fn gk15<const N: usize, E>(f: &mut impl FnMut(f64) -> Result<[f64; N], E>, a: f64, b: f64) -> Result<Piece<N>, E>
where
    E: From<QuadratureError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut eval = |x: f64| -> Result<[f64; N], E> {
        let v = f(x)?;
        if v.iter().any(|y| !y.is_finite()) {
            return Err(QuadratureError::NonFinite(x).into());
        }
        Ok(v)
    };
    let fc = eval(c)?;
    for i in 0..N {
        kron[i] = WGK[7] * fc[i];
        gauss[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let lo = eval(c - dx)?;
        let hi = eval(c + dx)?;
        for i in 0..N {
            let s = lo[i] + hi[i];
            kron[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0f64;
    let mut value = [0.0; N];
    for i in 0..N {
        value[i] = kron[i] * h;
        error = error.max(((kron[i] - gauss[i]) * h).abs());
    }
    Ok(Piece { a, b, value, error })
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    /// Integrates `f` over `[a, b]`, splitting first at the interior `breaks`.
    pub fn integrate_vec_try<const N: usize, E>(
        &self,
        mut f: impl FnMut(f64) -> Result<[f64; N], E>,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<[f64; N], E>
    where
        E: From<QuadratureError>,
    {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(QuadratureError::Interval(a, b).into());
        }
        if a == b {
            return Ok([0.0; N]);
        }
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);

        let mut pieces = Vec::new();
        for w in edges.windows(2) {
            pieces.push(gk15(&mut f, w[0], w[1])?);
        }
        loop {
            let mut total = [0.0; N];
            let mut err = 0.0;
            let mut worst = 0;
            for (idx, p) in pieces.iter().enumerate() {
                for (t, v) in total.iter_mut().zip(&p.value) {
                    *t += v;
                }
                err += p.error;
                if p.error > pieces[worst].error {
                    worst = idx;
                }
            }
            let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if err <= (self.rel_tol * scale).max(self.abs_tol) {
                return Ok(ordered_sum(&mut pieces));
            }
            let p = &pieces[worst];
            let mid = 0.5 * (p.a + p.b);
            if pieces.len() >= self.max_intervals || !(mid > p.a && mid < p.b) {
                return Err(QuadratureError::NotConverged {
                    a,
                    b,
                    intervals: pieces.len(),
                    estimate: total.first().copied().unwrap_or(0.0),
                    error: err,
                }
                .into());
            }
            let (pa, pb) = (p.a, p.b);
            let left = gk15(&mut f, pa, mid)?;
            let right = gk15(&mut f, mid, pb)?;
            pieces[worst] = left;
            pieces.push(right);
        }
    }

    pub fn integrate_vec<const N: usize>(
        &self,
        mut f: impl FnMut(f64) -> [f64; N],
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<[f64; N], QuadratureError> {
        self.integrate_vec_try(|x| Ok::<_, QuadratureError>(f(x)), a, b, breaks)
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadratureError> {
        self.integrate_vec(|x| [f(x)], a, b, &[]).map(|v| v[0])
    }
}

// Summation in left-to-right order makes the result independent of the
// refinement history.
fn ordered_sum<const N: usize>(pieces: &mut [Piece<N>]) -> [f64; N] {
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = [0.0; N];
    for p in pieces.iter() {
        for (t, v) in total.iter_mut().zip(&p.value) {
            *t += v;
        }
    }
    total
}

/// Adaptive integral of `f` over `[a, b]` to relative tolerance `tol`.
pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    Quadrature::with_rel_tol(tol).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_and_constants() {
        assert_relative_eq!(integrate(|_| 1.0, 0.0, 1.0, 1e-6).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(integrate(|x| x * x, 0.0, 3.0, 1e-6).unwrap(), 9.0, max_relative = 1e-14);
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-6).unwrap(), 0.0);
        assert!(integrate(|x| x, 2.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn kinked_integrand_matches_trapezoid_oracle() {
        // A piecewise SE-like curve: log decay with a jump in slope.
        let f = |x: f64| {
            let base = (1.0 + 1e4 / (1.0 + x * x)).log2();
            if x < 37.0 {
                base
            } else {
                base - 0.02 * (x - 37.0)
            }
        };
        let n = 3_000_000;
        let h = 150.0 / n as f64;
        let trap: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * f(i as f64 * h)
            })
            .sum::<f64>()
            * h;
        let q = integrate(f, 0.0, 150.0, 1e-9).unwrap();
        assert!((q - trap).abs() / trap < 1e-5);
    }

    #[test]
    fn vector_components_keep_pointwise_order() {
        let lo = |x: f64| (x.sin() * 3.0).exp() / (1.0 + x);
        let q = Quadrature::default();
        let [a, b] = q.integrate_vec(|x| [lo(x), lo(x) * (1.0 + 1e-15)], 0.0, 20.0, &[]).unwrap();
        assert!(a <= b);
    }

    #[test]
    fn breakpoints_are_honored() {
        let q = Quadrature::default();
        let v = q.integrate_vec(|x| [if x < 1.0 { 0.0 } else { 1.0 }], 0.0, 3.0, &[1.0]).unwrap();
        assert_relative_eq!(v[0], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn singular_integrand_reports_non_convergence() {
        let q = Quadrature { max_intervals: 20, ..Quadrature::default() };
        let r = q.integrate(|x| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0);
        assert!(matches!(r, Err(QuadratureError::NotConverged { .. })));
    }
}
