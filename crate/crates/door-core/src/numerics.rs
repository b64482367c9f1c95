//! Distribution primitives: scalar normal and Student-t CDFs/quantiles,
//! bivariate normal and bivariate t rectangle probabilities, and the
//! symmetric critical-value solver used by the simultaneous tests.

// the Gauss-Legendre tables keep their published trailing digits
#![allow(clippy::excessive_precision)]

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("degrees of freedom must be at least 1, got {0}")]
    InvalidDof(f64),
    #[error("rectangle has lower > upper: ({0}, {1})")]
    InvertedRectangle(f64, f64),
    #[error("correlation must lie in [-1, 1], got {0}")]
    CorrelationOutOfRange(f64),
    #[error("critical-value target {0} is not reachable on [0, 100]")]
    TargetUnreachable(f64),
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Scalar normal and Student t
// ---------------------------------------------------------------------------

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / TWO_PI.sqrt()
}

/// Standard normal quantile, Newton-refined against [`std_normal_cdf`] so the
/// pair are mutual inverses to well below 1e-12.
pub fn std_normal_quantile(p: f64) -> Result<f64, NumericsError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(NumericsError::ProbabilityOutOfRange(p));
    }
    let start = Normal::new(0.0, 1.0).unwrap().inverse_cdf(p);
    Ok(newton_refine(start, p, std_normal_cdf, std_normal_pdf))
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(x: f64, df: f64) -> Result<f64, NumericsError> {
    if df.is_nan() || df < 1.0 {
        return Err(NumericsError::InvalidDof(df));
    }
    Ok(StudentsT::new(0.0, 1.0, df).unwrap().cdf(x))
}

/// Student-t density with `df` degrees of freedom.
pub fn student_t_pdf(x: f64, df: f64) -> f64 {
    let ln_c =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
}

/// Student-t quantile, Newton-refined against [`student_t_cdf`].
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64, NumericsError> {
    if df.is_nan() || df < 1.0 {
        return Err(NumericsError::InvalidDof(df));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(NumericsError::ProbabilityOutOfRange(p));
    }
    let start = StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(p);
    Ok(newton_refine(
        start,
        p,
        |x| student_t_cdf(x, df).unwrap(),
        |x| student_t_pdf(x, df),
    ))
}

/// A few Newton steps on `cdf(x) = p`; the starting point is already accurate
/// to ~1e-9, so this converges to the CDF's own inverse at machine precision.
fn newton_refine(start: f64, p: f64, cdf: impl Fn(f64) -> f64, pdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = start;
    for _ in 0..3 {
        let f = cdf(x) - p;
        let d = pdf(x);
        if d <= 0.0 || !f.is_finite() {
            break;
        }
        let step = f / d;
        if step.abs() < 1e-17 * x.abs().max(1.0) {
            break;
        }
        x -= step;
    }
    x
}

// ---------------------------------------------------------------------------
// Bivariate normal
// ---------------------------------------------------------------------------

/// A two-dimensional rectangle with a correlation, over which joint normal
/// or t probabilities are computed. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
    pub rho: f64,
}

impl Rectangle {
    pub fn new(lower: (f64, f64), upper: (f64, f64), rho: f64) -> Result<Self, NumericsError> {
        if lower.0 > upper.0 {
            return Err(NumericsError::InvertedRectangle(lower.0, upper.0));
        }
        if lower.1 > upper.1 {
            return Err(NumericsError::InvertedRectangle(lower.1, upper.1));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(NumericsError::CorrelationOutOfRange(rho));
        }
        Ok(Rectangle { lower, upper, rho })
    }

    /// The symmetric two-sided rectangle `[-c, c] x [-c, c]`.
    pub fn symmetric(c: f64, rho: f64) -> Result<Self, NumericsError> {
        Rectangle::new((-c, -c), (c, c), rho)
    }

    /// The one-sided "both below c" region `(-inf, c] x (-inf, c]`.
    pub fn upper_corner(c: f64, rho: f64) -> Result<Self, NumericsError> {
        Rectangle::new((f64::NEG_INFINITY, f64::NEG_INFINITY), (c, c), rho)
    }

    fn scaled(&self, u: f64) -> Rectangle {
        Rectangle {
            lower: (self.lower.0 * u, self.lower.1 * u),
            upper: (self.upper.0 * u, self.upper.1 * u),
            rho: self.rho,
        }
    }
}

// Gauss-Legendre half-rules used by the Drezner-Wesolowsky reduction
// (Genz's BVND tables).
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705, -0.9324695142031522),
    (0.3607615730481384, -0.6612093864662647),
    (0.4679139345726904, -0.2386191860831970),
];
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, -0.9815606342467191),
    (0.1069393259953183, -0.9041172563704750),
    (0.1600783285433464, -0.7699026741943050),
    (0.2031674267230659, -0.5873179542866171),
    (0.2334925365383547, -0.3678314989981802),
    (0.2491470458134029, -0.1252334085114692),
];
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, -0.9931285991850949),
    (0.04060142980038694, -0.9639719272779138),
    (0.06267204833410906, -0.9122344282513259),
    (0.08327674157670475, -0.8391169718222188),
    (0.1019301198172404, -0.7463319064601508),
    (0.1181945319615184, -0.6360536807265150),
    (0.1316886384491766, -0.5108670019508271),
    (0.1420961093183821, -0.3737060887154196),
    (0.1491729864726037, -0.2277858511416451),
    (0.1527533871307259, -0.07652652113349733),
];

fn bvnd_quadrature(r_abs: f64) -> &'static [(f64, f64)] {
    if r_abs < 0.3 {
        &GL6
    } else if r_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// `P(X > dh, Y > dk)` for standard bivariate normal with correlation `r`.
///
/// Scalar port of Genz's BVND (Drezner-Wesolowsky with the double-precision
/// modifications). For r < -0.925 only the second coordinate's sign is
/// flipped before the quadrature; the complement identity
/// `bvnd(dh, dk, r) = phi(-dh) - bvnd(dh, -dk, -r)` then recovers the result
/// (flipping both signs here is a known porting mistake).
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return std_normal_cdf(-dk);
    }
    if dk == f64::NEG_INFINITY {
        return std_normal_cdf(-dh);
    }
    if r >= 1.0 - 1e-14 {
        // X = Y
        return std_normal_cdf(-dh.max(dk));
    }
    if r <= -(1.0 - 1e-14) {
        // Y = -X: P(X > dh, X < -dk)
        return (std_normal_cdf(-dk) - std_normal_cdf(dh)).max(0.0);
    }

    let quad = bvnd_quadrature(r.abs());
    let mut bvn = 0.0;

    if r.abs() <= 0.925 {
        if r != 0.0 {
            let hk = dh * dk;
            let hs = (dh * dh + dk * dk) / 2.0;
            let asr = 0.5 * r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / TWO_PI;
        }
        bvn + std_normal_cdf(-dh) * std_normal_cdf(-dk)
    } else {
        let h = dh;
        let mut k = dk;
        let mut hk = h * k;
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for is in [-1.0, 1.0] {
                let xq = a * (is * x + 1.0);
                let x_s = xq * xq;
                let r_s = (1.0 - x_s).sqrt();
                let asr = -0.5 * (b_s / x_s + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - r_s) / (2.0 * (1.0 + r_s))).exp() / r_s
                            - (1.0 + c * x_s * (1.0 + d * x_s)));
                }
            }
        }
        bvn *= -1.0 / TWO_PI;
        if r > 0.0 {
            bvn + std_normal_cdf(-h.max(k))
        } else {
            bvn = -bvn;
            if k > h {
                bvn += std_normal_cdf(k) - std_normal_cdf(h);
            }
            bvn
        }
    }
}

/// Joint standard bivariate normal CDF `P(X <= x, Y <= y)`.
pub fn bvn_cdf(x: f64, y: f64, rho: f64) -> f64 {
    bvnd(-x, -y, rho)
}

/// `P(lower <= (Z1, Z2) <= upper)` for correlated standard normals.
pub fn bvn_rect(rect: &Rectangle) -> f64 {
    if let Some(p) = degenerate_rect(rect, std_normal_cdf) {
        return p;
    }
    let (a1, a2) = rect.lower;
    let (b1, b2) = rect.upper;
    let r = rect.rho;
    let p = bvn_cdf(b1, b2, r) - bvn_cdf(a1, b2, r) - bvn_cdf(b1, a2, r) + bvn_cdf(a1, a2, r);
    p.clamp(0.0, 1.0)
}

/// Rectangle probability when |rho| is at (or numerically on top of) 1, where
/// the quadrature degenerates: the mass lives on a line.
fn degenerate_rect(rect: &Rectangle, cdf: impl Fn(f64) -> f64) -> Option<f64> {
    let r = rect.rho;
    if r >= 1.0 - 1e-12 {
        let lo = rect.lower.0.max(rect.lower.1);
        let hi = rect.upper.0.min(rect.upper.1);
        Some(if lo >= hi {
            0.0
        } else {
            (cdf(hi) - cdf(lo)).max(0.0)
        })
    } else if r <= -(1.0 - 1e-12) {
        // Z2 = -Z1: intersect [l1, u1] with [-u2, -l2]
        let lo = rect.lower.0.max(-rect.upper.1);
        let hi = rect.upper.0.min(-rect.lower.1);
        Some(if lo >= hi {
            0.0
        } else {
            (cdf(hi) - cdf(lo)).max(0.0)
        })
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Bivariate t
// ---------------------------------------------------------------------------

/// Chi-square quantile by bracketed Newton on the regularized lower
/// incomplete gamma, with a Wilson-Hilferty starting point.
fn chi_square_quantile(p: f64, df: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0 && df > 0.0);
    let a = df / 2.0;
    let cdf = |x: f64| gamma_lr(a, x / 2.0);
    // chi-square log density: (a-1) ln x - x/2 - a ln 2 - ln Gamma(a)
    let ln_norm = -a * std::f64::consts::LN_2 - ln_gamma(a);
    let pdf = |x: f64| (ln_norm + (a - 1.0) * x.ln() - x / 2.0).exp();

    // Wilson-Hilferty start, replaced by a small-x asymptotic when it fails.
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(p);
    let t = 1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt();
    let mut x = if t > 0.0 {
        df * t * t * t
    } else {
        // P(a, x/2) ~ (x/2)^a / (a Gamma(a)) for small x
        2.0 * (p * a * ln_gamma(a).exp()).powf(1.0 / a)
    };

    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for _ in 0..200 {
        let f = cdf(x) - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        if f.abs() < 1e-14 {
            break;
        }
        let d = pdf(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                lo * 2.0 + 1.0
            };
        }
        if (next - x).abs() <= 1e-15 * x.abs() {
            break;
        }
        x = next;
    }
    x
}

/// `P(lower <= (T1, T2) <= upper)` for the central bivariate t with `df`
/// degrees of freedom and correlation `rect.rho` (shared chi-square mixing,
/// the mvtnorm convention).
///
/// Computed as `E_U[ bvn_rect(rect * U) ]` with `U = sqrt(chi2_df / df)` by
/// composite Gauss-Legendre over the essential support of U. The orthant
/// identity, the df -> infinity limit, and the |rho| = 1 reductions are
/// covered by tests.
pub fn bvt_rect(rect: &Rectangle, df: usize) -> Result<f64, NumericsError> {
    if df < 1 {
        return Err(NumericsError::InvalidDof(df as f64));
    }
    let nu = df as f64;
    if let Some(p) = degenerate_rect(rect, |x| student_t_cdf(x, nu).unwrap()) {
        return Ok(p);
    }

    // Truncate U to the central 1 - 2e-13 of its distribution.
    let u_lo = (chi_square_quantile(1e-13, nu) / nu).sqrt();
    let u_hi = (chi_square_quantile(1.0 - 1e-13, nu) / nu).sqrt();

    // Density of U = sqrt(S/nu), S ~ chi2(nu):
    // f(u) = 2 (nu/2)^(nu/2) / Gamma(nu/2) * u^(nu-1) exp(-nu u^2 / 2)
    let half = nu / 2.0;
    let ln_norm = std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half);
    let ln_density = |u: f64| ln_norm + (nu - 1.0) * u.ln() - half * u * u;

    const PANELS: usize = 16;
    let width = (u_hi - u_lo) / PANELS as f64;
    let mut total = 0.0;
    for panel in 0..PANELS {
        let mid = u_lo + (panel as f64 + 0.5) * width;
        let halfw = 0.5 * width;
        for &(w, x) in &GL20 {
            for is in [-1.0, 1.0] {
                let u = mid + halfw * is * x;
                let g = ln_density(u).exp() * bvn_rect(&rect.scaled(u));
                total += w * halfw * g;
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Critical-value solver
// ---------------------------------------------------------------------------

/// Solves `prob_fn(c) = target` for nondecreasing `prob_fn` by bisection on
/// [0, 10], extended to [0, 100] if needed, to 1e-8 in probability.
pub fn solve_symmetric_critical(
    prob_fn: impl Fn(f64) -> f64,
    target: f64,
) -> Result<f64, NumericsError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(NumericsError::ProbabilityOutOfRange(target));
    }
    let mut lo = 0.0_f64;
    let mut hi = 10.0_f64;
    if prob_fn(hi) < target {
        hi = 100.0;
        if prob_fn(hi) < target {
            return Err(NumericsError::TargetUnreachable(target));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let p = prob_fn(mid);
        if (p - target).abs() <= 1e-8 {
            return Ok(mid);
        }
        if p < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(mid)
}
