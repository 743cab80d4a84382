//! Single-ratio solvers on an interval: Dinkelbach's parametric method and
//! the fraction transform applied to one term.

use crate::error::{Error, Result};
use crate::transform::fraction_term;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimizer of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`. Non-finite values are
/// treated as +inf. Returns the best evaluated point and its value.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    for x in [lo, hi] {
        let v = eval(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Bracket width of every inner 1-D minimization.
pub const INNER_TOL: f64 = 1e-10;

/// Iteration cap shared by the scalar methods.
pub const MAX_SCALAR_ITER: usize = 200;

/// One outer iterate of a scalar method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarIterate {
    pub x: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub x: f64,
    pub value: f64,
    /// Iterates after each outer iteration; `trace[k]` is iteration `k + 1`.
    pub trace: Vec<ScalarIterate>,
}

impl ScalarSolution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

fn check_domain(domain: (f64, f64), tol: f64) -> Result<()> {
    let (lo, hi) = domain;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidConfig(format!("invalid interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn positive_den<D: Fn(f64) -> f64>(den: &D, x: f64) -> Result<f64> {
    let v = den(x);
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonPositiveDenominator { x, value: v })
    }
}

/// Dinkelbach's method for `min N(x)/D(x)` on `domain`, started at the
/// midpoint. Each iteration minimizes `N(x) - mu D(x)` with `mu` the current
/// ratio and stops when that minimum is within `tol` of zero.
pub fn dinkelbach_min_scalar<N, D>(num: N, den: D, domain: (f64, f64), tol: f64) -> Result<ScalarSolution>
where
    N: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    check_domain(domain, tol)?;
    let (lo, hi) = domain;
    let mut x = 0.5 * (lo + hi);
    let mut mu = num(x) / positive_den(&den, x)?;
    let mut trace = Vec::new();
    for _ in 0..MAX_SCALAR_ITER {
        let (xk, _) = golden_section_min(|z| num(z) - mu * den(z), lo, hi, INNER_TOL);
        let dk = positive_den(&den, xk)?;
        let parametric = num(xk) - mu * dk;
        x = xk;
        mu = num(x) / dk;
        trace.push(ScalarIterate { x, ratio: mu });
        if parametric.abs() <= tol {
            break;
        }
    }
    Ok(ScalarSolution { x, value: mu, trace })
}

/// Fraction-transform method for `min B(x)/A(x)` on `domain`, started at
/// the midpoint: alternately minimizes `t B(x)^2 + 1/(4 t A(x)^2)` over `x`
/// and resets `t = 1/(2 A B)`, until the ratio changes by less than `tol`.
/// Both functions must be positive on the domain.
pub fn transform_min_scalar<N, D>(num: N, den: D, domain: (f64, f64), tol: f64) -> Result<ScalarSolution>
where
    N: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    check_domain(domain, tol)?;
    let (lo, hi) = domain;
    let mut x = 0.5 * (lo + hi);
    let mut a = positive_den(&den, x)?;
    let mut b = num(x);
    if !(b > 0.0) {
        return Err(Error::InvalidTransformOperand { index: 0, value: b });
    }
    let mut ratio = b / a;
    let mut trace = Vec::new();
    for _ in 0..MAX_SCALAR_ITER {
        let t = 0.5 / (a * b);
        let (xk, _) = golden_section_min(
            |z| {
                let d = den(z);
                if d > 0.0 {
                    fraction_term(t, d, num(z))
                } else {
                    f64::INFINITY
                }
            },
            lo,
            hi,
            INNER_TOL,
        );
        x = xk;
        a = positive_den(&den, x)?;
        b = num(x);
        let next = b / a;
        trace.push(ScalarIterate { x, ratio: next });
        let change = (next - ratio).abs();
        ratio = next;
        if change < tol {
            break;
        }
    }
    Ok(ScalarSolution { x, value: ratio, trace })
}
