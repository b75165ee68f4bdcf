//! Exact rational reference values for the mean-field maps and kernel rows.
//!
//! Every `f64` argument is taken at its exact binary value, except the
//! collapsed degree `nu`, which is floored from the decimal the argument
//! prints as. Terms are summed in `BigRational` with no rounding at all;
//! only the final value is converted. Costs grow quickly, so keep `n`
//! below a few hundred.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// The rational a float prints as, e.g. `0.3 -> 3/10`.
fn decimal(x: f64) -> BigRational {
    let text = format!("{x}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()))
}

fn floor_u32(x: &BigRational) -> u32 {
    x.floor()
        .to_integer()
        .to_u32()
        .expect("non-negative and small")
}

/// `floor(p_e (n - 1))` over the decimal value of `p_e`.
pub fn nu_random(n: u32, p_e: f64) -> u32 {
    floor_u32(&(decimal(p_e) * BigRational::from_integer((n - 1).into())))
}

/// `floor(p_w (n - gamma))` over the decimal value of `p_w`.
pub fn nu_smallworld(n: u32, gamma: u32, p_w: f64) -> u32 {
    floor_u32(&(decimal(p_w) * BigRational::from_integer((n - gamma).into())))
}

fn choose(k: u32, r: u32) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..r {
        c = c * BigInt::from(k - i) / BigInt::from(i + 1);
    }
    c
}

/// Powers `q^0 ..= q^k` and `(1 - q)^0 ..= (1 - q)^k`.
struct Powers {
    up: Vec<BigRational>,
    down: Vec<BigRational>,
}

impl Powers {
    fn new(q: &BigRational, k: u32) -> Self {
        let one = BigRational::one();
        let comp = &one - q;
        let mut up = vec![one.clone()];
        let mut down = vec![one];
        for i in 0..k as usize {
            up.push(&up[i] * q);
            down.push(&down[i] * &comp);
        }
        Self { up, down }
    }

    fn pmf(&self, k: u32, r: u32) -> BigRational {
        BigRational::from_integer(choose(k, r))
            * &self.up[r as usize]
            * &self.down[(k - r) as usize]
    }
}

fn xi(k: u32, r: u32, p: &BigRational) -> BigRational {
    if 2 * r <= k {
        p.clone()
    } else {
        BigRational::one() - p
    }
}

fn value(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

/// `sum_{r in range} xi_k(r) C(k, r) rho^r (1 - rho)^(k - r)`.
fn partial(pw: &Powers, k: u32, lo: u32, hi: u32, p: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for r in lo..=hi.min(k) {
        acc += xi(k, r, p) * pw.pmf(k, r);
    }
    acc
}

fn grid_exact(gamma: u32, p: &BigRational, rho: f64) -> BigRational {
    let pw = Powers::new(&exact(rho), gamma);
    partial(&pw, gamma, 0, gamma, p)
}

pub fn grid(gamma: u32, p: f64, rho: f64) -> f64 {
    value(&grid_exact(gamma, &exact(p), rho))
}

/// Degree mixture `sum_{k >= k_lo} B(n - 1, w)(k) sum_{r <= limit(k)} ...`.
fn mixture(n: u32, w: f64, k_lo: u32, p: f64, rho: f64, limit: impl Fn(u32) -> u32) -> BigRational {
    let p = exact(p);
    let pw = Powers::new(&exact(rho), n - 1);
    let deg = Powers::new(&exact(w), n - 1);
    let mut acc = BigRational::zero();
    for k in k_lo..n {
        acc += deg.pmf(n - 1, k) * partial(&pw, k, 0, limit(k), &p);
    }
    acc
}

pub fn rg_full(n: u32, p_e: f64, p: f64, rho: f64) -> f64 {
    value(&mixture(n, p_e, 0, p, rho, |k| k))
}

pub fn rg_nu(n: u32, p_e: f64, p: f64, rho: f64) -> f64 {
    grid(nu_random(n, p_e), p, rho)
}

pub fn grid_pe(n: u32, p_e: f64, p: f64, rho: f64) -> f64 {
    let nu = nu_random(n, p_e);
    let p = exact(p);
    let pw = Powers::new(&(exact(rho) * exact(p_e)), n - 1);
    let mut acc = BigRational::zero();
    for r in 0..n {
        acc += xi(nu, r, &p) * pw.pmf(n - 1, r);
    }
    value(&acc)
}

/// Small-world mixture over `gamma ..= n - 1`; `full` selects the inner
/// limit `k` instead of `k - gamma`.
pub fn sw_full(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64, full: bool) -> f64 {
    value(&mixture(n, p_w, gamma, p, rho, |k| {
        if full {
            k
        } else {
            k - gamma
        }
    }))
}

/// Shortcut part of the mixture, degrees `gamma + 1 ..= n - 1`.
pub fn rg_gamma(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64, full: bool) -> f64 {
    value(&mixture(n, p_w, gamma + 1, p, rho, |k| {
        if full {
            k
        } else {
            k - gamma
        }
    }))
}

/// The two components of the composite map, lattice then shortcut.
fn composite_parts(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> (BigRational, BigRational) {
    let pr = exact(p);
    let keep = num_traits::pow(BigRational::one() - exact(p_w), (n - gamma) as usize);
    let lattice = grid_exact(gamma, &pr, rho) * keep;
    let nu = nu_smallworld(n, gamma, p_w);
    let shortcut = if nu > gamma {
        partial(&Powers::new(&exact(rho), nu), nu, gamma + 1, nu, &pr)
    } else {
        BigRational::zero()
    };
    (lattice, shortcut)
}

pub fn sw_composite(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> f64 {
    let (a, b) = composite_parts(n, gamma, p_w, p, rho);
    let nr = BigRational::from_integer(n.into());
    let g = BigRational::from_integer(gamma.into());
    value(&((&g / &nr) * a + ((&nr - &g) / &nr) * b))
}

/// `gamma / n^2 a (1 - a) + (n - gamma) / n^2 b (1 - b)`.
pub fn sw_composite_sigma2(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> f64 {
    let (a, b) = composite_parts(n, gamma, p_w, p, rho);
    let one = BigRational::one();
    let n2 = BigRational::from_integer((n * n).into());
    let g = BigRational::from_integer(gamma.into());
    let rest = BigRational::from_integer((n - gamma).into());
    value(&(g / &n2 * &a * (&one - &a) + rest / &n2 * &b * (&one - &b)))
}

/// `B(n, m)` pmf at the exact value of `m`.
pub fn binomial_row(n: u32, m: f64) -> Vec<f64> {
    let pw = Powers::new(&exact(m), n);
    (0..=n).map(|r| value(&pw.pmf(n, r))).collect()
}

pub fn binomial_pmf(k: u32, r: u32, q: f64) -> f64 {
    value(&Powers::new(&exact(q), k).pmf(k, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing() {
        assert_eq!(decimal(0.3), BigRational::new(3.into(), 10.into()));
        assert_eq!(decimal(2.0), BigRational::from_integer(2.into()));
        assert_eq!(nu_random(100, 0.3), 29);
        assert_eq!(nu_random(100, 0.29), 28);
        assert_eq!(nu_random(11, 0.3), 3);
        assert_eq!(nu_smallworld(100, 4, 0.4), 38);
    }

    #[test]
    fn small_closed_forms() {
        assert_eq!(binomial_pmf(5, 2, 0.5), 0.3125);
        assert_eq!(grid(5, 0.3, 0.5), 0.5);
        // gamma = 1: p (1 - rho) + (1 - p) rho
        assert_eq!(grid(1, 0.25, 0.5), 0.5);
        assert_eq!(grid(1, 0.25, 0.75), 0.625);
        assert_eq!(rg_full(2, 0.5, 0.25, 1.0), 0.5 * 0.25 + 0.5 * 0.75);
    }
}
