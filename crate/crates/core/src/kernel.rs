// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Angular average of the connection probability.
//!
//! For a pair with scale `a` (numerator of the distance ratio) whose angular
//! separation is uniform on `[0, π]`, the expected connection probability is
//!
//! ```text
//! g(a) = (1/X) ∫_0^X dt / (1 + t^β),   X = πR / a.
//! ```
//!
//! `g` depends on `a` only through `X`. It is evaluated exactly with
//! convergent series away from `X = 1` and adaptive Gauss–Kronrod quadrature
//! near it. [`AngularKernel`] caches `g` on a log-spaced grid for the
//! `O(N²)` loops of the calibration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `∫_0^∞ dt / (1 + t^β) = π / (β sin(π/β))`.
pub fn full_integral(beta: f64) -> f64 {
    PI / (beta * (PI / beta).sin())
}

/// `a / (R β sin(π/β))`: the small-`a` asymptote of the kernel.
pub fn linear_approximation(a: f64, beta: f64, radius: f64) -> f64 {
    a / (radius * beta * (PI / beta).sin())
}

const HEAD_LIMIT: f64 = 0.5;
const TAIL_LIMIT: f64 = 2.0;
const QUAD_ABS_TOL: f64 = 1e-10;

/// `∫_0^x dt / (1 + t^β)` for `x ≥ 0`, `β > 1`.
pub fn connection_integral(x: f64, beta: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= HEAD_LIMIT {
        head_series(x, beta)
    } else if x >= TAIL_LIMIT {
        full_integral(beta) - tail_series(x, beta)
    } else {
        head_series(HEAD_LIMIT, beta)
            + adaptive_gauss_kronrod(|t| 1.0 / (1.0 + t.powf(beta)), HEAD_LIMIT, x, QUAD_ABS_TOL)
    }
}

/// `Σ_k (-1)^k x^{kβ+1} / (kβ+1)`, convergent for `x < 1`.
fn head_series(x: f64, beta: f64) -> f64 {
    let ratio = x.powf(beta);
    let mut power = x;
    let mut sum = 0.0;
    for k in 0..400 {
        let term = power / (k as f64 * beta + 1.0);
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-17 * sum.abs() {
            break;
        }
        power *= ratio;
    }
    sum
}

/// `∫_x^∞ dt / (1 + t^β) = Σ_k (-1)^k x^{1-β(k+1)} / (β(k+1) - 1)`, for `x > 1`.
fn tail_series(x: f64, beta: f64) -> f64 {
    let ratio = x.powf(-beta);
    let mut power = x * ratio;
    let mut sum = 0.0;
    for k in 0..400 {
        let term = power / (beta * (k + 1) as f64 - 1.0);
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-17 * sum.abs() {
            break;
        }
        power *= ratio;
    }
    sum
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
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

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = half * XGK[k];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection with a 15-point Gauss–Kronrod rule per panel.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    let mut total = 0.0;
    let mut stack = vec![(a, b, abs_tol, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if err <= tol || depth >= 50 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * tol, depth + 1));
            stack.push((lo, mid, 0.5 * tol, depth + 1));
        }
    }
    total
}

fn check_params(beta: f64, radius: f64) -> Result<()> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "beta = {beta}: the angular average only converges for beta > 1"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius = {radius} must be positive")));
    }
    Ok(())
}

/// `g(x_ratio)` where `x_ratio = πR/a`, evaluated exactly.
fn kernel_of_ratio(x: f64, beta: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if beta == 2.0 {
        return atan_over_x(x);
    }
    if x < 1e-8 {
        // g = 1 - x^β/(β+1) + ...
        return 1.0 - x.powf(beta) / (beta + 1.0);
    }
    connection_integral(x, beta) / x
}

#[inline]
fn atan_over_x(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        x.atan() / x
    }
}

/// Expected connection probability `g(a)` for angular scale `a ≥ 0`.
///
/// Closed form `(a/(πR)) atan(πR/a)` at `β = 2`; series and adaptive
/// quadrature otherwise.
pub fn angular_connection_kernel(a: f64, beta: f64, radius: f64) -> Result<f64> {
    check_params(beta, radius)?;
    if !(a >= 0.0) {
        return Err(Error::domain(format!("kernel argument a = {a} must be non-negative")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if a == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(kernel_of_ratio(PI * radius / a, beta))
}

/// Number of grid points of the cached kernel.
pub const GRID_POINTS: usize = 4096;
const LN_X_MIN: f64 = -9.210_340_371_976_184; // ln 1e-4
const LN_X_MAX: f64 = 23.025_850_929_940_457; // ln 1e10

/// Cached kernel for fixed `(β, R)`.
///
/// `g` is tabulated against `u = ln(πR/a)` together with its exact slope
/// `dg/du = 1/(1 + X^β) - g`, and interpolated with monotone cubic Hermite
/// segments. Outside the grid the exact series are used.
#[derive(Debug, Clone)]
pub struct AngularKernel {
    beta: f64,
    radius: f64,
    ln_pi_r: f64,
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct Table {
    step: f64,
    inv_step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl AngularKernel {
    pub fn new(beta: f64, radius: f64) -> Result<Self> {
        check_params(beta, radius)?;
        let table = (beta != 2.0).then(|| Table::build(beta));
        Ok(Self {
            beta,
            radius,
            ln_pi_r: (PI * radius).ln(),
            table,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `g(a)`; `a ≤ 0` gives 0.
    #[inline]
    pub fn eval(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        match &self.table {
            None => atan_over_x(PI * self.radius / a),
            Some(t) => {
                let u = self.ln_pi_r - a.ln();
                if u > LN_X_MIN && u < LN_X_MAX {
                    t.interpolate(u)
                } else {
                    kernel_of_ratio(u.exp(), self.beta)
                }
            }
        }
    }

    /// Exact evaluation, bypassing the cache.
    pub fn eval_exact(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        kernel_of_ratio(PI * self.radius / a, self.beta)
    }
}

impl Table {
    fn build(beta: f64) -> Self {
        let step = (LN_X_MAX - LN_X_MIN) / (GRID_POINTS - 1) as f64;
        let mut values = Vec::with_capacity(GRID_POINTS);
        let mut slopes = Vec::with_capacity(GRID_POINTS);
        for k in 0..GRID_POINTS {
            let u = LN_X_MIN + step * k as f64;
            let x = u.exp();
            let g = kernel_of_ratio(x, beta);
            values.push(g);
            slopes.push(1.0 / (1.0 + x.powf(beta)) - g);
        }
        // Fritsch–Carlson limiter: g is decreasing in u, keep every segment so.
        for k in 0..GRID_POINTS - 1 {
            let secant = (values[k + 1] - values[k]) / step;
            if secant == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            if slopes[k] / secant < 0.0 {
                slopes[k] = 0.0;
            }
            if slopes[k + 1] / secant < 0.0 {
                slopes[k + 1] = 0.0;
            }
            let alpha = slopes[k] / secant;
            let beta_k = slopes[k + 1] / secant;
            let norm = alpha * alpha + beta_k * beta_k;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                slopes[k] = tau * alpha * secant;
                slopes[k + 1] = tau * beta_k * secant;
            }
        }
        Self {
            step,
            inv_step: 1.0 / step,
            values,
            slopes,
        }
    }

    #[inline]
    fn interpolate(&self, u: f64) -> f64 {
        let pos = (u - LN_X_MIN) * self.inv_step;
        let k = (pos as usize).min(GRID_POINTS - 2);
        let t = pos - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.step, self.slopes[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 + (3.0 * t2 - 2.0 * t3) * (y1 - y0) + (t3 - 2.0 * t2 + t) * m0 + (t3 - t2) * m1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite Simpson rule on a fine grid; independent of the series.
    fn simpson(beta: f64, x: f64, panels: usize) -> f64 {
        let h = x / panels as f64;
        let f = |t: f64| 1.0 / (1.0 + t.powf(beta));
        let mut s = f(0.0) + f(x);
        for k in 1..panels {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn integral_matches_simpson() {
        for &beta in &[1.3, 2.0, 2.5, 3.0, 5.0, 10.0] {
            for &x in &[0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0, 8.0] {
                // Simpson converges slowly for beta < 2 (t^beta is not smooth at 0).
                let want = simpson(beta, x, 20_000);
                let got = connection_integral(x, beta);
                let tol = if beta < 2.0 { 1e-8 } else { 1e-10 };
                assert_relative_eq!(got, want, max_relative = tol);
            }
        }
    }

    #[test]
    fn beta_two_closed_form() {
        let r = 100.0;
        let g = angular_connection_kernel(PI * r, 2.0, r).unwrap();
        assert_relative_eq!(g, PI / 4.0, max_relative = 1e-15);
        // The generic path at beta = 2 agrees with atan.
        for &x in &[0.3, 1.0, 1.7, 4.0, 50.0] {
            assert_relative_eq!(connection_integral(x, 2.0) / x, x.atan() / x, max_relative = 1e-12);
        }
    }

    #[test]
    fn limits() {
        assert_eq!(angular_connection_kernel(0.0, 3.0, 1.0).unwrap(), 0.0);
        let big = angular_connection_kernel(1e12, 3.0, 1.0).unwrap();
        assert!((1.0 - big) < 1e-9);
        assert_eq!(angular_connection_kernel(f64::INFINITY, 3.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn small_argument_asymptote() {
        let r = 50.0;
        for &beta in &[2.0, 3.0, 5.0] {
            let a = PI * r / 100.0;
            let g = angular_connection_kernel(a, beta, r).unwrap();
            let approx = linear_approximation(a, beta, r);
            assert!((g - approx).abs() / approx < 0.01, "beta {beta}: {g} vs {approx}");
        }
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(angular_connection_kernel(1.0, 1.0, 1.0).is_err());
        assert!(angular_connection_kernel(1.0, 0.5, 1.0).is_err());
        assert!(AngularKernel::new(1.0, 1.0).is_err());
        assert!(angular_connection_kernel(-1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn cached_matches_exact() {
        for &beta in &[1.2, 2.5, 3.0, 5.0, 10.0] {
            let k = AngularKernel::new(beta, 300.0).unwrap();
            for e in -60..=60 {
                let a = 10f64.powf(e as f64 / 6.0);
                let exact = k.eval_exact(a);
                let cached = k.eval(a);
                assert!(
                    (cached - exact).abs() <= 1e-9 * exact.max(1e-300) + 1e-14,
                    "beta {beta}, a {a}: {cached} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn cached_is_monotone() {
        let k = AngularKernel::new(3.5, 10.0).unwrap();
        let mut prev = 0.0;
        for e in 0..20_000 {
            let a = 10f64.powf(-6.0 + e as f64 * 12.0 / 20_000.0);
            let g = k.eval(a);
            assert!(g >= prev - 2.0 * f64::EPSILON, "not monotone at a = {a}: {g} < {prev}");
            assert!(g <= 1.0);
            prev = g;
        }
    }
}
