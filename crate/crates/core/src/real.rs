//! Scalar abstraction shared by plain floats and forward-mode dual numbers.
//!
//! Every geometric pipeline in the crate is generic over [`Real`], so the
//! same code that evaluates a connection at `f64` also evaluates it at
//! `Dual<f64>` (first derivatives), `Dual<Dual<f64>>` (second derivatives)
//! and so on. Nesting levels are chosen by the caller.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Opaque user callback mapping a coordinate vector to a component vector.
pub type CallbackFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Scalar type usable by every evaluation pipeline.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lifts a constant.
    fn cst(v: f64) -> Self;
    /// Primal value, discarding all derivative parts.
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    /// Integer power; valid for negative bases.
    fn powi(self, n: i32) -> Self;
    /// Evaluates an opaque callback at this scalar type.
    ///
    /// Derivative parts are produced by central finite differences with
    /// step `h`, applied recursively through nested dual levels.
    fn apply_callback(f: &CallbackFn, x: &[Self], h: f64) -> Vec<Self>;
    /// True when the value and every derivative part are exactly zero.
    fn is_exact_zero(self) -> bool;

    /// Real power `self^e` through `exp(e ln self)`.
    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn apply_callback(f: &CallbackFn, x: &[Self], _h: f64) -> Vec<Self> {
        f(x)
    }
    fn is_exact_zero(self) -> bool {
        self == 0.0
    }
}

/// Dual number `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }

    /// Independent variable with unit seed.
    pub fn var(re: T) -> Self {
        Self { re, du: T::one() }
    }

    pub fn constant(re: T) -> Self {
        Self { re, du: T::zero() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.du * o.re + self.re * o.du)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.du * self.re.cos())
    }
    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.du * self.re.sin()))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.du * e)
    }
    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.du / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / (T::cst(2.0) * s))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let p = self.re.powi(n - 1);
        Self::new(p * self.re, T::cst(n as f64) * p * self.du)
    }
    fn is_exact_zero(self) -> bool {
        self.re.is_exact_zero() && self.du.is_exact_zero()
    }
    fn apply_callback(f: &CallbackFn, x: &[Self], h: f64) -> Vec<Self> {
        let re: Vec<T> = x.iter().map(|d| d.re).collect();
        let base = T::apply_callback(f, &re, h);
        if x.iter().all(|d| d.du.is_exact_zero()) {
            return base.into_iter().map(Self::constant).collect();
        }
        let step = T::cst(h);
        let plus: Vec<T> = x.iter().map(|d| d.re + step * d.du).collect();
        let minus: Vec<T> = x.iter().map(|d| d.re - step * d.du).collect();
        let fp = T::apply_callback(f, &plus, h);
        let fm = T::apply_callback(f, &minus, h);
        let inv = T::cst(0.5 / h);
        base.into_iter()
            .zip(fp.into_iter().zip(fm))
            .map(|(b, (p, m))| Self::new(b, (p - m) * inv))
            .collect()
    }
}

/// Seeds `x` as a dual vector with unit derivative along coordinate `dir`.
pub fn seed<T: Real>(x: &[T], dir: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i == dir { Dual::var(v) } else { Dual::constant(v) })
        .collect()
}

/// Lifts a vector to the next dual level with zero derivative parts.
pub fn lift<T: Real>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&v| Dual::constant(v)).collect()
}

/// Primal values of a vector.
pub fn values<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn dual_matches_finite_difference_on_composite() {
        let f = |x: f64| (x.sin() * x.exp() / (1.0 + x * x)).sqrt() + x.powi(3).ln();
        let x = 0.8;
        let d = {
            let v = Dual::var(x);
            (v.sin() * v.exp() / (Dual::cst(1.0) + v * v)).sqrt() + v.powi(3).ln()
        };
        assert!((d.re - f(x)).abs() < 1e-15);
        assert!((d.du - fd(f, x)).abs() < 1e-8);
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        let x = 0.4;
        let v: Dual<Dual<f64>> = Dual::new(Dual::var(x), Dual::cst(1.0));
        let y = v.sin() * v.cos();
        let exact = -2.0 * (2.0 * x).sin();
        assert!((y.du.du - exact).abs() < 1e-14);
    }

    #[test]
    fn powi_handles_negative_base_and_exponent() {
        let v = Dual::var(-1.5);
        let y = v.powi(-3);
        assert!((y.re - (-1.5f64).powi(-3)).abs() < 1e-15);
        assert!((y.du - (-3.0) * (-1.5f64).powi(-4)).abs() < 1e-13);
    }

    #[test]
    fn callback_derivative_through_two_levels() {
        let cb: Box<CallbackFn> = Box::new(|x: &[f64]| vec![(x[0] * x[1]).exp()]);
        let x = [0.3, 0.7];
        let d = seed(&x, 0);
        let out = Dual::apply_callback(cb.as_ref(), &d, 1e-5);
        assert!((out[0].du - 0.7 * (0.21f64).exp()).abs() < 1e-8);
        let dd = seed(&seed(&x, 1), 0);
        let out2 = <Dual<Dual<f64>>>::apply_callback(cb.as_ref(), &dd, 1e-4);
        let exact = (1.0 + 0.21) * (0.21f64).exp();
        assert!((out2[0].du.du - exact).abs() < 1e-5);
    }
}
