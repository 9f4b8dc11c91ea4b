//! Continuous rational transfer functions and their bilinear discretization.

use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Coefficients smaller than this (relative to the largest) are trimmed.
const TRIM_TOL: f64 = 1e-300;

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(|c| c.abs() <= TRIM_TOL) {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(0.0);
        }
        self
    }

    pub fn degree(&self) -> usize {
        let mut d = self.0.len().saturating_sub(1);
        while d > 0 && self.0[d].abs() <= TRIM_TOL {
            d -= 1;
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    /// Complex roots via the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.0[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.0[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let c = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&0.0) + rhs.0.get(i).unwrap_or(&0.0))
            .collect();
        Poly(c).trimmed()
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c).trimmed()
    }
}

/// `num(s) / den(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub num: Poly,
    pub den: Poly,
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Self {
        Self {
            num: Poly(num).trimmed(),
            den: Poly(den).trimmed(),
        }
    }

    pub fn constant(k: f64) -> Self {
        Self::new(vec![k], vec![1.0])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `1 / (1 + τ s)`.
    pub fn first_order_lag(tau: f64) -> Self {
        Self::new(vec![1.0], vec![1.0, tau])
    }

    /// `τ s / (1 + τ s)`.
    pub fn first_order_high_pass(tau: f64) -> Self {
        Self::new(vec![0.0, tau], vec![1.0, tau])
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn eval_jw(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn dc_gain(&self) -> f64 {
        self.eval(Complex64::new(0.0, 0.0)).re
    }

    /// `deg(den) − deg(num)`; zero transfer functions count as proper.
    pub fn relative_degree(&self) -> i64 {
        if self.is_zero() {
            return 0;
        }
        self.den.degree() as i64 - self.num.degree() as i64
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    /// All poles strictly in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    /// Bilinear (Tustin) map `s = (2/dt)(z − 1)/(z + 1)`.
    pub fn discretize(&self, dt: f64) -> DiscreteFilter {
        let n = self.num.degree().max(self.den.degree());
        let k = 2.0 / dt;
        let map = |p: &Poly| -> Vec<f64> {
            // Σ c_i k^i (z − 1)^i (z + 1)^(n − i), ascending powers of z.
            let zm1 = Poly(vec![-1.0, 1.0]);
            let zp1 = Poly(vec![1.0, 1.0]);
            let mut acc = Poly(vec![0.0; n + 1]);
            for (i, &c) in p.0.iter().enumerate().take(n + 1) {
                if c == 0.0 {
                    continue;
                }
                let mut term = Poly::constant(c * k.powi(i as i32));
                for _ in 0..i {
                    term = &term * &zm1;
                }
                for _ in 0..(n - i) {
                    term = &term * &zp1;
                }
                acc = &acc + &term;
            }
            let mut v = acc.0;
            v.resize(n + 1, 0.0);
            // Descending powers of z are ascending powers of z^-1.
            v.reverse();
            v
        };
        let b = map(&self.num);
        let a = map(&self.den);
        DiscreteFilter::new(b, a)
    }
}

impl Mul for &TransferFunction {
    type Output = TransferFunction;
    fn mul(self, rhs: &TransferFunction) -> TransferFunction {
        TransferFunction {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
    }
}

impl Add for &TransferFunction {
    type Output = TransferFunction;
    fn add(self, rhs: &TransferFunction) -> TransferFunction {
        if self.den == rhs.den {
            return TransferFunction {
                num: &self.num + &rhs.num,
                den: self.den.clone(),
            };
        }
        TransferFunction {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} / {:?}", self.num.0, self.den.0)
    }
}

/// Direct-form II transposed IIR filter in powers of `z^-1`, `a[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    b: Vec<f64>,
    a: Vec<f64>,
    state: Vec<f64>,
}

impl DiscreteFilter {
    pub fn new(mut b: Vec<f64>, mut a: Vec<f64>) -> Self {
        let n = b.len().max(a.len());
        b.resize(n, 0.0);
        a.resize(n, 0.0);
        let a0 = a[0];
        for v in b.iter_mut().chain(a.iter_mut()) {
            *v /= a0;
        }
        Self {
            b,
            a,
            state: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.state.len()
    }

    pub fn numerator(&self) -> &[f64] {
        &self.b
    }

    pub fn denominator(&self) -> &[f64] {
        &self.a
    }

    /// Output for input `x` without advancing the state.
    pub fn peek(&self, x: f64) -> f64 {
        self.b[0] * x + self.state.first().copied().unwrap_or(0.0)
    }

    /// Advances the state given input `x` and the emitted output `y`.
    pub fn commit(&mut self, x: f64, y: f64) {
        let n = self.state.len();
        for i in 0..n {
            let next = if i + 1 < n { self.state[i + 1] } else { 0.0 };
            self.state[i] = self.b[i + 1] * x - self.a[i + 1] * y + next;
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.peek(x);
        self.commit(x, y);
        y
    }

    pub fn dc_gain(&self) -> f64 {
        let nb: f64 = self.b.iter().sum();
        let na: f64 = self.a.iter().sum();
        nb / na
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = 0.0);
    }

    /// Places the state at the equilibrium for a constant input `x`.
    pub fn reset_steady(&mut self, x: f64) {
        let y = self.dc_gain() * x;
        let n = self.state.len();
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc += self.b[i + 1] * x - self.a[i + 1] * y;
            self.state[i] = acc;
        }
    }

    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let p = |c: &[f64]| {
            c.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &v| acc * zi + v)
        };
        p(&self.b) / p(&self.a)
    }

    /// Frequency response at `omega` rad/s for sample time `dt`.
    pub fn eval_freq(&self, omega: f64, dt: f64) -> Complex64 {
        self.eval_z(Complex64::from_polar(1.0, omega * dt))
    }

    pub fn poles(&self) -> Vec<Complex64> {
        // z^n + a1 z^(n-1) + ... + an, ascending: [an, ..., a1, 1].
        let asc: Vec<f64> = self.a.iter().rev().copied().collect();
        Poly(asc).roots()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}
