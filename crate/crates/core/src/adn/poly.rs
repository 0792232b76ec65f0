//! Complex polynomials in one variable and matrices of them.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Polynomial in `sigma` with ascending complex coefficients. The zero
/// polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PolyC {
    coeffs: Vec<Complex64>,
}

impl PolyC {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `a + b sigma`.
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        Self::new(vec![a, b])
    }

    /// Monic polynomial `prod (sigma - z_k)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &z| &acc * &Self::linear(-z, ONE))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `sigma^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Drops leading coefficients below `rel_tol` times the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cut) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let d = divisor
            .degree()
            .ok_or_else(|| Error::InvalidArgument("division by the zero polynomial".into()))?;
        let lead = divisor.coeffs[d];
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = rem[k + d] / lead;
            quot[k] = c;
            for (i, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= c * b;
            }
            rem[k + d] = ZERO;
        }
        rem.truncate(d);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Roots by the eigenvalues of the companion matrix, each refined by a
    /// few Newton steps. Leading coefficients below `1e-12` of the largest
    /// are treated as zero.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let p = self.trimmed(1e-12);
        let Some(n) = p.degree() else { return Ok(vec![]) };
        if n == 0 {
            return Ok(vec![]);
        }
        // Francis shifts can stall on spectra symmetric about the origin;
        // shifting the variable by an offset of the root scale breaks that.
        let scale = (p.coeffs[0].norm() / p.coeffs[n].norm()).powf(1.0 / n as f64).max(1e-3);
        let raw = [0.0, 0.1234567, -0.2718282, 0.5772157]
            .iter()
            .find_map(|&a| {
                let s = Complex64::new(a * scale, 0.0);
                let q = if a == 0.0 { p.clone() } else { p.compose_shift(s) };
                companion_eigenvalues(&q, n).map(|e| e.into_iter().map(|z| z + s).collect::<Vec<_>>())
            })
            .ok_or_else(|| Error::InvalidArgument("companion eigenvalues did not converge".into()))?;
        let dp = p.derivative();
        Ok(raw.into_iter().map(|z| p.newton(&dp, z)).collect())
    }

    /// Roots grouped by [`cluster_roots`], each cluster of multiplicity `k`
    /// polished by Newton steps on the `(k-1)`-th derivative, where it is a
    /// simple root.
    pub fn clustered_roots(&self, tol: f64) -> Result<Vec<Root>> {
        let p = self.trimmed(1e-12);
        let mut out = cluster_roots(&p.roots()?, tol);
        for root in &mut out {
            let mut q = p.clone();
            for _ in 1..root.multiplicity {
                q = q.derivative();
            }
            root.value = q.newton(&q.derivative(), root.value);
        }
        Ok(out)
    }

    /// `p(sigma + s)`.
    fn compose_shift(&self, s: Complex64) -> Self {
        let shift = Self::linear(s, ONE);
        self.coeffs.iter().rev().fold(Self::zero(), |acc, &c| &(&acc * &shift) + &Self::constant(c))
    }

    fn newton(&self, dp: &Self, mut z: Complex64) -> Complex64 {
        for _ in 0..3 {
            let d = dp.eval(z);
            if d.norm() == 0.0 {
                break;
            }
            let step = self.eval(z) / d;
            if !step.is_finite() || step.norm() > 1e-6 * (1.0 + z.norm()) {
                break;
            }
            z -= step;
        }
        z
    }
}

/// QR sweeps allowed per eigenvalue before retrying with a shift.
const QR_ITERATIONS_PER_ROOT: usize = 50;

fn companion_eigenvalues(p: &PolyC, n: usize) -> Option<Vec<Complex64>> {
    let lead = p.coeffs[n];
    if p.coeffs.iter().all(|c| c.im == 0.0) {
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -p.coeffs[i].re / lead.re;
        }
        let schur = Schur::try_new(companion, f64::EPSILON, QR_ITERATIONS_PER_ROOT * n)?;
        return Some(schur.complex_eigenvalues().iter().copied().collect());
    }
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -p.coeffs[i] / lead;
    }
    let (_, t) = Schur::try_new(companion, f64::EPSILON, QR_ITERATIONS_PER_ROOT * n)?.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}

impl Add for &PolyC {
    type Output = PolyC;
    fn add(self, rhs: &PolyC) -> PolyC {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyC::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &PolyC {
    type Output = PolyC;
    fn sub(self, rhs: &PolyC) -> PolyC {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyC::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &PolyC {
    type Output = PolyC;
    fn mul(self, rhs: &PolyC) -> PolyC {
        if self.is_zero() || rhs.is_zero() {
            return PolyC::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyC::new(out)
    }
}

/// A root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Groups roots closer than `tol * max(1, |z|)`. A cluster is represented by
/// its mean, which is far more accurate than the individual members when a
/// multiple root splits under roundoff.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<Root> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &z in roots {
        match out
            .iter_mut()
            .find(|(c, m)| (*c / *m as f64 - z).norm() <= tol * (1.0f64).max(z.norm()))
        {
            Some((sum, m)) => {
                *sum += z;
                *m += 1;
            }
            None => out.push((z, 1)),
        }
    }
    out.into_iter()
        .map(|(sum, m)| Root { value: sum / m as f64, multiplicity: m })
        .collect()
}

/// Rectangular matrix of polynomials, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatPolyC {
    rows: usize,
    cols: usize,
    entries: Vec<PolyC>,
}

impl MatPolyC {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![PolyC::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, PolyC::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<PolyC>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged polynomial matrix".into()));
        }
        Ok(Self { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyC {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: PolyC) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidArgument("polynomial matrix shapes do not match".into()));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = PolyC::zero();
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * rhs.get(k, j));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, p: &PolyC) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e * p).collect() }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.rows - 1, cols: self.cols - 1, entries }
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        Ok(())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<PolyC> {
        self.require_square()?;
        Ok(self.det_unchecked())
    }

    fn det_unchecked(&self) -> PolyC {
        match self.rows {
            0 => PolyC::one(),
            1 => self.entries[0].clone(),
            n => {
                let mut acc = PolyC::zero();
                for j in 0..n {
                    if self.get(0, j).is_zero() {
                        continue;
                    }
                    let term = self.get(0, j) * &self.minor(0, j).det_unchecked();
                    acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Transposed cofactor matrix.
    pub fn adjugate(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        if n == 1 {
            out.set(0, 0, PolyC::one());
            return Ok(out);
        }
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(i, j).det_unchecked();
                out.set(j, i, if (i + j) % 2 == 0 { c } else { c.scale(-ONE) });
            }
        }
        Ok(out)
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_coeff(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, p| m.max(p.max_coeff()))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::InvalidArgument("polynomial matrix shapes do not match".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        })
    }
}
