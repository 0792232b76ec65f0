//! Ellipticity of boundary value systems in the sense of Agmon, Douglis and
//! Nirenberg, checked on finite samples of boundary points and covectors.
//!
//! A symbol is evaluated along a pencil `xi + sigma xi'` as a polynomial
//! matrix in `sigma`, with `D^beta` replaced by `(xi + sigma xi')^beta`.

mod poly;
mod problem;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub use poly::{cluster_roots, MatPolyC, PolyC, Root};
pub use problem::{
    diagonal_symbol_problem, dirichlet_problem, duplicated_row_problem, navier_laplacian_problem, AdnProblem,
    BoundaryPoint, Coefficient, Term,
};

/// Roots closer than this (relative) are one root with multiplicity.
pub const CLUSTER_TOLERANCE: f64 = 1e-7;
/// Roots with `|Im| <= REAL_AXIS_TOLERANCE` count as real.
pub const REAL_AXIS_TOLERANCE: f64 = 1e-9;
/// `|det L^p(x, xi)|` below this on the unit circle counts as vanishing.
pub const DET_TOLERANCE: f64 = 1e-10;
/// Smallest accepted `sigma_min / sigma_max` of the remainder matrix.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Principal parts of `L` and `B` after the weight bookkeeping.
#[derive(Debug, Clone)]
pub struct PrincipalParts {
    size: usize,
    m: usize,
    l_terms: Vec<Term>,
    b_terms: Vec<Term>,
}

fn weight_error(operator: &'static str, term: &Term, reason: String) -> Error {
    Error::Weight { operator, row: term.row + 1, col: term.col + 1, multi_index: term.multi_index.clone(), reason }
}

/// Checks `deg L_ij <= s_i + t_j`, `L_ij = 0` when `s_i + t_j < 0`, the same
/// for `B` with `r_l`, and `L = m` (as many boundary rows as half the
/// order); keeps the terms of exact weighted degree.
pub fn principal_parts(problem: &AdnProblem) -> Result<PrincipalParts> {
    problem.validate()?;
    let mut l_terms = Vec::new();
    for term in &problem.l_terms {
        let w = problem.s[term.row] + problem.t[term.col];
        if w < 0 {
            return Err(weight_error("L", term, format!("s_i + t_j = {w} < 0 requires a zero entry")));
        }
        if term.order() > w {
            return Err(weight_error("L", term, format!("order {} exceeds s_i + t_j = {w}", term.order())));
        }
        if term.order() == w {
            l_terms.push(term.clone());
        }
    }
    let total: i64 = problem.s.iter().chain(&problem.t).sum();
    if total < 0 || total % 2 != 0 {
        return Err(Error::InvalidArgument(format!("sum of s and t is {total}, not an even order 2m")));
    }
    let m = (total / 2) as usize;
    if problem.r.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} boundary rows for an operator of order 2m = {}",
            problem.r.len(),
            2 * m
        )));
    }
    let mut b_terms = Vec::new();
    for term in &problem.b_terms {
        let w = problem.r[term.row] + problem.t[term.col];
        if w < 0 {
            return Err(weight_error("B", term, format!("r_l + t_j = {w} < 0 requires a zero entry")));
        }
        if term.order() > w {
            return Err(weight_error("B", term, format!("order {} exceeds r_l + t_j = {w}", term.order())));
        }
        if term.order() == w {
            b_terms.push(term.clone());
        }
    }
    Ok(PrincipalParts { size: problem.size, m, l_terms, b_terms })
}

fn pencil_monomial(multi_index: &[u32], xi: &[f64], xi_prime: &[f64]) -> PolyC {
    multi_index.iter().enumerate().fold(PolyC::one(), |acc, (k, &a)| {
        let factor = PolyC::linear(Complex64::new(xi[k], 0.0), Complex64::new(xi_prime[k], 0.0));
        &acc * &factor.pow(a)
    })
}

fn assemble(terms: &[Term], rows: usize, cols: usize, x: &BoundaryPoint, xi: &[f64], xi_prime: &[f64]) -> Result<MatPolyC> {
    let mut out = MatPolyC::zeros(rows, cols);
    for term in terms {
        let c = term.coefficient.eval(x)?;
        let p = pencil_monomial(&term.multi_index, xi, xi_prime).scale(Complex64::new(c, 0.0));
        let sum = out.get(term.row, term.col) + &p;
        out.set(term.row, term.col, sum);
    }
    Ok(out)
}

impl PrincipalParts {
    /// Half the order of `det L^p`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `L^p(x, xi + sigma xi')`.
    pub fn l_symbol(&self, x: &BoundaryPoint, xi: &[f64], xi_prime: &[f64]) -> Result<MatPolyC> {
        assemble(&self.l_terms, self.size, self.size, x, xi, xi_prime)
    }

    /// `B^p(x, xi + sigma xi')`.
    pub fn b_symbol(&self, x: &BoundaryPoint, xi: &[f64], xi_prime: &[f64]) -> Result<MatPolyC> {
        assemble(&self.b_terms, self.m, self.size, x, xi, xi_prime)
    }

    /// `det L^p(x, xi)` at a real covector.
    pub fn det_at(&self, x: &BoundaryPoint, xi: &[f64]) -> Result<f64> {
        let zero = vec![0.0; xi.len()];
        Ok(self.l_symbol(x, xi, &zero)?.det()?.coeff(0).re)
    }

    /// Roots of `sigma -> det L^p(x, xi + sigma xi')` in the upper half plane,
    /// clustered with multiplicity.
    pub fn roots_positive_imag(&self, x: &BoundaryPoint, xi: &[f64], xi_prime: &[f64]) -> Result<Vec<Root>> {
        let cross = xi[0] * xi_prime[1] - xi[1] * xi_prime[0];
        if cross.abs() <= 1e-12 * norm(xi) * norm(xi_prime) {
            return Err(Error::InvalidArgument("xi and xi' must be linearly independent".into()));
        }
        let det = self.l_symbol(x, xi, xi_prime)?.det()?;
        positive_imag_roots(&det)
    }

    /// `B^p(x, xi + sigma n) L'(x, xi + sigma n)` with `L'` the adjugate.
    pub fn boundary_product(&self, x: &BoundaryPoint, xi: &[f64]) -> Result<MatPolyC> {
        let l = self.l_symbol(x, xi, &x.n)?;
        self.b_symbol(x, xi, &x.n)?.mul(&l.adjugate()?)
    }

    /// Rows of `B^p L'` reduced modulo `M^+`, tested for linear independence.
    pub fn complementing_check(&self, x: &BoundaryPoint, xi: &[f64]) -> Result<ComplementingVerdict> {
        let dot = xi[0] * x.n[0] + xi[1] * x.n[1];
        if norm(xi) == 0.0 || dot.abs() > 1e-12 * norm(xi) {
            return Err(Error::InvalidArgument("xi must be nonzero and orthogonal to n".into()));
        }
        let det = self.l_symbol(x, xi, &x.n)?.det()?;
        let roots = positive_imag_roots(&det)?;
        let expanded: Vec<Complex64> =
            roots.iter().flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity)).collect();
        let m_plus = PolyC::from_roots(&expanded);
        let deg = expanded.len();
        let product = self.boundary_product(x, xi)?;

        let width = (self.size * deg).max(self.m);
        let mut remainder = DMatrix::<Complex64>::zeros(self.m, width);
        let mut division_defect = 0.0f64;
        for l in 0..self.m {
            for k in 0..self.size {
                let entry = product.get(l, k);
                let (q, r) = entry.div_rem(&m_plus)?;
                let back = &(&q * &m_plus) + &r;
                division_defect = division_defect.max((&back - entry).max_coeff());
                for d in 0..deg {
                    remainder[(l, k * deg + d)] = r.coeff(d);
                }
            }
        }
        let raw_rows: Vec<Vec<Complex64>> =
            (0..self.m).map(|l| remainder.row(l).iter().copied().collect()).collect();
        for l in 0..self.m {
            let n = remainder.row(l).norm();
            if n > 0.0 {
                remainder.row_mut(l).unscale_mut(n);
            }
        }
        let svd = remainder.svd(true, false);
        let sv = &svd.singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
        let pass = ratio >= RANK_TOLERANCE;
        let witness = (!pass).then(|| {
            let u = svd.u.as_ref().expect("u requested");
            let imin = sv.imin();
            let c: Vec<Complex64> = u.column(imin).iter().map(|z| z.conj()).collect();
            let big = c.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Complex64::new(1.0, 0.0));
            c.iter().map(|z| z / big).collect()
        });
        Ok(ComplementingVerdict { pass, ratio, roots, remainder: raw_rows, witness, division_defect })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Upper-half-plane roots of `p`, clustered; errors on a root within
/// `REAL_AXIS_TOLERANCE` of the real axis.
pub fn positive_imag_roots(p: &PolyC) -> Result<Vec<Root>> {
    let clustered = p.clustered_roots(CLUSTER_TOLERANCE)?;
    if let Some(r) = clustered.iter().find(|r| r.value.im.abs() <= REAL_AXIS_TOLERANCE) {
        return Err(Error::RealRoot { re: r.value.re, im: r.value.im });
    }
    Ok(clustered.into_iter().filter(|r| r.value.im > 0.0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplementingVerdict {
    pub pass: bool,
    /// `sigma_min / sigma_max` of the row-normalized remainder matrix.
    pub ratio: f64,
    pub roots: Vec<Root>,
    /// Remainder coefficients, one row per boundary row, before normalization.
    pub remainder: Vec<Vec<Complex64>>,
    /// `C` with `sum_l C_l (row l) = 0 mod M^+`, scaled so its largest entry is 1.
    pub witness: Option<Vec<Complex64>>,
    /// Largest coefficient of `q M^+ + r - dividend` over all reductions.
    pub division_defect: f64,
}

/// Where and why a condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub theta: f64,
    pub x: [f64; 2],
    pub xi: Vec<f64>,
    pub xi_prime: Option<Vec<f64>>,
    /// The offending values: `det L^p`, the roots, or the vector `C`.
    pub coefficients: Vec<Complex64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub pass: bool,
    pub samples: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdnReport {
    pub problem: String,
    /// Half the degree of `det L^p`.
    pub m: usize,
    pub conditions: Vec<ConditionVerdict>,
    /// Min and max of `|det L^p(x, xi)|` over sampled unit covectors.
    pub ellipticity_constants: [f64; 2],
    /// Smallest remainder rank ratio seen by the complementing test.
    pub min_rank_ratio: f64,
    pub boundary_samples: usize,
    pub xi_samples: usize,
    pub all_pass: bool,
}

impl AdnReport {
    pub fn condition(&self, index: usize) -> &ConditionVerdict {
        &self.conditions[index]
    }
}

/// `+-2^(k-1)` for `k = 0, 1, ...`: `0.5, -0.5, 1, -1, 2, ...`.
pub fn xi_scalings(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * 2f64.powi((i / 2) as i32 - 1)
        })
        .collect()
}

fn witness(x: &BoundaryPoint, xi: &[f64], xi_prime: Option<&[f64]>, coefficients: Vec<Complex64>, reason: String) -> Witness {
    Witness { theta: x.theta, x: x.x, xi: xi.to_vec(), xi_prime: xi_prime.map(<[f64]>::to_vec), coefficients, reason }
}

/// Conditions (gamma) and uniform ellipticity on unit covectors at the
/// given points. Returns the two verdicts, the constants and the degree `m`.
pub fn check_ellipticity(parts: &PrincipalParts, points: &[BoundaryPoint], n_xi: usize) -> Result<(ConditionVerdict, ConditionVerdict, [f64; 2], usize)> {
    let dirs: Vec<[f64; 2]> = (0..n_xi)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / n_xi as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut worst: Option<(f64, Witness)> = None;
    let mut degree_failure: Option<Witness> = None;
    let mut degree = None;
    for x in points {
        for xi in &dirs {
            let d = parts.det_at(x, xi)?.abs();
            lo = lo.min(d);
            hi = hi.max(d);
            if d <= DET_TOLERANCE && worst.as_ref().is_none_or(|(w, _)| d < *w) {
                worst = Some((d, witness(x, xi, None, vec![Complex64::new(d, 0.0)], "det L^p vanishes".into())));
            }
            // Along sigma -> sigma xi the determinant must be c sigma^(2m).
            let radial = parts.l_symbol(x, &[0.0, 0.0], xi)?.det()?.trimmed(1e-12);
            let top = radial.degree();
            let lower = (0..top.unwrap_or(0)).map(|k| radial.coeff(k).norm()).fold(0.0, f64::max);
            degree.get_or_insert(top);
            if top != Some(2 * parts.m) || lower > 1e-12 * radial.max_coeff() {
                degree_failure.get_or_insert_with(|| {
                    witness(x, xi, None, radial.coeffs().to_vec(), format!("det L^p is not homogeneous of degree {}", 2 * parts.m))
                });
            }
        }
    }
    let samples = points.len() * dirs.len();
    let m = degree.flatten().map_or(0, |d| d / 2);
    let gamma = ConditionVerdict {
        name: "ADN-elliptic".into(),
        pass: worst.is_none(),
        samples,
        witness: worst.map(|(_, w)| w),
    };
    let uniform_witness = degree_failure.or_else(|| gamma.witness.clone());
    let uniform = ConditionVerdict {
        name: "uniformly elliptic".into(),
        pass: uniform_witness.is_none(),
        samples,
        witness: uniform_witness,
    };
    Ok((gamma, uniform, [lo, hi], m))
}

/// Exactly `m` upper-half-plane roots along every sampled pencil: `xi' = n`
/// with `xi = c tau`, and pencils with pseudo-random directions.
pub fn check_supplementary(parts: &PrincipalParts, points: &[BoundaryPoint], scalings: &[f64]) -> Result<ConditionVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = 0;
    for x in points {
        let mut pencils: Vec<([f64; 2], [f64; 2])> = scalings.iter().map(|c| ([c * x.tau[0], c * x.tau[1]], x.n)).collect();
        for _ in 0..scalings.len() {
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let b: f64 = a + rng.random_range(0.2..std::f64::consts::PI - 0.2);
            pencils.push(([a.cos(), a.sin()], [b.cos(), b.sin()]));
        }
        for (xi, xi_prime) in pencils {
            samples += 1;
            let fail = |coefficients: Vec<Complex64>, reason: String| ConditionVerdict {
                name: "regular elliptic".into(),
                pass: false,
                samples,
                witness: Some(witness(x, &xi, Some(&xi_prime), coefficients, reason)),
            };
            let det = parts.l_symbol(x, &xi, &xi_prime)?.det()?;
            let full = det.trimmed(1e-12).degree().unwrap_or(0);
            if full != 2 * parts.m {
                return Ok(fail(det.coeffs().to_vec(), format!("pencil polynomial has degree {full}, not {}", 2 * parts.m)));
            }
            match positive_imag_roots(&det) {
                Ok(roots) => {
                    let count: usize = roots.iter().map(|r| r.multiplicity).sum();
                    if count != parts.m {
                        let values = roots.iter().map(|r| r.value).collect();
                        return Ok(fail(values, format!("{count} roots with positive imaginary part, expected {}", parts.m)));
                    }
                }
                Err(Error::RealRoot { re, im }) => {
                    return Ok(fail(vec![Complex64::new(re, im)], "root on the real axis".into()));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ConditionVerdict { name: "regular elliptic".into(), pass: true, samples, witness: None })
}

/// Runs all four conditions at `n_boundary` equally spaced boundary points,
/// `n_xi` unit covectors and `n_xi` tangential scalings.
pub fn check_all(problem: &AdnProblem, n_boundary: usize, n_xi: usize) -> Result<AdnReport> {
    if n_boundary < 8 || n_xi < 8 {
        return Err(Error::InvalidArgument("at least 8 boundary and 8 covector samples are required".into()));
    }
    let parts = principal_parts(problem)?;
    let points = problem.boundary_samples(n_boundary);
    let scalings = xi_scalings(n_xi);
    let (gamma, uniform, constants, m) = check_ellipticity(&parts, &points, n_xi)?;
    let supplementary = check_supplementary(&parts, &points, &scalings)?;

    let mut complementing = ConditionVerdict { name: "complementing".into(), pass: true, samples: 0, witness: None };
    let mut min_ratio = f64::INFINITY;
    'outer: for x in &points {
        for &c in &scalings {
            let xi = [c * x.tau[0], c * x.tau[1]];
            complementing.samples += 1;
            let verdict = match parts.complementing_check(x, &xi) {
                Ok(v) => v,
                Err(Error::RealRoot { re, im }) => {
                    complementing.pass = false;
                    complementing.witness =
                        Some(witness(x, &xi, Some(&x.n), vec![Complex64::new(re, im)], "root on the real axis".into()));
                    min_ratio = 0.0;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            min_ratio = min_ratio.min(verdict.ratio);
            if !verdict.pass {
                complementing.pass = false;
                complementing.witness = Some(witness(
                    x,
                    &xi,
                    Some(&x.n),
                    verdict.witness.unwrap_or_default(),
                    format!("rows dependent modulo M+ (rank ratio {:.3e})", verdict.ratio),
                ));
                break 'outer;
            }
        }
    }
    let conditions = vec![gamma, uniform, supplementary, complementing];
    let all_pass = conditions.iter().all(|c| c.pass);
    Ok(AdnReport {
        problem: problem.name.clone(),
        m,
        conditions,
        ellipticity_constants: constants,
        min_rank_ratio: min_ratio,
        boundary_samples: n_boundary,
        xi_samples: n_xi,
        all_pass,
    })
}
