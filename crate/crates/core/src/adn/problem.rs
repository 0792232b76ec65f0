//! Boundary value systems `L u = f` in the disk, `B u = g` on the circle, in
//! the weighted-degree setting: coefficient tables, weights, and JSON files.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, HashMapContext, Node, Value};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::AlphaSpec;

/// Geometry and friction at one point of the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub x: [f64; 2],
    pub n: [f64; 2],
    pub tau: [f64; 2],
    pub kappa: f64,
    pub alpha: f64,
}

impl BoundaryPoint {
    pub fn on_circle(theta: f64, alpha: &AlphaSpec) -> Self {
        let (s, c) = theta.sin_cos();
        Self { theta, x: [c, s], n: [c, s], tau: [-s, c], kappa: 1.0, alpha: alpha.eval(theta) }
    }
}

type CoefficientFn = dyn Fn(&BoundaryPoint) -> Result<f64> + Send + Sync;

/// A coefficient as a function of the boundary point.
#[derive(Clone)]
pub struct Coefficient {
    f: Arc<CoefficientFn>,
    label: String,
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Self { f: Arc::new(move |_| Ok(c)), label: c.to_string() }
    }

    pub fn from_fn(label: &str, f: impl Fn(&BoundaryPoint) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(move |p| Ok(f(p))), label: label.to_string() }
    }

    /// Expression in `x1, x2, n1, n2, t1, t2, kappa, alpha, theta`, with the
    /// `math::` functions of evalexpr (`math::cos(theta)`, ...).
    pub fn expression(source: &str) -> Result<Self> {
        let node: Node = build_operator_tree(source).map_err(|e| Error::Parse {
            context: format!("expression `{source}`"),
            message: e.to_string(),
        })?;
        let label = source.to_string();
        let coefficient = Self {
            f: Arc::new(move |p| eval_expression(&node, &label, p)),
            label: source.to_string(),
        };
        coefficient.eval(&BoundaryPoint::on_circle(0.0, &AlphaSpec::Const(0.0)))?;
        Ok(coefficient)
    }

    pub fn eval(&self, p: &BoundaryPoint) -> Result<f64> {
        (self.f)(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn eval_expression(node: &Node, source: &str, p: &BoundaryPoint) -> Result<f64> {
    let parse_err = |message: String| Error::Parse { context: format!("expression `{source}`"), message };
    let mut ctx = HashMapContext::new();
    let vars = [
        ("x1", p.x[0]),
        ("x2", p.x[1]),
        ("n1", p.n[0]),
        ("n2", p.n[1]),
        ("t1", p.tau[0]),
        ("t2", p.tau[1]),
        ("kappa", p.kappa),
        ("alpha", p.alpha),
        ("theta", p.theta),
    ];
    for (name, value) in vars {
        ctx.set_value(name.into(), Value::Float(value)).map_err(|e| parse_err(e.to_string()))?;
    }
    node.eval_number_with_context(&ctx).map_err(|e| parse_err(e.to_string()))
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({})", self.label)
    }
}

/// `coefficient * D^multi_index` in entry `(row, col)`, zero-based.
#[derive(Debug, Clone)]
pub struct Term {
    pub row: usize,
    pub col: usize,
    pub multi_index: Vec<u32>,
    pub coefficient: Coefficient,
}

impl Term {
    pub fn new(row: usize, col: usize, multi_index: &[u32], coefficient: Coefficient) -> Self {
        Self { row, col, multi_index: multi_index.to_vec(), coefficient }
    }

    pub fn order(&self) -> i64 {
        self.multi_index.iter().map(|&a| a as i64).sum()
    }
}

/// An `M x M` interior operator `L`, an `m x M` boundary operator `B`, and
/// weights `s, t` (length `M`) and `r` (length `m`).
#[derive(Debug, Clone)]
pub struct AdnProblem {
    pub name: String,
    pub size: usize,
    pub dim: usize,
    pub l_terms: Vec<Term>,
    pub b_terms: Vec<Term>,
    pub s: Vec<i64>,
    pub t: Vec<i64>,
    pub r: Vec<i64>,
    pub alpha: AlphaSpec,
}

impl AdnProblem {
    /// Boundary point at angle `theta` with this problem's friction.
    pub fn boundary_point(&self, theta: f64) -> BoundaryPoint {
        BoundaryPoint::on_circle(theta, &self.alpha)
    }

    /// Evenly spaced boundary points.
    pub fn boundary_samples(&self, n: usize) -> Vec<BoundaryPoint> {
        (0..n).map(|a| self.boundary_point(2.0 * PI * a as f64 / n as f64)).collect()
    }

    /// Structural checks independent of the weights' validity.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.size == 0 {
            return bad("system size must be positive".into());
        }
        if self.s.len() != self.size || self.t.len() != self.size {
            return bad(format!("weights s, t must have length M = {}", self.size));
        }
        if self.dim != 2 {
            return bad(format!("the boundary sampler is two-dimensional, got d = {}", self.dim));
        }
        for (op, terms, rows) in [("L", &self.l_terms, self.size), ("B", &self.b_terms, self.r.len())] {
            for (k, term) in terms.iter().enumerate() {
                if term.row >= rows || term.col >= self.size {
                    return bad(format!("{op}[{k}]: entry ({}, {}) out of range", term.row + 1, term.col + 1));
                }
                if term.multi_index.len() != self.dim {
                    return bad(format!("{op}[{k}]: multi-index must have length {}", self.dim));
                }
            }
        }
        Ok(())
    }
}

/// `I_2 (D^(2,0) + D^(0,2))` with the Navier rows
/// `n^T D^0` and `(alpha - kappa) tau^T D^0 + n_1 tau^T D^(1,0) + n_2 tau^T D^(0,1)`,
/// weights `s = (0, 0)`, `t = (2, 2)`, `r = (-2, -1)`.
pub fn navier_laplacian_problem(alpha: AlphaSpec) -> AdnProblem {
    let mut b_terms = Vec::new();
    for j in 0..2 {
        b_terms.push(Term::new(0, j, &[0, 0], Coefficient::from_fn(["n1", "n2"][j], move |p| p.n[j])));
        b_terms.push(Term::new(
            1,
            j,
            &[0, 0],
            Coefficient::from_fn(["(alpha-kappa)*t1", "(alpha-kappa)*t2"][j], move |p| (p.alpha - p.kappa) * p.tau[j]),
        ));
        for (i, mi) in [[1, 0], [0, 1]].iter().enumerate() {
            b_terms.push(Term::new(1, j, mi, Coefficient::from_fn("n_i*t_j", move |p| p.n[i] * p.tau[j])));
        }
    }
    AdnProblem {
        name: "navier_laplacian".into(),
        size: 2,
        dim: 2,
        l_terms: laplacian_terms(),
        b_terms,
        s: vec![0, 0],
        t: vec![2, 2],
        r: vec![-2, -1],
        alpha,
    }
}

fn laplacian_terms() -> Vec<Term> {
    let mut l = Vec::new();
    for i in 0..2 {
        l.push(Term::new(i, i, &[2, 0], Coefficient::constant(1.0)));
        l.push(Term::new(i, i, &[0, 2], Coefficient::constant(1.0)));
    }
    l
}

/// The Laplacian system with both boundary rows equal to `n^T D^0`.
pub fn duplicated_row_problem() -> AdnProblem {
    let mut p = dirichlet_problem();
    p.name = "duplicated_row".into();
    p.b_terms = (0..2)
        .flat_map(|row| (0..2).map(move |j| Term::new(row, j, &[0, 0], Coefficient::from_fn("n_j", move |p| p.n[j]))))
        .collect();
    p
}

/// The Laplacian system with `B = I_2 D^0`, `r = (-2, -2)`.
pub fn dirichlet_problem() -> AdnProblem {
    AdnProblem {
        name: "dirichlet".into(),
        size: 2,
        dim: 2,
        l_terms: laplacian_terms(),
        b_terms: (0..2).map(|i| Term::new(i, i, &[0, 0], Coefficient::constant(1.0))).collect(),
        s: vec![0, 0],
        t: vec![2, 2],
        r: vec![-2, -2],
        alpha: AlphaSpec::Const(0.0),
    }
}

/// `diag(D^(2,0), D^(0,2))` with Dirichlet rows; its symbol is singular on the axes.
pub fn diagonal_symbol_problem() -> AdnProblem {
    let mut p = dirichlet_problem();
    p.name = "diagonal_symbol".into();
    p.l_terms = vec![
        Term::new(0, 0, &[2, 0], Coefficient::constant(1.0)),
        Term::new(1, 1, &[0, 2], Coefficient::constant(1.0)),
    ];
    p
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientSpec {
    Number(f64),
    Expression(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    #[serde(alias = "l")]
    i: usize,
    j: usize,
    mi: Vec<u32>,
    c: CoefficientSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    builtin: Option<String>,
    #[serde(rename = "M", default)]
    size: Option<usize>,
    #[serde(rename = "L", default)]
    l: Vec<TermSpec>,
    #[serde(rename = "B", default)]
    b: Vec<TermSpec>,
    #[serde(default)]
    s: Vec<i64>,
    #[serde(default)]
    t: Vec<i64>,
    #[serde(default)]
    r: Vec<i64>,
    #[serde(default)]
    alpha: Option<AlphaSpec>,
}

fn convert_terms(op: &str, specs: Vec<TermSpec>) -> Result<Vec<Term>> {
    specs
        .into_iter()
        .enumerate()
        .map(|(k, spec)| {
            let at = |field: &str| format!("{op}[{k}].{field}");
            if spec.i == 0 || spec.j == 0 {
                return Err(Error::Parse { context: at("i/j"), message: "indices are 1-based".into() });
            }
            let coefficient = match spec.c {
                CoefficientSpec::Number(c) => Coefficient::constant(c),
                CoefficientSpec::Expression(src) => Coefficient::expression(&src).map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Parse { context: at("c"), message },
                    other => other,
                })?,
            };
            Ok(Term::new(spec.i - 1, spec.j - 1, &spec.mi, coefficient))
        })
        .collect()
}

impl AdnProblem {
    /// Parses a problem file. Either `{"builtin": name, "alpha": ...}` with
    /// name one of `navier_laplacian`, `dirichlet`, `duplicated_row`,
    /// `diagonal_symbol`, or an explicit table
    /// `{"M": 2, "L": [{"i":1,"j":1,"mi":[2,0],"c":1}, ...], "B": [...], "s": [...], "t": [...], "r": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let alpha = file.alpha.unwrap_or(AlphaSpec::Const(0.0));
        if let Some(name) = file.builtin {
            let mut p = match name.as_str() {
                "navier_laplacian" => navier_laplacian_problem(alpha),
                "dirichlet" => dirichlet_problem(),
                "duplicated_row" => duplicated_row_problem(),
                "diagonal_symbol" => diagonal_symbol_problem(),
                other => {
                    return Err(Error::Parse { context: "builtin".into(), message: format!("unknown problem `{other}`") })
                }
            };
            if let Some(n) = file.name {
                p.name = n;
            }
            return Ok(p);
        }
        let size = file.size.ok_or_else(|| Error::Parse { context: "M".into(), message: "missing key".into() })?;
        let dim = file.l.first().map_or(2, |t| t.mi.len());
        let problem = AdnProblem {
            name: file.name.unwrap_or_else(|| "problem".into()),
            size,
            dim,
            l_terms: convert_terms("L", file.l)?,
            b_terms: convert_terms("B", file.b)?,
            s: file.s,
            t: file.t,
            r: file.r,
            alpha,
        };
        problem.validate().map_err(|e| Error::Parse { context: "problem".into(), message: e.to_string() })?;
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_coefficients_see_the_boundary_point() {
        let c = Coefficient::expression("(alpha - kappa) * t1 + math::cos(theta)").unwrap();
        let p = BoundaryPoint::on_circle(PI / 2.0, &AlphaSpec::Const(3.0));
        assert!((c.eval(&p).unwrap() - (-2.0 + 0.0)).abs() < 1e-12);
        assert!(matches!(Coefficient::expression("n1 +"), Err(Error::Parse { .. })));
        assert!(matches!(Coefficient::expression("unknown_var"), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_errors_carry_context() {
        match AdnProblem::from_json("{\"M\": 2,\n \"L\": [}") {
            Err(Error::Parse { context, .. }) => assert!(context.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
        let text = r#"{"M":1,"L":[{"i":1,"j":1,"mi":[2,0],"c":"nope("}],"B":[],"s":[0],"t":[2],"r":[]}"#;
        match AdnProblem::from_json(text) {
            Err(Error::Parse { context, .. }) => assert_eq!(context, "L[0].c"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn builtin_files_resolve() {
        let p = AdnProblem::from_json(r#"{"builtin":"navier_laplacian","alpha":{"const":5}}"#).unwrap();
        assert_eq!(p.r, vec![-2, -1]);
        assert_eq!(p.boundary_point(0.3).alpha, 5.0);
    }
}
