//! Problem definition and the residual-plus-initial-condition least squares
//! objective.
//!
//! For a problem D^am y = f(x, y, D^a1 y, .., D^a(m-1) y) with trial solution
//! N, the objective over training points x_1..x_P is
//!
//! ```text
//! E = 1/(2P) sum_p r_p^2  +  1/2 sum_(k,y0k) (N^(k)(0) - y0k)^2
//! r_p = D^am N(x_p) - f(x_p, N(x_p), D^a1 N(x_p), ..)
//! ```
//!
//! Because N is linear in its weights, each r_p has an exact weight jacobian
//! built from cached basis values and the symbolic partials of f, and the
//! Gauss-Newton matrix J^T J / P plus the initial condition outer products
//! approximates the Hessian without second derivatives.

use crate::basis::{FractionalOrder, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::expr::{self, Env, ExprAst};
use crate::model::{BasisCache, Network};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Names for the lower-order derivatives in rhs expressions, in ascending
/// order of the orders they bind to.
const D_NAMES: [&str; 9] = ["d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9"];

/// A fractional-order initial value problem plus discretization choices.
///
/// Invariants, all enforced at construction:
/// - orders are finite, positive, strictly increasing, at most 10 of them
///   (the rhs can only name d1..d9);
/// - the rhs references only `x` (or its alias `t`, normalized away), `y`,
///   and d1..d(m-1);
/// - initial conditions cover k = 0..ceil(leading)-1, each exactly once;
/// - the domain satisfies 0 <= a < b, both finite;
/// - at least one training point;
/// - basis size is at least ceil(leading)+1, so the leading derivative of
///   the trial solution is not identically zero, and at most 64.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    orders: Vec<f64>,
    rhs: ExprAst,
    ics: Vec<(usize, f64)>,
    domain: (f64, f64),
    num_points: usize,
    basis_size: usize,
    grid_override: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new(
        orders: Vec<f64>,
        rhs: ExprAst,
        ics: Vec<(usize, f64)>,
        domain: (f64, f64),
        num_points: usize,
        basis_size: usize,
    ) -> Result<Self> {
        let rhs = expr::rename_var(&rhs, "t", "x");
        let mut ics = ics;
        ics.sort_by_key(|(k, _)| *k);
        let spec = Self {
            orders,
            rhs,
            ics,
            domain,
            num_points,
            basis_size,
            grid_override: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));

        if self.orders.is_empty() {
            return bad("at least one differentiation order is required".into());
        }
        if self.orders.len() > D_NAMES.len() + 1 {
            return bad(format!(
                "at most {} orders are supported (d1..d9 plus the leading order)",
                D_NAMES.len() + 1
            ));
        }
        for &a in &self.orders {
            FractionalOrder::new(a)?;
        }
        for pair in self.orders.windows(2) {
            if pair[0] >= pair[1] {
                return bad(format!(
                    "orders must be strictly increasing, got {} before {}",
                    pair[0], pair[1]
                ));
            }
        }

        let need = self.leading_ceil();
        let mut seen = vec![false; need];
        for &(k, y0) in &self.ics {
            if k >= need {
                return bad(format!(
                    "initial condition k = {k} is out of range: the leading order needs k < {need}"
                ));
            }
            if seen[k] {
                return bad(format!("initial condition k = {k} appears more than once"));
            }
            if !y0.is_finite() {
                return bad(format!("initial condition k = {k} has non-finite value {y0}"));
            }
            seen[k] = true;
        }
        for (k, present) in seen.iter().enumerate() {
            if !present {
                return bad(format!("missing initial condition for k = {k}"));
            }
        }

        let mut allowed: Vec<&str> = vec!["x", "y"];
        allowed.extend(&D_NAMES[..self.orders.len() - 1]);
        for var in expr::variables(&self.rhs) {
            if !allowed.contains(&var.as_str()) {
                return bad(format!(
                    "rhs references `{var}`; allowed variables here are {}",
                    allowed.join(", ")
                ));
            }
        }

        let (a, b) = self.domain;
        if !a.is_finite() || !b.is_finite() || a < 0.0 || a >= b {
            return bad(format!("domain must satisfy 0 <= a < b, got [{a}, {b}]"));
        }

        if self.num_points == 0 {
            return bad("training needs at least one point".into());
        }
        if let Some(grid) = &self.grid_override {
            for &x in grid {
                if !x.is_finite() || x < a || x > b {
                    return bad(format!("training point {x} lies outside the domain [{a}, {b}]"));
                }
            }
        }

        if self.basis_size > MAX_DEGREE {
            return bad(format!("basis size {} exceeds the maximum {MAX_DEGREE}", self.basis_size));
        }
        let min_n = need + 1;
        if self.basis_size < min_n {
            return bad(format!(
                "basis size {} is too small: leading order {} needs at least {min_n} members, \
                 otherwise its derivative of every member vanishes identically",
                self.basis_size,
                self.leading_order()
            ));
        }
        Ok(())
    }

    /// Replaces the uniform training grid with explicit points (order kept).
    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidProblem("explicit grid must not be empty".into()));
        }
        self.num_points = grid.len();
        self.grid_override = Some(grid);
        self.validate()?;
        Ok(self)
    }

    /// Changes the number of uniform training points, dropping any explicit
    /// grid.
    pub fn with_num_points(mut self, num_points: usize) -> Result<Self> {
        self.num_points = num_points;
        self.grid_override = None;
        self.validate()?;
        Ok(self)
    }

    pub fn with_basis_size(mut self, basis_size: usize) -> Result<Self> {
        self.basis_size = basis_size;
        self.validate()?;
        Ok(self)
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    /// Highest order, the one the equation is solved for.
    pub fn leading_order(&self) -> f64 {
        *self.orders.last().expect("orders are non-empty")
    }

    pub fn lower_orders(&self) -> &[f64] {
        &self.orders[..self.orders.len() - 1]
    }

    pub fn leading_ceil(&self) -> usize {
        FractionalOrder::new(self.leading_order())
            .expect("orders are validated")
            .ceil()
    }

    pub fn rhs(&self) -> &ExprAst {
        &self.rhs
    }

    /// Initial conditions (k, y0k), sorted by k.
    pub fn ics(&self) -> &[(usize, f64)] {
        &self.ics
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn grid_override(&self) -> Option<&[f64]> {
        self.grid_override.as_deref()
    }

    /// Training points: the explicit grid if one was given, otherwise P
    /// uniform points a + p (b-a)/P for p = 1..P. The left endpoint is
    /// excluded; the initial conditions already anchor x = 0.
    pub fn training_points(&self) -> Vec<f64> {
        if let Some(grid) = &self.grid_override {
            return grid.clone();
        }
        let (a, b) = self.domain;
        let p_total = self.num_points as f64;
        (1..=self.num_points)
            .map(|p| a + (b - a) * p as f64 / p_total)
            .collect()
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for SquareMat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.n + c]
    }
}

/// Cost, gradient, and Gauss-Newton Hessian at one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LossParts {
    pub cost: f64,
    pub grad: Vec<f64>,
    pub hess: SquareMat,
}

/// Residual and weight jacobian of one training point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub residual: f64,
    pub jacobian: Vec<f64>,
}

/// A problem bound to its basis cache and the symbolic partials of its rhs.
///
/// Construction differentiates the rhs once with respect to `y` and each
/// d-variable; evaluation afterwards is pure arithmetic. Per-point work is
/// independent, so rows can be assembled in parallel; the reduction into
/// cost, gradient, and Hessian is always sequential in point order, which
/// makes results bit-identical across thread counts.
pub struct CostModel<'p> {
    problem: &'p ProblemSpec,
    cache: BasisCache,
    points: Vec<f64>,
    dfdy: ExprAst,
    dfdd: Vec<ExprAst>,
}

impl<'p> CostModel<'p> {
    pub fn new(problem: &'p ProblemSpec) -> Result<Self> {
        let points = problem.training_points();
        let cache = BasisCache::build(
            problem.basis_size(),
            &points,
            problem.orders(),
            problem.leading_ceil(),
        )?;
        let dfdy = expr::diff(problem.rhs(), "y")?;
        let dfdd = (0..problem.lower_orders().len())
            .map(|i| expr::diff(problem.rhs(), D_NAMES[i]))
            .collect::<Result<_>>()?;
        Ok(Self { problem, cache, points, dfdy, dfdd })
    }

    pub fn cache(&self) -> &BasisCache {
        &self.cache
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem
    }

    /// Environment x, y, d1.. at point p, plus the leading derivative value.
    fn point_env(&self, net: &Network, p: usize) -> Result<(Env<'static>, f64)> {
        let mut env = Env::new();
        env.set("x", self.points[p]);
        env.set("y", net.forward(&self.cache, p));
        for (i, &order) in self.problem.lower_orders().iter().enumerate() {
            env.set(D_NAMES[i], net.frac_forward(&self.cache, order, p)?);
        }
        let lead = net.frac_forward(&self.cache, self.problem.leading_order(), p)?;
        Ok((env, lead))
    }

    /// r_p = D^am N(x_p) - f(x_p, N, D^a1 N, ..).
    pub fn residual(&self, net: &Network, p: usize) -> Result<f64> {
        let (env, lead) = self.point_env(net, p)?;
        Ok(lead - expr::eval(self.problem.rhs(), &env)?)
    }

    pub fn residuals_seq(&self, net: &Network) -> Result<Vec<f64>> {
        (0..self.points.len()).map(|p| self.residual(net, p)).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn residuals_par(&self, net: &Network) -> Result<Vec<f64>> {
        (0..self.points.len())
            .into_par_iter()
            .map(|p| self.residual(net, p))
            .collect()
    }

    fn residuals(&self, net: &Network) -> Result<Vec<f64>> {
        #[cfg(feature = "parallel")]
        {
            self.residuals_par(net)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.residuals_seq(net)
        }
    }

    /// Residual and its exact jacobian with respect to the weights:
    /// J_pl = D^am F_l - df/dy F_l - sum_i df/dd_i D^ai F_l, all at x_p.
    pub fn point_row(&self, net: &Network, p: usize) -> Result<PointRow> {
        let (env, lead) = self.point_env(net, p)?;
        let f = expr::eval(self.problem.rhs(), &env)?;
        let gy = expr::eval(&self.dfdy, &env)?;
        let lead_row = self.cache.deriv_row(self.problem.leading_order(), p)?;
        let basis_row = self.cache.basis_row(p);
        let mut jacobian: Vec<f64> = lead_row
            .iter()
            .zip(basis_row)
            .map(|(d, b)| d - gy * b)
            .collect();
        for (i, &order) in self.problem.lower_orders().iter().enumerate() {
            let gd = expr::eval(&self.dfdd[i], &env)?;
            if gd == 0.0 {
                continue;
            }
            for (j, d) in self.cache.deriv_row(order, p)?.iter().enumerate() {
                jacobian[j] -= gd * d;
            }
        }
        Ok(PointRow { residual: lead - f, jacobian })
    }

    pub fn rows_seq(&self, net: &Network) -> Result<Vec<PointRow>> {
        (0..self.points.len()).map(|p| self.point_row(net, p)).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn rows_par(&self, net: &Network) -> Result<Vec<PointRow>> {
        (0..self.points.len())
            .into_par_iter()
            .map(|p| self.point_row(net, p))
            .collect()
    }

    fn rows(&self, net: &Network) -> Result<Vec<PointRow>> {
        #[cfg(feature = "parallel")]
        {
            self.rows_par(net)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.rows_seq(net)
        }
    }

    fn ic_errors(&self, net: &Network) -> Vec<(usize, f64)> {
        self.problem
            .ics()
            .iter()
            .map(|&(k, y0)| (k, net.ic_forward(&self.cache, k) - y0))
            .collect()
    }

    /// E alone, on the cheaper residual-only path. Identical bit for bit to
    /// the cost returned by `loss_parts`.
    pub fn cost(&self, net: &Network) -> Result<f64> {
        let residuals = self.residuals(net)?;
        let p_total = residuals.len() as f64;
        let mut acc = 0.0;
        for r in &residuals {
            acc += r * r;
        }
        let mut cost = acc / (2.0 * p_total);
        for (_, err) in self.ic_errors(net) {
            cost += 0.5 * err * err;
        }
        Ok(cost)
    }

    /// Cost, gradient, and Gauss-Newton Hessian in one pass over the rows.
    pub fn loss_parts(&self, net: &Network) -> Result<LossParts> {
        let rows = self.rows(net)?;
        let n = net.n();
        let p_total = rows.len() as f64;

        let mut sq = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = SquareMat::zeros(n);
        for row in &rows {
            sq += row.residual * row.residual;
            for l in 0..n {
                grad[l] += row.residual * row.jacobian[l];
                for m in l..n {
                    hess[(l, m)] += row.jacobian[l] * row.jacobian[m];
                }
            }
        }
        let mut cost = sq / (2.0 * p_total);
        for g in grad.iter_mut() {
            *g /= p_total;
        }
        for l in 0..n {
            for m in l..n {
                hess[(l, m)] /= p_total;
            }
        }

        for (k, err) in self.ic_errors(net) {
            let ic_row = self.cache.ic_row(k);
            cost += 0.5 * err * err;
            for l in 0..n {
                grad[l] += err * ic_row[l];
                for m in l..n {
                    hess[(l, m)] += ic_row[l] * ic_row[m];
                }
            }
        }

        for l in 0..n {
            for m in l + 1..n {
                hess[(m, l)] = hess[(l, m)];
            }
        }
        Ok(LossParts { cost, grad, hess })
    }

    /// Gradient of E with respect to the weights.
    pub fn gradient(&self, net: &Network) -> Result<Vec<f64>> {
        Ok(self.loss_parts(net)?.grad)
    }

    /// Gauss-Newton approximation J^T J / P plus initial condition outer
    /// products. Symmetric positive semidefinite by construction.
    pub fn gauss_newton_hessian(&self, net: &Network) -> Result<SquareMat> {
        Ok(self.loss_parts(net)?.hess)
    }
}
