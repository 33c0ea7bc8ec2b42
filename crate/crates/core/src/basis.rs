//! Fibonacci polynomial basis, Caputo derivatives in closed form, and the
//! gamma function backing both.
//!
//! The Caputo rule maps power terms to power terms, so every derivative taken
//! here is a finite series of real powers produced by coefficient arithmetic.
//! No quadrature is involved anywhere in the solver.

use crate::error::{Error, Result};

/// Largest polynomial degree the basis routines accept.
///
/// Fibonacci coefficients are binomials and grow fast with the index; the cap
/// keeps them comfortably inside f64 range so a too-large basis fails loudly
/// at construction instead of degrading.
pub const MAX_DEGREE: usize = 64;

/// Exponents closer than this collapse into one series term.
const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// Arguments above this overflow f64 in `gamma`.
const GAMMA_OVERFLOW_LIMIT: f64 = 171.62;

// Rational Lanczos approximation, 13 terms, tuned for f64. Both coefficient
// arrays are ascending in the power of x. The published digits are kept even
// where they exceed f64 precision.
#[allow(clippy::excessive_precision)]
const LANCZOS_G: f64 = 6.024680040776729583740234375;
#[allow(clippy::excessive_precision)]
const LANCZOS_NUM: [f64; 13] = [
    23531376880.410759688572007674451636754734,
    42919803642.649098768957899047001988850926,
    35711959237.355668049440185451547166705960,
    17921034426.037209699919755754458931112671,
    6039542586.3520280050642916443072979210699,
    1439720407.3117216736632230727949123939715,
    248874557.86205415651146038641322942321632,
    31426415.585400194380614231628318205362874,
    2876370.6289353724412254090516208496135991,
    186056.26539522349504029498971604569928220,
    8071.6720023658162106380029022722506138218,
    210.82427775157934587250973392071336271166,
    2.5066282746310002701649081771338373386264,
];
const LANCZOS_DEN: [f64; 13] = [
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for c in LANCZOS_NUM.iter().rev() {
        num = num * x + c;
    }
    for c in LANCZOS_DEN.iter().rev() {
        den = den * x + c;
    }
    num / den
}

// Direct branch for x >= 0.5. The power is taken in two halves so arguments
// near the overflow limit survive the intermediate product.
fn gamma_positive(x: f64) -> f64 {
    let s = lanczos_sum(x);
    let t = x + LANCZOS_G - 0.5;
    let half = t.powf((x - 0.5) / 2.0);
    s * half * (-t).exp() * half
}

/// Gamma function for real arguments.
///
/// Relative error stays below 1e-13 across (0, 171.62]; negative non-integer
/// arguments go through the reflection formula. Zero and negative integers
/// are poles and return [`Error::GammaPole`]; arguments beyond 171.62 return
/// [`Error::GammaOverflow`].
pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    if x > GAMMA_OVERFLOW_LIMIT {
        return Err(Error::GammaOverflow(x));
    }
    if x < 0.5 {
        // Reflection: gamma(x) = pi / (sin(pi x) gamma(1 - x)). For very
        // negative x the right-hand gamma overflows to +inf and the result
        // underflows to a signed zero, which is the honest answer there.
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma_positive(1.0 - x)));
    }
    Ok(gamma_positive(x))
}

/// Differentiation order. Finite and strictly positive; integer values mean
/// classical derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Smallest integer >= the order.
    pub fn ceil(self) -> usize {
        self.0.ceil() as usize
    }

    /// Some(k) iff the order is exactly the integer k. No tolerance: 2.0 is
    /// classical, 2.0000000000000004 is fractional with ceil 3.
    pub fn as_integer(self) -> Option<usize> {
        if self.0 == self.0.floor() {
            Some(self.0 as usize)
        } else {
            None
        }
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense univariate polynomial over f64, coefficients ascending by power.
///
/// Canonical form: the zero polynomial has no coefficients, and otherwise the
/// last coefficient is nonzero. All constructors normalize to this form.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation. The zero polynomial evaluates to 0 everywhere.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (longer, shorter) = if self.coeffs.len() >= other.coeffs.len() {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        let mut out = longer.clone();
        for (j, c) in shorter.iter().enumerate() {
            out[j] += c;
        }
        Polynomial::new(out)
    }

    /// k-th classical derivative via falling factorials.
    pub fn derivative(&self, k: usize) -> Polynomial {
        if k == 0 {
            return self.clone();
        }
        if k >= self.coeffs.len() {
            return Polynomial::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - k);
        for j in k..self.coeffs.len() {
            let mut fac = 1.0;
            for t in (j - k + 1)..=j {
                fac *= t as f64;
            }
            out.push(self.coeffs[j] * fac);
        }
        Polynomial::new(out)
    }

    /// Caputo derivative of the given order.
    ///
    /// Integer orders reduce to the classical derivative. For fractional
    /// order a with n = ceil(a), every power below n is annihilated and
    /// x^j maps to gamma(j+1)/gamma(j+1-a) x^(j-a).
    pub fn caputo(&self, order: FractionalOrder) -> FracSeries {
        if let Some(k) = order.as_integer() {
            return FracSeries::from_polynomial(&self.derivative(k));
        }
        let a = order.value();
        let n = order.ceil();
        let mut terms = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate().skip(n) {
            if c == 0.0 {
                continue;
            }
            // Both arguments are positive and <= MAX_DEGREE + 1.
            let ratio = gamma(j as f64 + 1.0).expect("small positive argument")
                / gamma(j as f64 + 1.0 - a).expect("small positive argument");
            terms.push(Term { coef: c * ratio, exponent: j as f64 - a });
        }
        FracSeries::from_terms(terms)
    }
}

/// One term `coef * x^exponent` of a generalized power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exponent: f64,
}

/// Finite sum of real-power terms with nonnegative, strictly increasing
/// exponents and no zero coefficients. Empty means the zero series.
#[derive(Debug, Clone, PartialEq)]
pub struct FracSeries {
    terms: Vec<Term>,
}

impl FracSeries {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// Normalizes a bag of terms: sorts by exponent, merges exponents closer
    /// than 1e-12, and drops terms whose coefficient is (or cancels to) zero.
    pub fn from_terms(mut terms: Vec<Term>) -> Self {
        terms.retain(|t| t.coef != 0.0);
        terms.sort_by(|a, b| a.exponent.partial_cmp(&b.exponent).expect("finite exponents"));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            debug_assert!(t.exponent >= 0.0, "series exponents must be nonnegative");
            match merged.last_mut() {
                Some(last) if (t.exponent - last.exponent).abs() < EXPONENT_MERGE_TOL => {
                    last.coef += t.coef;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        Self { terms: merged }
    }

    fn from_polynomial(p: &Polynomial) -> Self {
        let terms = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| Term { coef: c, exponent: j as f64 })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at x >= 0. x^0 is 1 even at x = 0; positive exponents give 0
    /// there, so the series is continuous from the right.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativePoint(x));
        }
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coef * x.powf(t.exponent);
        }
        Ok(acc)
    }
}

/// Fibonacci polynomial F_m from the recurrence
/// F_0 = 0, F_1 = 1, F_{m+2} = x F_{m+1} + F_m.
///
/// F_m has degree m - 1 for m >= 1 and parity matching m - 1.
///
/// # Panics
/// If m exceeds `MAX_DEGREE + 1`.
pub fn fibonacci(m: usize) -> Polynomial {
    assert!(
        m <= MAX_DEGREE + 1,
        "fibonacci index {m} exceeds the supported maximum {}",
        MAX_DEGREE + 1
    );
    if m == 0 {
        return Polynomial::zero();
    }
    let mut prev: Vec<f64> = Vec::new(); // F_0
    let mut cur: Vec<f64> = vec![1.0]; // F_1
    for _ in 1..m {
        let mut next = vec![0.0; cur.len() + 1];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] = *c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] += *c;
        }
        prev = cur;
        cur = next;
    }
    Polynomial::new(cur)
}

/// Caputo derivative of F_i directly from the binomial expansion of the
/// basis, without forming the polynomial first.
///
/// For fractional order a the surviving powers are j = ceil(a) .. i-1 with
/// j + i odd, each contributing
/// `((i+j-1)/2)! / ((i-j-1)/2)! / gamma(j+1-a) * x^(j-a)`.
/// The result is the zero series exactly when i <= ceil(a). Integer orders
/// reduce to the classical derivative of F_i. Agrees with
/// `fibonacci(i).caputo(order)` to 1e-12; the two routes are kept separate on
/// purpose so they can check each other.
///
/// # Panics
/// If i exceeds `MAX_DEGREE + 1`.
pub fn caputo_fibonacci(i: usize, order: FractionalOrder) -> FracSeries {
    assert!(
        i <= MAX_DEGREE + 1,
        "fibonacci index {i} exceeds the supported maximum {}",
        MAX_DEGREE + 1
    );
    if let Some(k) = order.as_integer() {
        return FracSeries::from_polynomial(&fibonacci(i).derivative(k));
    }
    if i == 0 {
        return FracSeries::zero();
    }
    let a = order.value();
    let n = order.ceil();
    let mut j = if (i + n) % 2 == 1 { n } else { n + 1 };
    let mut terms = Vec::new();
    while j < i {
        let half_sum = (i + j - 1) / 2;
        let half_diff = (i - j - 1) / 2;
        // ((i+j-1)/2)! / ((i-j-1)/2)! as a running product.
        let mut c = 1.0;
        for t in (half_diff + 1)..=half_sum {
            c *= t as f64;
        }
        let den = gamma(j as f64 + 1.0 - a).expect("small positive argument");
        terms.push(Term { coef: c / den, exponent: j as f64 - a });
        j += 2;
    }
    FracSeries::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(got: f64, want: f64, tol: f64) -> bool {
        if want == 0.0 {
            got.abs() <= tol
        } else {
            ((got - want) / want).abs() <= tol
        }
    }

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(close(got, want, tol), "got {got}, want {want} (tol {tol})");
    }

    // Reference values computed with 50-digit arithmetic and rounded to the
    // nearest f64.
    const GAMMA_REFERENCE: [(f64, f64); 15] = [
        (0.5, 1.7724538509055159),
        (2.5, 1.3293403881791372),
        (3.0, 2.0),
        (0.25, 3.6256099082219087),
        (0.75, 1.2254167024651779),
        (1.8, 0.9313837709802428),
        (3.25, 2.5492569667185285),
        (2.75, 1.608359421985546),
        (1.5, 0.886226925452758),
        (3.5, 3.323350970447842),
        (0.1, 9.513507698668732),
        (10.0, 362880.0),
        (20.5, 5.406242982335075e17),
        (100.5, 9.320963104082718e156),
        (171.0, 7.257415615307998e306),
    ];

    #[test]
    fn gamma_matches_reference_values() {
        for (x, want) in GAMMA_REFERENCE {
            assert_close(gamma(x).unwrap(), want, 1e-13);
        }
    }

    #[test]
    fn gamma_reflects_negative_arguments() {
        for (x, want) in [
            (-0.5, -3.544907701811032),
            (-1.5, 2.3632718012073544),
            (-2.5, -0.9453087204829417),
            (-3.7, 0.25164399590242265),
            (0.001, 999.4237724845954),
        ] {
            assert_close(gamma(x).unwrap(), want, 1e-13);
        }
    }

    #[test]
    fn gamma_rejects_poles() {
        for x in [0.0, -1.0, -2.0, -37.0] {
            assert_eq!(gamma(x), Err(Error::GammaPole(x)));
        }
    }

    #[test]
    fn gamma_rejects_overflowing_arguments() {
        assert_eq!(gamma(171.7), Err(Error::GammaOverflow(171.7)));
        assert_eq!(gamma(1000.0), Err(Error::GammaOverflow(1000.0)));
    }

    #[test]
    fn fractional_order_validates() {
        assert!(FractionalOrder::new(0.5).is_ok());
        assert_eq!(FractionalOrder::new(0.0), Err(Error::InvalidOrder(0.0)));
        assert_eq!(FractionalOrder::new(-1.5), Err(Error::InvalidOrder(-1.5)));
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(f64::INFINITY).is_err());
    }

    #[test]
    fn fractional_order_integer_detection_is_exact() {
        assert_eq!(FractionalOrder::new(2.0).unwrap().as_integer(), Some(2));
        let nudged = FractionalOrder::new(2.0000000000000004).unwrap();
        assert_eq!(nudged.as_integer(), None);
        assert_eq!(nudged.ceil(), 3);
    }

    #[test]
    fn polynomial_canonical_form() {
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0]).coeffs(), &[1.0, 2.0]);
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(Polynomial::new(vec![1.0, 0.0, 3.0]).degree(), Some(2));
    }

    #[test]
    fn polynomial_eval_examples() {
        assert_eq!(Polynomial::zero().eval(3.0), 0.0);
        // x^2 + 1 at 2
        assert_eq!(Polynomial::new(vec![1.0, 0.0, 1.0]).eval(2.0), 5.0);
        // x^3 + 2x at 0.5
        assert_eq!(Polynomial::new(vec![0.0, 2.0, 0.0, 1.0]).eval(0.5), 1.125);
    }

    #[test]
    fn polynomial_derivative_examples() {
        let p = Polynomial::new(vec![0.0, 2.0, 0.0, 1.0]); // x^3 + 2x
        assert_eq!(p.derivative(1).coeffs(), &[2.0, 0.0, 3.0]);
        assert_eq!(p.derivative(0), p);
        assert!(p.derivative(4).is_zero());
        assert_eq!(p.derivative(3).coeffs(), &[6.0]);
    }

    #[test]
    fn first_fibonacci_polynomials() {
        assert!(fibonacci(0).is_zero());
        assert_eq!(fibonacci(1).coeffs(), &[1.0]);
        assert_eq!(fibonacci(2).coeffs(), &[0.0, 1.0]);
        assert_eq!(fibonacci(3).coeffs(), &[1.0, 0.0, 1.0]);
        assert_eq!(fibonacci(4).coeffs(), &[0.0, 2.0, 0.0, 1.0]);
        assert_eq!(fibonacci(5).coeffs(), &[1.0, 0.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn fibonacci_degree_is_index_minus_one() {
        for m in 1..=40 {
            assert_eq!(fibonacci(m).degree(), Some(m - 1));
        }
    }

    #[test]
    #[should_panic(expected = "exceeds the supported maximum")]
    fn fibonacci_rejects_oversized_index() {
        fibonacci(MAX_DEGREE + 2);
    }

    // Closed-form binomial coefficients, exact in u128 for small indices.
    fn binomial_coeff(i: usize, j: usize) -> u128 {
        let half_sum = (i + j - 1) / 2;
        let half_diff = (i - j - 1) / 2;
        let fact = |k: usize| -> u128 { (1..=k as u128).product::<u128>().max(1) };
        fact(half_sum) / fact(j) / fact(half_diff)
    }

    #[test]
    fn fibonacci_matches_binomial_expansion_exactly() {
        for i in 1..=20 {
            let p = fibonacci(i);
            for (j, &c) in p.coeffs().iter().enumerate() {
                let want = if (i + j) % 2 == 1 { binomial_coeff(i, j) as f64 } else { 0.0 };
                assert_eq!(c, want, "coefficient of x^{j} in F_{i}");
            }
        }
    }

    #[test]
    fn caputo_annihilates_low_powers() {
        // x^2 + 3, order 0.5: the constant dies, the square survives.
        let p = Polynomial::new(vec![3.0, 0.0, 1.0]);
        let d = p.caputo(FractionalOrder::new(0.5).unwrap());
        assert_eq!(d.terms().len(), 1);
        let t = d.terms()[0];
        assert_eq!(t.exponent, 1.5);
        // 2 / gamma(2.5)
        assert_close(t.coef, 1.5045055561273502, 1e-14);
        assert!(Polynomial::new(vec![7.0]).caputo(FractionalOrder::new(0.5).unwrap()).is_zero());
    }

    #[test]
    fn caputo_integer_order_is_classical() {
        let p = Polynomial::new(vec![0.0, 2.0, 0.0, 1.0]); // x^3 + 2x
        let d = p.caputo(FractionalOrder::new(2.0).unwrap());
        assert_eq!(d.terms(), &[Term { coef: 6.0, exponent: 1.0 }]);
    }

    #[test]
    // The expected coefficient happens to equal 2/sqrt(pi); it stays a frozen
    // literal rather than a reference to the stdlib constant.
    #[allow(clippy::approx_constant)]
    fn caputo_fibonacci_spot_values() {
        let half = FractionalOrder::new(0.5).unwrap();
        // F_1 is constant: annihilated.
        assert!(caputo_fibonacci(1, half).is_zero());
        // F_2 = x: 1/gamma(1.5) x^0.5 = 2/sqrt(pi) x^0.5.
        let d2 = caputo_fibonacci(2, half);
        assert_eq!(d2.terms().len(), 1);
        assert_close(d2.terms()[0].coef, 1.1283791670955126, 1e-14);
        assert_eq!(d2.terms()[0].exponent, 0.5);
        // F_3 = x^2 + 1: 2/gamma(2.5) x^1.5.
        let d3 = caputo_fibonacci(3, half);
        assert_eq!(d3.terms().len(), 1);
        assert_close(d3.terms()[0].coef, 1.5045055561273502, 1e-14);
        assert_eq!(d3.terms()[0].exponent, 1.5);
    }

    #[test]
    fn caputo_fibonacci_cutoff_matches_ceiling() {
        for &(a, expect_zero_upto) in &[(0.5, 1), (1.25, 2), (2.2, 3)] {
            let order = FractionalOrder::new(a).unwrap();
            for i in 0..=12 {
                let is_zero = caputo_fibonacci(i, order).is_zero();
                assert_eq!(is_zero, i <= expect_zero_upto, "i = {i}, order = {a}");
            }
        }
    }

    #[test]
    fn caputo_fibonacci_integer_order_keeps_low_indices() {
        // Classical first derivative of F_2 = x is 1, not zero.
        let one = FractionalOrder::new(1.0).unwrap();
        let d = caputo_fibonacci(2, one);
        assert_eq!(d.terms(), &[Term { coef: 1.0, exponent: 0.0 }]);
    }

    fn assert_series_close(a: &FracSeries, b: &FracSeries, tol: f64) {
        assert_eq!(a.terms().len(), b.terms().len(), "term counts differ: {a:?} vs {b:?}");
        for (ta, tb) in a.terms().iter().zip(b.terms()) {
            assert!((ta.exponent - tb.exponent).abs() <= tol, "{a:?} vs {b:?}");
            assert!(close(ta.coef, tb.coef, tol), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn closed_form_and_polynomial_route_agree() {
        for &a in &[0.25, 0.5, 0.75, 1.25, 1.5, 2.2, 1.0, 2.0] {
            let order = FractionalOrder::new(a).unwrap();
            for i in 0..=12 {
                let direct = caputo_fibonacci(i, order);
                let via_poly = fibonacci(i).caputo(order);
                assert_series_close(&direct, &via_poly, 1e-12);
            }
        }
    }

    #[test]
    fn series_normalization() {
        let s = FracSeries::from_terms(vec![
            Term { coef: 1.0, exponent: 2.0 },
            Term { coef: 0.5, exponent: 0.5 },
            Term { coef: -1.0, exponent: 2.0 },
            Term { coef: 0.0, exponent: 7.0 },
        ]);
        // The x^2 terms cancel, the zero term drops, one term remains.
        assert_eq!(s.terms(), &[Term { coef: 0.5, exponent: 0.5 }]);
        assert!(FracSeries::from_terms(vec![]).is_zero());
    }

    #[test]
    fn series_eval_examples() {
        assert_eq!(FracSeries::zero().eval(3.0).unwrap(), 0.0);
        let s = FracSeries::from_terms(vec![
            Term { coef: 2.0, exponent: 0.0 },
            Term { coef: 3.0, exponent: 1.5 },
        ]);
        assert_eq!(s.eval(0.0).unwrap(), 2.0);
        assert_eq!(s.eval(1.0).unwrap(), 5.0);
        assert_eq!(s.eval(-0.5), Err(Error::NegativePoint(-0.5)));
    }

    proptest! {
        #[test]
        fn gamma_recursion_holds(x in 0.1f64..80.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12), "x = {x}: {lhs} vs {rhs}");
        }

        #[test]
        fn fibonacci_recurrence_holds(m in 2usize..30, x in -2.0f64..2.0) {
            let lhs = fibonacci(m).eval(x);
            let rhs = x * fibonacci(m - 1).eval(x) + fibonacci(m - 2).eval(x);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn caputo_is_linear(
            c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0,
            d0 in -3.0f64..3.0, d1 in -3.0f64..3.0, d3 in -3.0f64..3.0,
            a in prop::sample::select(vec![0.25, 0.5, 0.75, 1.25, 1.5]),
            x in 0.0f64..2.0,
        ) {
            let order = FractionalOrder::new(a).unwrap();
            let p = Polynomial::new(vec![c0, c1, c2]);
            let q = Polynomial::new(vec![d0, d1, 0.0, d3]);
            let joint = p.add(&q).caputo(order).eval(x).unwrap();
            let split = p.caputo(order).eval(x).unwrap() + q.caputo(order).eval(x).unwrap();
            prop_assert!((joint - split).abs() <= 1e-12 * (1.0 + split.abs()));
        }

        #[test]
        fn polynomial_derivative_matches_difference_quotient(
            c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in -2.0f64..2.0,
            x in -1.0f64..1.0,
        ) {
            let p = Polynomial::new(vec![c0, c1, c2, c3]);
            let h = 1e-6;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            let exact = p.derivative(1).eval(x);
            prop_assert!((fd - exact).abs() <= 1e-7 * (1.0 + exact.abs()));
        }
    }
}
