//! Exact feasibility of `{x ≥ 0 : Ax = b}` over the rationals.
//!
//! Phase one of the simplex method with Bland's least-index rule, so every
//! run terminates and the witness is fully determined by the input. The
//! tableau is kept fraction-free over `i128` where possible, with an exact
//! rational tableau taking over on overflow; both follow the same pivots.

use crate::model::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("row {row} has {found} coefficients, expected {expected}")]
    Shape { row: usize, expected: usize, found: usize },
}

/// Equality rows over `num_vars` nonnegative variables.
#[derive(Debug, Clone, Default)]
pub struct LinSystem {
    pub num_vars: usize,
    pub rows: Vec<(Vec<Rational>, Rational)>,
}

impl LinSystem {
    pub fn new(num_vars: usize) -> Self {
        LinSystem {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, coefficients: Vec<Rational>, rhs: Rational) {
        self.rows.push((coefficients, rhs));
    }

    /// Adds a row given as sparse `(variable, coefficient)` terms.
    pub fn push_sparse(&mut self, terms: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) {
        let mut row = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            row[var] += c;
        }
        self.rows.push((row, rhs));
    }

    /// True iff `x` is nonnegative and satisfies every row exactly.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|(coef, rhs)| {
                let lhs: Rational = coef.iter().zip(x).map(|(a, v)| a * v).sum();
                lhs == *rhs
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }

    pub fn witness(self) -> Option<Vec<Rational>> {
        match self {
            LpOutcome::Feasible(x) => Some(x),
            LpOutcome::Infeasible => None,
        }
    }
}

struct Tableau {
    // m rows of n + m entries (original columns, then one artificial per row)
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    // reduced costs of the phase-one objective Σ artificials
    cost: Vec<Rational>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col].clone();
        if !piv.is_one() {
            for v in self.a[row].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &piv;
                }
            }
            self.b[row] = &self.b[row] / &piv;
        }
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &(&factor * p);
                }
            }
            self.b[i] -= &(&factor * &pivot_rhs);
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &(&factor * p);
                }
            }
        }
        self.basis[row] = col;
    }

    fn entering(&self) -> Option<usize> {
        self.cost.iter().position(Rational::is_negative)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, r) in self.a.iter().enumerate() {
            if !r[col].is_positive() {
                continue;
            }
            let ratio = &self.b[i] / &r[col];
            best = match best {
                None => Some((i, ratio)),
                Some((j, cur)) => {
                    if ratio < cur || (ratio == cur && self.basis[i] < self.basis[j]) {
                        Some((i, ratio))
                    } else {
                        Some((j, cur))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }
}

/// Decides whether `{x ≥ 0 : Ax = b}` is nonempty, returning an exact
/// basic feasible witness when it is.
pub fn feasible(sys: &LinSystem) -> Result<LpOutcome, LpError> {
    let n = sys.num_vars;
    for (row, (coef, _)) in sys.rows.iter().enumerate() {
        if coef.len() != n {
            return Err(LpError::Shape {
                row,
                expected: n,
                found: coef.len(),
            });
        }
    }
    if sys.rows.is_empty() {
        return Ok(LpOutcome::Feasible(vec![Rational::zero(); n]));
    }
    let outcome = small_rows(sys)
        .and_then(|(a, b)| IntTableau::new(n, a, b).solve())
        .unwrap_or_else(|| solve_rational(n, &scaled_rows(sys)));
    debug_assert!(outcome.clone().witness().map_or(true, |x| sys.satisfied_by(&x)));
    Ok(outcome)
}

// Every row is cleared of denominators and common factors (when these are
// small) and negated when its right-hand side is negative. Both tableaux
// see the same system and so make the same pivots.

fn row_lcm(coef: &[Rational], rhs: &Rational) -> Option<i64> {
    let mut lcm: i64 = 1;
    for v in coef.iter().chain(std::iter::once(rhs)) {
        let (_, d) = v.small_parts()?;
        lcm = (lcm / gcd(lcm, d)).checked_mul(d)?;
    }
    Some(lcm)
}

/// Row multiplier: lcm of denominators over gcd of the resulting numerators,
/// signed so the right-hand side becomes nonnegative.
fn row_scale(coef: &[Rational], rhs: &Rational) -> Option<Rational> {
    let lcm = row_lcm(coef, rhs)?;
    let mut g: i64 = 0;
    for v in coef.iter().chain(std::iter::once(rhs)) {
        let (n, d) = v.small_parts()?;
        g = gcd(g, n.checked_mul(lcm / d)?);
    }
    let g = g.max(1);
    let sign = if rhs.is_negative() { -1 } else { 1 };
    Some(Rational::new(sign * lcm, g))
}

fn small_rows(sys: &LinSystem) -> Option<(Vec<Vec<i128>>, Vec<i128>)> {
    let mut a = Vec::with_capacity(sys.rows.len());
    let mut b = Vec::with_capacity(sys.rows.len());
    for (coef, rhs) in &sys.rows {
        let k = row_scale(coef, rhs)?;
        let int = |v: &Rational| -> Option<i128> {
            let (n, d) = (v * &k).small_parts()?;
            debug_assert_eq!(d, 1);
            Some(n as i128)
        };
        a.push(coef.iter().map(int).collect::<Option<Vec<_>>>()?);
        b.push(int(rhs)?);
    }
    Some((a, b))
}

fn scaled_rows(sys: &LinSystem) -> Vec<(Vec<Rational>, Rational)> {
    sys.rows
        .iter()
        .map(|(coef, rhs)| {
            let k = row_scale(coef, rhs)
                .unwrap_or_else(|| Rational::from_integer(if rhs.is_negative() { -1 } else { 1 }));
            (coef.iter().map(|v| v * &k).collect(), rhs * &k)
        })
        .collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn solve_rational(n: usize, rows: &[(Vec<Rational>, Rational)]) -> LpOutcome {
    let m = rows.len();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (i, (coef, rhs)) in rows.iter().enumerate() {
        let mut row = coef.clone();
        row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        a.push(row);
        b.push(rhs.clone());
    }
    let mut cost = vec![Rational::zero(); n + m];
    for row in &a {
        for (c, v) in cost.iter_mut().zip(row.iter().take(n)) {
            if !v.is_zero() {
                *c -= v;
            }
        }
    }
    let mut t = Tableau {
        a,
        b,
        basis: (n..n + m).collect(),
        cost,
    };

    while let Some(col) = t.entering() {
        // the phase-one objective is bounded below by zero, so a leaving row exists
        let row = t.leaving(col).expect("phase-one objective is bounded");
        t.pivot(row, col);
    }

    let residual: Rational = t
        .basis
        .iter()
        .zip(&t.b)
        .filter(|(&var, _)| var >= n)
        .map(|(_, v)| v)
        .sum();
    if residual.is_positive() {
        return LpOutcome::Infeasible;
    }
    let mut x = vec![Rational::zero(); n];
    for (&var, v) in t.basis.iter().zip(&t.b) {
        if var < n {
            x[var] = v.clone();
        }
    }
    LpOutcome::Feasible(x)
}

/// Fraction-free (Bareiss) form of the same tableau: the rational tableau
/// is `a / d`, so pivot choices coincide with [`solve_rational`]. Any
/// overflow or inexact division abandons the attempt.
struct IntTableau {
    n: usize,
    a: Vec<Vec<i128>>,
    b: Vec<i128>,
    cost: Vec<i128>,
    basis: Vec<usize>,
    d: i128,
}

impl IntTableau {
    fn new(n: usize, rows: Vec<Vec<i128>>, b: Vec<i128>) -> Self {
        let m = rows.len();
        let mut a = rows;
        for (i, row) in a.iter_mut().enumerate() {
            row.extend((0..m).map(|k| i128::from(k == i)));
        }
        let mut cost = vec![0i128; n + m];
        for row in &a {
            for (c, v) in cost.iter_mut().zip(row.iter().take(n)) {
                *c -= v;
            }
        }
        IntTableau {
            n,
            a,
            b,
            cost,
            basis: (n..n + m).collect(),
            d: 1,
        }
    }

    fn positive(&self, v: i128) -> bool {
        v != 0 && (v > 0) == (self.d > 0)
    }

    fn entering(&self) -> Option<usize> {
        self.cost.iter().position(|&c| c != 0 && (c < 0) == (self.d > 0))
    }

    fn leaving(&self, col: usize) -> Option<Option<usize>> {
        let mut best: Option<usize> = None;
        for i in 0..self.a.len() {
            if !self.positive(self.a[i][col]) {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(j) => {
                    let lhs = self.b[i].checked_mul(self.a[j][col]);
                    let rhs = self.b[j].checked_mul(self.a[i][col]);
                    let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
                        return None;
                    };
                    if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[j]) {
                        i
                    } else {
                        j
                    }
                }
            });
        }
        Some(best)
    }

    /// `(v·p − f·r) / d`, exact for Bareiss updates.
    fn update(v: i128, p: i128, f: i128, r: i128, d: i128) -> Option<i128> {
        let num = v.checked_mul(p)?.checked_sub(f.checked_mul(r)?)?;
        let q = match (i64::try_from(num), i64::try_from(d)) {
            (Ok(x), Ok(y)) => (x / y) as i128,
            _ => num / d,
        };
        debug_assert_eq!(q * d, num);
        Some(q)
    }

    fn pivot(&mut self, row: usize, col: usize) -> Option<()> {
        let p = self.a[row][col];
        let d = self.d;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row];
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let f = self.a[i][col];
            for (v, &r) in self.a[i].iter_mut().zip(&pivot_row) {
                *v = Self::update(*v, p, f, r, d)?;
            }
            self.b[i] = Self::update(self.b[i], p, f, pivot_rhs, d)?;
        }
        let f = self.cost[col];
        for (v, &r) in self.cost.iter_mut().zip(&pivot_row) {
            *v = Self::update(*v, p, f, r, d)?;
        }
        self.basis[row] = col;
        self.d = p;
        Some(())
    }

    fn solve(mut self) -> Option<LpOutcome> {
        while let Some(col) = self.entering() {
            let row = self.leaving(col)?.expect("phase-one objective is bounded");
            self.pivot(row, col)?;
        }
        let n = self.n;
        let mut residual: i128 = 0;
        for (&var, &v) in self.basis.iter().zip(&self.b) {
            if var >= n {
                residual = residual.checked_add(v)?;
            }
        }
        if residual != 0 && (residual > 0) == (self.d > 0) {
            return Some(LpOutcome::Infeasible);
        }
        let mut x = vec![Rational::zero(); n];
        for (&var, &v) in self.basis.iter().zip(&self.b) {
            if var < n {
                x[var] = Rational::from_i128(v, self.d);
            }
        }
        Some(LpOutcome::Feasible(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn hull_membership_from_figure_caption() {
        // λ1·(½y1+½y2) + λ2·y3 = ¼y1+¼y2+½y3
        let mut sys = LinSystem::new(2);
        sys.push_row(vec![r(1, 2), r(0, 1)], r(1, 4));
        sys.push_row(vec![r(1, 2), r(0, 1)], r(1, 4));
        sys.push_row(vec![r(0, 1), r(1, 1)], r(1, 2));
        sys.push_row(vec![r(1, 1), r(1, 1)], r(1, 1));
        assert_eq!(feasible(&sys).unwrap(), LpOutcome::Feasible(vec![r(1, 2), r(1, 2)]));
    }

    #[test]
    fn negative_forced_value_is_infeasible() {
        let mut sys = LinSystem::new(2);
        sys.push_row(vec![r(1, 1), r(1, 1)], r(1, 1));
        sys.push_row(vec![r(1, 1), r(-1, 1)], r(2, 1));
        assert_eq!(feasible(&sys).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn empty_system() {
        assert_eq!(feasible(&LinSystem::new(0)).unwrap(), LpOutcome::Feasible(vec![]));
    }

    #[test]
    fn shape_error() {
        let mut sys = LinSystem::new(2);
        sys.push_row(vec![r(1, 1)], r(1, 1));
        assert!(matches!(feasible(&sys), Err(LpError::Shape { row: 0, .. })));
    }

    #[test]
    fn zero_row_with_nonzero_rhs() {
        let mut sys = LinSystem::new(1);
        sys.push_row(vec![r(0, 1)], r(1, 3));
        assert_eq!(feasible(&sys).unwrap(), LpOutcome::Infeasible);
        let mut sys = LinSystem::new(1);
        sys.push_row(vec![r(0, 1)], r(0, 1));
        assert!(feasible(&sys).unwrap().is_feasible());
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let mut sys = LinSystem::new(3);
        sys.push_row(vec![r(1, 1), r(1, 1), r(1, 1)], r(1, 1));
        sys.push_row(vec![r(2, 1), r(2, 1), r(2, 1)], r(2, 1));
        sys.push_row(vec![r(-1, 1), r(0, 1), r(0, 1)], r(-1, 3));
        let x = feasible(&sys).unwrap().witness().unwrap();
        assert!(sys.satisfied_by(&x));
        assert_eq!(x[0], r(1, 3));
    }
}
