//! Feasibility of small integer programs `Σ a_j x_j ▷ b` over nonnegative
//! integers, in exact arithmetic: a two-phase rational simplex (Bland's rule)
//! inside depth-first branch and bound.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Int;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpRow {
    /// One coefficient per variable.
    pub coeffs: Vec<Int>,
    pub rel: Rel,
    pub rhs: Int,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IlpProblem {
    pub num_vars: usize,
    pub rows: Vec<IlpRow>,
}

/// The budget ran out during the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exhausted(pub String);

impl IlpProblem {
    pub fn new(num_vars: usize) -> Self {
        IlpProblem { num_vars, rows: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Int>, rel: Rel, rhs: impl Into<Int>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(IlpRow { coeffs, rel, rhs: rhs.into() });
    }

    pub fn satisfied_by(&self, x: &[Int]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|r| {
                let lhs: Int = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.rel {
                    Rel::Ge => lhs >= r.rhs,
                    Rel::Le => lhs <= r.rhs,
                }
            })
    }
}

/// Complete and sound feasibility check without a budget. Among the
/// solutions the first one found minimizes `Σ x_j` in the LP relaxation of
/// each branch, which keeps witnesses small.
pub fn ilp_feasible(p: &IlpProblem) -> Option<Vec<Int>> {
    ilp_feasible_with(p, &mut || Ok(())).expect("no budget")
}

/// Like [`ilp_feasible`]; `tick` is called once per branch-and-bound node
/// and may abort the search.
pub fn ilp_feasible_with(
    p: &IlpProblem,
    tick: &mut dyn FnMut() -> Result<(), Exhausted>,
) -> Result<Option<Vec<Int>>, Exhausted> {
    let n = p.num_vars;
    let mut rows = Vec::with_capacity(p.rows.len());
    for r in &p.rows {
        match tighten(r) {
            Tightened::Trivial => {}
            Tightened::Infeasible => return Ok(None),
            Tightened::Row(r) => rows.push(r),
        }
    }
    if rows.is_empty() {
        return Ok(Some(vec![Int::zero(); n]));
    }
    // Branches only ever narrow `[lo, min(hi, cap)]`, so the search is finite.
    let cap = small_solution_bound(n, &rows);
    let mut stack: Vec<Vec<(Int, Option<Int>)>> = vec![vec![(Int::zero(), None); n]];
    while let Some(bounds) = stack.pop() {
        tick()?;
        let Some(x) = solve_lp(n, &rows, &bounds) else { continue };
        match x.iter().position(|v| !v.is_integer()) {
            None => {
                let sol: Vec<Int> = x.into_iter().map(|v| v.to_integer()).collect();
                debug_assert!(p.satisfied_by(&sol));
                return Ok(Some(sol));
            }
            Some(j) => {
                let lo = x[j].floor().to_integer();
                let next = &lo + 1;
                if next <= cap {
                    let mut up = bounds.clone();
                    up[j].0 = next;
                    stack.push(up);
                }
                let mut down = bounds;
                down[j].1 = Some(lo.min(cap.clone()));
                stack.push(down);
            }
        }
    }
    Ok(None)
}

enum Tightened {
    Trivial,
    Infeasible,
    Row(IlpRow),
}

/// Divides a row by the gcd of its coefficients, rounding the bound inward.
fn tighten(r: &IlpRow) -> Tightened {
    let g = r.coeffs.iter().fold(Int::zero(), |g, a| g.gcd(a));
    if g.is_zero() {
        let ok = match r.rel {
            Rel::Ge => !r.rhs.is_positive(),
            Rel::Le => !r.rhs.is_negative(),
        };
        return if ok { Tightened::Trivial } else { Tightened::Infeasible };
    }
    let coeffs = r.coeffs.iter().map(|a| a / &g).collect();
    let rhs = match r.rel {
        Rel::Ge => r.rhs.div_ceil(&g),
        Rel::Le => r.rhs.div_floor(&g),
    };
    Tightened::Row(IlpRow { coeffs, rel: r.rel, rhs })
}

/// If the system has a nonnegative integer solution it has one with every
/// component at most `n·(m·a)^(2m+1)`, `a` the largest absolute entry.
fn small_solution_bound(n: usize, rows: &[IlpRow]) -> Int {
    let m = rows.len();
    let a = rows
        .iter()
        .flat_map(|r| r.coeffs.iter().chain(std::iter::once(&r.rhs)))
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Int::one)
        .max(Int::one());
    let base = a * Int::from(m);
    Int::from(n.max(1)) * num_traits::pow(base, 2 * m + 1)
}

type Q = BigRational;

/// Minimizes `Σ x_j` subject to the rows and `lo_j <= x_j <= hi_j`.
fn solve_lp(n: usize, rows: &[IlpRow], bounds: &[(Int, Option<Int>)]) -> Option<Vec<Q>> {
    // Shift x = lo + y, y >= 0.
    let mut cons: Vec<(Vec<Q>, Rel, Q)> = Vec::new();
    for r in rows {
        let shift: Int = r.coeffs.iter().zip(bounds).map(|(a, (lo, _))| a * lo).sum();
        cons.push((r.coeffs.iter().map(|a| Q::from_integer(a.clone())).collect(), r.rel, Q::from_integer(&r.rhs - shift)));
    }
    for (j, (lo, hi)) in bounds.iter().enumerate() {
        let Some(hi) = hi else { continue };
        if hi < lo {
            return None;
        }
        let mut e = vec![Q::zero(); n];
        e[j] = Q::one();
        cons.push((e, Rel::Le, Q::from_integer(hi - lo)));
    }
    let y = simplex_min_sum(n, cons)?;
    Some(y.into_iter().zip(bounds).map(|(v, (lo, _))| v + Q::from_integer(lo.clone())).collect())
}

/// Dense two-phase simplex for `min Σ y` over `y >= 0`.
fn simplex_min_sum(n: usize, cons: Vec<(Vec<Q>, Rel, Q)>) -> Option<Vec<Q>> {
    let m = cons.len();
    // Columns: y (n), slacks (m), artificials (m), then the right-hand side.
    let width = n + 2 * m + 1;
    let rhs_col = width - 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (a, rel, b)) in cons.into_iter().enumerate() {
        let mut row = vec![Q::zero(); width];
        for (j, v) in a.into_iter().enumerate() {
            row[j] = v;
        }
        row[n + i] = match rel {
            Rel::Ge => -Q::one(),
            Rel::Le => Q::one(),
        };
        row[rhs_col] = b;
        if row[rhs_col].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[n + m + i] = Q::one();
        t.push(row);
        basis.push(n + m + i);
    }
    // Phase one: minimize the sum of artificials.
    let phase1: Vec<Q> = (0..width - 1).map(|j| if j >= n + m { Q::one() } else { Q::zero() }).collect();
    let obj = run_simplex(&mut t, &mut basis, &phase1, width - 1);
    if obj.is_positive() {
        return None;
    }
    // Drive artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(j) = (0..n + m).find(|j| !t[i][*j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let phase2: Vec<Q> = (0..width - 1).map(|j| if j < n { Q::one() } else { Q::zero() }).collect();
    run_simplex(&mut t, &mut basis, &phase2, n + m);
    let mut y = vec![Q::zero(); n];
    for (i, b) in basis.iter().enumerate() {
        if *b < n {
            y[*b] = t[i][rhs_col].clone();
        }
    }
    Some(y)
}

/// Minimizes `cost · x` from the current basic feasible solution, entering
/// only columns below `limit`. Returns the optimal value. The objective is
/// bounded below in both phases.
fn run_simplex(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], limit: usize) -> Q {
    let rhs_col = cost.len();
    loop {
        // Reduced costs c_j - c_B · column_j.
        let entering = (0..limit).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut r = cost[j].clone();
            for (i, b) in basis.iter().enumerate() {
                if !cost[*b].is_zero() && !t[i][j].is_zero() {
                    r -= &cost[*b] * &t[i][j];
                }
            }
            r.is_negative()
        });
        let Some(j) = entering else {
            return basis.iter().enumerate().map(|(i, b)| &cost[*b] * &t[i][rhs_col]).sum();
        };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][rhs_col] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (i, _) = leave.expect("objective bounded below");
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::ints;
    use proptest::prelude::*;

    fn brute(rows: &[(Vec<i64>, bool, i64)], n: usize, cap: i64) -> bool {
        let holds = |x: &[i64]| {
            rows.iter().all(|(c, ge, b)| {
                let lhs: i64 = c.iter().zip(x).map(|(a, v)| a * v).sum();
                if *ge { lhs >= *b } else { lhs <= *b }
            })
        };
        let mut x = vec![0i64; n];
        loop {
            if holds(&x) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == n {
                    return false;
                }
                x[k] += 1;
                if x[k] <= cap {
                    break;
                }
                x[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn empty_system_is_feasible() {
        assert_eq!(ilp_feasible(&IlpProblem::new(3)), Some(ints(&[0, 0, 0])));
    }

    #[test]
    fn empty_interval() {
        let mut p = IlpProblem::new(1);
        p.push(ints(&[1]), Rel::Ge, 3);
        p.push(ints(&[1]), Rel::Le, 2);
        assert_eq!(ilp_feasible(&p), None);
    }

    #[test]
    fn three_x_minus_seven() {
        let mut p = IlpProblem::new(1);
        p.push(ints(&[3]), Rel::Ge, 8);
        assert_eq!(ilp_feasible(&p), Some(ints(&[3])));
    }

    #[test]
    fn parity_needs_rounding() {
        let mut p = IlpProblem::new(2);
        p.push(ints(&[2, -2]), Rel::Ge, 1);
        p.push(ints(&[2, -2]), Rel::Le, 1);
        assert_eq!(ilp_feasible(&p), None);
        let mut p = IlpProblem::new(2);
        p.push(ints(&[3, 5]), Rel::Ge, 7);
        p.push(ints(&[3, 5]), Rel::Le, 7);
        assert_eq!(ilp_feasible(&p), None);
        let mut p = IlpProblem::new(2);
        p.push(ints(&[3, 5]), Rel::Ge, 8);
        p.push(ints(&[3, 5]), Rel::Le, 8);
        assert_eq!(ilp_feasible(&p), Some(ints(&[1, 1])));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_bounded_enumeration(
            n in 1usize..=3,
            raw in prop::collection::vec((prop::collection::vec(-5i64..=5, 3), any::<bool>(), -10i64..=10), 0..4),
        ) {
            let mut p = IlpProblem::new(n);
            for (c, ge, b) in &raw {
                p.push(ints(&c[..n]), if *ge { Rel::Ge } else { Rel::Le }, *b);
            }
            let rows: Vec<(Vec<i64>, bool, i64)> = raw.iter().map(|(c, ge, b)| (c[..n].to_vec(), *ge, *b)).collect();
            let got = ilp_feasible(&p);
            if let Some(x) = &got {
                prop_assert!(p.satisfied_by(x));
            }
            if brute(&rows, n, 30) {
                prop_assert!(got.is_some());
            }
        }
    }
}
