//! Solving types against constraints, multiplicities, and the count.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::enumerate::{enumerate_for_problem, enumerate_line, fingerprint, TypeCatalog};
use crate::error::{Error, Result};
use crate::linalg::{lattice_index, smith_normal_form, solve_affine, AffineSolve, Int, IntMatrix, Matrix, Rational};
use crate::problem::{AffineConstraint, Problem};
use crate::tropical::{aut_delta, CombinatorialType, TropicalCurve};

fn int(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// One rigid curve and the factors of its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub curve: TropicalCurve,
    pub index_phi: Int,
    pub vertex_factors: Vec<Int>,
    pub aut: u64,
    pub edge_weight_product: Int,
    pub constraint_weight_product: Int,
    pub mult: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub problem: Problem,
    pub contributions: Vec<Contribution>,
    /// Value of the single-edge formula when the degree has two ends and
    /// there are no markings; `None` otherwise.
    pub closed_form: Option<Rational>,
    pub total: Rational,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Curve(TropicalCurve),
    NoSolution,
    NonRigid,
    NonGeneric(String),
}

// ---------------------------------------------------------------------------
// Φ

fn block_rows(q: &IntMatrix, width: usize, col: usize, sign: i64) -> Vec<Vec<Int>> {
    q.rows()
        .map(|r| {
            let mut row = vec![Int::zero(); width];
            for (k, x) in r.iter().enumerate() {
                row[col + k] = x * sign;
            }
            row
        })
        .collect()
}

fn edge_quotient(u: &[i64]) -> IntMatrix {
    crate::linalg::quotient_map(u.len(), &[crate::linalg::int_vec(u)]).expect("nonzero direction")
}

/// Matrix of `Φ : ∏_V Z^n -> ∏_E Z^n/Z u_E × ∏_i Z^n/L_N(A_i) × ∏_j Z^n/L_N(B_j)`.
/// Vertex `v` owns columns `v·n .. v·n + n`.
pub fn build_phi(t: &CombinatorialType, problem: &Problem) -> IntMatrix {
    let n = t.n;
    let width = n * t.vertex_count;
    let mut m = Matrix::zeros(0, width);
    let mut rows = Vec::new();
    for e in &t.edges {
        let q = edge_quotient(&e.direction);
        let head = block_rows(&q, width, e.head * n, 1);
        let tail = block_rows(&q, width, e.tail * n, -1);
        for (mut h, tl) in head.into_iter().zip(tail) {
            for (a, b) in h.iter_mut().zip(tl) {
                *a += b;
            }
            rows.push(h);
        }
    }
    for (i, c) in problem.markings().iter().enumerate() {
        rows.extend(block_rows(c.constraint.quotient_rows(), width, t.markings[i] * n, 1));
    }
    for b in problem.boundary() {
        if let Some(l) = t.leg(b.end) {
            rows.extend(block_rows(b.constraint.quotient_rows(), width, l.vertex * n, 1));
        }
    }
    for r in rows {
        m.push_row(r);
    }
    m
}

// ---------------------------------------------------------------------------
// Positions

fn constraint_rows(c: &AffineConstraint, width: usize, col: usize) -> Vec<(Vec<Rational>, Rational)> {
    c.quotient_rows()
        .rows()
        .map(|r| {
            let mut row = vec![Rational::zero(); width];
            let mut b = Rational::zero();
            for k in 0..c.n() {
                row[col + k] = Rational::from_integer(r[k].clone());
                b += &row[col + k] * &c.base()[k];
            }
            (row, b)
        })
        .collect()
}

/// Whether `c0 + c·t > 0` holds for all forms at some `t`, by
/// Fourier–Motzkin elimination.
pub(crate) fn strictly_feasible(mut forms: Vec<(Rational, Vec<Rational>)>, vars: usize) -> bool {
    for k in (0..vars).rev() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for f in forms {
            if f.1[k].is_positive() {
                pos.push(f);
            } else if f.1[k].is_negative() {
                neg.push(f);
            } else {
                rest.push(f);
            }
        }
        for p in &pos {
            for q in &neg {
                let (sp, sq) = (p.1[k].clone(), -q.1[k].clone());
                let c0 = &p.0 / &sp + &q.0 / &sq;
                let c: Vec<Rational> = p.1.iter().zip(&q.1).map(|(a, b)| a / &sp + b / &sq).collect();
                if c.iter().all(Zero::is_zero) && !c0.is_positive() {
                    return false;
                }
                rest.push((c0, c));
            }
        }
        rest.sort();
        rest.dedup();
        forms = rest;
    }
    forms.iter().all(|f| f.0.is_positive())
}

/// Solves `h(head) - h(tail) = ℓ u`, `h(V_i) ∈ A_i`, `h(∂E_j) ∈ B_j` for
/// positions and lengths.
pub fn solve_positions(t: &CombinatorialType, problem: &Problem) -> SolveOutcome {
    let n = t.n;
    let nv = t.vertex_count;
    let width = n * nv + t.edges.len();
    let mut a = Matrix::zeros(0, width);
    let mut b = Vec::new();
    for (ei, e) in t.edges.iter().enumerate() {
        for k in 0..n {
            let mut row = vec![Rational::zero(); width];
            row[e.head * n + k] += int(1);
            row[e.tail * n + k] -= int(1);
            row[n * nv + ei] = int(-e.direction[k]);
            a.push_row(row);
            b.push(Rational::zero());
        }
    }
    let mut add = |rows: Vec<(Vec<Rational>, Rational)>| {
        for (r, x) in rows {
            a.push_row(r);
            b.push(x);
        }
    };
    for (i, c) in problem.markings().iter().enumerate() {
        add(constraint_rows(&c.constraint, width, t.markings[i] * n));
    }
    for bc in problem.boundary() {
        if let Some(l) = t.leg(bc.end) {
            add(constraint_rows(&bc.constraint, width, l.vertex * n));
        }
    }
    let sol = match solve_affine(&a, &b).expect("consistent shapes") {
        AffineSolve::Infeasible => return SolveOutcome::NoSolution,
        AffineSolve::Solved(s) => s,
    };
    let length_forms: Vec<(Rational, Vec<Rational>)> = (0..t.edges.len())
        .map(|ei| {
            let u = n * nv + ei;
            (sol.particular[u].clone(), sol.kernel.iter().map(|k| k[u].clone()).collect())
        })
        .collect();
    if !sol.kernel.is_empty() {
        return if strictly_feasible(length_forms, sol.kernel.len()) {
            SolveOutcome::NonRigid
        } else {
            SolveOutcome::NoSolution
        };
    }
    let lengths: Vec<Rational> = length_forms.into_iter().map(|f| f.0).collect();
    if lengths.iter().any(|l| l.is_negative()) {
        return SolveOutcome::NoSolution;
    }
    if let Some(i) = lengths.iter().position(|l| l.is_zero()) {
        return SolveOutcome::NonGeneric(format!("compact edge {i} is forced to length zero"));
    }
    let positions: Vec<Vec<Rational>> = (0..nv).map(|v| sol.particular[v * n..v * n + n].to_vec()).collect();
    if t.genus() == 0 {
        for v in 0..nv {
            for w in v + 1..nv {
                if positions[v] == positions[w] {
                    return SolveOutcome::NonGeneric(format!("vertices {v} and {w} have the same image"));
                }
            }
        }
    }
    SolveOutcome::Curve(TropicalCurve::new(t.clone(), positions, lengths).expect("solution satisfies the type"))
}

// ---------------------------------------------------------------------------
// Multiplicity

fn factorial(k: u64) -> Int {
    (1..=k).fold(Int::one(), |acc, i| acc * i)
}

/// `⟨V⟩ = ov(V)! / ∏ s_i!` over the markings at `v`.
pub fn vertex_factor(t: &CombinatorialType, v: usize, psi: &[u32]) -> Result<Int> {
    let ov = t.over_valence(v)?;
    let exps: Vec<u64> = t.marks_at(v).map(|i| psi[i] as u64).collect();
    let sum: u64 = exps.iter().sum();
    if sum != ov {
        return Err(Error::PsiMismatch { vertex: v, over_valence: ov, psi_sum: sum });
    }
    Ok(exps.iter().fold(factorial(ov), |acc, &s| acc / factorial(s)))
}

pub fn multiplicity(c: &TropicalCurve, problem: &Problem) -> Result<Contribution> {
    let t = &c.ty;
    let index_phi = lattice_index(&build_phi(t, problem))
        .map_err(|_| Error::NonRigid("the map on vertex positions is not of finite index".into()))?;
    let psi = problem.psi();
    let vertex_factors = (0..t.vertex_count).map(|v| vertex_factor(t, v, &psi)).collect::<Result<Vec<_>>>()?;
    let aut = c.automorphism_count();
    let edge_weight_product: Int = t.edges.iter().map(|e| Int::from(e.weight)).product();
    let constraint_weight_product: Int = problem
        .markings()
        .iter()
        .map(|m| m.constraint.weight())
        .chain(problem.boundary().iter().map(|b| b.constraint.weight()))
        .map(Int::from)
        .product();
    let numerator: Int = vertex_factors.iter().product::<Int>() * &index_phi * &edge_weight_product * &constraint_weight_product;
    let mult = Rational::new(numerator, Int::from(aut));
    Ok(Contribution { curve: c.clone(), index_phi, vertex_factors, aut, edge_weight_product, constraint_weight_product, mult })
}

// ---------------------------------------------------------------------------
// Count

/// `(1/w) · index(Z^n/Z u -> Z^n/L_N(B_1) ⊕ Z^n/L_N(B_2))` for a degree with
/// two ends and no markings, times the constraint weights.
fn vertexless(problem: &Problem) -> Result<Rational> {
    let n = problem.n();
    let end = &problem.degree().ends()[0];
    let everything = AffineConstraint::everything(n);
    let b1 = problem.boundary_for(1).unwrap_or(&everything);
    let b2 = problem.boundary_for(2).unwrap_or(&everything);
    let mut a = Matrix::zeros(0, n);
    let mut rhs = Vec::new();
    for c in [b1, b2] {
        for (r, x) in constraint_rows(c, n, 0) {
            a.push_row(r);
            rhs.push(x);
        }
    }
    let sol = match solve_affine(&a, &rhs)? {
        AffineSolve::Infeasible => return Ok(Rational::zero()),
        AffineSolve::Solved(s) => s,
    };
    if sol.kernel.len() != 1 || n - 1 < a.nrows() {
        return Err(Error::NonGeneric("the two boundary constraints on the single edge are not transverse".into()));
    }
    // complete u to a basis of Z^n; the other columns present Z^n / Z u
    let mut col = Matrix::zeros(n, 1);
    for k in 0..n {
        col[(k, 0)] = Int::from(end.direction[k]);
    }
    let snf = smith_normal_form(&col);
    let mut phi = Matrix::zeros(0, n - 1);
    for c in [b1, b2] {
        for r in c.quotient_rows().rows() {
            phi.push_row((1..n).map(|j| (0..n).map(|k| &r[k] * &snf.u_inv[(k, j)]).sum()).collect());
        }
    }
    let index = lattice_index(&phi).map_err(|_| Error::NonGeneric("single edge is not rigid".into()))?;
    let weights = Int::from(b1.weight()) * Int::from(b2.weight());
    Ok(Rational::new(index * weights, Int::from(end.weight)))
}

/// True for rank-1 problems shaped like a Hurwitz count: every marking a
/// point with psi exponent 1.
fn hurwitz_shaped(problem: &Problem) -> bool {
    problem.n() == 1 && problem.markings().iter().all(|c| c.psi == 1 && c.constraint.codim() == 1)
}

fn line_types(problem: &Problem) -> Result<TypeCatalog> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for e in problem.degree().ends() {
        if e.direction[0] < 0 {
            left.push(e);
        } else {
            right.push(e);
        }
    }
    let alpha: Vec<u64> = left.iter().map(|e| e.weight).collect();
    let beta: Vec<u64> = right.iter().map(|e| e.weight).collect();
    let relabel: Vec<usize> = left.iter().chain(&right).map(|e| e.label).collect();
    // vertex i of a sweep type is the i-th point from the left
    let mut order: Vec<usize> = (0..problem.m()).collect();
    order.sort_by(|&i, &j| problem.markings()[i].constraint.base()[0].cmp(&problem.markings()[j].constraint.base()[0]));
    for w in order.windows(2) {
        if problem.markings()[w[0]].constraint.base() == problem.markings()[w[1]].constraint.base() {
            return Err(Error::NonGeneric(format!("markings {} and {} are at the same point", w[0] + 1, w[1] + 1)));
        }
    }
    let catalog = enumerate_line(problem.genus(), &alpha, &beta)?;
    let identity = relabel.iter().enumerate().all(|(i, &l)| l == i + 1) && order.iter().enumerate().all(|(i, &j)| i == j);
    if identity {
        return Ok(catalog);
    }
    let fingerprint = catalog.fingerprint.clone();
    let types = catalog.entries.into_iter().map(|e| {
            let mut t = e.ty;
            for l in &mut t.legs {
                l.label = relabel[l.label - 1];
            }
            t.legs.sort_by_key(|l| l.label);
            let mut markings = vec![0; t.markings.len()];
            for (pos, &i) in order.iter().enumerate() {
                markings[i] = t.markings[pos];
            }
            t.markings = markings;
            t
        });
    Ok(TypeCatalog::from_types(fingerprint, types))
}

/// Candidate types for the problem: supplied types if present, otherwise
/// enumerated ones.
pub fn candidate_types(problem: &Problem) -> Result<TypeCatalog> {
    if !problem.user_types().is_empty() {
        let fingerprint = fingerprint(problem.degree(), problem.genus(), &problem.psi());
        return Ok(TypeCatalog::from_types(fingerprint, problem.user_types().iter().cloned()));
    }
    if hurwitz_shaped(problem) {
        return line_types(problem);
    }
    if problem.genus() == 0 {
        return enumerate_for_problem(problem);
    }
    Err(Error::Unsupported(format!(
        "types of genus {} in rank {} are not enumerated automatically; supply them explicitly",
        problem.genus(),
        problem.n()
    )))
}

enum Outcome {
    Counted(Contribution),
    Skipped(String),
    Nothing,
}

fn evaluate(t: &CombinatorialType, problem: &Problem) -> Result<Outcome> {
    if t.is_superabundant() {
        return Ok(Outcome::Skipped(format!(
            "skipped a superabundant type with {} vertices and {} compact edges",
            t.vertex_count,
            t.edges.len()
        )));
    }
    let psi = problem.psi();
    for v in 0..t.vertex_count {
        vertex_factor(t, v, &psi)?;
    }
    match solve_positions(t, problem) {
        SolveOutcome::NoSolution => Ok(Outcome::Nothing),
        SolveOutcome::Curve(c) => Ok(Outcome::Counted(multiplicity(&c, problem)?)),
        SolveOutcome::NonRigid => Err(Error::NonGeneric(format!(
            "a type with markings at vertices {:?} is realized by a positive-dimensional family",
            t.markings
        ))),
        SolveOutcome::NonGeneric(why) => Err(Error::NonGeneric(why)),
    }
}

/// Counts the given types (in parallel); contributions are ordered by
/// canonical key.
pub fn count_types(problem: &Problem, types: &[CombinatorialType]) -> Result<CountReport> {
    let fingerprint = fingerprint(problem.degree(), problem.genus(), &problem.psi());
    count_catalog(problem, &TypeCatalog::from_types(fingerprint, types.iter().cloned()))
}

pub fn count_catalog(problem: &Problem, catalog: &TypeCatalog) -> Result<CountReport> {
    let outcomes: Vec<Outcome> =
        catalog.entries.par_iter().map(|e| evaluate(&e.ty, problem)).collect::<Result<Vec<_>>>()?;
    let mut contributions = Vec::new();
    let mut warnings = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Counted(c) => contributions.push(c),
            Outcome::Skipped(w) => warnings.push(w),
            Outcome::Nothing => {}
        }
    }
    let total = contributions.iter().fold(Rational::zero(), |acc, c| acc + &c.mult);
    Ok(CountReport { problem: problem.clone(), contributions, closed_form: None, total, warnings })
}

pub fn count(problem: &Problem) -> Result<CountReport> {
    if problem.degree().e_inf() == 2 && problem.m() == 0 && problem.genus() == 0 && problem.user_types().is_empty() {
        let value = vertexless(problem)?;
        return Ok(CountReport {
            problem: problem.clone(),
            contributions: vec![],
            closed_form: Some(value.clone()),
            total: value,
            warnings: vec![],
        });
    }
    count_catalog(problem, &candidate_types(problem)?)
}

/// Count with the end labels forgotten: `count / |Aut(Δ)|`.
pub fn count_unlabeled(problem: &Problem) -> Result<Rational> {
    let report = count(problem)?;
    Ok(report.total / Rational::from_integer(aut_delta(problem.degree())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;
    use crate::problem::{BoundaryConstraint, VertexCondition};
    use crate::tropical::fixtures::*;
    use crate::tropical::{Degree, Leg};

    fn q(n: i64) -> Rational {
        int(n)
    }

    fn single_vertex_type(n: usize, legs: Vec<Leg>, markings: usize) -> CombinatorialType {
        CombinatorialType { n, vertex_count: 1, edges: vec![], legs, markings: vec![0; markings] }
    }

    fn line_degree() -> Degree {
        Degree::new(2, vec![(vec![-1, 0], 1), (vec![0, -1], 1), (vec![1, 1], 1)]).unwrap()
    }

    fn point(x: i64, y: i64, psi: u32) -> VertexCondition {
        VertexCondition { constraint: AffineConstraint::point(vec![q(x), q(y)]), psi }
    }

    fn two_points(p2: (i64, i64)) -> Problem {
        Problem::new(0, line_degree(), vec![point(-2, 0, 0), point(p2.0, p2.1, 0)], vec![]).unwrap()
    }

    #[test]
    fn phi_for_line_through_two_points() {
        let phi = build_phi(&line_two_points(), &two_points((0, -3)));
        assert_eq!((phi.nrows(), phi.ncols()), (6, 6));
        assert_eq!(lattice_index(&phi), Ok(Int::one()));
    }

    #[test]
    fn phi_with_ambient_constraint() {
        let t = single_vertex_type(
            2,
            vec![leg(0, 1, &[-1, 0], 1), leg(0, 2, &[0, -1], 1), leg(0, 3, &[1, 1], 1)],
            2,
        );
        let problem = Problem::new(
            0,
            line_degree(),
            vec![point(0, 0, 1), VertexCondition { constraint: AffineConstraint::everything(2), psi: 1 }],
            vec![],
        )
        .unwrap();
        let phi = build_phi(&t, &problem);
        assert_eq!((phi.nrows(), phi.ncols()), (2, 2));
        assert_eq!(lattice_index(&phi), Ok(Int::one()));
    }

    #[test]
    fn solve_line_through_two_points() {
        match solve_positions(&line_two_points(), &two_points((0, -3))) {
            SolveOutcome::Curve(c) => {
                assert_eq!(c.positions[0], vec![q(0), q(0)]);
                assert_eq!(c.lengths, vec![q(2), q(3)]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(solve_positions(&line_two_points(), &two_points((0, 3))), SolveOutcome::NoSolution);
    }

    #[test]
    fn deficient_constraints_are_non_rigid() {
        let problem = Problem::new(
            0,
            line_degree(),
            vec![point(-2, 0, 0), VertexCondition { constraint: AffineConstraint::everything(2), psi: 2 }],
            vec![],
        )
        .unwrap();
        assert_eq!(solve_positions(&line_two_points(), &problem), SolveOutcome::NonRigid);
    }

    #[test]
    fn vertex_factors() {
        let t = single_vertex_type(
            2,
            vec![leg(0, 1, &[-1, 0], 1), leg(0, 2, &[0, -1], 1), leg(0, 3, &[1, 1], 1)],
            2,
        );
        assert_eq!(vertex_factor(&t, 0, &[1, 1]), Ok(Int::from(2)));
        assert!(matches!(vertex_factor(&t, 0, &[2, 1]), Err(Error::PsiMismatch { .. })));
        let one = single_vertex_type(2, t.legs.clone(), 1);
        assert_eq!(vertex_factor(&one, 0, &[1]), Ok(Int::one()));
        let quad = single_vertex_type(
            2,
            vec![
                leg(0, 1, &[-1, 0], 1),
                leg(0, 2, &[0, -1], 1),
                leg(0, 3, &[1, 0], 1),
                leg(0, 4, &[0, 1], 1),
            ],
            2,
        );
        assert_eq!(vertex_factor(&quad, 0, &[2, 1]), Ok(Int::from(3)));
    }

    #[test]
    fn fourier_motzkin() {
        // t > 0, 1 - t > 0
        assert!(strictly_feasible(vec![(q(0), vec![q(1)]), (q(1), vec![q(-1)])], 1));
        // t > 0, -t > 0
        assert!(!strictly_feasible(vec![(q(0), vec![q(1)]), (q(0), vec![q(-1)])], 1));
        // s > 0, t > 0, -s - t > -1 ; plus s - t > 2 infeasible with s < 1
        assert!(strictly_feasible(vec![(q(0), vec![q(1), q(0)]), (q(0), vec![q(0), q(1)]), (q(1), vec![q(-1), q(-1)])], 2));
        assert!(!strictly_feasible(
            vec![(q(0), vec![q(1), q(0)]), (q(0), vec![q(0), q(1)]), (q(1), vec![q(-1), q(-1)]), (q(-2), vec![q(1), q(-1)])],
            2
        ));
    }

    #[test]
    fn vertexless_closed_form() {
        let degree = Degree::new(2, vec![(vec![1, 0], 2), (vec![-1, 0], 2)]).unwrap();
        let b = BoundaryConstraint {
            end: 1,
            constraint: AffineConstraint::new(vec![q(0), q(7)], vec![int_vec(&[1, 0])], 1).unwrap(),
        };
        let problem = Problem::new(0, degree, vec![], vec![b]).unwrap();
        let report = count(&problem).unwrap();
        assert_eq!(report.total, Rational::new(Int::one(), Int::from(2)));
    }
}
