use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use tropcount::counting::count;
use tropcount::hurwitz::{count_factorizations, hurwitz_symmetric, line_problem, default_points, Partition, Permutation};
use tropcount::linalg::{
    int_vec, lattice_index, quotient_map, rank, saturate, smith_normal_form, solve_affine, AffineSolve, IntMatrix,
    Matrix, Rational,
};
use tropcount::problem::{AffineConstraint, Problem, VertexCondition};
use tropcount::tropical::{aut_delta, Degree, DegreeEnd};
use tropcount::verify::{line_through_two_points, plane_degree, psi_point_psi_plane};

fn q(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn matrix(rows: &[Vec<i64>], cols: usize) -> IntMatrix {
    Matrix::from_rows(cols, rows.iter().map(|r| int_vec(r)).collect()).unwrap()
}

/// Determinant by cofactor expansion along the first row.
fn det_cofactor(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigInt>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = &m[0][j] * det_cofactor(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn rows_of(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    m.rows().map(|r| r.to_vec()).collect()
}

fn arb_matrix(max: usize) -> impl Strategy<Value = (usize, usize, Vec<Vec<i64>>)> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-6i64..=6, c), r).prop_map(move |rows| (r, c, rows))
    })
}

fn arb_square(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-5i64..=5, n), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_form_invariants((r, c, rows) in arb_matrix(4)) {
        let m = matrix(&rows, c);
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.u.mul(&m).unwrap().mul(&s.v).unwrap(), s.d.clone());
        prop_assert_eq!(det_cofactor(&rows_of(&s.u)).abs(), BigInt::one());
        prop_assert_eq!(det_cofactor(&rows_of(&s.v)).abs(), BigInt::one());
        prop_assert_eq!(s.u.mul(&s.u_inv).unwrap(), Matrix::identity(r));
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| s.d[(i, i)].clone()).collect();
        for i in 0..r {
            for j in 0..c {
                if i != j {
                    prop_assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            let divides = if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() };
            prop_assert!(divides);
        }
        prop_assert_eq!(s.rank(), rank(&m.to_rational()));
    }

    #[test]
    fn lattice_index_is_absolute_determinant(rows in arb_square(4)) {
        let n = rows.len();
        let m = matrix(&rows, n);
        let det = det_cofactor(&rows_of(&m));
        match lattice_index(&m) {
            Ok(index) => prop_assert_eq!(index, det.abs()),
            Err(_) => prop_assert!(det.is_zero()),
        }
    }

    #[test]
    fn solve_round_trip((_, c, rows) in arb_matrix(5), x0 in proptest::collection::vec((-9i64..=9, 1i64..=5), 5)) {
        let a = matrix(&rows, c).to_rational();
        let x: Vec<Rational> = x0.iter().take(c).map(|&(p, d)| q(p, d)).collect();
        let b = a.mul_vec(&x).unwrap();
        let AffineSolve::Solved(s) = solve_affine(&a, &b).unwrap() else {
            return Err(TestCaseError::fail("consistent system reported infeasible"));
        };
        prop_assert_eq!(a.mul_vec(&s.particular).unwrap(), b.clone());
        prop_assert_eq!(s.kernel.len(), c - rank(&a));
        for k in &s.kernel {
            prop_assert!(a.mul_vec(k).unwrap().iter().all(Zero::is_zero));
        }
        // a right-hand side outside the column space is caught
        for i in 0..a.nrows() {
            let mut shifted = b.clone();
            shifted[i] += Rational::one();
            let mut ext = Matrix::zeros(a.nrows(), c + 1);
            for r in 0..a.nrows() {
                for j in 0..c {
                    ext[(r, j)] = a[(r, j)].clone();
                }
            }
            ext[(i, c)] = Rational::one();
            if rank(&ext) > rank(&a) {
                prop_assert_eq!(solve_affine(&a, &shifted).unwrap(), AffineSolve::Infeasible);
            }
        }
    }

    #[test]
    fn saturation_is_idempotent_and_quotient_exact(vs in proptest::collection::vec(proptest::collection::vec(-6i64..=6, 3), 1..=3)) {
        let vectors: Vec<Vec<BigInt>> = vs.iter().map(|v| int_vec(v)).collect();
        let sat = saturate(3, &vectors).unwrap();
        // a saturated basis has all invariant factors 1, and saturating again keeps the lattice
        let columns = |vs: &[Vec<BigInt>]| {
            let mut m = Matrix::zeros(3, vs.len());
            for (j, v) in vs.iter().enumerate() {
                for i in 0..3 {
                    m[(i, j)] = v[i].clone();
                }
            }
            m
        };
        prop_assert!(smith_normal_form(&columns(&sat)).invariant_factors().iter().filter(|x| !x.is_zero()).all(One::is_one));
        let again = saturate(3, &sat).unwrap();
        prop_assert_eq!(again.len(), sat.len());
        let both: Vec<Vec<BigInt>> = sat.iter().chain(&again).cloned().collect();
        prop_assert!(smith_normal_form(&columns(&both)).invariant_factors().iter().filter(|x| !x.is_zero()).all(One::is_one));
        prop_assert_eq!(smith_normal_form(&columns(&both)).rank(), sat.len());
        let qm = quotient_map(3, &vectors).unwrap();
        prop_assert_eq!(qm.nrows() + sat.len(), 3);
        for v in vectors.iter().chain(&sat) {
            prop_assert!(qm.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
        // surjective onto Z^(3-r): all invariant factors are 1
        if qm.nrows() > 0 {
            let s = smith_normal_form(&qm);
            for i in 0..qm.nrows() {
                prop_assert_eq!(s.d[(i, i)].clone(), BigInt::one());
            }
        }
    }
}

fn unimodular(a: i64, b: i64, c: i64, d: i64) -> IntMatrix {
    matrix(&[vec![a, b], vec![c, d]], 2)
}

fn total(p: &Problem) -> Rational {
    count(p).unwrap().total
}

fn arb_unimodular() -> impl Strategy<Value = IntMatrix> {
    let gens = prop_oneof![
        Just((1i64, 1i64, 0i64, 1i64)),
        Just((1, 0, 1, 1)),
        Just((0, -1, 1, 0)),
        Just((1, -1, 0, 1)),
        Just((-1, 0, 0, 1)),
    ];
    proptest::collection::vec(gens, 1..=4).prop_map(|gs| {
        gs.into_iter().fold(Matrix::identity(2), |acc: IntMatrix, (a, b, c, d)| acc.mul(&unimodular(a, b, c, d)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_are_gl2z_invariant(g in arb_unimodular(), seed in 0u64..1000) {
        for p in [line_through_two_points(seed), psi_point_psi_plane(seed)] {
            prop_assert_eq!(total(&p.transformed(&g).unwrap()), total(&p));
        }
    }

    #[test]
    fn relabeling_ends_changes_nothing(perm in Just((1..=6usize).collect::<Vec<_>>()).prop_shuffle(), seed in 0u64..1000) {
        let base = plane_degree(2);
        let ends: Vec<DegreeEnd> = base
            .ends()
            .iter()
            .map(|e| DegreeEnd { label: perm[e.label - 1], direction: e.direction.clone(), weight: e.weight })
            .collect();
        let relabeled = Degree::from_ends(2, ends).unwrap();
        prop_assert_eq!(aut_delta(&relabeled), aut_delta(&base));
        // lines: relabel the three ends of a degree-1 problem
        let p = line_through_two_points(seed);
        let small: Vec<usize> = perm.iter().copied().filter(|&x| x <= 3).collect();
        let ends: Vec<DegreeEnd> = p
            .degree()
            .ends()
            .iter()
            .map(|e| DegreeEnd { label: small[e.label - 1], direction: e.direction.clone(), weight: e.weight })
            .collect();
        let q = Problem::new(0, Degree::from_ends(2, ends).unwrap(), p.markings().to_vec(), vec![]).unwrap();
        prop_assert_eq!(total(&q), total(&p));
    }
}

#[test]
fn span_basis_and_base_point_choice_do_not_matter() {
    // psi condition on the whole plane, written with two different bases
    let p = psi_point_psi_plane(5);
    let point = p.markings()[0].clone();
    let expected = total(&p);
    for (base, span) in [
        (vec![q(0, 1), q(0, 1)], vec![int_vec(&[1, 0]), int_vec(&[0, 1])]),
        (vec![q(7, 3), q(-1, 2)], vec![int_vec(&[2, 1]), int_vec(&[1, 1])]),
    ] {
        let plane = VertexCondition { constraint: AffineConstraint::new(base, span, 1).unwrap(), psi: 1 };
        let r = Problem::new(0, plane_degree(1), vec![point.clone(), plane], vec![]).unwrap();
        assert_eq!(total(&r), expected);
    }
    // a line constraint with its base point slid along the line
    let line = |base: Vec<Rational>, dir: [i64; 2]| AffineConstraint::new(base, vec![int_vec(&dir)], 1).unwrap();
    let a = line(vec![q(1, 3), q(2, 5)], [1, 2]);
    let b = line(vec![q(1, 3) + q(-3, 1), q(2, 5) + q(-6, 1)], [-2, -4]);
    assert_eq!(a, b);
    let with_line = |c: AffineConstraint| {
        let point = AffineConstraint::point(vec![q(5, 1), q(-1, 7)]);
        let markings = vec![VertexCondition { constraint: point, psi: 0 }, VertexCondition { constraint: c, psi: 1 }];
        total(&Problem::new(0, plane_degree(1), markings, vec![]).unwrap())
    };
    assert_eq!(with_line(a), with_line(b));
}

// ---------------------------------------------------------------------------
// Hurwitz side

fn partition(p: &[u64]) -> Partition {
    Partition::new(p.to_vec()).unwrap()
}

fn all_permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut v: Vec<usize> = p.clone();
            v.insert(pos, d - 1);
            out.push(v);
        }
    }
    out
}

fn cycle_type(p: &[usize]) -> Vec<u64> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // apply b, then a
    b.iter().map(|&i| a[i]).collect()
}

/// Brute force: tuples `(σ_α, τ_1..τ_m)` with `σ_α` of type α and
/// `τ_m ⋯ τ_1 σ_α` of type β, optionally generating a transitive group.
fn factorizations_brute(alpha: &[u64], beta: &[u64], m: usize, transitive: bool) -> u64 {
    let d = alpha.iter().sum::<u64>() as usize;
    let transpositions: Vec<(usize, usize)> = (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    let mut total = 0;
    for sigma in all_permutations(d).into_iter().filter(|p| cycle_type(p) == alpha) {
        let mut idx = vec![0usize; m];
        loop {
            let mut prod = sigma.clone();
            let mut parent: Vec<usize> = (0..d).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for (i, &s) in sigma.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, s));
                parent[a] = b;
            }
            for &t in &idx {
                let (a, b) = transpositions[t];
                let mut tau: Vec<usize> = (0..d).collect();
                tau.swap(a, b);
                prod = compose(&tau, &prod);
                let (x, y) = (find(&mut parent, a), find(&mut parent, b));
                parent[x] = y;
            }
            let connected = (0..d).all(|x| find(&mut parent, x) == find(&mut parent, 0));
            if cycle_type(&prod) == beta && (!transitive || connected) {
                total += 1;
            }
            // next tuple
            let mut k = 0;
            while k < m {
                idx[k] += 1;
                if idx[k] < transpositions.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
    }
    total
}

#[test]
fn factorization_counts_match_brute_force() {
    let cases: [(&[u64], &[u64], usize); 9] = [
        (&[1, 1], &[1, 1], 2),
        (&[2], &[2], 2),
        (&[2], &[1, 1], 1),
        (&[1, 1, 1], &[1, 1, 1], 4),
        (&[2, 1], &[3], 2),
        (&[3], &[3], 4),
        (&[2, 1], &[2, 1], 2),
        (&[1, 1, 1, 1], &[4], 3),
        (&[2, 2], &[2, 1, 1], 3),
    ];
    for (a, b, m) in cases {
        for transitive in [false, true] {
            let expected = factorizations_brute(a, b, m, transitive);
            let got = count_factorizations(&partition(a), &partition(b), m, transitive).unwrap();
            assert_eq!(got, BigInt::from(expected), "{a:?} {b:?} m={m} transitive={transitive}");
        }
    }
}

#[test]
fn factorization_counts_are_symmetric_in_alpha_beta() {
    for d in 1..=4u64 {
        for a in Partition::all(d) {
            for b in Partition::all(d) {
                for g in 0..=1usize {
                    let x = hurwitz_symmetric(g, &a, &b).unwrap();
                    let y = hurwitz_symmetric(g, &b, &a).unwrap();
                    assert_eq!((x.hat, x.labeled, x.unlabeled), (y.hat, y.labeled, y.unlabeled), "g={g} {a} {b}");
                }
            }
        }
    }
}

#[test]
fn permutation_basics() {
    let t = Permutation::transposition(3, 0, 2);
    assert_eq!(t.compose(&t), Permutation::identity(3));
    assert_eq!(t.cycle_type(), vec![2, 1]);
    let classes: BTreeMap<Vec<u64>, usize> =
        Partition::all(4).into_iter().map(|p| (p.parts().to_vec(), Permutation::class(&p).len())).collect();
    // class sizes of S_4
    assert_eq!(classes[&vec![1, 1, 1, 1]], 1);
    assert_eq!(classes[&vec![2, 1, 1]], 6);
    assert_eq!(classes[&vec![2, 2]], 3);
    assert_eq!(classes[&vec![3, 1]], 8);
    assert_eq!(classes[&vec![4]], 6);
    assert_eq!(classes.values().sum::<usize>(), 24);
}

#[test]
fn rank_one_contributions_are_trivalent_and_marked() {
    for g in 0..=1usize {
        for d in 1..=3u64 {
            for a in Partition::all(d) {
                for b in Partition::all(d) {
                    let m = 2 * g + a.len() + b.len() - 2;
                    let p = line_problem(g, &a, &b, &default_points(m)).unwrap();
                    let r = count(&p).unwrap();
                    for c in &r.contributions {
                        let t = &c.curve.ty;
                        assert_eq!(t.vertex_count, m);
                        assert_eq!(t.edges.len() as i64, t.legs.len() as i64 + 3 * g as i64 - 3, "g={g} {a} {b}");
                        assert!((0..t.vertex_count).all(|v| t.valence(v) == 3 && t.marks_at(v).count() == 1));
                        assert_eq!(c.index_phi, BigInt::one());
                    }
                }
            }
        }
    }
}
