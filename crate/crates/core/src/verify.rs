//! Reference values and the built-in check suite.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::counting::{count, count_unlabeled};
use crate::error::Result;
use crate::hurwitz::{crosscheck, hurwitz_symmetric, hurwitz_tropical, Partition};
use crate::linalg::{int_vec, Int, Rational};
use crate::problem::{AffineConstraint, Problem, VertexCondition};
use crate::tropical::Degree;

fn binomial(n: u64, k: u64) -> Int {
    if k > n {
        return Int::zero();
    }
    (0..k).fold(Int::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Number of rational plane curves of degree `d` through `3d - 1` general
/// points, by Kontsevich's recursion.
pub fn kontsevich(d: u64) -> Int {
    assert!(d >= 1, "degree must be positive");
    let mut n: Vec<Int> = vec![Int::zero(), Int::one()];
    for e in 2..=d {
        let mut total = Int::zero();
        for d1 in 1..e {
            let d2 = e - d1;
            let a = Int::from(d1 * d1 * d2 * d2) * binomial(3 * e - 4, 3 * d1 - 2);
            let b = Int::from(d1 * d1 * d1 * d2) * binomial(3 * e - 4, 3 * d1 - 1);
            total += &n[d1 as usize] * &n[d2 as usize] * (a - b);
        }
        n.push(total);
    }
    n[d as usize].clone()
}

// ---------------------------------------------------------------------------
// Instances

fn int(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Random rational with a small denominator; distinct draws are in general
/// position with overwhelming probability.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let num: i64 = rng.gen_range(-10_000..=10_000);
    let den: i64 = rng.gen_range(1..=997);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng)).collect()
}

/// Degree of plane curves of degree `d`: each of `(-1,0)`, `(0,-1)`, `(1,1)`
/// repeated `d` times with weight 1.
pub fn plane_degree(d: usize) -> Degree {
    let dirs = [vec![-1, 0], vec![0, -1], vec![1, 1]];
    Degree::new(2, dirs.iter().flat_map(|u| std::iter::repeat((u.clone(), 1)).take(d)).collect()).expect("balanced")
}

fn point_condition(p: Vec<Rational>, psi: u32) -> VertexCondition {
    VertexCondition { constraint: AffineConstraint::point(p), psi }
}

/// Random lattice point with coordinates in `[-10^6, 10^6]`; as generic as
/// a rational point for counting purposes, and cheaper to solve with.
pub fn random_lattice_point(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| int(rng.gen_range(-1_000_000..=1_000_000))).collect()
}

/// Plane curves of degree `d` through `3d - 1` random lattice points.
pub fn plane_curves_through_points(d: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let markings = (0..3 * d - 1).map(|_| point_condition(random_lattice_point(&mut rng, 2), 0)).collect();
    Problem::new(0, plane_degree(d), markings, vec![]).expect("balanced problem")
}

/// Lines through two random rational points.
pub fn line_through_two_points(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let markings = (0..2).map(|_| point_condition(random_point(&mut rng, 2), 0)).collect();
    Problem::new(0, plane_degree(1), markings, vec![]).expect("balanced problem")
}

/// Lines with one marking at a point carrying `ψ`.
pub fn point_psi1(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Problem::new(0, plane_degree(1), vec![point_condition(random_point(&mut rng, 2), 1)], vec![]).expect("balanced")
}

/// Lines with one marking on a line carrying `ψ²`.
pub fn line_psi2(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let line = AffineConstraint::new(random_point(&mut rng, 2), vec![int_vec(&[1, 3])], 1).expect("valid line");
    Problem::new(0, plane_degree(1), vec![VertexCondition { constraint: line, psi: 2 }], vec![]).expect("balanced")
}

/// Lines with a `ψ` marking at a point and a `ψ` marking anywhere.
pub fn psi_point_psi_plane(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anywhere = VertexCondition { constraint: AffineConstraint::everything(2), psi: 1 };
    Problem::new(0, plane_degree(1), vec![point_condition(random_point(&mut rng, 2), 1), anywhere], vec![])
        .expect("balanced")
}

// ---------------------------------------------------------------------------
// Suite

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Basic,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub source: &'static str,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub checks: Vec<CheckResult>,
}

impl SuiteResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntroIdentity {
    pub line_psi2: Rational,
    pub point_psi1: Rational,
    /// Ordinary invariant taken as given.
    pub ordinary_line_psi2: Rational,
    pub residual: Rational,
    pub pass: bool,
}

/// The log invariant `⟨ℓψ²⟩` equals `⟨ℓψ²⟩^{P²} + 3⟨[pt]ψ⟩`, with the
/// ordinary value `-3`.
pub fn intro_identity_check() -> Result<IntroIdentity> {
    let line_psi2 = count(&line_psi2(1))?.total;
    let point_psi1 = count(&point_psi1(1))?.total;
    let ordinary_line_psi2 = int(-3);
    let residual = &line_psi2 - (&ordinary_line_psi2 + int(3) * &point_psi1);
    let pass = residual.is_zero() && line_psi2.is_zero() && point_psi1 == int(1);
    Ok(IntroIdentity { line_psi2, point_psi1, ordinary_line_psi2, residual, pass })
}

type CheckFn = Box<dyn Fn() -> Result<(String, String)> + Send + Sync>;

struct Check {
    name: &'static str,
    source: &'static str,
    run: CheckFn,
}

fn equal(expected: Rational, computed: Result<Rational>) -> Result<(String, String)> {
    Ok((expected.to_string(), computed?.to_string()))
}

fn partition(p: &[u64]) -> Partition {
    Partition::new(p.to_vec()).expect("nonempty partition")
}

fn checks(level: Level) -> Vec<Check> {
    let mut out: Vec<Check> = vec![
        Check {
            name: "line through two points",
            source: "published value",
            run: Box::new(|| equal(int(1), count(&line_through_two_points(7)).map(|r| r.total))),
        },
        Check {
            name: "<[pt] psi>",
            source: "published value",
            run: Box::new(|| equal(int(1), count(&point_psi1(7)).map(|r| r.total))),
        },
        Check {
            name: "<l psi^2>",
            source: "published value",
            run: Box::new(|| equal(int(0), count(&line_psi2(7)).map(|r| r.total))),
        },
        Check {
            name: "intro identity residual",
            source: "published value",
            run: Box::new(|| equal(int(0), intro_identity_check().map(|r| r.residual))),
        },
        Check {
            name: "<psi[pt], psi[P2]>",
            source: "published value",
            run: Box::new(|| equal(int(2), count(&psi_point_psi_plane(7)).map(|r| r.total))),
        },
        Check {
            name: "P1 degree 3, four psi points, labeled",
            source: "published value",
            run: Box::new(|| {
                equal(int(144), hurwitz_tropical(0, &partition(&[1, 1, 1]), &partition(&[1, 1, 1])).map(|r| r.labeled))
            }),
        },
        Check {
            name: "P1 degree 3, four psi points, unlabeled",
            source: "published value",
            run: Box::new(|| {
                equal(int(4), hurwitz_tropical(0, &partition(&[1, 1, 1]), &partition(&[1, 1, 1])).map(|r| r.unlabeled))
            }),
        },
        Check {
            name: "H_2([2],[2]) tropical",
            source: "published value",
            run: Box::new(|| {
                equal(Rational::new(1.into(), 2.into()), hurwitz_tropical(2, &partition(&[2]), &partition(&[2])).map(|r| r.labeled))
            }),
        },
        Check {
            name: "H_2([2],[2]) symmetric",
            source: "published value",
            run: Box::new(|| {
                equal(Rational::new(1.into(), 2.into()), hurwitz_symmetric(2, &partition(&[2]), &partition(&[2])).map(|r| r.labeled))
            }),
        },
        Check {
            name: "Hurwitz crosscheck g<=2, d<=4",
            source: "symmetric-group factorization count",
            run: Box::new(|| {
                let entries = crosscheck(2, 4)?;
                let bad = entries.iter().filter(|e| !e.equal).count();
                Ok((format!("{} equal", entries.len()), format!("{} equal", entries.len() - bad)))
            }),
        },
        Check {
            name: "conics through 5 points, labeled",
            source: "Kontsevich recursion",
            run: Box::new(|| equal(int(8) * Rational::from_integer(kontsevich(2)), count(&plane_curves_through_points(2, 7)).map(|r| r.total))),
        },
        Check {
            name: "conics through 5 points, unlabeled",
            source: "Kontsevich recursion",
            run: Box::new(|| equal(Rational::from_integer(kontsevich(2)), count_unlabeled(&plane_curves_through_points(2, 7)))),
        },
    ];
    if level == Level::Extended {
        out.push(Check {
            name: "cubics through 8 points, unlabeled",
            source: "Kontsevich recursion",
            run: Box::new(|| equal(Rational::from_integer(kontsevich(3)), count_unlabeled(&plane_curves_through_points(3, 7)))),
        });
    }
    out
}

pub fn run_suite(level: Level) -> SuiteResult {
    let mut results: Vec<CheckResult> = checks(level)
        .into_par_iter()
        .map(|c| {
            let start = Instant::now();
            let outcome = (c.run)();
            let runtime = start.elapsed();
            let (expected, computed, pass) = match outcome {
                Ok((e, v)) => {
                    let pass = e == v;
                    (e, v, pass)
                }
                Err(err) => (String::from("a value"), format!("error: {err}"), false),
            };
            CheckResult { name: c.name.to_string(), source: c.source, expected, computed, pass, runtime }
        })
        .collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    SuiteResult { checks: results }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kontsevich_small_degrees() {
        assert_eq!(kontsevich(1), BigInt::from(1));
        assert_eq!(kontsevich(2), BigInt::from(1));
        assert_eq!(kontsevich(3), BigInt::from(12));
        assert_eq!(kontsevich(4), BigInt::from(620));
    }

    #[test]
    fn intro_chain() {
        let r = intro_identity_check().unwrap();
        assert!(r.pass, "{r:?}");
    }
}
