//! Double Hurwitz numbers: tropical covers of the line against transitive
//! factorizations in the symmetric group.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::counting::count;
use crate::error::{Error, Result};
use crate::linalg::{Int, Rational};
use crate::problem::{AffineConstraint, Problem, VertexCondition};
use crate::tropical::aut_delta;
use crate::enumerate::line_degree;

/// Non-increasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<u64>);

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::EmptyPartition);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> u64 {
        self.0.iter().sum()
    }

    /// All partitions of `d`, in decreasing lexicographic order.
    pub fn all(d: u64) -> Vec<Partition> {
        fn rec(d: u64, max: u64, prefix: &mut Vec<u64>, out: &mut Vec<Partition>) {
            if d == 0 {
                out.push(Partition(prefix.clone()));
                return;
            }
            for p in (1..=max.min(d)).rev() {
                prefix.push(p);
                rec(d - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            rec(d, d, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

/// Permutation of `{0, …, d-1}` given by its images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation(images))
    }

    pub fn identity(d: usize) -> Self {
        Permutation((0..d).collect())
    }

    pub fn transposition(d: usize, a: usize, b: usize) -> Self {
        let mut p: Vec<usize> = (0..d).collect();
        p.swap(a, b);
        Permutation(p)
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    /// Cycle lengths, non-increasing.
    pub fn cycle_type(&self) -> Vec<u64> {
        cycle_type(&self.0)
    }

    /// All permutations of `{0, …, d-1}` with the given cycle type.
    pub fn class(alpha: &Partition) -> Vec<Permutation> {
        let d = alpha.size() as usize;
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..d).collect();
        permutations(&mut perm, 0, &mut |p| {
            if cycle_type(p) == alpha.parts() {
                out.push(Permutation(p.to_vec()));
            }
        });
        out
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
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

fn cycle_count(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut count = 0;
    for s in 0..p.len() {
        if !seen[s] {
            count += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = p[x];
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HurwitzResult {
    pub g: usize,
    pub d: u64,
    pub alpha: Partition,
    pub beta: Partition,
    pub m: usize,
    /// Number of transitive factorizations.
    pub hat: Int,
    /// Count with labeled ends.
    pub labeled: Rational,
    /// Count with unlabeled ends and sheets.
    pub unlabeled: Rational,
}

fn factorial(k: u64) -> Int {
    (1..=k).fold(Int::one(), |acc, i| acc * i)
}

/// `∏ a_i!` over the multiplicities `a_i` of the distinct parts.
pub fn aut_partition(alpha: &Partition) -> Int {
    let mut mult: BTreeMap<u64, u64> = BTreeMap::new();
    for &p in alpha.parts() {
        *mult.entry(p).or_default() += 1;
    }
    mult.values().map(|&c| factorial(c)).product()
}

/// `m = 2g - 2 + ℓ1 + ℓ2`.
pub fn branch_points(g: usize, alpha: &Partition, beta: &Partition) -> usize {
    2 * g + alpha.len() + beta.len() - 2
}

fn check_degrees(alpha: &Partition, beta: &Partition) -> Result<u64> {
    let (a, b) = (alpha.size(), beta.size());
    if a != b {
        return Err(Error::MismatchedDegree { left: a, right: b });
    }
    Ok(a)
}

fn result_from_hat(g: usize, alpha: &Partition, beta: &Partition, hat: Int) -> HurwitzResult {
    let d = alpha.size();
    let df = factorial(d);
    let labeled = Rational::new(aut_partition(alpha) * aut_partition(beta) * &hat, df.clone());
    let unlabeled = Rational::new(hat.clone(), df);
    HurwitzResult { g, d, m: branch_points(g, alpha, beta), alpha: alpha.clone(), beta: beta.clone(), hat, labeled, unlabeled }
}

struct Orbits(Vec<usize>);

impl Orbits {
    fn find(&self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }

    fn components(&self) -> usize {
        (0..self.0.len()).filter(|&x| self.0[x] == x).count()
    }
}

struct Search<'a> {
    transpositions: Vec<(usize, usize)>,
    beta: &'a [u64],
    transitive: bool,
}

impl Search<'_> {
    fn run(&self, product: &mut Vec<usize>, orbits: &Orbits, remaining: usize) -> u64 {
        let cycles = cycle_count(product);
        if cycles.abs_diff(self.beta.len()) > remaining {
            return 0;
        }
        if self.transitive && orbits.components() > remaining + 1 {
            return 0;
        }
        if remaining == 0 {
            let ok = cycle_type(product) == self.beta && (!self.transitive || orbits.components() == 1);
            return ok as u64;
        }
        let mut total = 0;
        for &(a, b) in &self.transpositions {
            // right multiplication by (a b)
            product.swap(a, b);
            let (ra, rb) = (orbits.find(a), orbits.find(b));
            let mut merged = Orbits(orbits.0.clone());
            if ra != rb {
                merged.0[ra.max(rb)] = ra.min(rb);
            }
            total += self.run(product, &merged, remaining - 1);
            product.swap(a, b);
        }
        total
    }
}

/// Number of tuples `(σ_α, τ_1, …, τ_m)` with `σ_α` of cycle type `alpha`,
/// transpositions `τ_i` and `(σ_α τ_1 ⋯ τ_m)^{-1}` of cycle type `beta`;
/// with `transitive`, only tuples generating a transitive group.
pub fn count_factorizations(alpha: &Partition, beta: &Partition, m: usize, transitive: bool) -> Result<Int> {
    let d = check_degrees(alpha, beta)? as usize;
    let mut transpositions = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            transpositions.push((a, b));
        }
    }
    let search = Search { transpositions, beta: beta.parts(), transitive };
    let total: u64 = Permutation::class(alpha)
        .into_par_iter()
        .map(|sigma| {
            let mut orbits = Orbits((0..d).collect());
            for x in 0..d {
                let (rx, ry) = (orbits.find(x), orbits.find(sigma.0[x]));
                if rx != ry {
                    orbits.0[rx.max(ry)] = rx.min(ry);
                }
            }
            let mut product = sigma.0.clone();
            search.run(&mut product, &orbits, m)
        })
        .sum();
    Ok(BigInt::from(total))
}

pub fn hurwitz_symmetric(g: usize, alpha: &Partition, beta: &Partition) -> Result<HurwitzResult> {
    check_degrees(alpha, beta)?;
    let m = branch_points(g, alpha, beta);
    let hat = count_factorizations(alpha, beta, m, true)?;
    Ok(result_from_hat(g, alpha, beta, hat))
}

/// The rank-1 counting problem: ends of weights `alpha` pointing left,
/// `beta` pointing right, `m` points at `1, 3, 5, …` with psi exponent 1.
pub fn line_problem(g: usize, alpha: &Partition, beta: &Partition, points: &[Rational]) -> Result<Problem> {
    check_degrees(alpha, beta)?;
    let degree = line_degree(alpha.parts(), beta.parts())?;
    let markings = points
        .iter()
        .map(|p| VertexCondition { constraint: AffineConstraint::point(vec![p.clone()]), psi: 1 })
        .collect();
    Problem::new(g, degree, markings, vec![])
}

pub fn default_points(m: usize) -> Vec<Rational> {
    (0..m).map(|i| Rational::from_integer(BigInt::from(2 * i as i64 + 1))).collect()
}

pub fn hurwitz_tropical(g: usize, alpha: &Partition, beta: &Partition) -> Result<HurwitzResult> {
    hurwitz_tropical_at(g, alpha, beta, &default_points(branch_points(g, alpha, beta)))
}

/// Tropical count with the points at the given positions.
pub fn hurwitz_tropical_at(g: usize, alpha: &Partition, beta: &Partition, points: &[Rational]) -> Result<HurwitzResult> {
    let problem = line_problem(g, alpha, beta, points)?;
    let report = count(&problem)?;
    let labeled = report.total;
    let unlabeled_ends = &labeled / Rational::from_integer(aut_delta(problem.degree()));
    let hat = unlabeled_ends * Rational::from_integer(factorial(alpha.size()));
    if !hat.is_integer() {
        return Err(Error::Unsupported(format!("tropical count {labeled} does not give an integral factorization count")));
    }
    let result = result_from_hat(g, alpha, beta, hat.to_integer());
    debug_assert_eq!(result.labeled, labeled);
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckEntry {
    pub tropical: HurwitzResult,
    pub symmetric: HurwitzResult,
    pub equal: bool,
}

/// Both computations for every `g <= max_g`, `1 <= d <= max_d` and every
/// pair of partitions of `d`.
pub fn crosscheck(max_g: usize, max_d: u64) -> Result<Vec<CrosscheckEntry>> {
    let mut instances = Vec::new();
    for g in 0..=max_g {
        for d in 1..=max_d {
            let parts = Partition::all(d);
            for a in &parts {
                for b in &parts {
                    instances.push((g, a.clone(), b.clone()));
                }
            }
        }
    }
    instances
        .into_iter()
        .map(|(g, a, b)| {
            let tropical = hurwitz_tropical(g, &a, &b)?;
            let symmetric = hurwitz_symmetric(g, &a, &b)?;
            let equal = tropical == symmetric;
            Ok(CrosscheckEntry { tropical, symmetric, equal })
        })
        .collect()
}

impl HurwitzResult {
    /// Checks `labeled = |Aut α||Aut β|/d! · hat` and `unlabeled = hat/d!`.
    pub fn conversions_hold(&self) -> bool {
        let df = Rational::from_integer(factorial(self.d));
        let hat = Rational::from_integer(self.hat.clone());
        let auts = Rational::from_integer(aut_partition(&self.alpha) * aut_partition(&self.beta));
        self.labeled == &auts * &hat / &df && self.unlabeled == &hat / &df && !self.hat.is_zero() == !self.labeled.is_zero()
    }
}
