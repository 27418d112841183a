//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt` / `BigRational`. Matrices act on
//! column vectors: a map `Z^cols -> Z^rows` is stored as a `rows x cols`
//! matrix.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector has no primitive part")]
    ZeroVector,
}

/// Returned by [`lattice_index`] when the map is not an injection of finite
/// index. Upstream this means the configuration is not rigid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("map is not an inclusion of lattices of finite index")]
pub struct NotFiniteIndex;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<Int>;
pub type RatMatrix = Matrix<Rational>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Builds a matrix from rows; `cols` is needed to express `k x 0` and
    /// `0 x k` shapes.
    pub fn from_rows(cols: usize, rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r);
        }
        Ok(Matrix { rows: nrows, cols, data })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn push_row(&mut self, row: Vec<T>) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a * &other[(k, j)];
                    out[(i, j)] = out[(i, j)].clone() + p;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn from_i64_rows(cols: usize, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        Matrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect())
    }

    pub fn to_rational(&self) -> RatMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| Rational::from_integer(x.clone())).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Rational elimination

/// Field operations that may fail on overflow; exact types never fail.
trait CheckedField: Clone + Zero + One {
    fn sub_mul(&self, a: &Self, b: &Self) -> Option<Self>;
    fn times(&self, other: &Self) -> Option<Self>;
    fn inverse(&self) -> Option<Self>;
}

impl CheckedField for Rational {
    fn sub_mul(&self, a: &Self, b: &Self) -> Option<Self> {
        Some(self - a * b)
    }

    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }

    fn inverse(&self) -> Option<Self> {
        Some(self.recip())
    }
}

pub(crate) type SmallRational = num_rational::Ratio<i128>;

impl CheckedField for SmallRational {
    fn sub_mul(&self, a: &Self, b: &Self) -> Option<Self> {
        use num_traits::{CheckedMul, CheckedSub};
        self.checked_sub(&a.checked_mul(b)?)
    }

    fn times(&self, other: &Self) -> Option<Self> {
        use num_traits::CheckedMul;
        self.checked_mul(other)
    }

    fn inverse(&self) -> Option<Self> {
        // i128::MIN has no positive counterpart
        if *self.numer() == i128::MIN {
            return None;
        }
        Some(self.recip())
    }
}

/// Reduced row echelon form, in place. Returns pivot columns, one per
/// nonzero row (rows are reordered so they come first), or `None` on
/// arithmetic overflow.
fn rref_in_place<T: CheckedField>(m: &mut Matrix<T>, augmented_cols: usize) -> Option<Vec<usize>> {
    let rows = m.rows;
    let cols = m.cols;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..augmented_cols {
        if r == rows {
            break;
        }
        // sparsest candidate row keeps fill-in low
        let Some(p) = (r..rows)
            .filter(|&i| !m[(i, c)].is_zero())
            .min_by_key(|&i| (c..cols).filter(|&j| !m[(i, j)].is_zero()).count())
        else {
            continue;
        };
        m.swap_rows(r, p);
        let inv = m[(r, c)].inverse()?;
        for j in c..cols {
            if !m[(r, j)].is_zero() {
                m[(r, j)] = m[(r, j)].times(&inv)?;
            }
        }
        for i in 0..rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let factor = m[(i, c)].clone();
            for j in c..cols {
                if m[(r, j)].is_zero() {
                    continue;
                }
                m[(i, j)] = m[(i, j)].sub_mul(&factor, &m[(r, j)])?;
            }
        }
        pivots.push(c);
        r += 1;
    }
    Some(pivots)
}

pub(crate) fn to_small(x: &Rational) -> Option<SmallRational> {
    use num_traits::ToPrimitive;
    Some(SmallRational::new_raw(x.numer().to_i128()?, x.denom().to_i128()?))
}

fn from_small(x: &SmallRational) -> Rational {
    Rational::new_raw(Int::from(*x.numer()), Int::from(*x.denom()))
}

/// Rank over the rationals.
pub fn rank(a: &RatMatrix) -> usize {
    let mut m = a.clone();
    let cols = m.cols;
    rref_in_place(&mut m, cols).expect("exact arithmetic").len()
}

pub fn rank_int(a: &IntMatrix) -> usize {
    rank(&a.to_rational())
}

/// Solution set of `A x = b`: `particular + span(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub kernel: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineSolve {
    Solved(AffineSolution),
    Infeasible,
}

impl AffineSolve {
    pub fn solution(self) -> Option<AffineSolution> {
        match self {
            AffineSolve::Solved(s) => Some(s),
            AffineSolve::Infeasible => None,
        }
    }
}

/// Solves `A x = b` exactly. The kernel basis has one vector per free
/// column of the echelon form.
pub fn solve_affine(a: &RatMatrix, b: &[Rational]) -> Result<AffineSolve, LinalgError> {
    if a.rows != b.len() {
        return Err(LinalgError::DimensionMismatch { expected: a.rows, found: b.len() });
    }
    let n = a.cols;
    let mut aug = Matrix::zeros(a.rows, n + 1);
    for i in 0..a.rows {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    // machine-word fractions first; fall back to big integers on overflow
    let small: Option<Matrix<SmallRational>> = aug
        .data
        .iter()
        .map(to_small)
        .collect::<Option<Vec<_>>>()
        .map(|data| Matrix { rows: aug.rows, cols: aug.cols, data });
    if let Some(mut m) = small {
        if let Some(pivots) = rref_in_place(&mut m, n) {
            let reduced = Matrix { rows: m.rows, cols: m.cols, data: m.data.iter().map(from_small).collect() };
            return Ok(read_solution(&reduced, &pivots, n));
        }
    }
    let pivots = rref_in_place(&mut aug, n).expect("exact arithmetic");
    Ok(read_solution(&aug, &pivots, n))
}

/// Solution of a system over machine-word fractions.
pub(crate) enum SmallSolve {
    Infeasible,
    Solved { particular: Vec<SmallRational>, kernel: Vec<Vec<SmallRational>>, rank: usize },
}

/// Solves the augmented system `aug = [A | b]` with `n` unknowns; `None` on
/// overflow.
pub(crate) fn solve_affine_small(rows: usize, n: usize, data: Vec<SmallRational>) -> Option<SmallSolve> {
    let mut aug = Matrix { rows, cols: n + 1, data };
    let pivots = rref_in_place(&mut aug, n)?;
    let rank = pivots.len();
    if (rank..rows).any(|i| !aug[(i, n)].is_zero()) {
        return Some(SmallSolve::Infeasible);
    }
    let mut particular = vec![SmallRational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[(r, n)];
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut kernel = Vec::new();
    for f in (0..n).filter(|&f| !is_pivot[f]) {
        let mut v = vec![SmallRational::zero(); n];
        v[f] = SmallRational::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = SmallRational::zero().sub_mul(&aug[(r, f)], &SmallRational::one())?;
        }
        kernel.push(v);
    }
    Some(SmallSolve::Solved { particular, kernel, rank })
}

fn read_solution(aug: &RatMatrix, pivots: &[usize], n: usize) -> AffineSolve {
    let rank = pivots.len();
    if (rank..aug.rows).any(|i| !aug[(i, n)].is_zero()) {
        return AffineSolve::Infeasible;
    }
    let mut particular = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[(r, n)].clone();
    }
    let mut is_pivot = vec![false; n];
    for &c in pivots {
        is_pivot[c] = true;
    }
    let kernel = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug[(r, f)].clone();
            }
            v
        })
        .collect();
    AffineSolve::Solved(AffineSolution { particular, kernel })
}

// ---------------------------------------------------------------------------
// Smith normal form

/// `u * m * v == d`, with `u`, `v` unimodular and `d` diagonal with
/// `d[0] | d[1] | ...`, all entries non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`; columns `0..rank` span the saturation of the column
    /// space of `m`.
    pub u_inv: IntMatrix,
}

impl SmithForm {
    pub fn invariant_factors(&self) -> Vec<Int> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().iter().filter(|x| !x.is_zero()).count()
    }
}

struct Transforms {
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl Transforms {
    fn new(rows: usize, cols: usize) -> Self {
        Transforms { u: Matrix::identity(rows), u_inv: Matrix::identity(rows), v: Matrix::identity(cols) }
    }
}

// row_i -= q * row_t
fn row_axpy(a: &mut IntMatrix, i: usize, t: usize, q: &Int, tr: &mut Option<Transforms>) {
    for j in 0..a.cols {
        if !a[(t, j)].is_zero() {
            let v = &a[(i, j)] - q * &a[(t, j)];
            a[(i, j)] = v;
        }
    }
    if let Some(tr) = tr {
        for j in 0..tr.u.cols {
            let v = &tr.u[(i, j)] - q * &tr.u[(t, j)];
            tr.u[(i, j)] = v;
        }
        for r in 0..tr.u_inv.rows {
            let v = &tr.u_inv[(r, t)] + q * &tr.u_inv[(r, i)];
            tr.u_inv[(r, t)] = v;
        }
    }
}

// col_j -= q * col_t
fn col_axpy(a: &mut IntMatrix, j: usize, t: usize, q: &Int, tr: &mut Option<Transforms>) {
    for i in 0..a.rows {
        if !a[(i, t)].is_zero() {
            let v = &a[(i, j)] - q * &a[(i, t)];
            a[(i, j)] = v;
        }
    }
    if let Some(tr) = tr {
        for i in 0..tr.v.rows {
            let v = &tr.v[(i, j)] - q * &tr.v[(i, t)];
            tr.v[(i, j)] = v;
        }
    }
}

fn swap_rows_tracked(a: &mut IntMatrix, i: usize, j: usize, tr: &mut Option<Transforms>) {
    a.swap_rows(i, j);
    if let Some(tr) = tr {
        tr.u.swap_rows(i, j);
        tr.u_inv.swap_cols(i, j);
    }
}

fn swap_cols_tracked(a: &mut IntMatrix, i: usize, j: usize, tr: &mut Option<Transforms>) {
    a.swap_cols(i, j);
    if let Some(tr) = tr {
        tr.v.swap_cols(i, j);
    }
}

fn smith_core(m: &IntMatrix, mut tr: Option<Transforms>) -> (IntMatrix, Option<Transforms>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    for t in 0..rows.min(cols) {
        // smallest nonzero pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[(i, j)].is_zero() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows_tracked(&mut a, t, pi, &mut tr);
        swap_cols_tracked(&mut a, t, pj, &mut tr);
        loop {
            for i in t + 1..rows {
                if !a[(i, t)].is_zero() {
                    let q = &a[(i, t)] / &a[(t, t)];
                    row_axpy(&mut a, i, t, &q, &mut tr);
                }
            }
            for j in t + 1..cols {
                if !a[(t, j)].is_zero() {
                    let q = &a[(t, j)] / &a[(t, t)];
                    col_axpy(&mut a, j, t, &q, &mut tr);
                }
            }
            // a remainder smaller than the pivot becomes the new pivot
            let mut smaller: Option<(usize, usize)> = None;
            for i in t + 1..rows {
                if !a[(i, t)].is_zero() && smaller.map_or(true, |(si, sj)| a[(i, t)].abs() < a[(si, sj)].abs()) {
                    smaller = Some((i, t));
                }
            }
            for j in t + 1..cols {
                if !a[(t, j)].is_zero() && smaller.map_or(true, |(si, sj)| a[(t, j)].abs() < a[(si, sj)].abs()) {
                    smaller = Some((t, j));
                }
            }
            if let Some((si, sj)) = smaller {
                swap_rows_tracked(&mut a, t, si, &mut tr);
                swap_cols_tracked(&mut a, t, sj, &mut tr);
                continue;
            }
            // pivot must divide the whole trailing block
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[(i, j)].is_multiple_of(&a[(t, t)])));
            match offending {
                Some(i) => {
                    let minus_one = -Int::one();
                    row_axpy(&mut a, t, i, &minus_one, &mut tr);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            for j in 0..cols {
                let v = -a[(t, j)].clone();
                a[(t, j)] = v;
            }
            if let Some(tr) = tr.as_mut() {
                for j in 0..tr.u.cols {
                    let v = -tr.u[(t, j)].clone();
                    tr.u[(t, j)] = v;
                }
                for r in 0..tr.u_inv.rows {
                    let v = -tr.u_inv[(r, t)].clone();
                    tr.u_inv[(r, t)] = v;
                }
            }
        }
    }
    (a, tr)
}

/// Smith normal form with unimodular transforms.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (d, tr) = smith_core(m, Some(Transforms::new(m.rows, m.cols)));
    let tr = tr.expect("transforms tracked");
    SmithForm { d, u: tr.u, v: tr.v, u_inv: tr.u_inv }
}

/// Invariant factors only (no transforms); cheaper.
pub fn invariant_factors(m: &IntMatrix) -> Vec<Int> {
    let (d, _) = smith_core(m, None);
    (0..d.rows.min(d.cols)).map(|i| d[(i, i)].clone()).collect()
}

/// Index of the image of `m` in its codomain, i.e. `|coker m|`, when `m`
/// is injective with full-rank image.
pub fn lattice_index(m: &IntMatrix) -> Result<Int, NotFiniteIndex> {
    if m.rows != m.cols {
        return Err(NotFiniteIndex);
    }
    let factors = invariant_factors(m);
    if factors.iter().any(Zero::is_zero) {
        return Err(NotFiniteIndex);
    }
    Ok(factors.iter().fold(Int::one(), |acc, d| acc * d))
}

// ---------------------------------------------------------------------------
// Lattice helpers

/// Writes `v = k * u` with `u` primitive and `k > 0`.
pub fn primitive_part(v: &[Int]) -> Result<(Vec<Int>, Int), LinalgError> {
    let k = v.iter().fold(Int::zero(), |g, x| g.gcd(x));
    if k.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    Ok((v.iter().map(|x| x / &k).collect(), k))
}

/// Same as [`primitive_part`] for small vectors.
pub fn primitive_part_i64(v: &[i64]) -> Result<(Vec<i64>, i64), LinalgError> {
    let k = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if k == 0 {
        return Err(LinalgError::ZeroVector);
    }
    Ok((v.iter().map(|x| x / k).collect(), k))
}

fn columns_matrix(n: usize, vectors: &[Vec<Int>]) -> Result<IntMatrix, LinalgError> {
    let mut m = Matrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: v.len() });
        }
        for (i, x) in v.iter().enumerate() {
            m[(i, j)] = x.clone();
        }
    }
    Ok(m)
}

/// Basis of `span_Q(vectors) ∩ Z^n`.
pub fn saturate(n: usize, vectors: &[Vec<Int>]) -> Result<Vec<Vec<Int>>, LinalgError> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let snf = smith_normal_form(&columns_matrix(n, vectors)?);
    let r = snf.rank();
    Ok((0..r).map(|j| snf.u_inv.column(j)).collect())
}

/// Integer matrix `Q` (`(n - r) x n`) with `ker Q = span_Q(vectors) ∩ Z^n`
/// and `Q : Z^n -> Z^(n-r)` surjective, i.e. a coordinate presentation of
/// `Z^n / L_N`.
pub fn quotient_map(n: usize, vectors: &[Vec<Int>]) -> Result<IntMatrix, LinalgError> {
    if vectors.is_empty() {
        return Ok(Matrix::identity(n));
    }
    let snf = smith_normal_form(&columns_matrix(n, vectors)?);
    let r = snf.rank();
    let rows = (r..n).map(|i| snf.u.row(i).to_vec()).collect();
    Matrix::from_rows(n, rows)
}

pub fn int_vec(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn rat_vec(v: &[Int]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}
