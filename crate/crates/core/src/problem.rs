//! Counting instances: degree, affine incidence conditions, psi exponents.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{int_vec, quotient_map, rat_vec, saturate, IntMatrix, Rational};
use crate::tropical::{expected_dim, CombinatorialType, Degree};

/// Affine subspace `base + span_Q(span)` of `Q^n` with an integer weight.
/// The span is stored as a saturated lattice basis. Equality compares the
/// subspaces, not the chosen base point or basis.
#[derive(Debug, Clone)]
pub struct AffineConstraint {
    base: Vec<Rational>,
    span: Vec<Vec<BigInt>>,
    weight: u64,
    quotient: IntMatrix,
}

impl AffineConstraint {
    pub fn new(base: Vec<Rational>, span: Vec<Vec<BigInt>>, weight: u64) -> Result<Self> {
        let n = base.len();
        if n == 0 {
            return Err(Error::InvalidConstraint("base point has no coordinates".into()));
        }
        if weight == 0 {
            return Err(Error::InvalidConstraint("constraint weight must be positive".into()));
        }
        let span = saturate(n, &span)?;
        let quotient = quotient_map(n, &span)?;
        Ok(AffineConstraint { base, span, weight, quotient })
    }

    /// A point condition.
    pub fn point(base: Vec<Rational>) -> Self {
        Self::new(base, vec![], 1).expect("valid point")
    }

    /// The whole ambient space (codimension 0).
    pub fn everything(n: usize) -> Self {
        let span = (0..n)
            .map(|i| {
                let mut v = vec![0i64; n];
                v[i] = 1;
                int_vec(&v)
            })
            .collect();
        Self::new(vec![Rational::zero(); n], span, 1).expect("valid ambient space")
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    /// Saturated basis of `L_N(A)`.
    pub fn span(&self) -> &[Vec<BigInt>] {
        &self.span
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn codim(&self) -> usize {
        self.n() - self.span.len()
    }

    /// Rows of a surjection `Z^n -> Z^codim` whose kernel is `L_N(A)`.
    pub fn quotient_rows(&self) -> &IntMatrix {
        &self.quotient
    }

    pub fn contains_direction(&self, u: &[i64]) -> bool {
        let v = int_vec(u);
        self.quotient.mul_vec(&v).map(|r| r.iter().all(Zero::is_zero)).unwrap_or(false)
    }

    pub fn translated(&self, offset: &[Rational]) -> Self {
        let mut out = self.clone();
        for (b, o) in out.base.iter_mut().zip(offset) {
            *b = &*b + o;
        }
        out
    }

    /// Applies `x -> g x` for an integer matrix `g` (assumed unimodular).
    pub fn transformed(&self, g: &IntMatrix) -> Result<Self> {
        let base = g.to_rational().mul_vec(&self.base)?;
        let span = self.span.iter().map(|v| g.mul_vec(v)).collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(base, span, self.weight)
    }
}

impl PartialEq for AffineConstraint {
    fn eq(&self, other: &Self) -> bool {
        if self.n() != other.n() || self.weight != other.weight || self.span.len() != other.span.len() {
            return false;
        }
        let kills = |v: &[Rational]| {
            self.quotient.to_rational().mul_vec(v).map(|r| r.iter().all(Zero::is_zero)).unwrap_or(false)
        };
        let same_span = other.span.iter().all(|v| kills(&rat_vec(v)));
        let diff: Vec<Rational> = self.base.iter().zip(&other.base).map(|(a, b)| a - b).collect();
        same_span && kills(&diff)
    }
}

impl Eq for AffineConstraint {}

/// Condition `h(V_i) ∈ A_i` together with the psi exponent `s_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCondition {
    pub constraint: AffineConstraint,
    pub psi: u32,
}

/// Condition `h(E_j) ⊂ B_j` on the end labeled `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryConstraint {
    pub end: usize,
    pub constraint: AffineConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    genus: usize,
    degree: Degree,
    markings: Vec<VertexCondition>,
    boundary: Vec<BoundaryConstraint>,
    user_types: Vec<CombinatorialType>,
}

impl Problem {
    /// Validates the data and the dimension balance
    /// `Σ s_i + Σ a_i + Σ b_j = e_inf + m + (n - 3)(1 - g)`.
    pub fn new(
        genus: usize,
        degree: Degree,
        markings: Vec<VertexCondition>,
        mut boundary: Vec<BoundaryConstraint>,
    ) -> Result<Self> {
        let n = degree.n();
        if !degree.is_balanced() {
            return Err(Error::InvalidDegree("weighted directions do not sum to zero".into()));
        }
        for (i, c) in markings.iter().enumerate() {
            if c.constraint.n() != n {
                return Err(Error::InvalidConstraint(format!("marking {} lives in dimension {}", i + 1, c.constraint.n())));
            }
        }
        boundary.sort_by_key(|b| b.end);
        for w in boundary.windows(2) {
            if w[0].end == w[1].end {
                return Err(Error::InvalidConstraint(format!("two boundary constraints on end {}", w[0].end)));
            }
        }
        for b in &boundary {
            if b.end == 0 || b.end > degree.e_inf() {
                return Err(Error::InvalidConstraint(format!("boundary constraint on unknown end {}", b.end)));
            }
            if b.constraint.n() != n {
                return Err(Error::InvalidConstraint(format!("boundary constraint on end {} has wrong dimension", b.end)));
            }
            if !b.constraint.contains_direction(&degree.end(b.end).direction) {
                return Err(Error::InvalidConstraint(format!(
                    "boundary constraint on end {} is not parallel to its direction",
                    b.end
                )));
            }
        }
        let problem = Problem { genus, degree, markings, boundary, user_types: Vec::new() };
        let (lhs, rhs) = problem.dimension_sides();
        if lhs != rhs {
            return Err(Error::DimensionMismatch { lhs, rhs });
        }
        Ok(problem)
    }

    /// Attaches explicit combinatorial types to count (required where the
    /// enumeration is not automatic).
    pub fn with_types(mut self, types: Vec<CombinatorialType>) -> Result<Self> {
        for t in &types {
            t.validate().map_err(Error::InvalidType)?;
            if t.n != self.n() || t.markings.len() != self.m() {
                return Err(Error::InvalidConstraint("supplied type does not match the problem".into()));
            }
            if t.degree()? != self.degree {
                return Err(Error::InvalidConstraint("supplied type has a different degree".into()));
            }
            if t.genus() != self.genus {
                return Err(Error::InvalidConstraint(format!(
                    "supplied type has genus {}, problem has genus {}",
                    t.genus(),
                    self.genus
                )));
            }
        }
        self.user_types = types;
        Ok(self)
    }

    /// `(Σ s + Σ a + Σ b, d^trop)`.
    pub fn dimension_sides(&self) -> (i64, i64) {
        let psi: i64 = self.markings.iter().map(|c| c.psi as i64).sum();
        let a: i64 = self.markings.iter().map(|c| c.constraint.codim() as i64).sum();
        let b: i64 = self.boundary.iter().map(|c| c.constraint.codim() as i64).sum();
        (psi + a + b, expected_dim(self.n(), self.genus, self.degree.e_inf(), self.m()))
    }

    pub fn n(&self) -> usize {
        self.degree.n()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn degree(&self) -> &Degree {
        &self.degree
    }

    pub fn m(&self) -> usize {
        self.markings.len()
    }

    pub fn markings(&self) -> &[VertexCondition] {
        &self.markings
    }

    pub fn psi(&self) -> Vec<u32> {
        self.markings.iter().map(|c| c.psi).collect()
    }

    pub fn boundary(&self) -> &[BoundaryConstraint] {
        &self.boundary
    }

    pub fn boundary_for(&self, label: usize) -> Option<&AffineConstraint> {
        self.boundary.iter().find(|b| b.end == label).map(|b| &b.constraint)
    }

    pub fn user_types(&self) -> &[CombinatorialType] {
        &self.user_types
    }

    /// Translates marking constraints and boundary constraints by the given
    /// offsets (one vector per constraint, in order).
    pub fn translated(&self, marking_offsets: &[Vec<Rational>], boundary_offsets: &[Vec<Rational>]) -> Self {
        let mut out = self.clone();
        for (c, o) in out.markings.iter_mut().zip(marking_offsets) {
            c.constraint = c.constraint.translated(o);
        }
        for (b, o) in out.boundary.iter_mut().zip(boundary_offsets) {
            b.constraint = b.constraint.translated(o);
        }
        out
    }

    /// Relabels interior markings: new marking `i` is old marking `perm[i]`.
    pub fn with_marking_order(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        out.markings = perm.iter().map(|&i| self.markings[i].clone()).collect();
        for t in &mut out.user_types {
            t.markings = perm.iter().map(|&i| t.markings[i]).collect();
        }
        out
    }

    /// Applies an integral linear change of coordinates `g` to the degree,
    /// all constraints and any supplied types.
    pub fn transformed(&self, g: &IntMatrix) -> Result<Self> {
        let n = self.n();
        let apply = |u: &[i64]| -> Result<Vec<i64>> {
            let v = g.mul_vec(&int_vec(u))?;
            Ok(v.iter().map(|x| i64::try_from(x).expect("small direction")).collect())
        };
        let ends = self
            .degree
            .ends()
            .iter()
            .map(|e| Ok((apply(&e.direction)?, e.weight)))
            .collect::<Result<Vec<_>>>()?;
        let degree = Degree::new(n, ends)?;
        let markings = self
            .markings
            .iter()
            .map(|c| Ok(VertexCondition { constraint: c.constraint.transformed(g)?, psi: c.psi }))
            .collect::<Result<Vec<_>>>()?;
        let boundary = self
            .boundary
            .iter()
            .map(|b| Ok(BoundaryConstraint { end: b.end, constraint: b.constraint.transformed(g)? }))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Problem::new(self.genus, degree, markings, boundary)?;
        let types = self
            .user_types
            .iter()
            .map(|t| {
                let mut t = t.clone();
                for e in &mut t.edges {
                    e.direction = apply(&e.direction)?;
                }
                for l in &mut t.legs {
                    l.direction = apply(&l.direction)?;
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        if !types.is_empty() {
            out = out.with_types(types)?;
        }
        Ok(out)
    }
}
