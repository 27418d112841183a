//! Reading and writing problem files.
//!
//! A problem file is TOML. Every non-integer number is an exact fraction
//! written as a string (`"-3/2"`); decimal literals are rejected. See
//! `docs/problem-format.md` for the grammar.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use tropcount::linalg::Rational;
use tropcount::problem::{AffineConstraint, BoundaryConstraint, Problem, VertexCondition};
use tropcount::tropical::{CombinatorialType, Degree, DegreeEnd, Edge, Leg};

use crate::CliError;

pub const PROBLEM_FORMAT: &str = "tropcount-problem/1";

/// An exact rational read from either a TOML integer or a fraction string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

/// Parses `a`, `-a`, `a/b` or `-a/b` with decimal digits only.
pub fn parse_fraction(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (negative, body) = match t.strip_prefix('-').or_else(|| t.strip_prefix('\u{2212}')) {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let digits = |s: &str| -> Option<BigInt> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (digits(a)?, digits(b)?),
        None => (digits(body)?, BigInt::from(1)),
    };
    if den.is_zero() {
        return None;
    }
    let value = Rational::new(num, den);
    Some(if negative { -value } else { value })
}

pub fn format_fraction(q: &Rational) -> String {
    q.to_string()
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExactVisitor;
        impl Visitor<'_> for ExactVisitor {
            type Value = Exact;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or an exact fraction string such as \"-3/2\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
                Err(E::custom(format!("decimal literal {v} is not exact; write a fraction string such as \"1/2\"")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
                parse_fraction(v)
                    .map(Exact)
                    .ok_or_else(|| E::custom(format!("`{v}` is not an exact fraction (expected forms: \"3\", \"-3/2\")")))
            }
        }
        d.deserialize_any(ExactVisitor)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_fraction(&self.0))
    }
}

/// Lattice vector entry: TOML integer, or a string for values beyond `i64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeInt(pub BigInt);

impl<'de> Deserialize<'de> for LatticeInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let Exact(q) = Exact::deserialize(d)?;
        if !q.is_integer() {
            return Err(de::Error::custom(format!("span entries must be integers, found {q}")));
        }
        Ok(LatticeInt(q.to_integer()))
    }
}

impl Serialize for LatticeInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

fn is_one(w: &u64) -> bool {
    *w == 1
}

fn is_zero(s: &u32) -> bool {
    *s == 0
}

fn one() -> u64 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub direction: Vec<i64>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkingEntry {
    pub point: Vec<Exact>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub span: Vec<Vec<LatticeInt>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub psi: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEntry {
    pub end: usize,
    pub point: Vec<Exact>,
    pub span: Vec<Vec<LatticeInt>>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub tail: usize,
    pub head: usize,
    pub direction: Vec<i64>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegEntry {
    pub vertex: usize,
    pub label: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub vertices: usize,
    #[serde(default)]
    pub markings: Vec<usize>,
    #[serde(default, rename = "edge", skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
    #[serde(rename = "leg")]
    pub legs: Vec<LegEntry>,
}

/// Raw document structure, before semantic validation.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub n: usize,
    #[serde(default)]
    pub genus: usize,
    #[serde(rename = "end")]
    pub ends: Vec<EndEntry>,
    #[serde(default, rename = "marking", skip_serializing_if = "Vec::is_empty")]
    pub markings: Vec<MarkingEntry>,
    #[serde(default, rename = "boundary", skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryEntry>,
    #[serde(default, rename = "type", skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<TypeEntry>,
}

fn constraint(point: &[Exact], span: &[Vec<LatticeInt>], weight: u64) -> tropcount::Result<AffineConstraint> {
    let base = point.iter().map(|e| e.0.clone()).collect();
    let span = span.iter().map(|v| v.iter().map(|x| x.0.clone()).collect()).collect();
    AffineConstraint::new(base, span, weight)
}

fn semantic(context: String) -> impl FnOnce(tropcount::Error) -> CliError {
    move |source| CliError::Semantic { context, source }
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem, CliError> {
        if let Some(f) = &self.format {
            if f != PROBLEM_FORMAT {
                return Err(CliError::Syntax(format!("unsupported format `{f}`; expected `{PROBLEM_FORMAT}`")));
            }
        }
        let n = self.n;
        let labeled = self.ends.iter().filter(|e| e.label.is_some()).count();
        if labeled != 0 && labeled != self.ends.len() {
            return Err(CliError::Syntax("either every [[end]] has a label or none does".into()));
        }
        let ends = self
            .ends
            .into_iter()
            .enumerate()
            .map(|(i, e)| DegreeEnd { label: e.label.unwrap_or(i + 1), direction: e.direction, weight: e.weight })
            .collect();
        let degree = Degree::from_ends(n, ends).map_err(semantic("degree".into()))?;
        let markings = self
            .markings
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let c = constraint(&m.point, &m.span, m.weight).map_err(semantic(format!("marking {}", i + 1)))?;
                Ok(VertexCondition { constraint: c, psi: m.psi })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let boundary = self
            .boundary
            .iter()
            .map(|b| {
                let c = constraint(&b.point, &b.span, b.weight)
                    .map_err(semantic(format!("boundary constraint on end {}", b.end)))?;
                Ok(BoundaryConstraint { end: b.end, constraint: c })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let problem = Problem::new(self.genus, degree.clone(), markings, boundary).map_err(semantic("problem".into()))?;
        if self.types.is_empty() {
            return Ok(problem);
        }
        let types = self
            .types
            .into_iter()
            .enumerate()
            .map(|(i, t)| build_type(n, &degree, t).map_err(|e| e.within(format!("type {}", i + 1))))
            .collect::<Result<Vec<_>, CliError>>()?;
        problem.with_types(types).map_err(semantic("types".into()))
    }

    pub fn from_problem(problem: &Problem) -> Self {
        let ends = problem
            .degree()
            .ends()
            .iter()
            .map(|e| EndEntry { label: Some(e.label), direction: e.direction.clone(), weight: e.weight })
            .collect();
        let point = |c: &AffineConstraint| c.base().iter().cloned().map(Exact).collect();
        let span = |c: &AffineConstraint| c.span().iter().map(|v| v.iter().cloned().map(LatticeInt).collect()).collect();
        let markings = problem
            .markings()
            .iter()
            .map(|m| MarkingEntry {
                point: point(&m.constraint),
                span: span(&m.constraint),
                psi: m.psi,
                weight: m.constraint.weight(),
            })
            .collect();
        let boundary = problem
            .boundary()
            .iter()
            .map(|b| BoundaryEntry {
                end: b.end,
                point: point(&b.constraint),
                span: span(&b.constraint),
                weight: b.constraint.weight(),
            })
            .collect();
        let types = problem
            .user_types()
            .iter()
            .map(|t| TypeEntry {
                vertices: t.vertex_count,
                markings: t.markings.clone(),
                edges: t
                    .edges
                    .iter()
                    .map(|e| EdgeEntry { tail: e.tail, head: e.head, direction: e.direction.clone(), weight: e.weight })
                    .collect(),
                legs: t.legs.iter().map(|l| LegEntry { vertex: l.vertex, label: l.label }).collect(),
            })
            .collect();
        ProblemFile {
            format: Some(PROBLEM_FORMAT.to_string()),
            n: problem.n(),
            genus: problem.genus(),
            ends,
            markings,
            boundary,
            types,
        }
    }
}

fn build_type(n: usize, degree: &Degree, t: TypeEntry) -> Result<CombinatorialType, CliError> {
    let mut legs = Vec::with_capacity(t.legs.len());
    for l in t.legs {
        if l.label == 0 || l.label > degree.e_inf() {
            return Err(CliError::Syntax(format!("leg label {} is not an end of the degree", l.label)));
        }
        let end = degree.end(l.label);
        legs.push(Leg { vertex: l.vertex, label: l.label, direction: end.direction.clone(), weight: end.weight });
    }
    let edges = t
        .edges
        .into_iter()
        .map(|e| Edge { tail: e.tail, head: e.head, direction: e.direction, weight: e.weight })
        .collect();
    let ty = CombinatorialType { n, vertex_count: t.vertices, edges, legs, markings: t.markings };
    ty.validate().map_err(|v| CliError::Semantic { context: "type".into(), source: tropcount::Error::InvalidType(v) })?;
    Ok(ty)
}

/// Parses and validates a problem document. Syntax errors carry the line and
/// column of the offending token.
pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
    file.into_problem()
}

/// Writes a problem as a document accepted by [`parse_problem`].
pub fn emit_problem(problem: &Problem) -> String {
    toml::to_string(&ProblemFile::from_problem(problem)).expect("problem files always serialize")
}
