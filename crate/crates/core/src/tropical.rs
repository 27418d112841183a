//! Marked tropical curves: degrees, combinatorial types, realized curves and
//! the structural predicates on them.
//!
//! Directions and weights are small machine integers; every quantity that
//! feeds a linear system (positions, lengths, lattice maps) is promoted to
//! `BigInt`/`BigRational` at the boundary.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{primitive_part_i64, rank, Matrix, RatMatrix, Rational};

/// One labeled unbounded end of a degree: `weight * direction` with a
/// primitive `direction`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeEnd {
    pub label: usize,
    pub direction: Vec<i64>,
    pub weight: u64,
}

impl DegreeEnd {
    pub fn vector(&self) -> Vec<i64> {
        self.direction.iter().map(|&x| x * self.weight as i64).collect()
    }
}

/// Labeled multiset of weighted primitive directions; labels are `1..=e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Degree {
    n: usize,
    ends: Vec<DegreeEnd>,
}

impl Degree {
    /// Labels are assigned in order, starting at 1.
    pub fn new(n: usize, ends: Vec<(Vec<i64>, u64)>) -> Result<Self> {
        let ends = ends
            .into_iter()
            .enumerate()
            .map(|(i, (direction, weight))| DegreeEnd { label: i + 1, direction, weight })
            .collect();
        Self::from_ends(n, ends)
    }

    /// Accepts ends in any order as long as the labels are exactly `1..=e`.
    pub fn from_ends(n: usize, mut ends: Vec<DegreeEnd>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDegree("ambient rank must be positive".into()));
        }
        if ends.is_empty() {
            return Err(Error::InvalidDegree("a degree needs at least one end".into()));
        }
        ends.sort_by_key(|e| e.label);
        for (i, e) in ends.iter().enumerate() {
            if e.label != i + 1 {
                return Err(Error::InvalidDegree(format!(
                    "labels must be exactly 1..={}; found label {}",
                    ends.len(),
                    e.label
                )));
            }
            if e.direction.len() != n {
                return Err(Error::InvalidDegree(format!("end {} has {} coordinates, expected {n}", e.label, e.direction.len())));
            }
            if e.weight == 0 {
                return Err(Error::InvalidDegree(format!("end {} has weight 0", e.label)));
            }
            match primitive_part_i64(&e.direction) {
                Err(_) => return Err(Error::InvalidDegree(format!("end {} has zero direction", e.label))),
                Ok((_, k)) if k != 1 => {
                    return Err(Error::InvalidDegree(format!("end {} has non-primitive direction {:?}", e.label, e.direction)))
                }
                _ => {}
            }
        }
        Ok(Degree { n, ends })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e_inf(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self) -> &[DegreeEnd] {
        &self.ends
    }

    /// End with the given 1-based label.
    pub fn end(&self, label: usize) -> &DegreeEnd {
        &self.ends[label - 1]
    }

    pub fn is_balanced(&self) -> bool {
        (0..self.n).all(|k| self.ends.iter().map(|e| e.direction[k] * e.weight as i64).sum::<i64>() == 0)
    }
}

/// Reference to an edge of a combinatorial type, for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeRef {
    Compact(usize),
    End(usize),
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeRef::Compact(i) => write!(f, "compact edge {i}"),
            EdgeRef::End(l) => write!(f, "end {l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    NoVertices,
    VertexOutOfRange(EdgeRef),
    WrongDimension(EdgeRef),
    ZeroWeightEdge(EdgeRef),
    ZeroDirection(EdgeRef),
    NonPrimitiveDirection(EdgeRef),
    SelfLoop(usize),
    Unbalanced(usize),
    Disconnected,
    DuplicateLabel(usize),
    MissingLabel(usize),
    MarkingOutOfRange(usize),
    NegativeOverValence(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "type has no vertices"),
            Violation::VertexOutOfRange(e) => write!(f, "{e} refers to a missing vertex"),
            Violation::WrongDimension(e) => write!(f, "{e} has the wrong number of coordinates"),
            Violation::ZeroWeightEdge(e) => write!(f, "{e} has weight 0"),
            Violation::ZeroDirection(e) => write!(f, "{e} has zero direction"),
            Violation::NonPrimitiveDirection(e) => write!(f, "{e} has a non-primitive direction"),
            Violation::SelfLoop(i) => write!(f, "compact edge {i} is a self-loop"),
            Violation::Unbalanced(v) => write!(f, "vertex {v} is not balanced"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::DuplicateLabel(l) => write!(f, "end label {l} appears more than once"),
            Violation::MissingLabel(l) => write!(f, "end label {l} is missing"),
            Violation::MarkingOutOfRange(i) => write!(f, "marking {i} refers to a missing vertex"),
            Violation::NegativeOverValence(v) => write!(f, "vertex {v} has negative over-valence"),
        }
    }
}

/// Bounded edge; the realized curve satisfies
/// `h(head) - h(tail) = length * direction`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub direction: Vec<i64>,
    pub weight: u64,
}

/// Unbounded end attached at `vertex`, pointing outwards along `direction`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leg {
    pub vertex: usize,
    pub label: usize,
    pub direction: Vec<i64>,
    pub weight: u64,
}

/// Marked weighted graph with edge directions. Every vertex has genus 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombinatorialType {
    pub n: usize,
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub legs: Vec<Leg>,
    /// `markings[i]` is the vertex carrying marking `i` (0-based).
    pub markings: Vec<usize>,
}

impl CombinatorialType {
    pub fn e_inf(&self) -> usize {
        self.legs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn marking_count(&self) -> usize {
        self.markings.len()
    }

    /// Valence, counting compact edges and ends.
    pub fn valence(&self, v: usize) -> usize {
        let compact: usize = self.edges.iter().map(|e| (e.tail == v) as usize + (e.head == v) as usize).sum();
        compact + self.legs.iter().filter(|l| l.vertex == v).count()
    }

    pub fn marks_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.markings.iter().enumerate().filter(move |(_, &w)| w == v).map(|(i, _)| i)
    }

    pub fn leg(&self, label: usize) -> Option<&Leg> {
        self.legs.iter().find(|l| l.label == label)
    }

    /// The degree read off the ends, when the labels are `1..=e`.
    pub fn degree(&self) -> Result<Degree> {
        Degree::from_ends(
            self.n,
            self.legs
                .iter()
                .map(|l| DegreeEnd { label: l.label, direction: l.direction.clone(), weight: l.weight })
                .collect(),
        )
    }

    /// Checks every structural invariant and reports all failures.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.vertex_count == 0 {
            out.push(Violation::NoVertices);
            return Err(out);
        }
        let check_dir = |r: EdgeRef, dir: &[i64], weight: u64, out: &mut Vec<Violation>| {
            if dir.len() != self.n {
                out.push(Violation::WrongDimension(r));
                return;
            }
            if weight == 0 {
                out.push(Violation::ZeroWeightEdge(r));
            }
            match primitive_part_i64(dir) {
                Err(_) => out.push(Violation::ZeroDirection(r)),
                Ok((_, k)) if k != 1 => out.push(Violation::NonPrimitiveDirection(r)),
                _ => {}
            }
        };
        let mut structural = true;
        for (i, e) in self.edges.iter().enumerate() {
            let r = EdgeRef::Compact(i);
            if e.tail >= self.vertex_count || e.head >= self.vertex_count {
                out.push(Violation::VertexOutOfRange(r));
                structural = false;
            } else if e.tail == e.head {
                out.push(Violation::SelfLoop(i));
            }
            check_dir(r, &e.direction, e.weight, &mut out);
            if e.direction.len() != self.n {
                structural = false;
            }
        }
        let mut labels = BTreeMap::new();
        for l in &self.legs {
            let r = EdgeRef::End(l.label);
            if l.vertex >= self.vertex_count {
                out.push(Violation::VertexOutOfRange(r));
                structural = false;
            }
            check_dir(r, &l.direction, l.weight, &mut out);
            if l.direction.len() != self.n {
                structural = false;
            }
            *labels.entry(l.label).or_insert(0usize) += 1;
        }
        for (&label, &count) in &labels {
            if count > 1 {
                out.push(Violation::DuplicateLabel(label));
            }
        }
        for label in 1..=self.legs.len() {
            if !labels.contains_key(&label) {
                out.push(Violation::MissingLabel(label));
            }
        }
        for (i, &v) in self.markings.iter().enumerate() {
            if v >= self.vertex_count {
                out.push(Violation::MarkingOutOfRange(i));
                structural = false;
            }
        }
        if structural {
            for v in 0..self.vertex_count {
                let mut sum = vec![0i64; self.n];
                for e in &self.edges {
                    let w = e.weight as i64;
                    if e.tail == v {
                        for k in 0..self.n {
                            sum[k] += w * e.direction[k];
                        }
                    }
                    if e.head == v {
                        for k in 0..self.n {
                            sum[k] -= w * e.direction[k];
                        }
                    }
                }
                for l in self.legs.iter().filter(|l| l.vertex == v) {
                    for k in 0..self.n {
                        sum[k] += l.weight as i64 * l.direction[k];
                    }
                }
                if sum.iter().any(|&x| x != 0) {
                    out.push(Violation::Unbalanced(v));
                }
                if self.valence(v) + self.marks_at(v).count() < 3 {
                    out.push(Violation::NegativeOverValence(v));
                }
            }
            if !self.is_connected() {
                out.push(Violation::Disconnected);
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `adj[v]` lists `(neighbour, edge index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.tail].push((e.head, i));
            if e.head != e.tail {
                adj[e.head].push((e.tail, i));
            }
        }
        adj
    }

    /// `val(V) + m_V - 3`.
    pub fn over_valence(&self, v: usize) -> Result<u64> {
        let total = self.valence(v) + self.marks_at(v).count();
        if total < 3 {
            return Err(Error::NegativeOverValence { vertex: v });
        }
        Ok((total - 3) as u64)
    }

    pub fn over_valence_total(&self) -> Result<u64> {
        (0..self.vertex_count).map(|v| self.over_valence(v)).sum()
    }

    /// First Betti number of a connected graph.
    pub fn genus(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.vertex_count)
    }

    /// Checks `e_inf = ē - 3g + 3 + ov - m`.
    pub fn euler_identity_check(&self) -> Result<(), (i64, i64)> {
        let ov = self.over_valence_total().map_err(|_| (self.e_inf() as i64, i64::MIN))? as i64;
        let rhs = self.edges.len() as i64 - 3 * self.genus() as i64 + 3 + ov - self.markings.len() as i64;
        if rhs == self.e_inf() as i64 {
            Ok(())
        } else {
            Err((self.e_inf() as i64, rhs))
        }
    }

    /// Edge-length vectors in `Q^ē` that close every loop. Returns
    /// `n + dim W`.
    pub fn deformation_dim(&self) -> usize {
        let ebar = self.edges.len();
        let rows = self.loop_equations();
        let w_dim = if rows.nrows() == 0 { ebar } else { ebar - rank(&rows) };
        self.n + w_dim
    }

    pub fn is_superabundant(&self) -> bool {
        let expected = self.n as i64 + self.edges.len() as i64 - (self.n * self.genus()) as i64;
        self.deformation_dim() as i64 > expected
    }

    /// Loop-closing equations over the fundamental cycles of a BFS spanning
    /// tree, `n` rows per chord.
    fn loop_equations(&self) -> RatMatrix {
        let ebar = self.edges.len();
        let adj = self.adjacency();
        // offset[v]: coefficients expressing h(v) - h(0) as sum of a_E u_E along tree edges
        let mut offset: Vec<Option<Vec<(usize, i64)>>> = vec![None; self.vertex_count];
        let mut in_tree = vec![false; ebar];
        offset[0] = Some(Vec::new());
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(w, ei) in &adj[v] {
                if offset[w].is_some() {
                    continue;
                }
                let e = &self.edges[ei];
                let sign = if e.tail == v { 1 } else { -1 };
                let mut path = offset[v].clone().unwrap();
                path.push((ei, sign));
                offset[w] = Some(path);
                in_tree[ei] = true;
                queue.push_back(w);
            }
        }
        let mut m = Matrix::zeros(0, ebar);
        for (ci, chord) in self.edges.iter().enumerate() {
            if in_tree[ci] {
                continue;
            }
            // a_c u_c - (h(head) - h(tail)) along the tree = 0
            let mut coeff: BTreeMap<usize, i64> = BTreeMap::new();
            *coeff.entry(ci).or_default() += 1;
            for &(ei, s) in offset[chord.head].as_deref().unwrap_or(&[]) {
                *coeff.entry(ei).or_default() -= s;
            }
            for &(ei, s) in offset[chord.tail].as_deref().unwrap_or(&[]) {
                *coeff.entry(ei).or_default() += s;
            }
            for k in 0..self.n {
                let mut row = vec![Rational::zero(); ebar];
                for (&ei, &c) in &coeff {
                    row[ei] = Rational::from_integer(BigInt::from(c * self.edges[ei].direction[k]));
                }
                m.push_row(row);
            }
        }
        m
    }
}

/// `d^trop = e_inf + m + (n - 3)(1 - g)`.
pub fn expected_dim(n: usize, g: usize, e_inf: usize, m: usize) -> i64 {
    e_inf as i64 + m as i64 + (n as i64 - 3) * (1 - g as i64)
}

/// A combinatorial type together with vertex positions and edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropicalCurve {
    pub ty: CombinatorialType,
    pub positions: Vec<Vec<Rational>>,
    pub lengths: Vec<Rational>,
}

impl TropicalCurve {
    /// Checks `h(head) - h(tail) = ℓ·u` and `ℓ > 0` for every compact edge.
    pub fn new(ty: CombinatorialType, positions: Vec<Vec<Rational>>, lengths: Vec<Rational>) -> Result<Self> {
        if positions.len() != ty.vertex_count || lengths.len() != ty.edges.len() {
            return Err(Error::InvalidConstraint("position or length count does not match the type".into()));
        }
        for (i, e) in ty.edges.iter().enumerate() {
            if lengths[i] <= Rational::zero() {
                return Err(Error::InvalidConstraint(format!("compact edge {i} has non-positive length")));
            }
            for k in 0..ty.n {
                let lhs = &positions[e.head][k] - &positions[e.tail][k];
                let rhs = &lengths[i] * Rational::from_integer(BigInt::from(e.direction[k]));
                if lhs != rhs {
                    return Err(Error::InvalidConstraint(format!("compact edge {i} does not match its direction")));
                }
            }
        }
        Ok(TropicalCurve { ty, positions, lengths })
    }

    pub fn automorphism_count(&self) -> u64 {
        automorphism_count(&self.ty, Some(&self.positions))
    }
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// `|Aut(Δ)|`: product of factorials of the sizes of the classes of ends
/// sharing direction and weight.
pub fn aut_delta(degree: &Degree) -> BigInt {
    let mut classes: BTreeMap<(&[i64], u64), u64> = BTreeMap::new();
    for e in degree.ends() {
        *classes.entry((&e.direction, e.weight)).or_default() += 1;
    }
    classes.values().map(|&c| factorial(c)).product()
}

/// `|Stab_Γ(Δ)|`: product over vertices of factorials of the numbers of ends
/// with the same direction and weight at that vertex.
pub fn stab_delta(ty: &CombinatorialType) -> BigInt {
    let mut classes: BTreeMap<(usize, &[i64], u64), u64> = BTreeMap::new();
    for l in &ty.legs {
        *classes.entry((l.vertex, &l.direction, l.weight)).or_default() += 1;
    }
    classes.values().map(|&c| factorial(c)).product()
}

// Edge class under a vertex map: endpoints in increasing order with the
// edge vector oriented from the smaller to the larger.
fn edge_class(tail: usize, head: usize, dir: &[i64], weight: u64) -> (usize, usize, Vec<i64>, u64) {
    if tail <= head {
        (tail, head, dir.to_vec(), weight)
    } else {
        (head, tail, dir.iter().map(|x| -x).collect(), weight)
    }
}

/// Number of automorphisms of the marked graph fixing markings and labeled
/// ends, preserving weights and directions and, when positions are given,
/// commuting with them. Parallel edges in the same class may be permuted
/// freely.
pub fn automorphism_count(ty: &CombinatorialType, positions: Option<&[Vec<Rational>]>) -> u64 {
    let nv = ty.vertex_count;
    let mut fixed = vec![false; nv];
    for &v in &ty.markings {
        fixed[v] = true;
    }
    for l in &ty.legs {
        fixed[l.vertex] = true;
    }
    let valence: Vec<usize> = (0..nv).map(|v| ty.valence(v)).collect();
    let mut edge_classes: BTreeMap<(usize, usize, Vec<i64>, u64), u64> = BTreeMap::new();
    for e in &ty.edges {
        *edge_classes.entry(edge_class(e.tail, e.head, &e.direction, e.weight)).or_default() += 1;
    }
    let parallel: u64 = edge_classes.values().map(|&c| (1..=c).product::<u64>()).product();

    let candidates: Vec<Vec<usize>> = (0..nv)
        .map(|v| {
            if fixed[v] {
                vec![v]
            } else {
                (0..nv)
                    .filter(|&w| {
                        !fixed[w]
                            && valence[w] == valence[v]
                            && positions.map_or(true, |p| p[v] == p[w])
                    })
                    .collect()
            }
        })
        .collect();

    let mut image = vec![usize::MAX; nv];
    let mut used = vec![false; nv];
    let mut count = 0u64;
    fn search(
        v: usize,
        ty: &CombinatorialType,
        candidates: &[Vec<usize>],
        image: &mut [usize],
        used: &mut [bool],
        classes: &BTreeMap<(usize, usize, Vec<i64>, u64), u64>,
        count: &mut u64,
    ) {
        if v == image.len() {
            let mut mapped: BTreeMap<(usize, usize, Vec<i64>, u64), u64> = BTreeMap::new();
            for e in &ty.edges {
                *mapped.entry(edge_class(image[e.tail], image[e.head], &e.direction, e.weight)).or_default() += 1;
            }
            if &mapped == classes {
                *count += 1;
            }
            return;
        }
        for &w in &candidates[v] {
            if used[w] {
                continue;
            }
            used[w] = true;
            image[v] = w;
            search(v + 1, ty, candidates, image, used, classes, count);
            used[w] = false;
        }
    }
    search(0, ty, &candidates, &mut image, &mut used, &edge_classes, &mut count);
    count * parallel
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn edge(tail: usize, head: usize, direction: &[i64], weight: u64) -> Edge {
        Edge { tail, head, direction: direction.to_vec(), weight }
    }

    pub fn leg(vertex: usize, label: usize, direction: &[i64], weight: u64) -> Leg {
        Leg { vertex, label, direction: direction.to_vec(), weight }
    }

    /// Tropical line: one trivalent vertex with ends (-1,0), (0,-1), (1,1).
    pub fn line_vertex() -> CombinatorialType {
        CombinatorialType {
            n: 2,
            vertex_count: 1,
            edges: vec![],
            legs: vec![leg(0, 1, &[-1, 0], 1), leg(0, 2, &[0, -1], 1), leg(0, 3, &[1, 1], 1)],
            markings: vec![],
        }
    }

    /// The line with two bivalent marked vertices on ends 1 and 2.
    pub fn line_two_points() -> CombinatorialType {
        CombinatorialType {
            n: 2,
            vertex_count: 3,
            edges: vec![edge(0, 1, &[-1, 0], 1), edge(0, 2, &[0, -1], 1)],
            legs: vec![leg(1, 1, &[-1, 0], 1), leg(2, 2, &[0, -1], 1), leg(0, 3, &[1, 1], 1)],
            markings: vec![1, 2],
        }
    }

    /// Genus-2 chain over the line: weight-2 end, double edge, weight-2
    /// edge, double edge, weight-2 end; every vertex carries a marking.
    pub fn hyperelliptic_chain() -> CombinatorialType {
        CombinatorialType {
            n: 1,
            vertex_count: 4,
            edges: vec![
                edge(0, 1, &[1], 1),
                edge(0, 1, &[1], 1),
                edge(1, 2, &[1], 2),
                edge(2, 3, &[1], 1),
                edge(2, 3, &[1], 1),
            ],
            legs: vec![leg(0, 1, &[-1], 2), leg(3, 2, &[1], 2)],
            markings: vec![0, 1, 2, 3],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn validate_line() {
        assert_eq!(line_vertex().validate(), Ok(()));
        assert_eq!(line_two_points().validate(), Ok(()));
    }

    #[test]
    fn validate_unbalanced() {
        let t = CombinatorialType {
            n: 2,
            vertex_count: 1,
            edges: vec![],
            legs: vec![leg(0, 1, &[1, 0], 1), leg(0, 2, &[0, 1], 1)],
            markings: vec![0],
        };
        assert!(t.validate().unwrap_err().contains(&Violation::Unbalanced(0)));
    }

    #[test]
    fn validate_zero_weight_and_labels() {
        let mut t = line_two_points();
        t.edges[0].weight = 0;
        t.legs[1].label = 1;
        let errs = t.validate().unwrap_err();
        assert!(errs.contains(&Violation::ZeroWeightEdge(EdgeRef::Compact(0))));
        assert!(errs.contains(&Violation::DuplicateLabel(1)));
        assert!(errs.contains(&Violation::MissingLabel(2)));
    }

    #[test]
    fn validate_non_primitive_and_disconnected() {
        let mut t = line_two_points();
        t.edges[1].direction = vec![0, -2];
        t.edges.remove(0);
        let errs = t.validate().unwrap_err();
        assert!(errs.contains(&Violation::NonPrimitiveDirection(EdgeRef::Compact(0))));
        assert!(errs.contains(&Violation::Disconnected));
    }

    #[test]
    fn over_valence_examples() {
        let mut t = line_vertex();
        assert_eq!(t.over_valence(0).unwrap(), 0);
        t.markings = vec![0];
        assert_eq!(t.over_valence(0).unwrap(), 1);
        t.markings = vec![0, 0];
        assert_eq!(t.over_valence(0).unwrap(), 2);
        let mut bad = line_two_points();
        bad.markings = vec![];
        assert_eq!(bad.over_valence(1), Err(Error::NegativeOverValence { vertex: 1 }));
    }

    #[test]
    fn genus_examples() {
        assert_eq!(line_two_points().genus(), 0);
        let double = CombinatorialType {
            n: 1,
            vertex_count: 2,
            edges: vec![edge(0, 1, &[1], 1), edge(0, 1, &[1], 1)],
            legs: vec![leg(0, 1, &[-1], 2), leg(1, 2, &[1], 2)],
            markings: vec![0, 1],
        };
        assert_eq!(double.genus(), 1);
        assert_eq!(hyperelliptic_chain().genus(), 2);
    }

    #[test]
    fn euler_identity() {
        let two_vertices = CombinatorialType {
            n: 2,
            vertex_count: 2,
            edges: vec![edge(0, 1, &[1, 0], 1)],
            legs: vec![
                leg(0, 1, &[-1, 1], 1),
                leg(0, 2, &[0, -1], 1),
                leg(1, 3, &[1, 1], 1),
                leg(1, 4, &[0, -1], 1),
            ],
            markings: vec![],
        };
        assert_eq!(two_vertices.validate(), Ok(()));
        assert_eq!(two_vertices.euler_identity_check(), Ok(()));
        assert_eq!(line_two_points().euler_identity_check(), Ok(()));
        assert_eq!(hyperelliptic_chain().euler_identity_check(), Ok(()));
        let disconnected = CombinatorialType { n: 2, vertex_count: 2, edges: vec![], legs: vec![], markings: vec![0, 0, 0, 1, 1, 1] };
        assert_eq!(disconnected.euler_identity_check(), Err((0, -3)));
    }

    #[test]
    fn expected_dim_examples() {
        assert_eq!(expected_dim(2, 0, 3, 2), 4);
        assert_eq!(expected_dim(1, 0, 6, 4), 8);
        assert_eq!(expected_dim(3, 1, 4, 0), 4);
    }

    #[test]
    fn superabundance() {
        assert!(!line_two_points().is_superabundant());
        // a double edge in the plane: its loop spans only a line
        let planar_double = CombinatorialType {
            n: 2,
            vertex_count: 2,
            edges: vec![edge(0, 1, &[1, 0], 1), edge(0, 1, &[1, 0], 1)],
            legs: vec![leg(0, 1, &[-1, 0], 2), leg(1, 2, &[1, 0], 2)],
            markings: vec![0, 1],
        };
        assert_eq!(planar_double.validate(), Ok(()));
        assert!(planar_double.is_superabundant());
        assert!(!hyperelliptic_chain().is_superabundant());
        assert_eq!(hyperelliptic_chain().deformation_dim(), 1 + 5 - 2);
    }

    #[test]
    fn automorphisms() {
        let positions: Vec<Vec<Rational>> = vec![vec![q(1)], vec![q(3)], vec![q(5)], vec![q(7)]];
        let lengths = vec![q(2), q(2), q(2), q(2), q(2)];
        let curve = TropicalCurve::new(hyperelliptic_chain(), positions, lengths).unwrap();
        assert_eq!(curve.automorphism_count(), 4);
        assert_eq!(automorphism_count(&line_two_points(), None), 1);
    }

    #[test]
    fn aut_and_stab_delta() {
        let line = Degree::new(2, vec![(vec![-1, 0], 1), (vec![0, -1], 1), (vec![1, 1], 1)]).unwrap();
        assert_eq!(aut_delta(&line), BigInt::from(1));
        let conic = Degree::new(
            2,
            vec![
                (vec![-1, 0], 1),
                (vec![-1, 0], 1),
                (vec![0, -1], 1),
                (vec![0, -1], 1),
                (vec![1, 1], 1),
                (vec![1, 1], 1),
            ],
        )
        .unwrap();
        assert_eq!(aut_delta(&conic), BigInt::from(8));
        let mixed = Degree::new(1, vec![(vec![1], 1), (vec![1], 2), (vec![-1], 3)]).unwrap();
        assert_eq!(aut_delta(&mixed), BigInt::from(1));
        assert_eq!(stab_delta(&line_vertex()), BigInt::from(1));
        let star = CombinatorialType {
            n: 1,
            vertex_count: 1,
            edges: vec![],
            legs: vec![leg(0, 1, &[1], 1), leg(0, 2, &[1], 1), leg(0, 3, &[1], 1), leg(0, 4, &[-1], 3)],
            markings: vec![0, 0],
        };
        assert_eq!(stab_delta(&star), BigInt::from(6));
    }

    #[test]
    fn degree_rejects_bad_ends() {
        assert!(Degree::new(2, vec![(vec![2, 0], 1)]).is_err());
        assert!(Degree::new(2, vec![(vec![0, 0], 1)]).is_err());
        assert!(Degree::new(2, vec![(vec![1, 0], 0)]).is_err());
        assert!(Degree::new(2, vec![(vec![1, 0, 0], 1)]).is_err());
    }
}
