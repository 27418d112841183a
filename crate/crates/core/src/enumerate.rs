//! Candidate combinatorial types.
//!
//! Genus-0 types are grown as rooted trees: end 1 is the root and every
//! other subtree is identified by the set of ends and markings below it.
//! Subtrees are memoized by that pair, so each is built (and, for the
//! constrained variant, solved) once. Rank-1 types of any genus come from a
//! left-to-right sweep over the marked points.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    primitive_part_i64, solve_affine, solve_affine_small, to_small, AffineSolve, Matrix, Rational, SmallRational, SmallSolve,
};
use crate::problem::{AffineConstraint, Problem};
use crate::tropical::{CombinatorialType, Degree, Edge, Leg};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub key: Vec<u8>,
    pub ty: CombinatorialType,
}

/// Deduplicated list of types, sorted by canonical key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCatalog {
    pub fingerprint: String,
    pub entries: Vec<CatalogEntry>,
}

impl TypeCatalog {
    pub fn from_types(fingerprint: String, types: impl IntoIterator<Item = CombinatorialType>) -> Self {
        let mut map = BTreeMap::new();
        for ty in types {
            map.entry(canonical_key(&ty)).or_insert(ty);
        }
        TypeCatalog { fingerprint, entries: map.into_iter().map(|(key, ty)| CatalogEntry { key, ty }).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn types(&self) -> impl Iterator<Item = &CombinatorialType> {
        self.entries.iter().map(|e| &e.ty)
    }
}

pub(crate) fn fingerprint(degree: &Degree, genus: usize, psi: &[u32]) -> String {
    let ends: Vec<String> =
        degree.ends().iter().map(|e| format!("{}:{:?}x{}", e.label, e.direction, e.weight)).collect();
    format!("n={} g={} ends=[{}] psi={:?}", degree.n(), genus, ends.join(" "), psi)
}

// ---------------------------------------------------------------------------
// Canonical form

type Signature = Vec<u64>;

fn push_i64s(out: &mut Vec<u8>, xs: impl IntoIterator<Item = i64>) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Isomorphism-invariant encoding of a type (markings, end labels, weights
/// and directions respected). Colour refinement plus individualization;
/// among all leaf orderings the smallest encoding wins.
pub fn canonical_key(ty: &CombinatorialType) -> Vec<u8> {
    let nv = ty.vertex_count;
    // initial colours: markings and legs at the vertex
    let mut initial: Vec<Signature> = vec![Vec::new(); nv];
    for (i, &v) in ty.markings.iter().enumerate() {
        initial[v].push(i as u64);
    }
    for sig in initial.iter_mut() {
        sig.push(u64::MAX);
    }
    let mut legs: Vec<&Leg> = ty.legs.iter().collect();
    legs.sort_by_key(|l| l.label);
    for l in legs {
        initial[l.vertex].push(l.label as u64);
    }
    let colours = compress(&initial);
    let adj = neighbour_lists(ty);
    let colours = refine(colours, &adj);
    let mut best: Option<Vec<u8>> = None;
    individualize(ty, &adj, colours, &mut best);
    best.expect("at least one ordering")
}

// adjacency entries: (neighbour, weight, direction from v to neighbour)
fn neighbour_lists(ty: &CombinatorialType) -> Vec<Vec<(usize, u64, Vec<i64>)>> {
    let mut adj = vec![Vec::new(); ty.vertex_count];
    for e in &ty.edges {
        adj[e.tail].push((e.head, e.weight, e.direction.clone()));
        adj[e.head].push((e.tail, e.weight, e.direction.iter().map(|x| -x).collect()));
    }
    adj
}

fn compress(sigs: &[Signature]) -> Vec<u64> {
    let mut sorted: Vec<&Signature> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(&s).unwrap() as u64).collect()
}

fn refine(mut colours: Vec<u64>, adj: &[Vec<(usize, u64, Vec<i64>)>]) -> Vec<u64> {
    loop {
        let distinct_before = count_distinct(&colours);
        let sigs: Vec<Signature> = (0..colours.len())
            .map(|v| {
                let mut nb: Vec<Vec<i64>> = adj[v]
                    .iter()
                    .map(|(w, wt, dir)| {
                        let mut key = vec![colours[*w] as i64, *wt as i64];
                        key.extend(dir);
                        key
                    })
                    .collect();
                nb.sort();
                let mut sig = vec![colours[v]];
                for k in nb {
                    sig.push(u64::MAX);
                    sig.extend(k.into_iter().map(|x| x as u64));
                }
                sig
            })
            .collect();
        let next = compress(&sigs);
        if count_distinct(&next) == distinct_before {
            return next;
        }
        colours = next;
    }
}

fn count_distinct(c: &[u64]) -> usize {
    c.iter().collect::<HashSet<_>>().len()
}

fn individualize(
    ty: &CombinatorialType,
    adj: &[Vec<(usize, u64, Vec<i64>)>],
    colours: Vec<u64>,
    best: &mut Option<Vec<u8>>,
) {
    let mut cells: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (v, &c) in colours.iter().enumerate() {
        cells.entry(c).or_default().push(v);
    }
    match cells.values().find(|c| c.len() > 1) {
        None => {
            let enc = encode(ty, &colours);
            if best.as_ref().map_or(true, |b| enc < *b) {
                *best = Some(enc);
            }
        }
        Some(cell) => {
            for &v in cell {
                let mut c: Vec<u64> = colours.iter().map(|&x| 2 * x).collect();
                c[v] += 1;
                individualize(ty, adj, refine(c, adj), best);
            }
        }
    }
}

fn encode(ty: &CombinatorialType, colours: &[u64]) -> Vec<u8> {
    // vertex v gets index = rank of its (distinct) colour
    let mut order: Vec<usize> = (0..ty.vertex_count).collect();
    order.sort_by_key(|&v| colours[v]);
    let mut index = vec![0usize; ty.vertex_count];
    for (i, &v) in order.iter().enumerate() {
        index[v] = i;
    }
    let mut out = Vec::new();
    push_i64s(&mut out, [ty.n as i64, ty.vertex_count as i64, ty.markings.len() as i64]);
    push_i64s(&mut out, ty.markings.iter().map(|&v| index[v] as i64));
    let mut legs: Vec<Vec<i64>> = ty
        .legs
        .iter()
        .map(|l| {
            let mut k = vec![l.label as i64, index[l.vertex] as i64, l.weight as i64];
            k.extend(&l.direction);
            k
        })
        .collect();
    legs.sort();
    let mut edges: Vec<Vec<i64>> = ty
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (index[e.tail], index[e.head]);
            let mut k = if a <= b {
                let mut k = vec![a as i64, b as i64, e.weight as i64];
                k.extend(&e.direction);
                k
            } else {
                let mut k = vec![b as i64, a as i64, e.weight as i64];
                k.extend(e.direction.iter().map(|x| -x));
                k
            };
            k.shrink_to_fit();
            k
        })
        .collect();
    edges.sort();
    push_i64s(&mut out, [legs.len() as i64]);
    for l in legs {
        push_i64s(&mut out, l);
    }
    push_i64s(&mut out, [edges.len() as i64]);
    for e in edges {
        push_i64s(&mut out, e);
    }
    out
}

// ---------------------------------------------------------------------------
// Genus-0 rooted-tree generator

pub(crate) enum Node<A> {
    Leaf(usize),
    Vertex { marks: Vec<usize>, children: Vec<Arc<Piece<A>>> },
}

/// Rooted subtree over a set of ends (bitmask, 0-based) and markings.
pub(crate) struct Piece<A> {
    vector: Vec<i64>,
    node: Node<A>,
    ann: A,
}

impl<A> Piece<A> {
    /// Primitive direction and weight of the edge from this subtree's root
    /// towards its parent.
    fn parent_edge(&self) -> (Vec<i64>, u64) {
        let neg: Vec<i64> = self.vector.iter().map(|x| -x).collect();
        let (u, k) = primitive_part_i64(&neg).expect("nonzero subtree vector");
        (u, k as u64)
    }
}

pub(crate) enum Parent {
    Edge,
    End(usize),
}

pub(crate) trait Geometry {
    type Ann;
    fn leaf(&self, end: usize) -> Self::Ann;
    fn vertex(&self, marks: &[usize], children: &[Arc<Piece<Self::Ann>>], parent: &Parent) -> Option<Self::Ann>;

    /// Cheap test whether a subtree over these ends and markings can be
    /// useful at all.
    fn admits(&self, _ends: u64, _marks: u64) -> bool {
        true
    }
}

struct TreeBuilder<'a, G: Geometry> {
    ends: Vec<(Vec<i64>, u64)>,
    psi: &'a [u32],
    geometry: &'a G,
    memo: RefCell<HashMap<(u64, u64), Arc<Vec<Arc<Piece<G::Ann>>>>>>,
}

fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    // all submasks including 0 and mask itself
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(cur)
    })
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

impl<'a, G: Geometry> TreeBuilder<'a, G> {
    fn vector_of(&self, ends: u64) -> Vec<i64> {
        let n = self.ends[0].0.len();
        let mut v = vec![0i64; n];
        for j in bits(ends) {
            let (u, w) = &self.ends[j];
            for k in 0..n {
                v[k] += u[k] * *w as i64;
            }
        }
        v
    }

    fn pieces(&self, ends: u64, marks: u64) -> Arc<Vec<Arc<Piece<G::Ann>>>> {
        if let Some(p) = self.memo.borrow().get(&(ends, marks)) {
            return p.clone();
        }
        let vector = self.vector_of(ends);
        let mut out = Vec::new();
        if vector.iter().any(|&x| x != 0) {
            if ends.count_ones() == 1 && marks == 0 {
                let j = ends.trailing_zeros() as usize;
                out.push(Arc::new(Piece { vector: vector.clone(), node: Node::Leaf(j), ann: self.geometry.leaf(j) }));
            } else if self.geometry.admits(ends, marks) {
                out = self.vertex_pieces(ends, marks, vector, Parent::Edge);
            }
        }
        let out = Arc::new(out);
        self.memo.borrow_mut().insert((ends, marks), out.clone());
        out
    }

    fn vertex_pieces(&self, ends: u64, marks: u64, vector: Vec<i64>, parent: Parent) -> Vec<Arc<Piece<G::Ann>>> {
        let mut out = Vec::new();
        for here in submasks(marks) {
            let psi_sum: i64 = bits(here).map(|i| self.psi[i] as i64).sum();
            let k = 2 + psi_sum - here.count_ones() as i64;
            if k < 1 || k > ends.count_ones() as i64 {
                continue;
            }
            let here_list: Vec<usize> = bits(here).collect();
            let mut blocks = Vec::new();
            self.partitions(ends, marks & !here, k as usize, &mut blocks, &mut |children| {
                if let Some(ann) = self.geometry.vertex(&here_list, children, &parent) {
                    out.push(Arc::new(Piece {
                        vector: vector.clone(),
                        node: Node::Vertex { marks: here_list.clone(), children: children.to_vec() },
                        ann,
                    }));
                }
            });
        }
        out
    }

    /// Splits `(ends, marks)` into `k` unordered blocks, each with at least
    /// one end, and calls `f` for every choice of subtree per block.
    fn partitions(
        &self,
        ends: u64,
        marks: u64,
        k: usize,
        acc: &mut Vec<Arc<Vec<Arc<Piece<G::Ann>>>>>,
        f: &mut dyn FnMut(&[Arc<Piece<G::Ann>>]),
    ) {
        if k == 1 {
            let last = self.pieces(ends, marks);
            if last.is_empty() {
                return;
            }
            acc.push(last);
            let mut chosen = Vec::with_capacity(acc.len());
            product(acc, &mut chosen, f);
            acc.pop();
            return;
        }
        let lo = ends & ends.wrapping_neg();
        let rest = ends & !lo;
        for t in submasks(rest) {
            let remaining = rest & !t;
            if (remaining.count_ones() as usize) < k - 1 {
                continue;
            }
            for q in submasks(marks) {
                let list = self.pieces(lo | t, q);
                if list.is_empty() {
                    continue;
                }
                acc.push(list);
                self.partitions(remaining, marks & !q, k - 1, acc, f);
                acc.pop();
            }
        }
    }
}

fn product<A>(lists: &[Arc<Vec<Arc<Piece<A>>>>], chosen: &mut Vec<Arc<Piece<A>>>, f: &mut dyn FnMut(&[Arc<Piece<A>>])) {
    if chosen.len() == lists.len() {
        f(chosen);
        return;
    }
    for p in lists[chosen.len()].iter() {
        chosen.push(p.clone());
        product(lists, chosen, f);
        chosen.pop();
    }
}

/// Flattens a rooted tree whose root vertex carries end `root_end`.
fn tree_to_type<A>(n: usize, degree: &Degree, m: usize, top: &Piece<A>, root_end: usize) -> CombinatorialType {
    let mut ty = CombinatorialType { n, vertex_count: 0, edges: vec![], legs: vec![], markings: vec![usize::MAX; m] };
    fn walk<A>(ty: &mut CombinatorialType, degree: &Degree, piece: &Piece<A>) -> usize {
        let Node::Vertex { marks, children } = &piece.node else { unreachable!("leaves are attached by the parent") };
        let v = ty.vertex_count;
        ty.vertex_count += 1;
        for &i in marks {
            ty.markings[i] = v;
        }
        for c in children {
            match &c.node {
                Node::Leaf(j) => {
                    let e = degree.end(j + 1);
                    ty.legs.push(Leg { vertex: v, label: j + 1, direction: e.direction.clone(), weight: e.weight });
                }
                Node::Vertex { .. } => {
                    let (u, w) = c.parent_edge();
                    let child = walk(ty, degree, c);
                    ty.edges.push(Edge { tail: child, head: v, direction: u, weight: w });
                }
            }
        }
        v
    }
    let root = walk(&mut ty, degree, top);
    let e = degree.end(root_end + 1);
    ty.legs.push(Leg { vertex: root, label: root_end + 1, direction: e.direction.clone(), weight: e.weight });
    ty.legs.sort_by_key(|l| l.label);
    ty
}

fn genus0_trees<G: Geometry>(degree: &Degree, psi: &[u32], geometry: &G) -> Result<Vec<CombinatorialType>> {
    let e = degree.e_inf();
    let m = psi.len();
    if e < 2 {
        return Err(Error::InvalidDegree("genus-0 enumeration needs at least two ends".into()));
    }
    if e > 63 || m > 63 {
        return Err(Error::Unsupported("at most 63 ends and 63 markings".into()));
    }
    let builder = TreeBuilder {
        ends: degree.ends().iter().map(|x| (x.direction.clone(), x.weight)).collect(),
        psi,
        geometry,
        memo: RefCell::new(HashMap::new()),
    };
    let all_ends = ((1u64 << e) - 1) & !1;
    let all_marks = if m == 0 { 0 } else { (1u64 << m) - 1 };
    let vector = builder.vector_of(all_ends);
    let tops = builder.vertex_pieces(all_ends, all_marks, vector, Parent::End(0));
    Ok(tops.iter().map(|t| tree_to_type(degree.n(), degree, m, t, 0)).collect())
}

struct Combinatorial;

impl Geometry for Combinatorial {
    type Ann = ();
    fn leaf(&self, _: usize) {}
    fn vertex(&self, _: &[usize], _: &[Arc<Piece<()>>], _: &Parent) -> Option<()> {
        Some(())
    }
}

/// All genus-0 types of the given degree whose vertices satisfy
/// `val(V) + m_V = 3 + Σ_{i at V} s_i`, without contracted edges.
pub fn enumerate_genus0(degree: &Degree, psi: &[u32]) -> Result<TypeCatalog> {
    let types = genus0_trees(degree, psi, &Combinatorial)?;
    Ok(TypeCatalog::from_types(fingerprint(degree, 0, psi), types))
}

// ---------------------------------------------------------------------------
// Constraint-aware genus-0 generator

/// Affine function `c0 + c · t` of the free parameters of a subtree.
#[derive(Clone, Debug)]
struct Form {
    c0: Rational,
    c: Vec<Rational>,
}

impl Form {
    fn substitute(&self, particular: &[Rational], kernel: &[Vec<Rational>], offset: usize) -> Form {
        // self.c[j] multiplies unknown offset + j of the parent system
        let mut c0 = self.c0.clone();
        let mut c = vec![Rational::zero(); kernel.len()];
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            c0 += cj * &particular[offset + j];
            for (t, kv) in kernel.iter().enumerate() {
                c[t] += cj * &kv[offset + j];
            }
        }
        Form { c0, c }
    }
}

/// Machine-word copy of a [`Form`], used to reject candidates cheaply.
#[derive(Clone, Debug)]
struct SmallForm {
    c0: SmallRational,
    c: Vec<SmallRational>,
}

impl SmallForm {
    fn from_form(f: &Form) -> Option<Self> {
        Some(SmallForm { c0: to_small(&f.c0)?, c: f.c.iter().map(to_small).collect::<Option<_>>()? })
    }

    /// Checked counterpart of [`Form::substitute`]; `None` on overflow.
    fn substitute(&self, particular: &[SmallRational], kernel: &[Vec<SmallRational>], offset: usize) -> Option<SmallForm> {
        let mut c0 = self.c0;
        let mut c = vec![SmallRational::zero(); kernel.len()];
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            c0 = c0.checked_add(&cj.checked_mul(&particular[offset + j])?)?;
            for (t, kv) in kernel.iter().enumerate() {
                c[t] = c[t].checked_add(&cj.checked_mul(&kv[offset + j])?)?;
            }
        }
        Some(SmallForm { c0, c })
    }
}

fn small_neg(x: &SmallRational) -> Option<SmallRational> {
    SmallRational::zero().checked_sub(x)
}

struct Solved {
    root: Vec<Form>,
    lengths: Vec<Form>,
    /// `root` and `lengths` in machine words, when they fit.
    small: Option<(Vec<SmallForm>, Vec<SmallForm>)>,
}

/// Constraint rows `q · x = q · base` in machine words, when they fit.
type SmallRows = Option<Vec<(Vec<SmallRational>, SmallRational)>>;

fn small_constraint_rows(c: &AffineConstraint) -> SmallRows {
    let base: Vec<SmallRational> = c.base().iter().map(to_small).collect::<Option<_>>()?;
    c.quotient_rows()
        .rows()
        .map(|r| {
            let row: Vec<SmallRational> = r.iter().map(|x| Some(SmallRational::from_integer(i128::try_from(x).ok()?))).collect::<Option<_>>()?;
            let mut b = SmallRational::zero();
            for (a, x) in row.iter().zip(&base) {
                b = b.checked_add(&a.checked_mul(x)?)?;
            }
            Some((row, b))
        })
        .collect()
}

struct Constrained<'a> {
    problem: &'a Problem,
    nongeneric: RefCell<Option<String>>,
    small_markings: Vec<SmallRows>,
    /// Indexed by end label minus one.
    small_boundary: Vec<Option<SmallRows>>,
}

impl<'a> Constrained<'a> {
    fn new(problem: &'a Problem) -> Self {
        let small_markings = problem.markings().iter().map(|c| small_constraint_rows(&c.constraint)).collect();
        let small_boundary =
            (1..=problem.degree().e_inf()).map(|j| problem.boundary_for(j).map(small_constraint_rows)).collect();
        Constrained { problem, nongeneric: RefCell::new(None), small_markings, small_boundary }
    }

    fn flag(&self, why: String) {
        self.nongeneric.borrow_mut().get_or_insert(why);
    }

    /// Machine-word rerun of the vertex system that can only answer "no
    /// solution"; `false` means undecided (overflow, or a case the exact
    /// path has to report on).
    fn screened_out(
        &self,
        marks: &[usize],
        children: &[Arc<Piece<Option<Arc<Solved>>>>],
        parent: &Parent,
        offsets: &[Option<usize>],
        width: usize,
    ) -> bool {
        self.screen(marks, children, parent, offsets, width) == Some(true)
    }

    fn screen(
        &self,
        marks: &[usize],
        children: &[Arc<Piece<Option<Arc<Solved>>>>],
        parent: &Parent,
        offsets: &[Option<usize>],
        width: usize,
    ) -> Option<bool> {
        let n = self.problem.n();
        let mut data = Vec::new();
        let mut rows = 0;
        let push_rows = |data: &mut Vec<SmallRational>, rows: &mut usize, c: &SmallRows| -> Option<()> {
            for (q, b) in c.as_ref()? {
                data.extend(q.iter().copied());
                data.extend(std::iter::repeat(SmallRational::zero()).take(width - n));
                data.push(*b);
                *rows += 1;
            }
            Some(())
        };
        for (c, off) in children.iter().zip(offsets) {
            match (&c.node, &c.ann, off) {
                (Node::Leaf(j), _, _) => {
                    if let Some(b) = &self.small_boundary[*j] {
                        push_rows(&mut data, &mut rows, b)?;
                    }
                }
                (_, Some(s), Some(off)) => {
                    let (root, _) = s.small.as_ref()?;
                    let (u, _) = c.parent_edge();
                    for k in 0..n {
                        let start = data.len();
                        data.extend(std::iter::repeat(SmallRational::zero()).take(width + 1));
                        data[start + k] = SmallRational::from_integer(1);
                        data[start + off] = SmallRational::from_integer(-(u[k] as i128));
                        for (j, cj) in root[k].c.iter().enumerate() {
                            data[start + off + 1 + j] = small_neg(cj)?;
                        }
                        data[start + width] = root[k].c0;
                        rows += 1;
                    }
                }
                _ => return None,
            }
        }
        for &i in marks {
            push_rows(&mut data, &mut rows, &self.small_markings[i])?;
        }
        if let Parent::End(j) = parent {
            if let Some(b) = &self.small_boundary[*j] {
                push_rows(&mut data, &mut rows, b)?;
            }
        }
        let (particular, kernel) = match solve_affine_small(rows, width, data)? {
            SmallSolve::Infeasible => return Some(true),
            SmallSolve::Solved { particular, kernel, rank } => {
                if rank < rows {
                    return Some(false);
                }
                (particular, kernel)
            }
        };
        let d = kernel.len();
        match parent {
            Parent::End(_) if d > 0 => return Some(false),
            Parent::Edge if d > n - 1 => return Some(true),
            _ => {}
        }
        let mut lengths = Vec::new();
        for (c, off) in children.iter().zip(offsets) {
            if let (Some(s), Some(off)) = (&c.ann, off) {
                lengths.push(SmallForm { c0: particular[*off], c: kernel.iter().map(|k| k[*off]).collect() });
                for l in &s.small.as_ref()?.1 {
                    lengths.push(l.substitute(&particular, &kernel, off + 1)?);
                }
            }
        }
        Some(!small_lengths_can_be_nonnegative(&lengths, d)?)
    }
}

fn push_constraint_rows(rows: &mut Vec<Vec<Rational>>, rhs: &mut Vec<Rational>, c: &AffineConstraint, width: usize) {
    let q = c.quotient_rows();
    for r in q.rows() {
        let mut row = vec![Rational::zero(); width];
        let mut b = Rational::zero();
        for k in 0..c.n() {
            row[k] = Rational::from_integer(r[k].clone());
            b += &row[k] * &c.base()[k];
        }
        rows.push(row);
        rhs.push(b);
    }
}

impl Geometry for Constrained<'_> {
    type Ann = Option<Arc<Solved>>;

    fn leaf(&self, _: usize) -> Self::Ann {
        None
    }

    /// A subtree with `|S|` ends has `|S| - 1 - Σ s + |M|` vertices, hence
    /// `n + |S| - 2 - Σ s + |M| - Σ codim` free parameters when the
    /// constraints are general, and no solutions at all if that is negative.
    fn admits(&self, ends: u64, marks: u64) -> bool {
        let n = self.problem.n() as i64;
        let mut free = n + ends.count_ones() as i64 - 2 + marks.count_ones() as i64;
        for i in bits(marks) {
            let c = &self.problem.markings()[i];
            free -= c.psi as i64 + c.constraint.codim() as i64;
        }
        for j in bits(ends) {
            if let Some(b) = self.problem.boundary_for(j + 1) {
                free -= b.codim() as i64;
            }
        }
        (0..n).contains(&free)
    }

    fn vertex(&self, marks: &[usize], children: &[Arc<Piece<Self::Ann>>], parent: &Parent) -> Option<Self::Ann> {
        let n = self.problem.n();
        // unknown layout: x (n), then per inner child: length, params
        let mut offsets = Vec::new();
        let mut width = n;
        for c in children {
            match &c.ann {
                Some(s) => {
                    offsets.push(Some(width));
                    width += 1 + s.root.first().map_or(0, |f| f.c.len());
                }
                None => offsets.push(None),
            }
        }
        // rank <= row count, so too few rows already means too many parameters
        if let Parent::Edge = parent {
            let inner = offsets.iter().filter(|o| o.is_some()).count();
            let codims: usize = marks.iter().map(|&i| self.problem.markings()[i].constraint.codim()).sum::<usize>()
                + children
                    .iter()
                    .filter_map(|c| match c.node {
                        Node::Leaf(j) => self.problem.boundary_for(j + 1).map(|b| b.codim()),
                        _ => None,
                    })
                    .sum::<usize>();
            if width > n * inner + codims + n - 1 {
                return None;
            }
        }
        if self.screened_out(marks, children, parent, &offsets, width) {
            return None;
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (c, off) in children.iter().zip(&offsets) {
            match (&c.node, &c.ann, off) {
                (Node::Leaf(j), _, _) => {
                    if let Some(b) = self.problem.boundary_for(j + 1) {
                        push_constraint_rows(&mut rows, &mut rhs, b, width);
                    }
                }
                (_, Some(s), Some(off)) => {
                    let (u, _) = c.parent_edge();
                    for k in 0..n {
                        let mut row = vec![Rational::zero(); width];
                        row[k] = Rational::from_integer(1.into());
                        row[*off] = Rational::from_integer((-u[k]).into());
                        for (j, cj) in s.root[k].c.iter().enumerate() {
                            row[off + 1 + j] = -cj.clone();
                        }
                        rows.push(row);
                        rhs.push(s.root[k].c0.clone());
                    }
                }
                _ => unreachable!("inner children carry a solution"),
            }
        }
        for &i in marks {
            push_constraint_rows(&mut rows, &mut rhs, &self.problem.markings()[i].constraint, width);
        }
        if let Parent::End(j) = parent {
            if let Some(b) = self.problem.boundary_for(j + 1) {
                push_constraint_rows(&mut rows, &mut rhs, b, width);
            }
        }
        let mut a = Matrix::zeros(0, width);
        for r in rows {
            a.push_row(r);
        }
        let sol = match solve_affine(&a, &rhs).expect("consistent shapes") {
            AffineSolve::Infeasible => return None,
            AffineSolve::Solved(s) => s,
        };
        let d = sol.kernel.len();
        let rank = width - d;
        if rank < a.nrows() {
            self.flag(format!("overdetermined but consistent conditions at a vertex carrying markings {:?}", marks_1based(marks)));
        }
        match parent {
            Parent::End(_) if d > 0 => {
                self.flag("a candidate type admits a positive-dimensional family of solutions".into());
                return None;
            }
            Parent::Edge if d > n - 1 => return None,
            _ => {}
        }
        let unknown = |u: usize| Form { c0: sol.particular[u].clone(), c: sol.kernel.iter().map(|k| k[u].clone()).collect() };
        let root: Vec<Form> = (0..n).map(unknown).collect();
        let mut lengths = Vec::new();
        for (c, off) in children.iter().zip(&offsets) {
            if let (Some(s), Some(off)) = (&c.ann, off) {
                lengths.push(unknown(*off));
                for l in &s.lengths {
                    lengths.push(l.substitute(&sol.particular, &sol.kernel, off + 1));
                }
            }
        }
        if !lengths_can_be_nonnegative(&lengths, d) {
            return None;
        }
        let lengths = binding_lengths(lengths, d);
        let small = root
            .iter()
            .map(SmallForm::from_form)
            .collect::<Option<Vec<_>>>()
            .zip(lengths.iter().map(SmallForm::from_form).collect::<Option<Vec<_>>>());
        Some(Some(Arc::new(Solved { root, lengths, small })))
    }
}

fn marks_1based(marks: &[usize]) -> Vec<usize> {
    marks.iter().map(|i| i + 1).collect()
}

/// Drops length forms that can no longer prune: constants (already known to
/// be non-negative) and, with one parameter, all but the tightest lower and
/// upper bound.
fn binding_lengths(lengths: Vec<Form>, d: usize) -> Vec<Form> {
    let mut varying = lengths.into_iter().filter(|l| l.c.iter().any(|c| !c.is_zero()));
    if d != 1 {
        return varying.collect();
    }
    // c0 + c t >= 0  <=>  t >= -c0/c (c > 0) or t <= -c0/c (c < 0)
    let mut lower: Option<(Rational, Form)> = None;
    let mut upper: Option<(Rational, Form)> = None;
    for l in varying.by_ref() {
        let bound = -&l.c0 / &l.c[0];
        if l.c[0].is_positive() {
            if lower.as_ref().map_or(true, |(b, _)| bound > *b) {
                lower = Some((bound, l));
            }
        } else if upper.as_ref().map_or(true, |(b, _)| bound < *b) {
            upper = Some((bound, l));
        }
    }
    lower.into_iter().chain(upper).map(|(_, l)| l).collect()
}

/// Exact feasibility of `{ℓ(t) >= 0}` for zero or one parameter; with more
/// parameters nothing is pruned.
fn lengths_can_be_nonnegative(lengths: &[Form], d: usize) -> bool {
    match d {
        0 => lengths.iter().all(|l| !l.c0.is_negative()),
        1 => {
            let mut lo: Option<Rational> = None;
            let mut hi: Option<Rational> = None;
            for l in lengths {
                let slope = &l.c[0];
                if slope.is_zero() {
                    if l.c0.is_negative() {
                        return false;
                    }
                    continue;
                }
                let bound = -&l.c0 / slope;
                if slope.is_positive() {
                    if lo.as_ref().map_or(true, |x| bound > *x) {
                        lo = Some(bound);
                    }
                } else if hi.as_ref().map_or(true, |x| bound < *x) {
                    hi = Some(bound);
                }
            }
            match (lo, hi) {
                (Some(lo), Some(hi)) => lo <= hi,
                _ => true,
            }
        }
        _ => true,
    }
}

/// Checked counterpart of [`lengths_can_be_nonnegative`]; `None` on
/// overflow.
fn small_lengths_can_be_nonnegative(lengths: &[SmallForm], d: usize) -> Option<bool> {
    match d {
        0 => Some(lengths.iter().all(|l| !l.c0.is_negative())),
        1 => {
            let mut lo: Option<SmallRational> = None;
            let mut hi: Option<SmallRational> = None;
            for l in lengths {
                let slope = &l.c[0];
                if slope.is_zero() {
                    if l.c0.is_negative() {
                        return Some(false);
                    }
                    continue;
                }
                let bound = small_neg(&l.c0)?.checked_div(slope)?;
                if slope.is_positive() {
                    if lo.map_or(true, |x| bound > x) {
                        lo = Some(bound);
                    }
                } else if hi.map_or(true, |x| bound < x) {
                    hi = Some(bound);
                }
            }
            Some(match (lo, hi) {
                (Some(lo), Some(hi)) => lo <= hi,
                _ => true,
            })
        }
        _ => Some(true),
    }
}

/// Genus-0 types that can possibly be realized under the problem's
/// constraints. Subtrees whose own conditions are inconsistent, force a
/// negative length, or leave more than `n - 1` free parameters are
/// discarded; the survivors still have to be solved.
pub fn enumerate_for_problem(problem: &Problem) -> Result<TypeCatalog> {
    if problem.genus() != 0 {
        return Err(Error::Unsupported("constrained enumeration is implemented for genus 0".into()));
    }
    let geometry = Constrained::new(problem);
    let psi = problem.psi();
    let types = genus0_trees(problem.degree(), &psi, &geometry)?;
    if let Some(why) = geometry.nongeneric.into_inner() {
        return Err(Error::NonGeneric(why));
    }
    Ok(TypeCatalog::from_types(fingerprint(problem.degree(), 0, &psi), types))
}

// ---------------------------------------------------------------------------
// Rank-1 sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Source {
    Left(usize),
    Vertex(usize),
}

type Strand = (Source, u64);

struct Sweep<'a> {
    alpha: &'a [u64],
    beta: &'a [u64],
    m: usize,
    out: Vec<CombinatorialType>,
}

/// Degree of the rank-1 problem: ends of weights `alpha` pointing left
/// (labels `1..=ℓ1`), then ends of weights `beta` pointing right.
pub fn line_degree(alpha: &[u64], beta: &[u64]) -> Result<Degree> {
    Degree::new(1, alpha.iter().map(|&a| (vec![-1], a)).chain(beta.iter().map(|&b| (vec![1], b))).collect())
}

/// Connected rank-1 types with `m = 2g - 2 + ℓ1 + ℓ2` trivalent vertices,
/// vertex `i` carrying marking `i` and lying left of vertex `i + 1`.
pub fn enumerate_line(g: usize, alpha: &[u64], beta: &[u64]) -> Result<TypeCatalog> {
    if alpha.is_empty() || beta.is_empty() || alpha.contains(&0) || beta.contains(&0) {
        return Err(Error::EmptyPartition);
    }
    let (da, db) = (alpha.iter().sum::<u64>(), beta.iter().sum::<u64>());
    if da != db {
        return Err(Error::MismatchedDegree { left: da, right: db });
    }
    let m = 2 * g + alpha.len() + beta.len() - 2;
    let degree = line_degree(alpha, beta)?;
    let mut sweep = Sweep { alpha, beta, m, out: Vec::new() };
    if m > 0 {
        let strands: Vec<Strand> = alpha.iter().enumerate().map(|(j, &a)| (Source::Left(j + 1), a)).collect();
        let base = CombinatorialType { n: 1, vertex_count: m, edges: vec![], legs: vec![], markings: (0..m).collect() };
        sweep.step(0, strands, base);
    }
    let types = std::mem::take(&mut sweep.out);
    let psi = vec![1; m];
    Ok(TypeCatalog::from_types(fingerprint(&degree, g, &psi), types))
}

impl Sweep<'_> {
    fn attach(ty: &mut CombinatorialType, strand: Strand, v: usize) {
        match strand.0 {
            Source::Left(label) => ty.legs.push(Leg { vertex: v, label, direction: vec![-1], weight: strand.1 }),
            Source::Vertex(u) => ty.edges.push(Edge { tail: u, head: v, direction: vec![1], weight: strand.1 }),
        }
    }

    fn step(&mut self, i: usize, strands: Vec<Strand>, ty: CombinatorialType) {
        if i == self.m {
            self.finish(strands, ty);
            return;
        }
        let remaining = self.m - i;
        let s = strands.len();
        let target = self.beta.len();
        if s.abs_diff(target) > remaining || (s + remaining - target) % 2 == 1 {
            return;
        }
        let lefts = strands.iter().filter(|x| matches!(x.0, Source::Left(_))).count();
        if lefts > 2 * remaining {
            return;
        }
        let mut keys: Vec<Strand> = strands.clone();
        keys.sort();
        keys.dedup();
        let count = |k: &Strand| strands.iter().filter(|x| *x == k).count();
        let without = |drop: &[Strand]| {
            let mut rest = strands.clone();
            for d in drop {
                let pos = rest.iter().position(|x| x == d).expect("strand present");
                rest.swap_remove(pos);
            }
            rest
        };
        // merge two strands at vertex i
        for a in 0..keys.len() {
            for b in a..keys.len() {
                if a == b && count(&keys[a]) < 2 {
                    continue;
                }
                let mut next = without(&[keys[a], keys[b]]);
                next.push((Source::Vertex(i), keys[a].1 + keys[b].1));
                let mut t = ty.clone();
                Self::attach(&mut t, keys[a], i);
                Self::attach(&mut t, keys[b], i);
                self.step(i + 1, next, t);
            }
        }
        // split one strand at vertex i
        for k in &keys {
            for x in 1..=k.1 / 2 {
                let mut next = without(&[*k]);
                next.push((Source::Vertex(i), x));
                next.push((Source::Vertex(i), k.1 - x));
                let mut t = ty.clone();
                Self::attach(&mut t, *k, i);
                self.step(i + 1, next, t);
            }
        }
    }

    fn finish(&mut self, strands: Vec<Strand>, ty: CombinatorialType) {
        if strands.iter().any(|s| matches!(s.0, Source::Left(_))) {
            return;
        }
        let mut have: Vec<u64> = strands.iter().map(|s| s.1).collect();
        let mut want = self.beta.to_vec();
        have.sort_unstable();
        want.sort_unstable();
        if have != want {
            return;
        }
        // assign right labels to strand classes; identical strands are interchangeable
        let mut pool: BTreeMap<Strand, usize> = BTreeMap::new();
        for s in &strands {
            *pool.entry(*s).or_default() += 1;
        }
        let first_label = self.alpha.len() + 1;
        self.assign(0, first_label, &mut pool, ty);
    }

    fn assign(&mut self, j: usize, first_label: usize, pool: &mut BTreeMap<Strand, usize>, ty: CombinatorialType) {
        if j == self.beta.len() {
            if ty.validate().is_ok() {
                self.out.push(ty);
            }
            return;
        }
        let w = self.beta[j];
        let keys: Vec<Strand> = pool.iter().filter(|(k, &c)| k.1 == w && c > 0).map(|(k, _)| *k).collect();
        for k in keys {
            *pool.get_mut(&k).unwrap() -= 1;
            let mut t = ty.clone();
            let Source::Vertex(v) = k.0 else { unreachable!() };
            t.legs.push(Leg { vertex: v, label: first_label + j, direction: vec![1], weight: w });
            self.assign(j + 1, first_label, pool, t);
            *pool.get_mut(&k).unwrap() += 1;
        }
    }
}
