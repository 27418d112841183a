//! Text and machine (JSON) renderings of engine results.
//!
//! Machine output is a JSON object whose `format` field names the schema
//! version; see `docs/report-format.md`.

use std::fmt::Write;

use serde::Serialize;

use tropcount::counting::{Contribution, CountReport};
use tropcount::enumerate::TypeCatalog;
use tropcount::hurwitz::HurwitzResult;
use tropcount::linalg::Rational;
use tropcount::tropical::{aut_delta, CombinatorialType};
use tropcount::verify::SuiteResult;

use crate::problem_file::{emit_problem, format_fraction};

pub const REPORT_FORMAT: &str = "tropcount-report/1";
pub const CATALOG_FORMAT: &str = "tropcount-catalog/1";
pub const HURWITZ_FORMAT: &str = "tropcount-hurwitz/1";
pub const VERIFY_FORMAT: &str = "tropcount-verify/1";

fn frac(q: &Rational) -> String {
    format_fraction(q)
}

fn fracs(v: &[Rational]) -> Vec<String> {
    v.iter().map(frac).collect()
}

#[derive(Debug, Serialize)]
pub struct VertexJson {
    pub position: Vec<String>,
    pub markings: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct EdgeJson {
    pub tail: usize,
    pub head: usize,
    pub direction: Vec<i64>,
    pub weight: u64,
    pub length: String,
}

#[derive(Debug, Serialize)]
pub struct LegJson {
    pub vertex: usize,
    pub label: usize,
    pub direction: Vec<i64>,
    pub weight: u64,
}

#[derive(Debug, Serialize)]
pub struct ContributionJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub legs: Vec<LegJson>,
    pub lattice_index: String,
    pub vertex_factors: Vec<String>,
    pub automorphisms: u64,
    pub edge_weight_product: String,
    pub constraint_weight_product: String,
    pub multiplicity: String,
}

#[derive(Debug, Serialize)]
pub struct CountJson {
    pub format: &'static str,
    /// The input problem as a problem-file document.
    pub problem: String,
    /// Seed of the generic translation, when one was applied.
    pub seed: Option<u64>,
    /// The translated problem that was actually counted, when seeded.
    pub counted_problem: Option<String>,
    pub unlabeled: bool,
    pub aut_delta: String,
    pub contributions: Vec<ContributionJson>,
    pub closed_form: Option<String>,
    /// Sum of the contribution multiplicities (or the closed form).
    pub labeled_total: String,
    /// `labeled_total`, divided by `aut_delta` when `unlabeled` is set.
    pub total: String,
    pub warnings: Vec<String>,
}

fn vertices_of(ty: &CombinatorialType, positions: &[Vec<Rational>]) -> Vec<VertexJson> {
    positions
        .iter()
        .enumerate()
        .map(|(v, p)| VertexJson { position: fracs(p), markings: ty.marks_at(v).map(|i| i + 1).collect() })
        .collect()
}

fn contribution_json(c: &Contribution) -> ContributionJson {
    let ty = &c.curve.ty;
    ContributionJson {
        vertices: vertices_of(ty, &c.curve.positions),
        edges: ty
            .edges
            .iter()
            .zip(&c.curve.lengths)
            .map(|(e, l)| EdgeJson {
                tail: e.tail,
                head: e.head,
                direction: e.direction.clone(),
                weight: e.weight,
                length: frac(l),
            })
            .collect(),
        legs: ty
            .legs
            .iter()
            .map(|l| LegJson { vertex: l.vertex, label: l.label, direction: l.direction.clone(), weight: l.weight })
            .collect(),
        lattice_index: c.index_phi.to_string(),
        vertex_factors: c.vertex_factors.iter().map(|x| x.to_string()).collect(),
        automorphisms: c.aut,
        edge_weight_product: c.edge_weight_product.to_string(),
        constraint_weight_product: c.constraint_weight_product.to_string(),
        multiplicity: frac(&c.mult),
    }
}

/// Inputs to a count report besides the engine result.
pub struct CountContext<'a> {
    pub input: &'a tropcount::problem::Problem,
    pub seed: Option<u64>,
    pub unlabeled: bool,
}

fn final_total(report: &CountReport, unlabeled: bool) -> (Rational, Rational) {
    let aut = Rational::from_integer(aut_delta(report.problem.degree()));
    let total = if unlabeled { &report.total / &aut } else { report.total.clone() };
    (aut, total)
}

pub fn count_json(ctx: &CountContext, report: &CountReport) -> CountJson {
    let (aut, total) = final_total(report, ctx.unlabeled);
    CountJson {
        format: REPORT_FORMAT,
        problem: emit_problem(ctx.input),
        seed: ctx.seed,
        counted_problem: ctx.seed.map(|_| emit_problem(&report.problem)),
        unlabeled: ctx.unlabeled,
        aut_delta: frac(&aut),
        contributions: report.contributions.iter().map(contribution_json).collect(),
        closed_form: report.closed_form.as_ref().map(frac),
        labeled_total: frac(&report.total),
        total: frac(&total),
        warnings: report.warnings.clone(),
    }
}

fn tuple(v: &[String]) -> String {
    format!("({})", v.join(", "))
}

fn write_type(out: &mut String, ty: &CombinatorialType, positions: Option<&[Vec<Rational>]>, lengths: Option<&[Rational]>) {
    for v in 0..ty.vertex_count {
        let marks: Vec<String> = ty.marks_at(v).map(|i| (i + 1).to_string()).collect();
        let _ = write!(out, "    V{v}");
        if let Some(p) = positions {
            let _ = write!(out, " at {}", tuple(&fracs(&p[v])));
        }
        if !marks.is_empty() {
            let _ = write!(out, " markings {}", marks.join(","));
        }
        out.push('\n');
    }
    for (i, e) in ty.edges.iter().enumerate() {
        let _ = write!(out, "    E{i} V{} -> V{} direction {:?} weight {}", e.tail, e.head, e.direction, e.weight);
        if let Some(l) = lengths {
            let _ = write!(out, " length {}", frac(&l[i]));
        }
        out.push('\n');
    }
    for l in &ty.legs {
        let _ = writeln!(out, "    end {} at V{} direction {:?} weight {}", l.label, l.vertex, l.direction, l.weight);
    }
}

pub fn count_text(ctx: &CountContext, report: &CountReport) -> String {
    let (aut, total) = final_total(report, ctx.unlabeled);
    let p = &report.problem;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "problem: n = {}, genus = {}, ends = {}, markings = {}, boundary constraints = {}",
        p.n(),
        p.genus(),
        p.degree().e_inf(),
        p.m(),
        p.boundary().len()
    );
    if let Some(seed) = ctx.seed {
        let _ = writeln!(out, "constraints translated generically with seed {seed}");
    }
    if let Some(c) = &report.closed_form {
        let _ = writeln!(out, "single-edge curves, closed form: {}", frac(c));
    }
    let _ = writeln!(out, "contributing curves: {}", report.contributions.len());
    for (k, c) in report.contributions.iter().enumerate() {
        let factors: Vec<String> = c.vertex_factors.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            out,
            "  curve {}: multiplicity {} = index {} * vertex factors [{}] * edge weights {} * constraint weights {} / automorphisms {}",
            k + 1,
            frac(&c.mult),
            c.index_phi,
            factors.join(", "),
            c.edge_weight_product,
            c.constraint_weight_product,
            c.aut
        );
        write_type(&mut out, &c.curve.ty, Some(&c.curve.positions), Some(&c.curve.lengths));
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if ctx.unlabeled {
        let _ = writeln!(out, "labeled total: {}", frac(&report.total));
        let _ = writeln!(out, "|Aut(degree)|: {}", frac(&aut));
        let _ = writeln!(out, "total (unlabeled): {}", frac(&total));
    } else {
        let _ = writeln!(out, "total: {}", frac(&total));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct TypeJson {
    pub vertices: usize,
    pub markings: Vec<usize>,
    pub edges: Vec<EdgeJson>,
    pub legs: Vec<LegJson>,
    pub superabundant: bool,
}

#[derive(Debug, Serialize)]
pub struct CatalogJson {
    pub format: &'static str,
    pub problem: String,
    pub types: Vec<TypeJson>,
}

pub fn catalog_json(problem: &tropcount::problem::Problem, catalog: &TypeCatalog) -> CatalogJson {
    let types = catalog
        .types()
        .map(|t| TypeJson {
            vertices: t.vertex_count,
            markings: t.markings.clone(),
            edges: t
                .edges
                .iter()
                .map(|e| EdgeJson {
                    tail: e.tail,
                    head: e.head,
                    direction: e.direction.clone(),
                    weight: e.weight,
                    length: String::new(),
                })
                .collect(),
            legs: t
                .legs
                .iter()
                .map(|l| LegJson { vertex: l.vertex, label: l.label, direction: l.direction.clone(), weight: l.weight })
                .collect(),
            superabundant: t.is_superabundant(),
        })
        .collect();
    CatalogJson { format: CATALOG_FORMAT, problem: emit_problem(problem), types }
}

pub fn catalog_text(catalog: &TypeCatalog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "candidate types: {}", catalog.len());
    for (k, t) in catalog.types().enumerate() {
        let _ = writeln!(
            out,
            "  type {}: {} vertices, {} bounded edges, genus {}{}",
            k + 1,
            t.vertex_count,
            t.edge_count(),
            t.genus(),
            if t.is_superabundant() { ", superabundant" } else { "" }
        );
        write_type(&mut out, t, None, None);
    }
    out
}

#[derive(Debug, Serialize)]
pub struct HurwitzRowJson {
    pub method: &'static str,
    pub g: usize,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    pub branch_points: usize,
    pub hat: String,
    pub labeled: String,
    pub unlabeled: String,
}

#[derive(Debug, Serialize)]
pub struct HurwitzJson {
    pub format: &'static str,
    pub rows: Vec<HurwitzRowJson>,
    pub agree: bool,
}

fn hurwitz_row(method: &'static str, r: &HurwitzResult) -> HurwitzRowJson {
    HurwitzRowJson {
        method,
        g: r.g,
        alpha: r.alpha.parts().to_vec(),
        beta: r.beta.parts().to_vec(),
        branch_points: r.m,
        hat: r.hat.to_string(),
        labeled: frac(&r.labeled),
        unlabeled: frac(&r.unlabeled),
    }
}

pub fn hurwitz_json(tropical: &HurwitzResult, symmetric: &HurwitzResult) -> HurwitzJson {
    HurwitzJson {
        format: HURWITZ_FORMAT,
        rows: vec![hurwitz_row("tropical", tropical), hurwitz_row("symmetric", symmetric)],
        agree: tropical == symmetric,
    }
}

pub fn hurwitz_text(tropical: &HurwitzResult, symmetric: &HurwitzResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "g = {}, alpha = {}, beta = {}, simple branch points = {}",
        tropical.g, tropical.alpha, tropical.beta, tropical.m
    );
    let _ = writeln!(out, "{:<10} {:>16} {:>16} {:>16}", "method", "hat", "labeled", "unlabeled");
    for (name, r) in [("tropical", tropical), ("symmetric", symmetric)] {
        let _ = writeln!(out, "{:<10} {:>16} {:>16} {:>16}", name, r.hat, frac(&r.labeled), frac(&r.unlabeled));
    }
    let _ = writeln!(out, "{}", if tropical == symmetric { "methods agree" } else { "METHODS DISAGREE" });
    out
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub source: &'static str,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    pub runtime_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub format: &'static str,
    pub checks: Vec<CheckJson>,
    pub all_passed: bool,
}

pub fn verify_json(suite: &SuiteResult) -> VerifyJson {
    VerifyJson {
        format: VERIFY_FORMAT,
        checks: suite
            .checks
            .iter()
            .map(|c| CheckJson {
                name: c.name.clone(),
                source: c.source,
                expected: c.expected.clone(),
                computed: c.computed.clone(),
                pass: c.pass,
                runtime_ms: c.runtime.as_millis(),
            })
            .collect(),
        all_passed: suite.all_passed(),
    }
}

pub fn verify_text(suite: &SuiteResult) -> String {
    let mut out = String::new();
    for c in &suite.checks {
        let _ = writeln!(
            out,
            "{} {} (expected {}, computed {}; {}; {:.2?})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.computed,
            c.source,
            c.runtime
        );
    }
    let passed = suite.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(out, "{passed}/{} checks passed", suite.checks.len());
    out
}
