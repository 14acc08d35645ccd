//! JSON instance files: algebras, graphs, presented modules, correspondences,
//! triples, arrows and 2-arrows, all named and cross-referenced.
//!
//! Scalars are `[re_num, re_den, im_num, im_den]` or a plain integer; matrices
//! are lists of rows; algebra elements are lists of block matrices.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bicat::{check_covariant, CPTriple, CovariantCorrespondence, CovariantIso};
use crate::corr::{graph_correspondence, verify_iso, CorrIso, Correspondence, GraphSpec};
use crate::cstar::{AlgElement, FdCStarAlgebra, IdealSpec};
use crate::hilbert::{canonicalize, PresentedModule};
use crate::linalg::{Matrix, Scalar};
use crate::pimsner::{core_triple, roundtrip_check, sharp_with};
use crate::report::Report;
use crate::sparse::LinMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("malformed instance: {0}")]
    Parse(String),
    #[error("unknown {kind} `{name}` referenced by {by}")]
    Reference { kind: &'static str, name: String, by: String },
    #[error("invalid {kind} `{name}`: {reason}")]
    Invalid { kind: &'static str, name: String, reason: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawScalar {
    Int(i64),
    Parts([i64; 4]),
}

pub type RawMatrix = Vec<Vec<RawScalar>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEdge {
    pub s: String,
    pub r: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<RawEdge>,
    #[serde(rename = "J", default)]
    pub relative: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    algebra: String,
    gram: Vec<Vec<Vec<RawMatrix>>>,
}

/// Exactly one of `graph`, `identity`, or `source`/`target`/`multiplicity`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorr {
    graph: Option<String>,
    identity: Option<String>,
    source: Option<String>,
    target: Option<String>,
    multiplicity: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawIdeal {
    Blocks(Vec<usize>),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriple {
    graph: Option<String>,
    corr: Option<String>,
    ideal: Option<RawIdeal>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrow {
    source: String,
    target: String,
    corr: String,
    u: Option<RawMatrix>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwoArrow {
    from: String,
    to: String,
    map: RawMatrix,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    #[serde(default)]
    algebras: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    graphs: BTreeMap<String, RawGraph>,
    #[serde(default)]
    modules: BTreeMap<String, RawModule>,
    #[serde(default)]
    correspondences: BTreeMap<String, RawCorr>,
    #[serde(default)]
    triples: BTreeMap<String, RawTriple>,
    #[serde(default)]
    arrows: BTreeMap<String, RawArrow>,
    #[serde(default)]
    two_arrows: BTreeMap<String, RawTwoArrow>,
}

/// A triple, remembering the graph it came from when there is one.
#[derive(Debug, Clone)]
pub struct NamedTriple {
    pub triple: CPTriple,
    pub graph: Option<GraphSpec>,
}

/// A loaded instance. Objects whose construction failed a mathematical check
/// are left out and recorded in `load_reports`.
#[derive(Debug, Clone, Default)]
pub struct Instance {
    pub algebras: BTreeMap<String, FdCStarAlgebra>,
    pub graphs: BTreeMap<String, GraphSpec>,
    pub modules: BTreeMap<String, PresentedModule>,
    pub correspondences: BTreeMap<String, Correspondence>,
    pub triples: BTreeMap<String, NamedTriple>,
    pub arrows: BTreeMap<String, CovariantCorrespondence>,
    pub two_arrows: BTreeMap<String, CovariantIso>,
    pub load_reports: Vec<Report>,
}

pub fn scalar(s: &RawScalar) -> Result<Scalar, String> {
    match s {
        RawScalar::Int(n) => Ok(Scalar::from_int(*n)),
        RawScalar::Parts([a, b, c, d]) => Scalar::from_parts(*a, *b, *c, *d).ok_or_else(|| "zero denominator".to_string()),
    }
}

pub fn matrix(m: &RawMatrix) -> Result<Matrix, String> {
    let rows = m.iter().map(|r| r.iter().map(scalar).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err("empty matrix".into());
    }
    Matrix::from_rows(rows).map_err(|e| e.to_string())
}

fn element(a: &FdCStarAlgebra, blocks: &[RawMatrix]) -> Result<AlgElement, String> {
    let ms = blocks.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
    AlgElement::from_blocks(a, ms).map_err(|e| e.to_string())
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    let parts = s.to_parts();
    let ints: Option<Vec<i64>> = parts.iter().map(|p| p.parse().ok()).collect();
    match ints {
        Some(v) if v[1] == 1 && v[2] == 0 => json!(v[0]),
        Some(v) => json!(v),
        None => json!(parts),
    }
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array(m.row(r).iter().map(scalar_to_json).collect())).collect())
}

pub fn graph_to_json(g: &GraphSpec) -> Value {
    let v = g.vertices();
    json!({
        "vertices": v,
        "edges": g.edges().iter().map(|&(s, r)| json!({"s": v[s], "r": v[r]})).collect::<Vec<_>>(),
        "J": g.relative().iter().map(|&j| v[j].clone()).collect::<Vec<_>>(),
    })
}

pub fn graph_from_raw(g: &RawGraph) -> Result<GraphSpec, String> {
    let edges = g.edges.iter().map(|e| (e.s.clone(), e.r.clone())).collect();
    GraphSpec::new(g.vertices.clone(), edges, g.relative.clone()).map_err(|e| e.to_string())
}

/// A bare graph document `{"vertices", "edges", "J"}`.
pub fn parse_graph(text: &str) -> Result<GraphSpec, InstanceError> {
    let raw: RawGraph = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
    graph_from_raw(&raw).map_err(|reason| InstanceError::Invalid { kind: "graph", name: "graph".into(), reason })
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &'static str, name: &str, by: &str) -> Result<&'a T, InstanceError> {
    map.get(name).ok_or_else(|| InstanceError::Reference { kind, name: name.into(), by: by.into() })
}

/// References that resolve to an object left out after a failed check.
enum Dep<T> {
    Ok(T),
    Missing(String),
}

impl Instance {
    pub fn parse(text: &str) -> Result<Instance, InstanceError> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        check_references(&raw)?;
        let mut inst = Instance::default();
        for (name, blocks) in &raw.algebras {
            let a = FdCStarAlgebra::new(blocks.clone()).map_err(|e| InstanceError::Invalid { kind: "algebra", name: name.clone(), reason: e.to_string() })?;
            inst.algebras.insert(name.clone(), a);
        }
        for (name, g) in &raw.graphs {
            let spec = graph_from_raw(g).map_err(|reason| InstanceError::Invalid { kind: "graph", name: name.clone(), reason })?;
            inst.graphs.insert(name.clone(), spec);
        }
        for (name, m) in &raw.modules {
            let a = &inst.algebras[&m.algebra];
            let gram: Result<Vec<Vec<AlgElement>>, String> = m.gram.iter().map(|row| row.iter().map(|x| element(a, x)).collect()).collect();
            let built = gram.and_then(|g| PresentedModule::new(a.clone(), g).map_err(|e| e.to_string()));
            match built {
                Ok(p) => {
                    inst.modules.insert(name.clone(), p);
                }
                Err(reason) => return Err(InstanceError::Invalid { kind: "module", name: name.clone(), reason }),
            }
        }
        for (name, c) in &raw.correspondences {
            let built = if let Some(g) = &c.graph {
                graph_correspondence(&inst.graphs[g]).map(|gc| gc.corr).map_err(|e| e.to_string())
            } else if let Some(a) = &c.identity {
                Ok(Correspondence::identity(&inst.algebras[a]))
            } else {
                let (s, t) = (c.source.as_ref().expect("checked"), c.target.as_ref().expect("checked"));
                let m = c.multiplicity.as_ref().expect("checked");
                Correspondence::canonical(&inst.algebras[s], &inst.algebras[t], m).map_err(|e| e.to_string())
            };
            match built {
                Ok(corr) => {
                    inst.correspondences.insert(name.clone(), corr);
                }
                Err(e) => inst.load_reports.push(Report::fail(format!("correspondence {name}: construction"), "rejected", Some(e))),
            }
        }
        for (name, t) in &raw.triples {
            let dep = match (&t.graph, &t.corr) {
                (Some(g), _) => Dep::Ok((graph_correspondence(&inst.graphs[g]).map(|gc| gc.corr).map_err(|e| e.to_string()), Some(inst.graphs[g].clone()))),
                (None, Some(c)) => match inst.correspondences.get(c) {
                    Some(corr) => Dep::Ok((Ok(corr.clone()), None)),
                    None => Dep::Missing(format!("correspondence {c}")),
                },
                _ => unreachable!("checked"),
            };
            let (corr, graph) = match dep {
                Dep::Ok((Ok(c), g)) => (c, g),
                Dep::Ok((Err(e), _)) => {
                    inst.load_reports.push(Report::fail(format!("triple {name}: construction"), "rejected", Some(e)));
                    continue;
                }
                Dep::Missing(what) => {
                    inst.load_reports.push(Report::skip(format!("triple {name}: construction"), format!("depends on rejected {what}")));
                    continue;
                }
            };
            let ideal = match (&t.ideal, &graph) {
                (None, Some(g)) => IdealSpec::new(corr.source(), g.relative().iter().copied()).map_err(|e| e.to_string()),
                (None, None) => Ok(IdealSpec::empty(corr.source())),
                (Some(RawIdeal::Named(s)), _) if s == "katsura" => Ok(crate::corr::katsura_ideal(&corr)),
                (Some(RawIdeal::Named(s)), _) => Err(format!("unknown ideal `{s}`")),
                (Some(RawIdeal::Blocks(b)), _) => IdealSpec::new(corr.source(), b.iter().copied()).map_err(|e| e.to_string()),
            };
            let ideal = ideal.map_err(|reason| InstanceError::Invalid { kind: "triple", name: name.clone(), reason })?;
            // an explicit ideal on a graph triple overrides J
            let graph = graph.map(|g| g.with_relative(ideal.blocks().iter().copied()));
            match CPTriple::new(corr, ideal) {
                Ok(triple) => {
                    inst.triples.insert(name.clone(), NamedTriple { triple, graph });
                }
                Err(e) => inst.load_reports.push(Report::fail(format!("triple {name}: construction"), "rejected", Some(e.to_string()))),
            }
        }
        for (name, a) in &raw.arrows {
            let (Some(s), Some(t), Some(f)) = (inst.triples.get(&a.source), inst.triples.get(&a.target), inst.correspondences.get(&a.corr)) else {
                inst.load_reports.push(Report::skip(format!("arrow {name}: construction"), "depends on a rejected object"));
                continue;
            };
            let built = match &a.u {
                Some(m) => {
                    let u = matrix(m).map_err(|reason| InstanceError::Invalid { kind: "arrow", name: name.clone(), reason })?;
                    CovariantCorrespondence::new(s.triple.clone(), t.triple.clone(), f.clone(), LinMap::from_dense(&u))
                }
                None => CovariantCorrespondence::with_found_iso(s.triple.clone(), t.triple.clone(), f.clone()),
            };
            match built {
                Ok(cc) => {
                    inst.arrows.insert(name.clone(), cc);
                }
                Err(e) => inst.load_reports.push(Report::fail(format!("arrow {name}: construction"), "rejected", Some(e.to_string()))),
            }
        }
        for (name, w) in &raw.two_arrows {
            let (Some(from), Some(to)) = (inst.arrows.get(&w.from), inst.arrows.get(&w.to)) else {
                inst.load_reports.push(Report::skip(format!("2-arrow {name}: construction"), "depends on a rejected arrow"));
                continue;
            };
            let m = matrix(&w.map).map_err(|reason| InstanceError::Invalid { kind: "2-arrow", name: name.clone(), reason })?;
            if m.rows() != to.corr.dim() || m.cols() != from.corr.dim() {
                return Err(InstanceError::Invalid {
                    kind: "2-arrow",
                    name: name.clone(),
                    reason: format!("map must be {}x{}", to.corr.dim(), from.corr.dim()),
                });
            }
            let iso = CorrIso { domain: from.corr.clone(), codomain: to.corr.clone(), map: LinMap::from_dense(&m) };
            inst.two_arrows.insert(name.clone(), CovariantIso { from: from.clone(), to: to.clone(), w: iso });
        }
        Ok(inst)
    }

    /// Every structural validation: presented modules, correspondences,
    /// triples, arrows and 2-arrows.
    pub fn validate(&self) -> Vec<Report> {
        let mut out = self.load_reports.clone();
        for (name, m) in &self.modules {
            match canonicalize(m) {
                Ok((sm, w)) => out.push(Report::pass(format!("module {name}: gram"), format!("positive, multiplicities {:?}, witness defect {:.1e}", sm.mult(), w.defect))),
                Err(e) => out.push(Report::fail(format!("module {name}: gram"), e.to_string(), Some(e.to_string()))),
            }
        }
        for (name, c) in &self.correspondences {
            out.push(Report::pass(format!("correspondence {name}: construction"), format!("dimension {}, multiplicity {:?}", c.dim(), c.multiplicity().0)));
        }
        for (name, t) in &self.triples {
            let kind = if t.triple.is_hilbert_bimodule_with_katsura() { "Hilbert bimodule with its Katsura ideal" } else { "not a bimodule triple" };
            out.push(Report::pass(format!("triple {name}: construction"), kind));
        }
        for (name, cc) in &self.arrows {
            out.extend(arrow_reports(name, cc));
        }
        for (name, w) in &self.two_arrows {
            out.extend(Report::from_iso(&format!("2-arrow {name}"), &verify_iso(&w.w)));
            out.push(Report::from_law(format!("2-arrow {name}: intertwines u"), &w.check()));
        }
        out
    }

    /// The graph behind an arrow's source triple, when it has one.
    pub fn source_graph(&self, cc: &CovariantCorrespondence) -> Option<GraphSpec> {
        self.triples.values().find(|t| t.triple.corr == cc.source.corr && t.triple.ideal == cc.source.ideal).and_then(|t| t.graph.clone())
    }

    /// Reflector round trips for every arrow, and for every 2-arrow the
    /// covariance check before and after transport along sharp.
    pub fn reflect(&self, level: usize, corrupt: bool) -> Vec<Report> {
        let mut reports = self.load_reports.clone();
        for (name, cc) in &self.arrows {
            let Some(g) = self.source_graph(cc) else {
                reports.push(Report::fail(format!("arrow {name}: precondition"), "source is not a graph triple", None));
                continue;
            };
            match roundtrip_check(&g, cc, level, corrupt) {
                Ok(rt) => reports.extend(rt.checks.iter().map(|c| Report::from_coherence(&format!("arrow {name}"), c))),
                Err(e) => reports.push(Report::fail(format!("arrow {name}: precondition"), e.to_string(), None)),
            }
        }
        for (name, w) in &self.two_arrows {
            let prefix = format!("2-arrow {name}");
            reports.push(Report::from_law(format!("{prefix}: covariant isomorphism"), &w.check()));
            let Some(g) = self.source_graph(&w.from) else {
                reports.push(Report::fail(format!("{prefix}: precondition"), "source is not a graph triple", None));
                continue;
            };
            let moved = core_triple(&g, level).map_err(|e| e.to_string()).and_then(|core| {
                let a = sharp_with(&g, &w.from, core.clone()).map_err(|e| e.to_string())?;
                let b = sharp_with(&g, &w.to, core).map_err(|e| e.to_string())?;
                Ok(CovariantIso {
                    from: a.arrow.clone(),
                    to: b.arrow.clone(),
                    w: CorrIso { domain: a.arrow.corr.clone(), codomain: b.arrow.corr.clone(), map: w.w.map.clone() },
                })
            });
            match moved {
                Ok(iso) => reports.push(Report::from_law(format!("{prefix}: sharp"), &iso.check())),
                Err(e) => reports.push(Report::fail(format!("{prefix}: precondition"), e, None)),
            }
        }
        reports
    }
}

pub fn arrow_reports(name: &str, cc: &CovariantCorrespondence) -> Vec<Report> {
    let r = check_covariant(cc);
    let mut out = Report::from_iso(&format!("arrow {name}: u"), &r.u);
    let mut c = Report::from_law(format!("arrow {name}: ideal containment"), &r.containment);
    if r.containment_automatic && c.status == crate::report::Status::Pass {
        c.details = "holds automatically".into();
    }
    out.push(c);
    out
}

fn check_references(raw: &RawInstance) -> Result<(), InstanceError> {
    for (name, m) in &raw.modules {
        lookup(&raw.algebras, "algebra", &m.algebra, &format!("module {name}"))?;
    }
    for (name, c) in &raw.correspondences {
        let by = format!("correspondence {name}");
        match (&c.graph, &c.identity, &c.source, &c.target, &c.multiplicity) {
            (Some(g), None, None, None, None) => {
                lookup(&raw.graphs, "graph", g, &by)?;
            }
            (None, Some(a), None, None, None) => {
                lookup(&raw.algebras, "algebra", a, &by)?;
            }
            (None, None, Some(s), Some(t), Some(_)) => {
                lookup(&raw.algebras, "algebra", s, &by)?;
                lookup(&raw.algebras, "algebra", t, &by)?;
            }
            _ => return Err(InstanceError::Parse(format!("{by}: give exactly one of graph, identity, or source/target/multiplicity"))),
        }
    }
    for (name, t) in &raw.triples {
        let by = format!("triple {name}");
        match (&t.graph, &t.corr) {
            (Some(g), None) => {
                lookup(&raw.graphs, "graph", g, &by)?;
            }
            (None, Some(c)) => {
                lookup(&raw.correspondences, "correspondence", c, &by)?;
            }
            _ => return Err(InstanceError::Parse(format!("{by}: give exactly one of graph or corr"))),
        }
    }
    for (name, a) in &raw.arrows {
        let by = format!("arrow {name}");
        lookup(&raw.triples, "triple", &a.source, &by)?;
        lookup(&raw.triples, "triple", &a.target, &by)?;
        lookup(&raw.correspondences, "correspondence", &a.corr, &by)?;
    }
    for (name, w) in &raw.two_arrows {
        let by = format!("2-arrow {name}");
        lookup(&raw.arrows, "arrow", &w.from, &by)?;
        lookup(&raw.arrows, "arrow", &w.to, &by)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_LOOPS: &str = r#"{
        "graphs": {"O2": {"vertices": ["v"], "edges": [{"s": "v", "r": "v"}, {"s": "v", "r": "v"}], "J": ["v"]}},
        "triples": {"T": {"graph": "O2"}},
        "algebras": {"C": [1]},
        "correspondences": {"id": {"identity": "C"}},
        "arrows": {"one": {"source": "T", "target": "T", "corr": "id"}}
    }"#;

    #[test]
    fn loads_and_validates() {
        let inst = Instance::parse(TWO_LOOPS).unwrap();
        let reports = inst.validate();
        assert!(crate::report::all_passed(&reports), "{reports:?}");
        assert!(inst.triples["T"].graph.is_some());
    }

    #[test]
    fn dangling_reference_is_an_input_error() {
        let bad = TWO_LOOPS.replace(r#""corr": "id""#, r#""corr": "nope""#);
        assert!(matches!(Instance::parse(&bad), Err(InstanceError::Reference { .. })));
    }

    #[test]
    fn indefinite_gram_fails_validation() {
        let text = r#"{"algebras": {"C": [1]}, "modules": {"M": {"algebra": "C", "gram": [[[[[-1]]]]]}}}"#;
        let inst = Instance::parse(text).unwrap();
        let r = inst.validate();
        assert!(r.iter().any(|x| x.failed() && x.details.contains("positive semidefinite")), "{r:?}");
    }

    #[test]
    fn scalars_round_trip() {
        let s = Scalar::from_parts(1, 2, -3, 4).unwrap();
        let v = scalar_to_json(&s);
        let raw: RawScalar = serde_json::from_value(v).unwrap();
        assert_eq!(scalar(&raw).unwrap(), s);
        assert_eq!(scalar_to_json(&Scalar::from_int(5)), json!(5));
    }
}
