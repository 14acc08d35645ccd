//! Paths in a graph and monomials `t_μ t_ν^*` with their Toeplitz products.

use std::collections::BTreeMap;
use std::fmt;

use crate::corr::GraphSpec;
use crate::linalg::Scalar;

/// `μ = e₁…e_k` with `s(eᵢ) = r(eᵢ₊₁)`; `base` is `s(μ)`, the vertex itself when `k = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub edges: Vec<usize>,
    pub base: usize,
}

impl Path {
    pub fn vertex(v: usize) -> Self {
        Path { edges: Vec::new(), base: v }
    }

    pub fn edge(g: &GraphSpec, e: usize) -> Self {
        Path { edges: vec![e], base: g.source(e) }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self) -> usize {
        self.base
    }

    pub fn range(&self, g: &GraphSpec) -> usize {
        self.edges.first().map_or(self.base, |&e| g.range(e))
    }

    /// `μα`, defined when `s(μ) = r(α)`.
    pub fn concat(&self, g: &GraphSpec, o: &Path) -> Option<Path> {
        if self.base != o.range(g) {
            return None;
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&o.edges);
        Some(Path { edges, base: o.base })
    }

    /// `μe` for an edge with `r(e) = s(μ)`.
    pub fn extend(&self, g: &GraphSpec, e: usize) -> Option<Path> {
        (g.range(e) == self.base).then(|| {
            let mut edges = self.edges.clone();
            edges.push(e);
            Path { edges, base: g.source(e) }
        })
    }

    /// `α` with `self = prefix · α`.
    pub fn strip_prefix(&self, g: &GraphSpec, prefix: &Path) -> Option<Path> {
        if prefix.len() > self.len() || self.edges[..prefix.len()] != prefix.edges[..] {
            return None;
        }
        if prefix.is_empty() && prefix.base != self.range(g) {
            return None;
        }
        Some(Path { edges: self.edges[prefix.len()..].to_vec(), base: self.base })
    }

    /// First edge and the remainder.
    pub fn split_first(&self) -> Option<(usize, Path)> {
        let (&e, rest) = self.edges.split_first()?;
        Some((e, Path { edges: rest.to_vec(), base: self.base }))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            write!(f, "v{}", self.base)
        } else {
            let parts: Vec<String> = self.edges.iter().map(|e| format!("e{e}")).collect();
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// Paths of length `k` with source `v`, grown at the range end.
pub fn paths_with_source(g: &GraphSpec, v: usize, k: usize) -> Vec<Path> {
    let mut level = vec![Path::vertex(v)];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &level {
            let r = p.range(g);
            for (e, &(s, _)) in g.edges().iter().enumerate() {
                if s == r {
                    let mut edges = vec![e];
                    edges.extend_from_slice(&p.edges);
                    next.push(Path { edges, base: v });
                }
            }
        }
        level = next;
    }
    level
}

/// All paths of length `k`, grouped by source vertex.
pub fn paths_of_length(g: &GraphSpec, k: usize) -> Vec<Path> {
    (0..g.num_vertices()).flat_map(|v| paths_with_source(g, v, k)).collect()
}

/// `t_μ t_ν^*`, requiring `s(μ) = s(ν)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub left: Path,
    pub right: Path,
}

impl Monomial {
    pub fn new(left: Path, right: Path) -> Option<Self> {
        (left.base == right.base).then_some(Monomial { left, right })
    }

    pub fn degree(&self) -> i64 {
        self.left.len() as i64 - self.right.len() as i64
    }

    /// `|ν|`, the depth used for stage bounds.
    pub fn depth(&self) -> usize {
        self.right.len()
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial { left: self.right.clone(), right: self.left.clone() }
    }

    /// Toeplitz product; `None` for zero.
    pub fn mul(&self, g: &GraphSpec, o: &Monomial) -> Option<Monomial> {
        if let Some(rest) = o.left.strip_prefix(g, &self.right) {
            let left = self.left.concat(g, &rest)?;
            Monomial::new(left, o.right.clone())
        } else if let Some(rest) = self.right.strip_prefix(g, &o.left) {
            let right = o.right.concat(g, &rest)?;
            Monomial::new(self.left.clone(), right)
        } else {
            None
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t({})t({})*", self.left, self.right)
    }
}

/// A finite combination of monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonoComb(pub BTreeMap<Monomial, Scalar>);

impl MonoComb {
    pub fn zero() -> Self {
        MonoComb::default()
    }

    pub fn single(m: Monomial) -> Self {
        MonoComb::from_terms([(m, Scalar::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut out = MonoComb::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        let e = self.0.entry(m.clone()).or_insert_with(Scalar::zero);
        *e += &c;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&self, o: &MonoComb) -> MonoComb {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> MonoComb {
        MonoComb::from_terms(self.0.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn mul(&self, g: &GraphSpec, o: &MonoComb) -> MonoComb {
        let mut out = MonoComb::zero();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                if let Some(m) = a.mul(g, b) {
                    out.add_term(m, x * y);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> MonoComb {
        MonoComb::from_terms(self.0.iter().map(|(m, c)| (m.adjoint(), c.conj())))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.0.iter()
    }
}

/// The degree-n part: monomials with `|μ| − |ν| = n`.
pub fn spectral_component(x: &MonoComb, n: i64) -> MonoComb {
    MonoComb(x.0.iter().filter(|(m, _)| m.degree() == n).map(|(m, c)| (m.clone(), c.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o2() -> GraphSpec {
        GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[]).unwrap()
    }

    #[test]
    fn path_counts() {
        let g = o2();
        assert_eq!(paths_with_source(&g, 0, 3).len(), 8);
        let line = GraphSpec::from_indices(2, &[(0, 1)], &[]).unwrap();
        assert_eq!(paths_with_source(&line, 0, 1).len(), 1);
        assert_eq!(paths_with_source(&line, 1, 1).len(), 0);
        assert_eq!(paths_with_source(&line, 0, 2).len(), 0);
    }

    #[test]
    fn toeplitz_relations() {
        let g = o2();
        let e0 = Path::edge(&g, 0);
        let e1 = Path::edge(&g, 1);
        let v = Path::vertex(0);
        let t0 = Monomial::new(e0.clone(), v.clone()).unwrap();
        let t1 = Monomial::new(e1.clone(), v.clone()).unwrap();
        // t_e* t_e = p, t_e* t_f = 0
        assert_eq!(t0.adjoint().mul(&g, &t0), Monomial::new(v.clone(), v.clone()));
        assert_eq!(t0.adjoint().mul(&g, &t1), None);
        // t_e t_e* is a projection
        let p = t0.mul(&g, &t0.adjoint()).unwrap();
        assert_eq!(p.mul(&g, &p), Some(p.clone()));
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn spectral_projection() {
        let g = o2();
        let v = Path::vertex(0);
        let t = Monomial::new(Path::edge(&g, 0), v.clone()).unwrap();
        let x = MonoComb::from_terms([(t.clone(), Scalar::from_int(3)), (Monomial::new(v.clone(), v).unwrap(), Scalar::one())]);
        assert_eq!(spectral_component(&x, 1), MonoComb::from_terms([(t, Scalar::from_int(3))]));
        let p0 = spectral_component(&x, 0);
        assert_eq!(spectral_component(&p0, 0), p0);
        assert!(spectral_component(&MonoComb::single(Monomial::new(Path::edge(&g, 1), Path::vertex(0)).unwrap()), 0).is_zero());
    }
}
