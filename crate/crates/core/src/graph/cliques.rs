use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Graph, GraphError};

/// Default upper bound on the number of cliques `enumerate_cliques` will
/// produce before giving up.
pub const DEFAULT_CLIQUE_CAP: usize = 1 << 22;

/// Default vertex-count limit for exact maximum-clique search.
pub const DEFAULT_MAX_CLIQUE_VERTICES: usize = 4096;

/// Reads `BOXDIM_CLIQUE_CAP`, falling back to [`DEFAULT_CLIQUE_CAP`].
pub fn clique_cap() -> usize {
    std::env::var("BOXDIM_CLIQUE_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CLIQUE_CAP)
}

/// A sorted set of vertex ids; the empty clique is allowed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clique(Vec<usize>);

impl Clique {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Clique(vertices)
    }

    pub fn empty() -> Self {
        Clique(Vec::new())
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Clique) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    /// Applies `f` to every vertex and re-sorts.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Clique {
        Clique::new(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn with(&self, v: usize) -> Clique {
        let mut vs = self.0.clone();
        vs.push(v);
        Clique::new(vs)
    }
}

impl fmt::Debug for Clique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl From<Vec<usize>> for Clique {
    fn from(v: Vec<usize>) -> Self {
        Clique::new(v)
    }
}

impl Serialize for Clique {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Clique {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        let c = Clique::new(raw.clone());
        if c.len() != raw.len() {
            return Err(serde::de::Error::custom("clique lists a vertex twice"));
        }
        Ok(c)
    }
}

/// All cliques of `g`, the empty one included, ordered by size and then
/// lexicographically. Uses the cap from [`clique_cap`].
pub fn enumerate_cliques(g: &Graph) -> Result<Vec<Clique>, GraphError> {
    enumerate_cliques_capped(g, clique_cap())
}

pub fn enumerate_cliques_capped(g: &Graph, cap: usize) -> Result<Vec<Clique>, GraphError> {
    let mut out = vec![Clique::empty()];
    let mut current = Vec::new();
    for v in 0..g.n() {
        let cands: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| w > v).collect();
        current.push(v);
        extend_cliques(g, &mut current, &cands, &mut out, cap)?;
        current.pop();
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn extend_cliques(
    g: &Graph,
    current: &mut Vec<usize>,
    cands: &[usize],
    out: &mut Vec<Clique>,
    cap: usize,
) -> Result<(), GraphError> {
    if out.len() >= cap {
        return Err(GraphError::CliqueCapExceeded(cap));
    }
    out.push(Clique(current.clone()));
    for (i, &w) in cands.iter().enumerate() {
        let next: Vec<usize> = cands[i + 1..]
            .iter()
            .copied()
            .filter(|&x| g.has_edge(w, x))
            .collect();
        current.push(w);
        extend_cliques(g, current, &next, out, cap)?;
        current.pop();
    }
    Ok(())
}

/// Exact clique number by Bron–Kerbosch with pivoting.
pub fn max_clique_size(g: &Graph) -> Result<usize, GraphError> {
    max_clique_size_capped(g, DEFAULT_MAX_CLIQUE_VERTICES)
}

pub fn max_clique_size_capped(g: &Graph, max_vertices: usize) -> Result<usize, GraphError> {
    if g.n() > max_vertices {
        return Err(GraphError::TooLarge {
            n: g.n(),
            cap: max_vertices,
        });
    }
    let mut best = 0;
    let p: Vec<usize> = (0..g.n()).collect();
    bron_kerbosch(g, 0, p, Vec::new(), &mut best);
    Ok(best)
}

fn bron_kerbosch(g: &Graph, size: usize, mut p: Vec<usize>, mut x: Vec<usize>, best: &mut usize) {
    if p.is_empty() {
        if x.is_empty() {
            *best = (*best).max(size);
        }
        return;
    }
    if size + p.len() <= *best {
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&w| g.has_edge(u, w)).count())
        .expect("p is non-empty");
    let branch: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| !g.has_edge(pivot, v))
        .collect();
    for v in branch {
        let np: Vec<usize> = p.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        let nx: Vec<usize> = x.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        bron_kerbosch(g, size + 1, np, nx, best);
        p.retain(|&w| w != v);
        x.push(v);
    }
}
