use serde::{Deserialize, Serialize};

use super::{Graph, GraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColoringKind {
    Proper,
    Star,
}

/// Which distance-two conflicts the greedy star coloring respects.
///
/// `AsWritten` forbids the color of an earlier `v_j` whenever some `v_m`
/// placed after `v_j` (anywhere in the order) is adjacent to both.
/// `Between` only looks at middles strictly between `v_j` and `v_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StarRule {
    #[default]
    AsWritten,
    Between,
}

/// Colors are positive integers indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub kind: ColoringKind,
}

impl Coloring {
    pub fn color_count(&self) -> usize {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ColoringViolation {
    WrongLength { expected: usize, found: usize },
    ZeroColor(usize),
    Monochromatic(usize, usize),
    BicoloredPath([usize; 4]),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColoringReport {
    pub kind: ColoringKind,
    pub colors_used: usize,
    pub violations: Vec<ColoringViolation>,
}

impl ColoringReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn positions(n: usize, order: &[usize]) -> Result<Vec<usize>, GraphError> {
    if order.len() != n {
        return Err(GraphError::BadOrder);
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(GraphError::BadOrder);
        }
        pos[v] = i;
    }
    Ok(pos)
}

fn smallest_free(forbidden: &mut [bool], used: &[usize]) -> usize {
    let c = (1..forbidden.len())
        .find(|&c| !forbidden[c])
        .unwrap_or(forbidden.len());
    for &u in used {
        if u < forbidden.len() {
            forbidden[u] = false;
        }
    }
    c
}

/// First-fit proper coloring along `order`.
pub fn greedy_proper_coloring(g: &Graph, order: &[usize]) -> Result<Coloring, GraphError> {
    positions(g.n(), order)?;
    let n = g.n();
    let mut colors = vec![0usize; n];
    let mut forbidden = vec![false; n + 2];
    let mut marked = Vec::new();
    for &v in order {
        marked.clear();
        for &w in g.neighbors(v) {
            if colors[w] > 0 {
                forbidden[colors[w]] = true;
                marked.push(colors[w]);
            }
        }
        colors[v] = smallest_free(&mut forbidden, &marked);
    }
    Ok(Coloring {
        colors,
        kind: ColoringKind::Proper,
    })
}

/// Greedy star coloring along `order`: `v_i` avoids the colors of earlier
/// neighbors and of earlier `v_j` joined to `v_i` through a middle vertex
/// `v_m` with `m > j` (restricted to `m < i` under [`StarRule::Between`]).
pub fn greedy_star_coloring(
    g: &Graph,
    order: &[usize],
    rule: StarRule,
) -> Result<Coloring, GraphError> {
    let pos = positions(g.n(), order)?;
    let n = g.n();
    let mut colors = vec![0usize; n];
    let mut forbidden = vec![false; n + 2];
    let mut marked = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        marked.clear();
        for &w in g.neighbors(v) {
            if pos[w] < i {
                forbidden[colors[w]] = true;
                marked.push(colors[w]);
            }
            if rule == StarRule::Between && pos[w] >= i {
                continue;
            }
            for &u in g.neighbors(w) {
                if u != v && pos[u] < i && pos[u] < pos[w] {
                    forbidden[colors[u]] = true;
                    marked.push(colors[u]);
                }
            }
        }
        colors[v] = smallest_free(&mut forbidden, &marked);
    }
    Ok(Coloring {
        colors,
        kind: ColoringKind::Star,
    })
}

/// Checks properness, and for `Star` also the absence of 2-colored paths
/// on four vertices. Each bad path is reported once, from its smaller end.
pub fn verify_coloring(g: &Graph, c: &Coloring) -> ColoringReport {
    let mut violations = Vec::new();
    let n = g.n();
    let report = |violations| ColoringReport {
        kind: c.kind,
        colors_used: c.color_count(),
        violations,
    };
    if c.colors.len() != n {
        violations.push(ColoringViolation::WrongLength {
            expected: n,
            found: c.colors.len(),
        });
        return report(violations);
    }
    for v in 0..n {
        if c.colors[v] == 0 {
            violations.push(ColoringViolation::ZeroColor(v));
        }
    }
    for (u, v) in g.edges() {
        if c.colors[u] == c.colors[v] {
            violations.push(ColoringViolation::Monochromatic(u, v));
        }
    }
    if c.kind == ColoringKind::Star {
        for (b, cc) in g.edges() {
            for (x, y) in [(b, cc), (cc, b)] {
                for &a in g.neighbors(x) {
                    if a == y || c.colors[a] != c.colors[y] {
                        continue;
                    }
                    for &d in g.neighbors(y) {
                        if d == x || d == a || c.colors[d] != c.colors[x] {
                            continue;
                        }
                        if a < d {
                            violations.push(ColoringViolation::BicoloredPath([a, x, y, d]));
                        }
                    }
                }
            }
        }
    }
    report(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_coloring_of_path() {
        let c = greedy_star_coloring(&Graph::path(3), &[0, 1, 2], StarRule::AsWritten).unwrap();
        assert_eq!(c.colors, vec![1, 2, 3]);
        assert!(verify_coloring(&Graph::path(3), &c).is_valid());
    }

    #[test]
    fn star_coloring_simple_cases() {
        let c = greedy_star_coloring(&Graph::empty(4), &[3, 2, 1, 0], StarRule::AsWritten).unwrap();
        assert_eq!(c.colors, vec![1; 4]);
        let c =
            greedy_star_coloring(&Graph::complete(4), &[2, 0, 3, 1], StarRule::AsWritten).unwrap();
        let mut cs = c.colors.clone();
        cs.sort_unstable();
        assert_eq!(cs, vec![1, 2, 3, 4]);
    }

    #[test]
    fn proper_coloring_examples() {
        let c = greedy_proper_coloring(&Graph::complete(3), &[0, 1, 2]).unwrap();
        assert_eq!(c.color_count(), 3);
        let star = Graph::from_edges(6, (1..6).map(|i| (0, i))).unwrap();
        let c = greedy_proper_coloring(&star, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(c.color_count(), 2);
        let c = greedy_proper_coloring(&Graph::cycle(5), &[0, 1, 2, 3, 4]).unwrap();
        assert!(c.color_count() <= 3);
        assert!(verify_coloring(&Graph::cycle(5), &c).is_valid());
    }

    #[test]
    fn bicolored_p4_is_reported_once() {
        let p4 = Graph::path(4);
        let c = Coloring {
            colors: vec![1, 2, 1, 2],
            kind: ColoringKind::Star,
        };
        let r = verify_coloring(&p4, &c);
        assert_eq!(
            r.violations,
            vec![ColoringViolation::BicoloredPath([0, 1, 2, 3])]
        );
        let ok = Coloring {
            colors: vec![1, 2, 3, 1],
            kind: ColoringKind::Star,
        };
        assert!(verify_coloring(&p4, &ok).is_valid());
        let proper = Coloring {
            colors: vec![1, 2, 1, 2],
            kind: ColoringKind::Proper,
        };
        assert!(verify_coloring(&p4, &proper).is_valid());
    }

    #[test]
    fn rejects_non_permutation() {
        assert_eq!(
            greedy_proper_coloring(&Graph::path(3), &[0, 0, 1]),
            Err(GraphError::BadOrder)
        );
        assert_eq!(
            greedy_proper_coloring(&Graph::path(3), &[0, 1]),
            Err(GraphError::BadOrder)
        );
    }
}
