use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

const PERES33: &str = include_str!("../../data/peres33.json");

/// Rays of `R³` (up to sign) with their orthogonal pairs and triples.
#[derive(Debug, Clone, Serialize)]
pub struct KsInstance {
    pub rays: Vec<[f64; 3]>,
    pub triples: Vec<[usize; 3]>,
    pub pairs: Vec<[usize; 2]>,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn canonical(v: &[f64; 3]) -> Result<[f64; 3]> {
    let n = dot(v, v).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("rays must be nonzero and finite".into()));
    }
    let mut u = [v[0] / n, v[1] / n, v[2] / n];
    // first clearly nonzero component positive
    if let Some(x) = u.iter().find(|x| x.abs() > 1e-12) {
        if *x < 0.0 {
            u = [-u[0], -u[1], -u[2]];
        }
    }
    Ok(u)
}

/// Normalizes, merges rays parallel within `1 − 1e-9`, sorts them
/// (descending lexicographic) and lists every orthogonal pair and triple with
/// `|⟨u, v⟩| ≤ tol`.
pub fn ks_build(rays: &[[f64; 3]], tol: f64) -> Result<KsInstance> {
    if rays.is_empty() {
        return Err(Error::InvalidInput("no rays given".into()));
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidInput("tolerance must be in (0, 0.5)".into()));
    }
    let mut unique: Vec<[f64; 3]> = Vec::with_capacity(rays.len());
    for r in rays {
        let u = canonical(r)?;
        if !unique.iter().any(|w| dot(w, &u).abs() >= 1.0 - 1e-9) {
            unique.push(u);
        }
    }
    unique.sort_by(|a, b| {
        b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])).then(b[2].total_cmp(&a[2]))
    });
    let n = unique.len();
    let orth = |i: usize, j: usize| dot(&unique[i], &unique[j]).abs() <= tol;
    let mut pairs = Vec::new();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !orth(i, j) {
                continue;
            }
            pairs.push([i, j]);
            for k in j + 1..n {
                if orth(i, k) && orth(j, k) {
                    triples.push([i, j, k]);
                }
            }
        }
    }
    Ok(KsInstance { rays: unique, triples, pairs })
}

/// The 33 rays with components in `{0, ±1, ±√2}` (up to normalization).
pub fn peres33() -> Result<KsInstance> {
    let rays: Vec<[f64; 3]> =
        serde_json::from_str(PERES33).map_err(|e| Error::InvalidInput(format!("ray data: {e}")))?;
    ks_build(&rays, 1e-9)
}

#[derive(Debug, Clone, Serialize)]
pub struct KsColoring {
    /// `true` = green. `None` when the search exhausted every assignment.
    pub colors: Option<Vec<bool>>,
    /// Partial assignments visited.
    pub nodes: u64,
}

impl KsColoring {
    /// Index → `"green"`/`"red"` map.
    pub fn as_map(&self) -> Option<BTreeMap<usize, &'static str>> {
        self.colors.as_ref().map(|c| {
            c.iter().enumerate().map(|(i, g)| (i, if *g { "green" } else { "red" })).collect()
        })
    }
}

struct Search<'a> {
    inst: &'a KsInstance,
    triples_of: Vec<Vec<usize>>,
    pairs_of: Vec<Vec<usize>>,
    colors: Vec<Option<bool>>,
    nodes: u64,
}

impl Search<'_> {
    fn consistent(&self, v: usize) -> bool {
        for &t in &self.triples_of[v] {
            let mut green = 0;
            let mut open = 0;
            for &r in &self.inst.triples[t] {
                match self.colors[r] {
                    Some(true) => green += 1,
                    Some(false) => {}
                    None => open += 1,
                }
            }
            if green > 1 || (green == 0 && open == 0) {
                return false;
            }
        }
        self.pairs_of[v].iter().all(|&p| {
            let [a, b] = self.inst.pairs[p];
            !(self.colors[a] == Some(true) && self.colors[b] == Some(true))
        })
    }

    fn run(&mut self, v: usize) -> bool {
        if v == self.colors.len() {
            return true;
        }
        for choice in [true, false] {
            self.nodes += 1;
            self.colors[v] = Some(choice);
            if self.consistent(v) && self.run(v + 1) {
                return true;
            }
        }
        self.colors[v] = None;
        false
    }
}

/// Depth-first search over rays in instance order, green before red, for a
/// coloring with exactly one green ray in every orthogonal triple and no two
/// green rays orthogonal. The first coloring found is returned, so the result
/// is canonical for a given instance.
pub fn ks_color(inst: &KsInstance) -> KsColoring {
    let n = inst.rays.len();
    let mut triples_of = vec![Vec::new(); n];
    for (t, tri) in inst.triples.iter().enumerate() {
        for &r in tri {
            triples_of[r].push(t);
        }
    }
    let mut pairs_of = vec![Vec::new(); n];
    for (p, pair) in inst.pairs.iter().enumerate() {
        for &r in pair {
            pairs_of[r].push(p);
        }
    }
    let mut s = Search { inst, triples_of, pairs_of, colors: vec![None; n], nodes: 0 };
    let found = s.run(0);
    KsColoring {
        colors: found.then(|| s.colors.iter().map(|c| c.unwrap_or(false)).collect()),
        nodes: s.nodes,
    }
}
