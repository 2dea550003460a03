//! Partition arrows `S → (H)^P_k` for small finite ordered structures.
//!
//! Ordered structures are rigid, so a copy of `P` in `S` is just a point set
//! whose induced substructure is isomorphic to `P`. A coloring is a map from
//! those point sets to `0..k`, and the question becomes a hypergraph
//! coloring problem: one vertex per copy of `P`, one hyperedge per copy of
//! `H` (the copies of `P` inside it). The arrow fails exactly when some
//! coloring leaves every hyperedge non-monochromatic.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typespace::{embeddings, FiniteStructure};

/// `chain:N`, or `graph:N:a-b,c-d,...` for a graph on the chain `0 < ... < N-1`.
pub fn parse_structure(text: &str) -> Result<FiniteStructure> {
    let bad = || Error::InvalidArgument(format!("`{text}` is not chain:N or graph:N:a-b,..."));
    let mut parts = text.splitn(3, ':');
    let kind = parts.next().ok_or_else(bad)?;
    let n: usize = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    match kind {
        "chain" if parts.next().is_none() => Ok(FiniteStructure::chain(n)),
        "graph" => {
            let mut edges = Vec::new();
            for e in parts
                .next()
                .unwrap_or("")
                .split(',')
                .filter(|e| !e.trim().is_empty())
            {
                let (a, b) = e.split_once('-').ok_or_else(bad)?;
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a == b {
                    return Err(Error::InvalidStructure(format!("loop at {a}")));
                }
                edges.push((a, b));
            }
            FiniteStructure::ordered_graph(n, &edges)
        }
        _ => Err(bad()),
    }
}

/// Whether `<` is a strict linear order on all points.
pub fn is_linearly_ordered(s: &FiniteStructure) -> bool {
    if s.arity_of("<") != Some(2) {
        return false;
    }
    let lt = |a: usize, b: usize| s.holds("<", &[a, b]);
    (0..s.n).all(|a| {
        !lt(a, a)
            && (0..s.n).all(|b| {
                (a == b || lt(a, b) != lt(b, a))
                    && (0..s.n).all(|c| !(lt(a, b) && lt(b, c)) || lt(a, c))
            })
    })
}

fn check_ordered(s: &FiniteStructure) -> Result<()> {
    s.validate()?;
    if !is_linearly_ordered(s) {
        return Err(Error::InvalidStructure(
            "no linear order `<`: copies of P are only determined by their point sets when \
             the structure is linearly ordered, so colorings of copies are not well defined"
                .into(),
        ));
    }
    Ok(())
}

/// All increasing `r`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The copies of `p` in `s`, as the images of `p`'s points in order.
/// Both are linearly ordered, so each copy has exactly one embedding.
pub fn copies(p: &FiniteStructure, s: &FiniteStructure) -> Result<Vec<Vec<usize>>> {
    let mut out = embeddings(p, s)?;
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowQuery {
    pub s: FiniteStructure,
    pub h: FiniteStructure,
    pub p: FiniteStructure,
    pub k: usize,
}

impl ArrowQuery {
    pub fn chains(s: usize, h: usize, p: usize, k: usize) -> Self {
        ArrowQuery {
            s: FiniteStructure::chain(s),
            h: FiniteStructure::chain(h),
            p: FiniteStructure::chain(p),
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for x in [&self.s, &self.h, &self.p] {
            check_ordered(x)?;
        }
        if !self.s.same_signature(&self.h) || !self.s.same_signature(&self.p) {
            return Err(Error::InvalidArgument(
                "S, H and P must share a signature".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArrowCaps {
    /// Largest number of colored objects (copies of P) searched.
    pub max_copies: usize,
    /// Search nodes before giving up.
    pub max_nodes: u64,
    /// How many dead ends to keep as certificates of a positive answer.
    pub sample: usize,
    pub parallel: bool,
}

impl Default for ArrowCaps {
    fn default() -> Self {
        ArrowCaps {
            max_copies: 24,
            max_nodes: 200_000_000,
            sample: 8,
            parallel: true,
        }
    }
}

/// A coloring of the colored objects (copies of P, or grid cells).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub objects: Vec<Vec<usize>>,
    pub colors: Vec<usize>,
}

/// A dead end of the search: every coloring that starts with `prefix`
/// makes `copy` monochromatic in `color`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub prefix: Vec<usize>,
    pub copy: Vec<usize>,
    pub color: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowReport {
    pub holds: bool,
    pub objects: usize,
    pub copies_of_h: usize,
    /// `objects * log2(k)`: the size of the coloring space.
    pub search_space_log2: f64,
    pub nodes: u64,
    pub bad_coloring: Option<Coloring>,
    pub certificates: Vec<Certificate>,
    pub elapsed_ms: u128,
}

/// Colored objects `0..items`; each hyperedge must not be monochromatic.
struct Hypergraph {
    items: usize,
    edges: Vec<Vec<usize>>,
}

enum Search {
    Bad(Vec<usize>),
    Forced,
}

struct Engine<'a> {
    g: &'a Hypergraph,
    k: usize,
    /// hyperedges indexed by their largest item
    closing: Vec<Vec<usize>>,
    nodes: &'a AtomicU64,
    max_nodes: u64,
    sample: usize,
}

impl Engine<'_> {
    /// The first hyperedge closed by item `i` that is monochromatic.
    fn mono(&self, colors: &[usize], i: usize) -> Option<usize> {
        self.closing[i].iter().copied().find(|&e| {
            let c = colors[i];
            self.g.edges[e].iter().all(|&x| colors[x] == c)
        })
    }

    /// Depth-first search below `colors`, whose highest color so far is
    /// `top`. Colors are interchangeable, so item `i` never gets a color
    /// above `top + 1`.
    fn dfs(
        &self,
        colors: &mut Vec<usize>,
        top: usize,
        certs: &mut Vec<Certificate>,
        stop: &dyn Fn() -> bool,
    ) -> Result<Search> {
        let i = colors.len();
        if i == self.g.items {
            return Ok(Search::Bad(colors.clone()));
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            return Err(Error::BudgetExhausted("ramsey search nodes"));
        }
        let limit = if i == 0 { 1 } else { (top + 2).min(self.k) };
        for c in 0..limit {
            if stop() {
                return Ok(Search::Forced);
            }
            colors.push(c);
            match self.mono(colors, i) {
                Some(e) => {
                    if certs.len() < self.sample {
                        certs.push(Certificate {
                            prefix: colors.clone(),
                            copy: vec![e],
                            color: c,
                        });
                    }
                }
                None => {
                    if let Search::Bad(b) =
                        self.dfs(colors, if i == 0 { c } else { top.max(c) }, certs, stop)?
                    {
                        return Ok(Search::Bad(b));
                    }
                }
            }
            colors.pop();
        }
        Ok(Search::Forced)
    }

    /// Live prefixes of length `depth` in search order, plus dead ends met
    /// on the way.
    fn prefixes(&self, depth: usize, certs: &mut Vec<Certificate>) -> Vec<(Vec<usize>, usize)> {
        let mut level = vec![(Vec::new(), 0usize)];
        for i in 0..depth.min(self.g.items) {
            let mut next = Vec::new();
            for (p, top) in level {
                let limit = if i == 0 { 1 } else { (top + 2).min(self.k) };
                for c in 0..limit {
                    let mut q = p.clone();
                    q.push(c);
                    match self.mono(&q, i) {
                        Some(e) => {
                            if certs.len() < self.sample {
                                certs.push(Certificate {
                                    prefix: q,
                                    copy: vec![e],
                                    color: c,
                                });
                            }
                        }
                        None => next.push((q, if i == 0 { c } else { top.max(c) })),
                    }
                }
            }
            level = next;
        }
        level
    }
}

struct Outcome {
    bad: Option<Vec<usize>>,
    certs: Vec<Certificate>,
    nodes: u64,
}

fn search(g: &Hypergraph, k: usize, caps: &ArrowCaps) -> Result<Outcome> {
    let mut closing = vec![Vec::new(); g.items];
    for (e, edge) in g.edges.iter().enumerate() {
        if let Some(&m) = edge.iter().max() {
            closing[m].push(e);
        }
    }
    let nodes = AtomicU64::new(0);
    let engine = Engine {
        g,
        k,
        closing,
        nodes: &nodes,
        max_nodes: caps.max_nodes,
        sample: caps.sample,
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    if !caps.parallel || threads == 1 || g.items < 12 {
        let mut certs = Vec::new();
        let r = engine.dfs(&mut Vec::new(), 0, &mut certs, &|| false)?;
        return Ok(Outcome {
            bad: match r {
                Search::Bad(b) => Some(b),
                Search::Forced => None,
            },
            certs,
            nodes: nodes.load(Ordering::Relaxed),
        });
    }
    let mut certs = Vec::new();
    let depth = (1..g.items)
        .find(|&d| (k as f64).powi(d as i32 - 1) >= (16 * threads) as f64)
        .unwrap_or(g.items - 1)
        .min(g.items - 4);
    let work = engine.prefixes(depth, &mut certs);
    // lowest prefix index with a bad coloring; later prefixes stop early
    let best = AtomicUsize::new(usize::MAX);
    let next = AtomicUsize::new(0);
    let results: Vec<Result<Vec<(usize, Search, Vec<Certificate>)>>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    scope.spawn(|| {
                        let mut mine = Vec::new();
                        loop {
                            let w = next.fetch_add(1, Ordering::Relaxed);
                            if w >= work.len() || w > best.load(Ordering::Relaxed) {
                                return Ok(mine);
                            }
                            let (prefix, top) = &work[w];
                            let mut colors = prefix.clone();
                            let mut c = Vec::new();
                            let stop = || best.load(Ordering::Relaxed) < w;
                            let r = engine.dfs(&mut colors, *top, &mut c, &stop)?;
                            if matches!(r, Search::Bad(_)) {
                                best.fetch_min(w, Ordering::Relaxed);
                            }
                            mine.push((w, r, c));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search thread panicked"))
                .collect()
        });
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    all.sort_by_key(|(w, _, _)| *w);
    let mut bad = None;
    for (_, r, c) in all {
        match r {
            Search::Bad(b) => {
                bad = Some(b);
                break;
            }
            Search::Forced => certs.extend(c),
        }
    }
    certs.truncate(caps.sample);
    Ok(Outcome {
        bad,
        certs,
        nodes: nodes.load(Ordering::Relaxed),
    })
}

/// Hyperedges of an arrow query: for each copy of H, the indices of the
/// copies of P inside it.
type Copies = Vec<Vec<usize>>;

fn arrow_hypergraph(q: &ArrowQuery) -> Result<(Copies, Copies, Hypergraph)> {
    let p_copies = copies(&q.p, &q.s)?;
    let h_copies = copies(&q.h, &q.s)?;
    let index: HashMap<&[usize], usize> = p_copies
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let p_in_h = copies(&q.p, &q.h)?;
    let edges = h_copies
        .iter()
        .map(|y| {
            let mut e: Vec<usize> = p_in_h
                .iter()
                .map(|x| {
                    let img: Vec<usize> = x.iter().map(|&i| y[i]).collect();
                    index[img.as_slice()]
                })
                .collect();
            e.sort_unstable();
            e.dedup();
            e
        })
        .collect();
    let g = Hypergraph {
        items: p_copies.len(),
        edges,
    };
    Ok((p_copies, h_copies, g))
}

/// Decide `S → (H)^P_k` by exhaustive search over colorings up to a
/// permutation of the colors.
pub fn arrows(q: &ArrowQuery, caps: &ArrowCaps) -> Result<ArrowReport> {
    let t0 = Instant::now();
    q.validate()?;
    let (p_copies, h_copies, g) = arrow_hypergraph(q)?;
    if g.items > caps.max_copies {
        return Err(Error::CapExceeded {
            cap: "copies of P",
            limit: caps.max_copies,
            needed: g.items,
        });
    }
    let out = run(&g, q.k, caps)?;
    Ok(report(out, p_copies, &h_copies, q.k, t0))
}

fn run(g: &Hypergraph, k: usize, caps: &ArrowCaps) -> Result<Outcome> {
    // a copy of H without copies of P in it is monochromatic under anything
    if let Some(e) = g.edges.iter().position(|e| e.is_empty()) {
        return Ok(Outcome {
            bad: None,
            certs: vec![Certificate {
                prefix: Vec::new(),
                copy: vec![e],
                color: 0,
            }],
            nodes: 0,
        });
    }
    search(g, k, caps)
}

fn report(
    out: Outcome,
    objects: Vec<Vec<usize>>,
    copies_h: &[Vec<usize>],
    k: usize,
    t0: Instant,
) -> ArrowReport {
    let n = objects.len();
    let certificates = out
        .certs
        .into_iter()
        .map(|c| Certificate {
            copy: copies_h[c.copy[0]].clone(),
            ..c
        })
        .collect();
    ArrowReport {
        holds: out.bad.is_none(),
        objects: n,
        copies_of_h: copies_h.len(),
        search_space_log2: n as f64 * (k as f64).log2(),
        nodes: out.nodes,
        bad_coloring: out.bad.map(|colors| Coloring { objects, colors }),
        certificates,
        elapsed_ms: t0.elapsed().as_millis(),
    }
}

/// Plain enumeration of all `k^n` colorings, no pruning. Returns the first
/// bad coloring in lexicographic order, if any.
pub fn arrows_exhaustive(q: &ArrowQuery, max_colorings: u64) -> Result<Option<Coloring>> {
    q.validate()?;
    let (p_copies, _, g) = arrow_hypergraph(q)?;
    Ok(exhaustive(&g, q.k, max_colorings)?.map(|colors| Coloring {
        objects: p_copies,
        colors,
    }))
}

fn exhaustive(g: &Hypergraph, k: usize, max_colorings: u64) -> Result<Option<Vec<usize>>> {
    let total = (k as u64).checked_pow(g.items as u32).unwrap_or(u64::MAX);
    if total > max_colorings {
        return Err(Error::CapExceeded {
            cap: "colorings",
            limit: max_colorings as usize,
            needed: total.min(usize::MAX as u64) as usize,
        });
    }
    let mut colors = vec![0usize; g.items];
    loop {
        if g.edges
            .iter()
            .all(|e| e.iter().any(|&x| colors[x] != colors[e[0]]))
        {
            return Ok(Some(colors));
        }
        let Some(i) = (0..g.items).rev().find(|&i| colors[i] + 1 < k) else {
            return Ok(None);
        };
        colors[i] += 1;
        colors[i + 1..].iter_mut().for_each(|c| *c = 0);
    }
}

/// Check a claimed bad coloring from scratch: it colors exactly the copies
/// of P with colors below k, and no copy of H is monochromatic.
pub fn recheck_bad_coloring(q: &ArrowQuery, c: &Coloring) -> Result<bool> {
    q.validate()?;
    let p_copies = copies(&q.p, &q.s)?;
    if c.objects != p_copies
        || c.colors.len() != p_copies.len()
        || c.colors.iter().any(|&x| x >= q.k)
    {
        return Ok(false);
    }
    let color: HashMap<&[usize], usize> = c
        .objects
        .iter()
        .map(Vec::as_slice)
        .zip(c.colors.iter().copied())
        .collect();
    let p_in_h = copies(&q.p, &q.h)?;
    Ok(copies(&q.h, &q.s)?.iter().all(|y| {
        let seen: BTreeSet<usize> = p_in_h
            .iter()
            .map(|x| {
                let img: Vec<usize> = x.iter().map(|&i| y[i]).collect();
                color[img.as_slice()]
            })
            .collect();
        seen.len() > 1
    }))
}

/// Check a dead end: `copy` is a copy of H whose copies of P all sit in
/// the prefix with the stated color.
pub fn recheck_certificate(q: &ArrowQuery, cert: &Certificate) -> Result<bool> {
    q.validate()?;
    let p_copies = copies(&q.p, &q.s)?;
    if !copies(&q.h, &q.s)?.contains(&cert.copy) {
        return Ok(false);
    }
    Ok(copies(&q.p, &q.h)?.iter().all(|x| {
        let img: Vec<usize> = x.iter().map(|&i| cert.copy[i]).collect();
        p_copies
            .iter()
            .position(|c| *c == img)
            .is_some_and(|i| cert.prefix.get(i) == Some(&cert.color))
    }))
}

/// Products of chains: color the tuples `(A_1, ..., A_m)` with `A_i` a
/// `parts[i]`-subset of the i-th factor of size `sizes[i]`, and ask for
/// subsets `F_i` of size `blocks[i]` with the coloring constant on the
/// tuples inside `F_1 × ... × F_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductQuery {
    pub sizes: Vec<usize>,
    pub parts: Vec<usize>,
    pub blocks: Vec<usize>,
    pub k: usize,
}

impl ProductQuery {
    fn validate(&self) -> Result<()> {
        let m = self.sizes.len();
        if m == 0 || m > 2 {
            return Err(Error::CapExceeded {
                cap: "product factors",
                limit: 2,
                needed: m,
            });
        }
        if self.parts.len() != m || self.blocks.len() != m {
            return Err(Error::InvalidArgument(
                "sizes, parts and blocks need one entry per factor".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

fn product(lists: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
    lists.iter().fold(vec![Vec::new()], |acc, l| {
        acc.iter()
            .flat_map(|a| l.iter().map(move |x| [a.clone(), x.clone()].concat()))
            .collect()
    })
}

/// Objects and blocks are flattened: the coordinates' subsets concatenated
/// in factor order.
pub fn product_arrows(q: &ProductQuery, caps: &ArrowCaps) -> Result<ArrowReport> {
    let t0 = Instant::now();
    q.validate()?;
    let m = q.sizes.len();
    let objects = product(
        &(0..m)
            .map(|i| subsets(q.sizes[i], q.parts[i]))
            .collect::<Vec<_>>(),
    );
    if objects.len() > caps.max_copies {
        return Err(Error::CapExceeded {
            cap: "colored tuples",
            limit: caps.max_copies,
            needed: objects.len(),
        });
    }
    let index: HashMap<&[usize], usize> = objects
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let blocks = product(
        &(0..m)
            .map(|i| subsets(q.sizes[i], q.blocks[i]))
            .collect::<Vec<_>>(),
    );
    let inner: Vec<Vec<Vec<usize>>> = (0..m).map(|i| subsets(q.blocks[i], q.parts[i])).collect();
    let edges = blocks
        .iter()
        .map(|b| {
            let mut offset = 0;
            let per: Vec<Vec<Vec<usize>>> = (0..m)
                .map(|i| {
                    let f = &b[offset..offset + q.blocks[i]];
                    offset += q.blocks[i];
                    inner[i]
                        .iter()
                        .map(|x| x.iter().map(|&j| f[j]).collect())
                        .collect()
                })
                .collect();
            let mut e: Vec<usize> = product(&per).iter().map(|t| index[t.as_slice()]).collect();
            e.sort_unstable();
            e
        })
        .collect();
    let g = Hypergraph {
        items: objects.len(),
        edges,
    };
    let out = run(&g, q.k, caps)?;
    Ok(report(out, objects, &blocks, q.k, t0))
}

/// The minimal factor sizes (each at most `max_size`) for which every
/// k-coloring has a monochromatic block: the Pareto frontier for two
/// factors, a single size for one.
pub fn minimal_product_sizes(
    parts: &[usize],
    blocks: &[usize],
    k: usize,
    max_size: usize,
    caps: &ArrowCaps,
) -> Result<Vec<Vec<usize>>> {
    let forced = |sizes: Vec<usize>| -> Result<bool> {
        let q = ProductQuery {
            sizes,
            parts: parts.to_vec(),
            blocks: blocks.to_vec(),
            k,
        };
        Ok(product_arrows(&q, caps)?.holds)
    };
    match blocks.len() {
        1 => {
            for n in blocks[0]..=max_size {
                if forced(vec![n])? {
                    return Ok(vec![vec![n]]);
                }
            }
            Ok(Vec::new())
        }
        2 => {
            let mut out = Vec::new();
            let mut best = max_size + 1;
            for a in blocks[0]..=max_size {
                // forcing is monotone in each size, so only smaller b's are new
                let mut found = None;
                for b in blocks[1]..best {
                    if forced(vec![a, b])? {
                        found = Some(b);
                        break;
                    }
                }
                if let Some(b) = found {
                    out.push(vec![a, b]);
                    best = b;
                }
            }
            Ok(out)
        }
        n => Err(Error::CapExceeded {
            cap: "product factors",
            limit: 2,
            needed: n,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq() -> ArrowCaps {
        ArrowCaps {
            parallel: false,
            ..ArrowCaps::default()
        }
    }

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(6, 2).len(), 15);
        assert_eq!(subsets(5, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
        assert_eq!(subsets(4, 2)[..3], [vec![0, 1], vec![0, 2], vec![0, 3]]);
    }

    #[test]
    fn classical_pairs() {
        for caps in [seq(), ArrowCaps::default()] {
            let six = arrows(&ArrowQuery::chains(6, 3, 2, 2), &caps).unwrap();
            assert!(six.holds);
            assert_eq!(six.objects, 15);
            for c in &six.certificates {
                assert!(recheck_certificate(&ArrowQuery::chains(6, 3, 2, 2), c).unwrap());
            }
            let q5 = ArrowQuery::chains(5, 3, 2, 2);
            let five = arrows(&q5, &caps).unwrap();
            assert!(!five.holds);
            assert!(recheck_bad_coloring(&q5, five.bad_coloring.as_ref().unwrap()).unwrap());
        }
    }

    #[test]
    fn exhaustive_oracle_agrees() {
        assert!(arrows_exhaustive(&ArrowQuery::chains(6, 3, 2, 2), 1 << 15)
            .unwrap()
            .is_none());
        let bad = arrows_exhaustive(&ArrowQuery::chains(5, 3, 2, 2), 1 << 10)
            .unwrap()
            .unwrap();
        assert!(recheck_bad_coloring(&ArrowQuery::chains(5, 3, 2, 2), &bad).unwrap());
    }

    #[test]
    fn parallel_matches_sequential() {
        for (s, h, p, k) in [
            (5, 3, 2, 2),
            (6, 3, 2, 2),
            (7, 4, 2, 2),
            (6, 3, 2, 3),
            (6, 4, 3, 2),
        ] {
            let q = ArrowQuery::chains(s, h, p, k);
            let a = arrows(&q, &seq()).unwrap();
            let b = arrows(&q, &ArrowCaps::default()).unwrap();
            assert_eq!(a.holds, b.holds, "{q:?}");
            assert_eq!(a.bad_coloring, b.bad_coloring, "{q:?}");
        }
    }

    #[test]
    fn trivial_cases() {
        // one color: holds iff H embeds
        assert!(
            arrows(&ArrowQuery::chains(3, 3, 2, 1), &seq())
                .unwrap()
                .holds
        );
        assert!(
            !arrows(&ArrowQuery::chains(2, 3, 2, 1), &seq())
                .unwrap()
                .holds
        );
        // P does not embed in H
        assert!(
            arrows(&ArrowQuery::chains(4, 2, 3, 5), &seq())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn ordered_graphs() {
        let edge = parse_structure("graph:2:0-1").unwrap();
        let tri = parse_structure("graph:3:0-1,1-2,0-2").unwrap();
        let pairs: Vec<(usize, usize)> = subsets(6, 2).into_iter().map(|e| (e[0], e[1])).collect();
        let k6 = FiniteStructure::ordered_graph(6, &pairs).unwrap();
        let q = ArrowQuery {
            s: k6,
            h: tri.clone(),
            p: edge.clone(),
            k: 2,
        };
        assert!(arrows(&q, &seq()).unwrap().holds);
        let q = ArrowQuery {
            s: parse_structure("graph:4:0-1,1-2,2-3").unwrap(),
            h: tri,
            p: edge,
            k: 1,
        };
        assert!(!arrows(&q, &seq()).unwrap().holds);
    }

    #[test]
    fn rejects_bad_input() {
        let q = ArrowQuery {
            s: FiniteStructure::new(&[("<", 2)], 4),
            ..ArrowQuery::chains(4, 3, 2, 2)
        };
        assert!(matches!(
            arrows(&q, &seq()),
            Err(Error::InvalidStructure(_))
        ));
        assert!(arrows(&ArrowQuery::chains(4, 3, 2, 0), &seq()).is_err());
        let q = ArrowQuery {
            h: parse_structure("graph:3:").unwrap(),
            ..ArrowQuery::chains(4, 3, 2, 2)
        };
        assert!(arrows(&q, &seq()).is_err());
        assert!(matches!(
            arrows(&ArrowQuery::chains(9, 4, 3, 2), &seq()),
            Err(Error::CapExceeded { needed: 84, .. })
        ));
        assert!(parse_structure("chain:x").is_err());
        assert!(parse_structure("graph:3:0-3").is_err());
        assert!(parse_structure("graph:3:1-1").is_err());
        let g = FiniteStructure::graph(3, &[(0, 1)]).unwrap();
        let q = ArrowQuery {
            s: g.clone(),
            h: g.clone(),
            p: g,
            k: 1,
        };
        assert!(matches!(
            arrows(&q, &seq()),
            Err(Error::InvalidStructure(_))
        ));
    }

    #[test]
    fn grid_frontier() {
        let caps = ArrowCaps {
            max_copies: 64,
            ..ArrowCaps::default()
        };
        // no 2-coloring of a 3x7 or 5x5 grid avoids a monochromatic rectangle
        let f = minimal_product_sizes(&[1, 1], &[2, 2], 2, 8, &caps).unwrap();
        assert_eq!(f, [vec![3, 7], vec![5, 5], vec![7, 3]]);
        // 4x6 is colorable
        let q = ProductQuery {
            sizes: vec![4, 6],
            parts: vec![1, 1],
            blocks: vec![2, 2],
            k: 2,
        };
        assert!(!product_arrows(&q, &caps).unwrap().holds);
        // one color: the blocks themselves
        assert_eq!(
            minimal_product_sizes(&[1, 1], &[2, 3], 1, 5, &caps).unwrap(),
            [vec![2, 3]]
        );
    }

    #[test]
    fn one_factor_is_arrows() {
        for n in 3..=7 {
            let q = ProductQuery {
                sizes: vec![n],
                parts: vec![2],
                blocks: vec![3],
                k: 2,
            };
            let a = product_arrows(&q, &seq()).unwrap().holds;
            assert_eq!(
                a,
                arrows(&ArrowQuery::chains(n, 3, 2, 2), &seq())
                    .unwrap()
                    .holds
            );
        }
        assert_eq!(
            minimal_product_sizes(&[2], &[3], 2, 8, &seq()).unwrap(),
            [vec![6]]
        );
    }

    #[test]
    fn grid_oracle_small() {
        // plain enumeration on 3x6 (2^18) and 3x7 (2^21)
        for (b, expect) in [(6, false), (7, true)] {
            let q = ProductQuery {
                sizes: vec![3, b],
                parts: vec![1, 1],
                blocks: vec![2, 2],
                k: 2,
            };
            let caps = ArrowCaps {
                max_copies: 64,
                ..seq()
            };
            assert_eq!(product_arrows(&q, &caps).unwrap().holds, expect);
            let objects = product(&[subsets(3, 1), subsets(b, 1)]);
            let index: HashMap<Vec<usize>, usize> = objects.iter().cloned().zip(0..).collect();
            let edges = product(&[subsets(3, 2), subsets(b, 2)])
                .iter()
                .map(|r| {
                    let mut e: Vec<usize> =
                        [[r[0], r[2]], [r[0], r[3]], [r[1], r[2]], [r[1], r[3]]]
                            .iter()
                            .map(|c| index[&c.to_vec()])
                            .collect();
                    e.sort_unstable();
                    e
                })
                .collect();
            let g = Hypergraph {
                items: objects.len(),
                edges,
            };
            assert_eq!(exhaustive(&g, 2, 1 << 21).unwrap().is_none(), expect);
        }
    }
}
