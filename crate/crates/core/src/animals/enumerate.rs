use rayon::prelude::*;

use super::census::AnimalCensus;
use super::AnimalSpec;
use crate::error::{Error, Result};

/// Largest working box, in edge slots, that the enumerator will allocate.
const MAX_BOX_EDGES: usize = 1 << 26;

/// Statistics of one animal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AnimalStats {
    /// Vertices.
    pub v: u32,
    /// Edges.
    pub n: u32,
    /// Edges in the defect plane.
    pub m: u32,
    /// Bulk perimeter edges (contacts included).
    pub t: u32,
    /// Defect perimeter edges (contacts included).
    pub r: u32,
    /// Contacts: perimeter edges with both endpoints in the animal.
    pub k: u32,
    /// Cyclomatic index, from a union-find pass over the edges.
    pub c: u32,
}

impl AnimalStats {
    pub fn perimeter(&self) -> u32 {
        self.t + self.r
    }
}

/// Accumulator fed once per enumerated animal.
pub trait AnimalSink: Send {
    fn visit(&mut self, animal: &AnimalStats);
    fn merge(&mut self, other: Self)
    where
        Self: Sized;
}

pub fn default_cap(d: usize) -> usize {
    match d {
        2 => 10,
        3 => 8,
        4 => 6,
        5 => 4,
        _ => 3,
    }
}

/// Rough animal count with up to `max_edges` edges, for refusal messages.
pub fn estimated_animals(d: usize, max_edges: usize) -> f64 {
    let mu = (4 * d - 2) as f64;
    let n = max_edges.max(1) as f64;
    mu.powf(n) / n.powf(1.5)
}

/// Census of all animals with at most `max_edges` edges; refuses caps above
/// [`default_cap`].
pub fn enumerate(spec: AnimalSpec, max_edges: usize) -> Result<AnimalCensus> {
    check_cap(spec, max_edges)?;
    enumerate_unguarded(spec, max_edges)
}

pub fn check_cap(spec: AnimalSpec, max_edges: usize) -> Result<()> {
    spec.validate()?;
    let cap = default_cap(spec.d);
    if max_edges > cap {
        return Err(Error::CapExceeded(format!(
            "max_edges = {max_edges} above the default cap {cap} for d = {}; roughly {:.1e} animals",
            spec.d,
            estimated_animals(spec.d, max_edges)
        )));
    }
    Ok(())
}

pub fn enumerate_unguarded(spec: AnimalSpec, max_edges: usize) -> Result<AnimalCensus> {
    enumerate_into(spec, max_edges, || AnimalCensus::empty(spec, max_edges))
}

/// Feeds every animal with at most `max_edges` edges to sinks built by
/// `make`, one per branch of the first growth step, and merges them.
pub fn enumerate_into<S, F>(spec: AnimalSpec, max_edges: usize, make: F) -> Result<S>
where
    S: AnimalSink,
    F: Fn() -> S + Sync,
{
    spec.validate()?;
    let geometry = Geometry::new(spec, max_edges)?;

    let mut sink = make();
    let mut bare = Enumerator::new(&geometry, max_edges);
    let stats = bare.stats();
    sink.visit(&stats);
    if max_edges == 0 {
        return Ok(sink);
    }

    let roots = geometry.root_edges();
    let branches: Vec<S> = (0..roots.len())
        .into_par_iter()
        .map(|j| {
            let mut sink = make();
            let mut e = Enumerator::new(&geometry, max_edges);
            e.run_branch(&roots, j, &mut sink);
            sink
        })
        .collect();
    for b in branches {
        sink.merge(b);
    }
    Ok(sink)
}

struct Geometry {
    d: usize,
    strides: Vec<usize>,
    origin: usize,
    vertices: usize,
    defect: Vec<bool>,
}

impl Geometry {
    fn new(spec: AnimalSpec, max_edges: usize) -> Result<Self> {
        let d = spec.d;
        let side = 2 * max_edges + 3;
        let vertices = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(side));
        let vertices = match vertices {
            Some(n) if n.saturating_mul(d) <= MAX_BOX_EDGES => n,
            _ => {
                return Err(Error::CapExceeded(format!(
                    "working box of side {side} in d = {d} is too large; roughly {:.1e} animals",
                    estimated_animals(d, max_edges)
                )))
            }
        };
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * side;
        }
        let center = max_edges + 1;
        let origin = strides.iter().map(|st| center * st).sum();
        let mut defect = vec![false; vertices * d];
        for u in 0..vertices {
            let in_plane = (spec.s..d).all(|b| (u / strides[b]) % side == center);
            if in_plane {
                for a in 0..spec.s {
                    defect[u * d + a] = true;
                }
            }
        }
        Ok(Geometry {
            d,
            strides,
            origin,
            vertices,
            defect,
        })
    }

    fn root_edges(&self) -> Vec<u32> {
        let mut roots = Vec::with_capacity(2 * self.d);
        for a in 0..self.d {
            roots.push((self.origin * self.d + a) as u32);
            roots.push(((self.origin - self.strides[a]) * self.d + a) as u32);
        }
        roots
    }

    #[inline]
    fn endpoints(&self, e: u32) -> (usize, usize) {
        let e = e as usize;
        let (u, a) = (e / self.d, e % self.d);
        (u, u + self.strides[a])
    }
}

/// Redelmeier growth on the line graph, with the origin as a virtual cell
/// adjacent to its incident edges.
struct Enumerator<'g> {
    g: &'g Geometry,
    max_edges: usize,
    seen: Vec<bool>,
    in_animal: Vec<bool>,
    degree: Vec<u8>,
    vertices: Vec<usize>,
    edges: Vec<u32>,
    marked: Vec<u32>,
    defect_edges: u32,
    parent: Vec<usize>,
}

impl<'g> Enumerator<'g> {
    fn new(g: &'g Geometry, max_edges: usize) -> Self {
        let mut degree = vec![0u8; g.vertices];
        degree[g.origin] = 1;
        Enumerator {
            g,
            max_edges,
            seen: vec![false; g.vertices * g.d],
            in_animal: vec![false; g.vertices * g.d],
            degree,
            vertices: vec![g.origin],
            edges: Vec::with_capacity(max_edges),
            marked: Vec::new(),
            defect_edges: 0,
            parent: Vec::with_capacity(max_edges + 1),
        }
    }

    /// Top-level step `j`: root edge `j` enters, roots after it in pop
    /// order are already consumed, roots before it remain untried.
    fn run_branch<S: AnimalSink>(&mut self, roots: &[u32], j: usize, sink: &mut S) {
        for &e in roots {
            self.seen[e as usize] = true;
        }
        let untried = roots[..j].to_vec();
        self.step(roots[j], untried, sink);
    }

    fn grow<S: AnimalSink>(&mut self, mut untried: Vec<u32>, sink: &mut S) {
        while let Some(e) = untried.pop() {
            self.step(e, untried.clone(), sink);
        }
    }

    fn step<S: AnimalSink>(&mut self, e: u32, mut untried: Vec<u32>, sink: &mut S) {
        self.add(e);
        let stats = self.stats();
        sink.visit(&stats);
        if self.edges.len() < self.max_edges {
            let mark = self.marked.len();
            self.push_neighbours(e, &mut untried);
            self.grow(untried, sink);
            for f in self.marked.drain(mark..) {
                self.seen[f as usize] = false;
            }
        }
        self.remove(e);
    }

    fn push_neighbours(&mut self, e: u32, untried: &mut Vec<u32>) {
        let d = self.g.d;
        let (x, y) = self.g.endpoints(e);
        for w in [x, y] {
            for b in 0..d {
                let up = (w * d + b) as u32;
                let down = ((w - self.g.strides[b]) * d + b) as u32;
                for f in [up, down] {
                    if !self.seen[f as usize] {
                        self.seen[f as usize] = true;
                        self.marked.push(f);
                        untried.push(f);
                    }
                }
            }
        }
    }

    fn add(&mut self, e: u32) {
        self.in_animal[e as usize] = true;
        self.edges.push(e);
        if self.g.defect[e as usize] {
            self.defect_edges += 1;
        }
        let (x, y) = self.g.endpoints(e);
        for w in [x, y] {
            if self.degree[w] == 0 {
                self.vertices.push(w);
            }
            self.degree[w] += 1;
        }
    }

    fn remove(&mut self, e: u32) {
        self.in_animal[e as usize] = false;
        self.edges.pop();
        if self.g.defect[e as usize] {
            self.defect_edges -= 1;
        }
        let (x, y) = self.g.endpoints(e);
        for w in [y, x] {
            self.degree[w] -= 1;
            if self.degree[w] == 0 {
                let last = self.vertices.pop();
                debug_assert_eq!(last, Some(w));
            }
        }
    }

    fn stats(&mut self) -> AnimalStats {
        let d = self.g.d;
        let (mut t, mut r, mut k) = (0u32, 0u32, 0u32);
        for &x in &self.vertices {
            for b in 0..d {
                let st = self.g.strides[b];
                let up = x * d + b;
                if !self.in_animal[up] {
                    if self.degree[x + st] > 0 {
                        k += 1;
                    }
                    if self.g.defect[up] {
                        r += 1;
                    } else {
                        t += 1;
                    }
                }
                let down = (x - st) * d + b;
                if !self.in_animal[down] && self.degree[x - st] == 0 {
                    if self.g.defect[down] {
                        r += 1;
                    } else {
                        t += 1;
                    }
                }
            }
        }
        AnimalStats {
            v: self.vertices.len() as u32,
            n: self.edges.len() as u32,
            m: self.defect_edges,
            t,
            r,
            k,
            c: self.cycles(),
        }
    }

    fn cycles(&mut self) -> u32 {
        let local = |vs: &[usize], w: usize| vs.iter().position(|&u| u == w).unwrap();
        self.parent.clear();
        self.parent.extend(0..self.vertices.len());
        let mut c = 0;
        for &e in &self.edges {
            let (x, y) = self.g.endpoints(e);
            let a = find(&mut self.parent, local(&self.vertices, x));
            let b = find(&mut self.parent, local(&self.vertices, y));
            if a == b {
                c += 1;
            } else {
                self.parent[a] = b;
            }
        }
        c
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}
