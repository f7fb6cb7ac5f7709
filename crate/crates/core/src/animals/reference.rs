//! Naive reference enumeration: breadth-first growth over explicit edge sets
//! with hash-set deduplication. Exponentially slower than the main
//! enumerator and only meant for cross-checks at small sizes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::census::CensusKey;
use super::AnimalSpec;
use crate::error::{Error, Result};

/// Largest edge count the reference enumerator accepts.
pub const REFERENCE_MAX_EDGES: usize = 5;

type Point = Vec<i32>;
type Bond = (Point, usize);

fn incident(x: &Point, d: usize) -> Vec<Bond> {
    let mut out = Vec::with_capacity(2 * d);
    for a in 0..d {
        out.push((x.clone(), a));
        let mut y = x.clone();
        y[a] -= 1;
        out.push((y, a));
    }
    out
}

fn far_end(b: &Bond) -> Point {
    let mut y = b.0.clone();
    y[b.1] += 1;
    y
}

fn is_defect(b: &Bond, s: usize) -> bool {
    b.1 < s && b.0[s..].iter().all(|&c| c == 0)
}

fn vertex_set(animal: &BTreeSet<Bond>, d: usize) -> BTreeSet<Point> {
    let mut vs = BTreeSet::new();
    vs.insert(vec![0; d]);
    for b in animal {
        vs.insert(b.0.clone());
        vs.insert(far_end(b));
    }
    vs
}

fn key_of(animal: &BTreeSet<Bond>, spec: AnimalSpec) -> CensusKey {
    let vs = vertex_set(animal, spec.d);
    let perimeter: HashSet<Bond> = vs
        .iter()
        .flat_map(|x| incident(x, spec.d))
        .filter(|b| !animal.contains(b))
        .collect();
    let r = perimeter.iter().filter(|b| is_defect(b, spec.s)).count();
    CensusKey {
        v: vs.len() as u32,
        n: animal.len() as u32,
        m: animal.iter().filter(|b| is_defect(b, spec.s)).count() as u32,
        t: (perimeter.len() - r) as u32,
        r: r as u32,
    }
}

/// Census entries for all animals with at most `max_edges` edges.
pub fn census(spec: AnimalSpec, max_edges: usize) -> Result<BTreeMap<CensusKey, u64>> {
    spec.validate()?;
    if max_edges > REFERENCE_MAX_EDGES {
        return Err(Error::CapExceeded(format!(
            "reference enumeration is limited to {REFERENCE_MAX_EDGES} edges"
        )));
    }
    let mut out = BTreeMap::new();
    let mut level: HashSet<BTreeSet<Bond>> = HashSet::from([BTreeSet::new()]);
    for n in 0..=max_edges {
        for animal in &level {
            *out.entry(key_of(animal, spec)).or_insert(0) += 1;
        }
        if n == max_edges {
            break;
        }
        let mut next = HashSet::new();
        for animal in &level {
            for x in vertex_set(animal, spec.d) {
                for b in incident(&x, spec.d) {
                    if !animal.contains(&b) {
                        let mut grown = animal.clone();
                        grown.insert(b);
                        next.insert(grown);
                    }
                }
            }
        }
        level = next;
    }
    Ok(out)
}
