//! Union-find with per-root face flags.

/// Disjoint-set forest, union by size with path halving.
///
/// Each root carries a bit mask of the faces its set touches; bit `2a` is
/// face `A_{a+1}` and bit `2a + 1` is face `A_{-(a+1)}`.
#[derive(Clone, Debug)]
pub struct DisjointSetForest {
    parent: Vec<u32>,
    size: Vec<u32>,
    flags: Vec<u32>,
}

impl DisjointSetForest {
    pub fn new(n: usize) -> Self {
        DisjointSetForest {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            flags: vec![0; n],
        }
    }

    pub fn with_flags(initial: &[u32]) -> Self {
        let mut forest = Self::new(initial.len());
        forest.flags.copy_from_slice(initial);
        forest
    }

    /// Restores singletons with the given flags without reallocating.
    pub fn reset(&mut self, initial: &[u32]) {
        debug_assert_eq!(initial.len(), self.parent.len());
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.flags.copy_from_slice(initial);
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the surviving root.
    #[inline]
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return ra;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.flags[ra as usize] |= self.flags[rb as usize];
        ra
    }

    pub fn size_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    pub fn flags_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.flags[r as usize]
    }

    pub fn roots(&self) -> impl Iterator<Item = u32> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter(|&(i, &p)| i as u32 == p)
            .map(|(i, _)| i as u32)
    }

    /// Sum of root sizes; equals `len()` whenever the forest is consistent.
    pub fn total_root_size(&self) -> u64 {
        self.roots().map(|r| self.size[r as usize] as u64).sum()
    }
}
