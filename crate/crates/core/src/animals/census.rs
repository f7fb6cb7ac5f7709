use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::enumerate::{AnimalSink, AnimalStats};
use super::AnimalSpec;
use crate::error::{Error, Result};
use crate::sampler::FORMAT_VERSION;

/// `(v, n, m, t, r)`: vertices, edges, defect edges, bulk perimeter, defect
/// perimeter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CensusKey {
    pub v: u32,
    pub n: u32,
    pub m: u32,
    pub t: u32,
    pub r: u32,
}

/// Animal counts `A_{v,n,m}(t, r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnimalCensus {
    pub spec: AnimalSpec,
    pub max_edges: usize,
    pub entries: BTreeMap<CensusKey, u64>,
}

const CSV_HEADER: &str = "v,n,m,t,r,count";

impl AnimalCensus {
    pub fn empty(spec: AnimalSpec, max_edges: usize) -> Self {
        AnimalCensus {
            spec,
            max_edges,
            entries: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Number of animals with `n` edges.
    pub fn count_with_edges(&self, n: u32) -> u64 {
        self.entries
            .iter()
            .filter(|(k, _)| k.n == n)
            .map(|(_, c)| c)
            .sum()
    }

    /// Homogeneous census `a_n(t)` with `t` the full perimeter.
    pub fn homogeneous_marginal(&self) -> BTreeMap<(u32, u32), u64> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.entries {
            *out.entry((k.n, k.t + k.r)).or_insert(0) += c;
        }
        out
    }

    pub fn check_edges(&self, n: usize) -> Result<()> {
        if n > self.max_edges {
            return Err(Error::CapExceeded(format!(
                "n = {n} beyond the census cap {}",
                self.max_edges
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# format={FORMAT_VERSION} d={} s={} max_edges={}",
            self.spec.d, self.spec.s, self.max_edges
        );
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (k, c) in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{},{}", k.v, k.n, k.m, k.t, k.r, c);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("census csv: {msg}"));
        let mut lines = text.lines();
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| bad("missing meta line".into()))?;
        let (mut d, mut s, mut cap) = (None, None, None);
        for field in meta.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed meta field {field:?}")))?;
            let parse = || value.parse::<usize>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "d" => d = Some(parse()?),
                "s" => s = Some(parse()?),
                "max_edges" => cap = Some(parse()?),
                _ => {}
            }
        }
        let (d, s, max_edges) = match (d, s, cap) {
            (Some(d), Some(s), Some(c)) => (d, s, c),
            _ => return Err(bad("meta line needs d, s and max_edges".into())),
        };
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(bad(format!("expected header {CSV_HEADER:?}")));
        }
        let mut census = AnimalCensus::empty(AnimalSpec::new(d, s)?, max_edges);
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<u64> = line
                .split(',')
                .map(|f| f.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            let [v, n, m, t, r, count] = fields[..] else {
                return Err(bad(format!("row {}: expected 6 fields", i + 1)));
            };
            let key = CensusKey {
                v: v as u32,
                n: n as u32,
                m: m as u32,
                t: t as u32,
                r: r as u32,
            };
            if count == 0 || census.entries.insert(key, count).is_some() {
                return Err(bad(format!("row {}: zero or duplicate entry", i + 1)));
            }
        }
        Ok(census)
    }
}

impl AnimalSink for AnimalCensus {
    fn visit(&mut self, a: &AnimalStats) {
        let key = CensusKey {
            v: a.v,
            n: a.n,
            m: a.m,
            t: a.t,
            r: a.r,
        };
        *self.entries.entry(key).or_insert(0) += 1;
    }

    fn merge(&mut self, other: Self) {
        for (k, c) in other.entries {
            *self.entries.entry(k).or_insert(0) += c;
        }
    }
}

/// Homogeneous counts `a_n(c, k)` by cyclomatic index and contacts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleContactCensus {
    pub entries: BTreeMap<(u32, u32, u32), u64>,
}

impl AnimalSink for CycleContactCensus {
    fn visit(&mut self, a: &AnimalStats) {
        *self.entries.entry((a.n, a.c, a.k)).or_insert(0) += 1;
    }

    fn merge(&mut self, other: Self) {
        for (k, c) in other.entries {
            *self.entries.entry(k).or_insert(0) += c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::enumerate;
    use super::*;

    #[test]
    fn single_vertex_split() {
        let census = enumerate(AnimalSpec::new(3, 2).unwrap(), 1).unwrap();
        let key = CensusKey {
            v: 1,
            n: 0,
            m: 0,
            t: 2,
            r: 4,
        };
        assert_eq!(census.entries.get(&key), Some(&1));
    }

    #[test]
    fn dimers_split_by_orientation() {
        let census = enumerate(AnimalSpec::new(3, 2).unwrap(), 1).unwrap();
        let dimers: Vec<_> = census.entries.iter().filter(|(k, _)| k.n == 1).collect();
        // Off-plane dimers keep the origin's plane perimeter; in-plane dimers
        // add three more defect edges at the far end.
        let off = CensusKey { v: 2, n: 1, m: 0, t: 6, r: 4 };
        let on = CensusKey { v: 2, n: 1, m: 1, t: 4, r: 6 };
        assert_eq!(dimers, vec![(&off, &2), (&on, &4)]);
    }

    #[test]
    fn csv_round_trip() {
        let census = enumerate(AnimalSpec::new(3, 2).unwrap(), 3).unwrap();
        let back = AnimalCensus::from_csv(&census.to_csv()).unwrap();
        assert_eq!(back, census);
    }

    #[test]
    fn csv_rejects_duplicates() {
        let text = "# d=3 s=2 max_edges=1\nv,n,m,t,r,count\n1,0,0,2,4,1\n1,0,0,2,4,1\n";
        assert!(AnimalCensus::from_csv(text).is_err());
    }
}
