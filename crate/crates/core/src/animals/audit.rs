use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::census::AnimalCensus;
use super::enumerate::{enumerate_into, AnimalSink, AnimalStats};
use super::pmf::partition_function_z;
use super::reference::{self, REFERENCE_MAX_EDGES};
use super::AnimalSpec;
use crate::error::{Error, Result};

const KEPT_EXAMPLES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub d: usize,
    pub s: usize,
    pub max_edges: usize,
    pub animals: u64,
    pub violations: u64,
    /// The first few offending animals.
    pub examples: Vec<String>,
    /// Edge count up to which the census was compared with the reference
    /// enumerator.
    pub reference_max_edges: usize,
    pub reference_match: bool,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.reference_match
    }
}

struct IdentitySink {
    d: i64,
    census: AnimalCensus,
    animals: u64,
    violations: u64,
    examples: Vec<String>,
}

impl AnimalSink for IdentitySink {
    fn visit(&mut self, a: &AnimalStats) {
        self.animals += 1;
        self.census.visit(a);
        let d = self.d;
        let [v, n, k, c, t] = [a.v, a.n, a.k, a.c, a.perimeter()].map(i64::from);
        let euler = c == n - v + 1;
        let incidence = 2 * d * v == 2 * n + t + k;
        let perimeter = t == 2 * d + 2 * (d - 1) * n - k - 2 * d * c;
        if !(euler && incidence && perimeter) {
            self.violations += 1;
            if self.examples.len() < KEPT_EXAMPLES {
                self.examples.push(format!("{a:?}"));
            }
        }
    }

    fn merge(&mut self, other: Self) {
        self.animals += other.animals;
        self.violations += other.violations;
        self.census.merge(other.census);
        let room = KEPT_EXAMPLES.saturating_sub(self.examples.len());
        self.examples.extend(other.examples.into_iter().take(room));
    }
}

/// Checks Euler's relation, the incidence count and the perimeter formula
/// on every animal, and compares the small-size census with the reference
/// enumerator.
pub fn identity_audit(spec: AnimalSpec, max_edges: usize) -> Result<IdentityReport> {
    Ok(audited_census(spec, max_edges)?.1)
}

/// The census together with its identity audit, from a single enumeration.
pub fn audited_census(spec: AnimalSpec, max_edges: usize) -> Result<(AnimalCensus, IdentityReport)> {
    let sink = enumerate_into(spec, max_edges, || IdentitySink {
        d: spec.d as i64,
        census: AnimalCensus::empty(spec, max_edges),
        animals: 0,
        violations: 0,
        examples: Vec::new(),
    })?;
    let upto = max_edges.min(4).min(REFERENCE_MAX_EDGES);
    let expected = reference::census(spec, upto)?;
    let got: BTreeMap<_, _> = sink
        .census
        .entries
        .iter()
        .filter(|(k, _)| k.n as usize <= upto)
        .map(|(k, c)| (*k, *c))
        .collect();
    let report = IdentityReport {
        d: spec.d,
        s: spec.s,
        max_edges,
        animals: sink.animals,
        violations: sink.violations,
        examples: sink.examples,
        reference_max_edges: upto,
        reference_match: got == expected,
    };
    Ok((sink.census, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupermultCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `phi(x, y) (x^2 + x y / z + y^2 / z^2)`.
pub fn lambda(spec: AnimalSpec, x: f64, y: f64, z: f64) -> f64 {
    let geometric = |base: f64, terms: usize| (0..=terms).map(|i| base.powi(-(i as i32))).sum::<f64>();
    let phi = geometric(x, 2 * spec.d - 2) * geometric(y, 2 * spec.s);
    phi * (x * x + x * y / z + y * y / (z * z))
}

/// `Z_{n1} Z_{n2} <= (n1+n2+1)^2 (n1+n2+3) lambda Z_{n1+n2+2}`.
pub fn supermult_audit(
    census: &AnimalCensus,
    x: f64,
    y: f64,
    z: f64,
    n1: usize,
    n2: usize,
) -> Result<SupermultCheck> {
    let top = n1 + n2 + 2;
    if top > census.max_edges {
        return Err(Error::CapExceeded(format!(
            "n1 + n2 + 2 = {top} beyond the census cap {}",
            census.max_edges
        )));
    }
    let lhs = partition_function_z(census, n1, x, y, z)? * partition_function_z(census, n2, x, y, z)?;
    let poly = ((n1 + n2 + 1) * (n1 + n2 + 1) * (n1 + n2 + 3)) as f64;
    let rhs = poly * lambda(census.spec, x, y, z) * partition_function_z(census, top, x, y, z)?;
    Ok(SupermultCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::super::enumerate;
    use super::*;

    #[test]
    fn lambda_at_unity() {
        let spec = AnimalSpec::new(3, 2).unwrap();
        assert_eq!(lambda(spec, 1.0, 1.0, 1.0), 75.0);
    }

    #[test]
    fn smallest_supermult_case() {
        let census = enumerate(AnimalSpec::new(3, 2).unwrap(), 2).unwrap();
        let check = supermult_audit(&census, 1.0, 1.0, 1.0, 0, 0).unwrap();
        assert_eq!(check.lhs, 1.0);
        assert_eq!(check.rhs, 225.0 * census.count_with_edges(2) as f64);
        assert!(check.holds);
        assert!(supermult_audit(&census, 1.0, 1.0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn identities_small() {
        let report = identity_audit(AnimalSpec::new(3, 2).unwrap(), 4).unwrap();
        assert_eq!(report.violations, 0, "{:?}", report.examples);
        assert!(report.reference_match);
    }
}
