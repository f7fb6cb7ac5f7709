use super::census::{AnimalCensus, CensusKey};
use crate::error::{Error, Result};

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn sum_over<F>(census: &AnimalCensus, keep: impl Fn(&CensusKey) -> bool, term: F) -> f64
where
    F: Fn(&CensusKey) -> f64,
{
    let mut acc = Neumaier::default();
    for (k, &count) in census.entries.iter().filter(|(k, _)| keep(k)) {
        acc.add(count as f64 * term(k));
    }
    acc.value()
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for &(name, x) in values {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {x} must be positive")));
        }
    }
    Ok(())
}

/// Weight `p^{n-m} sigma^m q^t tau^r` of one animal being the origin cluster.
fn cluster_weight(k: &CensusKey, p: f64, sigma: f64) -> f64 {
    p.powi((k.n - k.m) as i32)
        * sigma.powi(k.m as i32)
        * (1.0 - p).powi(k.t as i32)
        * (1.0 - sigma).powi(k.r as i32)
}

/// `P(||C|| = n)` at bulk density `p` and defect density `sigma`.
pub fn exact_edge_pmf(census: &AnimalCensus, p: f64, sigma: f64, n: usize) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("sigma", sigma)?;
    census.check_edges(n)?;
    let n = n as u32;
    Ok(sum_over(census, |k| k.n == n, |k| cluster_weight(k, p, sigma)))
}

/// Upper bound on the edges induced by `v` vertices of `Z^d`, from the
/// edge-isoperimetric inequality `|boundary| >= 2d v^{(d-1)/d}`.
pub fn max_edges_for_vertices(d: usize, v: usize) -> usize {
    let (d, v) = (d as f64, v as f64);
    (d * v - d * v.powf((d - 1.0) / d) + 1e-9).floor().max(0.0) as usize
}

fn check_vertices(census: &AnimalCensus, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter("animals have at least one vertex".into()));
    }
    let need = max_edges_for_vertices(census.spec.d, v);
    if need > census.max_edges {
        return Err(Error::CapExceeded(format!(
            "animals with v = {v} vertices can have up to {need} edges, census cap is {}",
            census.max_edges
        )));
    }
    Ok(())
}

/// `P(|C| = v)`; refuses `v` whose animals may exceed the census cap.
pub fn exact_vertex_pmf(census: &AnimalCensus, p: f64, sigma: f64, v: usize) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("sigma", sigma)?;
    check_vertices(census, v)?;
    let v = v as u32;
    Ok(sum_over(census, |k| k.v == v, |k| cluster_weight(k, p, sigma)))
}

/// `Z_n(x, y, z) = sum a_{n,m}(t, r) x^t y^r z^m`.
pub fn partition_function_z(census: &AnimalCensus, n: usize, x: f64, y: f64, z: f64) -> Result<f64> {
    check_positive(&[("x", x), ("y", y), ("z", z)])?;
    census.check_edges(n)?;
    let n = n as u32;
    Ok(sum_over(
        census,
        |k| k.n == n,
        |k| x.powi(k.t as i32) * y.powi(k.r as i32) * z.powi(k.m as i32),
    ))
}

/// `Y_v(a, x, y, z) = sum A_{v,n,m}(t, r) a^n x^t y^r z^m`.
pub fn partition_function_y(
    census: &AnimalCensus,
    v: usize,
    a: f64,
    x: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    check_positive(&[("a", a), ("x", x), ("y", y), ("z", z)])?;
    check_vertices(census, v)?;
    let v = v as u32;
    Ok(sum_over(
        census,
        |k| k.v == v,
        |k| a.powi(k.n as i32) * x.powi(k.t as i32) * y.powi(k.r as i32) * z.powi(k.m as i32),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::{enumerate, AnimalSpec};
    use super::*;
    use approx::assert_relative_eq;

    fn census(cap: usize) -> AnimalCensus {
        enumerate(AnimalSpec::new(3, 2).unwrap(), cap).unwrap()
    }

    #[test]
    fn bare_origin() {
        let c = census(2);
        assert_relative_eq!(exact_edge_pmf(&c, 0.5, 0.5, 0).unwrap(), 0.015625, max_relative = 1e-15);
        let p: f64 = 0.3;
        let s: f64 = 0.6;
        let v1 = exact_vertex_pmf(&c, p, s, 1).unwrap();
        assert_relative_eq!(v1, (1.0 - p).powi(2) * (1.0 - s).powi(4), max_relative = 1e-15);
        assert_eq!(exact_vertex_pmf(&c, 0.0, 0.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn homogeneous_dimer() {
        let c = census(2);
        let p: f64 = 0.2;
        let expected = 6.0 * p * (1.0 - p).powi(10);
        assert_relative_eq!(exact_edge_pmf(&c, p, p, 1).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn partial_sums_bounded() {
        let c = census(6);
        for &(p, s) in &[(0.1, 0.1), (0.3, 0.8), (0.25, 0.5), (1.0, 1.0), (0.0, 0.9)] {
            let total: f64 = (0..=6).map(|n| exact_edge_pmf(&c, p, s, n).unwrap()).sum();
            assert!(total <= 1.0 + 1e-12, "p={p} s={s} total={total}");
        }
    }

    #[test]
    fn vertex_guard() {
        let c = census(6);
        assert_eq!(max_edges_for_vertices(3, 5), 6);
        assert_eq!(max_edges_for_vertices(3, 6), 8);
        assert_eq!(max_edges_for_vertices(3, 8), 12);
        assert_eq!(max_edges_for_vertices(2, 4), 4);
        assert!(exact_vertex_pmf(&c, 0.1, 0.1, 5).is_ok());
        assert!(matches!(exact_vertex_pmf(&c, 0.1, 0.1, 6), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn partition_functions() {
        let c = census(4);
        assert_relative_eq!(partition_function_z(&c, 0, 1.7, 0.3, 9.0).unwrap(), 1.7f64.powi(2) * 0.3f64.powi(4));
        for n in 0..=4 {
            let z = partition_function_z(&c, n, 1.0, 1.0, 1.0).unwrap();
            assert_eq!(z, c.count_with_edges(n as u32) as f64);
        }
        let y1 = partition_function_y(&c, 1, 3.0, 0.5, 2.0, 7.0).unwrap();
        assert_relative_eq!(y1, 0.25 * 16.0);
        assert!(partition_function_z(&c, 5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn vertex_pmf_is_y_at_cluster_point() {
        let c = census(6);
        let (p, s) = (0.2, 0.45);
        for v in 1..=5 {
            let direct = exact_vertex_pmf(&c, p, s, v).unwrap();
            let y = partition_function_y(&c, v, p, 1.0 - p, 1.0 - s, s / p).unwrap();
            assert_relative_eq!(direct, y, max_relative = 1e-12);
        }
    }
}
