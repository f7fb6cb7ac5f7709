use anyhow::{bail, Context, Result};

/// Parses `lo:hi:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad grid {text:?}"))?;
        let [lo, hi, step] = parts[..] else {
            bail!("grid range must be lo:hi:step, got {text:?}");
        };
        if [lo, hi, step].iter().any(|x| !x.is_finite()) || step <= 0.0 || hi < lo {
            bail!("grid range needs step > 0 and hi >= lo, got {text:?}");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| round12(lo + i as f64 * step))
            .collect()
    } else {
        text.split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad grid {text:?}"))?
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        bail!("grid must be non-empty and strictly increasing: {text:?}");
    }
    Ok(grid)
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_grid("0.4:0.6:0.002").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[50], 0.5);
        assert_eq!(*g.last().unwrap(), 0.6);
    }

    #[test]
    fn list() {
        assert_eq!(parse_grid("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0.5,0.2").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}
