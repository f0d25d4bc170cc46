//! Parsers for the list/grid flag syntaxes.

use anyhow::{bail, ensure, Context, Result};

/// `7`, `1..12` (inclusive), `1-12` or `2,4,8`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: usize = a.trim().parse().with_context(|| format!("bad range start in {part:?}"))?;
                let b: usize = b.trim().parse().with_context(|| format!("bad range end in {part:?}"))?;
                ensure!(a <= b, "empty range {part:?}");
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad length {part:?}"))?),
        }
    }
    ensure!(!out.is_empty(), "empty length list");
    Ok(out)
}

/// Comma-separated deletion probabilities.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}"))).collect()
}

/// Inclusive `start:stop:step` grid in `[0, 1]`.
///
/// Values are `start + i * step` for integer `i`; nothing is accumulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DGrid {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(parts.len() == 3, "grid must be start:stop:step, got {s:?}");
        let num = |p: &str| p.trim().parse::<f64>().with_context(|| format!("bad grid value {p:?}"));
        let grid = DGrid { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? };
        ensure!(grid.step > 0.0, "grid step must be positive");
        ensure!(
            (0.0..=1.0).contains(&grid.start) && (0.0..=1.0).contains(&grid.stop),
            "grid endpoints must lie in [0, 1]"
        );
        ensure!(grid.start <= grid.stop, "grid start exceeds stop");
        Ok(grid)
    }

    pub fn values(&self) -> Vec<f64> {
        let span = (self.stop - self.start) / self.step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let d = self.start + i as f64 * self.step;
                // land exactly on the stop value when the grid reaches it
                if (d - self.stop).abs() <= 1e-12 {
                    self.stop
                } else {
                    d.clamp(0.0, 1.0)
                }
            })
            .collect()
    }
}

/// `--external d=0.65,c=0.145,cite=...` (the citation may contain commas).
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPoint {
    pub d: f64,
    pub c: f64,
    pub cite: String,
}

pub fn parse_external(s: &str) -> Result<ExternalPoint> {
    let (head, cite) = match s.find("cite=") {
        Some(i) => (&s[..i], s[i + 5..].trim().to_string()),
        None => bail!("external point needs cite=..., got {s:?}"),
    };
    ensure!(!cite.is_empty(), "external point citation is empty");
    let (mut d, mut c) = (None, None);
    for field in head.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field.split_once('=').with_context(|| format!("bad field {field:?}"))?;
        let value: f64 = value.trim().parse().with_context(|| format!("bad value in {field:?}"))?;
        match key.trim() {
            "d" => d = Some(value),
            "c" => c = Some(value),
            other => bail!("unknown external field {other:?}"),
        }
    }
    Ok(ExternalPoint {
        d: d.context("external point needs d=...")?,
        c: c.context("external point needs c=...")?,
        cite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("7").unwrap(), vec![7]);
        assert_eq!(parse_n_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_list("1-3,8").unwrap(), vec![1, 2, 3, 8]);
        assert!(parse_n_list("4..2").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn grids() {
        let g = DGrid::parse("0:1:0.05").unwrap();
        let v = g.values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[20], 1.0);
        assert_eq!(v[7], 7.0 * 0.05);
        assert_eq!(DGrid::parse("0.5:0.8:0.05").unwrap().values().len(), 7);
        assert_eq!(DGrid::parse("0:1:0.1").unwrap().values().len(), 11);
        assert_eq!(DGrid::parse("0.3:0.3:0.1").unwrap().values(), vec![0.3]);
        assert!(DGrid::parse("0:1.5:0.1").is_err());
        assert!(DGrid::parse("0:1:0").is_err());
        assert!(DGrid::parse("0.5:0.1:0.1").is_err());
        assert!(DGrid::parse("0:1").is_err());
    }

    #[test]
    fn external_points() {
        let p = parse_external("d=0.65,c=0.145,cite=C_17 from cited numerics, table 2").unwrap();
        assert_eq!(p, ExternalPoint { d: 0.65, c: 0.145, cite: "C_17 from cited numerics, table 2".into() });
        assert!(parse_external("d=0.65,c=0.145").is_err());
        assert!(parse_external("d=0.65,cite=x").is_err());
        assert!(parse_external("d=0.65,c=0.1,e=2,cite=x").is_err());
    }
}
