//! Sign classification of `rs − q²`.
//!
//! `> 0` elliptic, `< 0` hyperbolic, `= 0` with `(r, q, s) ≠ 0` parabolic,
//! `r = q = s = 0` first order. The sign may change across the domain, in
//! which case the domain is cut into an axis-aligned grid and each cell is
//! labelled separately.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::eval::eval;
use crate::expr::{Expr, OpaqueImpls, SamplingBox, DEFAULT_ATOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
    FirstOrder,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Case {
    Elliptic,
    Hyperbolic,
    /// `lambda` is the sign of the non-vanishing diagonal invariant.
    Parabolic { lambda: i8 },
    FirstOrder,
    Mixed(RegionMap),
}

impl Case {
    pub fn kind(&self) -> CaseKind {
        match self {
            Case::Elliptic => CaseKind::Elliptic,
            Case::Hyperbolic => CaseKind::Hyperbolic,
            Case::Parabolic { .. } => CaseKind::Parabolic,
            Case::FirstOrder => CaseKind::FirstOrder,
            Case::Mixed(_) => CaseKind::Mixed,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Case::Elliptic => "elliptic".into(),
            Case::Hyperbolic => "hyperbolic".into(),
            Case::Parabolic { lambda } => format!("parabolic (lambda = {lambda})"),
            Case::FirstOrder => "first-order".into(),
            Case::Mixed(map) => format!("mixed ({} cells)", map.cells.len()),
        }
    }
}

/// One grid cell; `label` is `None` when the sign changes inside the cell or
/// no sample in it could be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub index: Vec<usize>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub label: Option<Case>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionMap {
    pub vars: Vec<String>,
    pub resolution: usize,
    pub cells: Vec<Cell>,
}

impl RegionMap {
    /// Number of cells per distinct label (`None` keyed as "unresolved").
    pub fn histogram(&self) -> BTreeMap<String, usize> {
        let mut h = BTreeMap::new();
        for c in &self.cells {
            let key = c.label.as_ref().map(Case::name).unwrap_or_else(|| "unresolved".into());
            *h.entry(key).or_insert(0) += 1;
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub atol: f64,
    /// Cells per axis of the region grid.
    pub resolution: usize,
    /// Samples per cell when building the region grid.
    pub per_cell: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { trials: 200, seed: 0x5eed, atol: DEFAULT_ATOL, resolution: 8, per_cell: 4 }
    }
}

fn label_point(
    r: &Expr,
    q: &Expr,
    s: &Expr,
    dom: &SamplingBox,
    point: &[f64],
    impls: &OpaqueImpls,
    atol: f64,
) -> Option<Case> {
    if dom.is_excluded(point, impls) {
        return None;
    }
    let b = dom.bind(point);
    let (r, q, s) = (eval(r, &b, impls).ok()?, eval(q, &b, impls).ok()?, eval(s, &b, impls).ok()?);
    let det = r * s - q * q;
    let scale = (r * s).abs().max(q * q).max(1.0);
    if det > atol * scale {
        Some(Case::Elliptic)
    } else if det < -atol * scale {
        Some(Case::Hyperbolic)
    } else if r.abs() <= atol && s.abs() <= atol && q.abs() <= atol {
        Some(Case::FirstOrder)
    } else {
        let lead = if r.abs() >= s.abs() { r } else { s };
        Some(Case::Parabolic { lambda: if lead > 0.0 { 1 } else { -1 } })
    }
}

fn sample_labels(
    r: &Expr,
    q: &Expr,
    s: &Expr,
    dom: &SamplingBox,
    impls: &OpaqueImpls,
    n: usize,
    seed: u64,
    atol: f64,
) -> Vec<Option<Case>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n).map(|_| dom.sample(&mut rng)).collect();
    points.par_iter().map(|p| label_point(r, q, s, dom, p, impls, atol)).collect()
}

fn uniform(labels: &[Option<Case>]) -> Option<Case> {
    let mut it = labels.iter().flatten();
    let first = it.next()?;
    it.all(|l| l == first).then(|| first.clone())
}

/// Classifies the reduced equation with coefficients `r, q, s` over `region`.
pub fn classify_case(
    r: &Expr,
    q: &Expr,
    s: &Expr,
    region: &SamplingBox,
    impls: &OpaqueImpls,
    cfg: ClassifyConfig,
) -> Case {
    let labels = sample_labels(r, q, s, region, impls, cfg.trials, cfg.seed, cfg.atol);
    if let Some(case) = uniform(&labels) {
        return case;
    }
    let dim = region.dim();
    let res = cfg.resolution.max(1);
    let total = res.pow(dim as u32);
    let cells: Vec<Cell> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut index = Vec::with_capacity(dim);
            let mut rem = flat;
            for _ in 0..dim {
                index.push(rem % res);
                rem /= res;
            }
            let (min, max): (Vec<f64>, Vec<f64>) = (0..dim)
                .map(|k| {
                    let w = (region.max[k] - region.min[k]) / res as f64;
                    let lo = region.min[k] + w * index[k] as f64;
                    (lo, lo + w)
                })
                .unzip();
            let cell_box = SamplingBox {
                vars: region.vars.clone(),
                min: min.clone(),
                max: max.clone(),
                exclude: region.exclude.clone(),
            };
            let seed = cfg.seed ^ (flat as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let labels = sample_labels(r, q, s, &cell_box, impls, cfg.per_cell, seed, cfg.atol);
            Cell { index, min, max, label: uniform(&labels) }
        })
        .collect();
    Case::Mixed(RegionMap { vars: region.vars.clone(), resolution: res, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn classify(r: &str, q: &str, s: &str) -> Case {
        let dom = SamplingBox::cube(&["y", "z"], -2.0, 2.0);
        classify_case(
            &parse(r).unwrap(),
            &parse(q).unwrap(),
            &parse(s).unwrap(),
            &dom,
            &OpaqueImpls::new(),
            ClassifyConfig::default(),
        )
    }

    #[test]
    fn constant_triples() {
        assert_eq!(classify("1", "0", "-1"), Case::Hyperbolic);
        assert_eq!(classify("0", "0", "0"), Case::FirstOrder);
        assert_eq!(classify("-1", "0", "0"), Case::Parabolic { lambda: -1 });
        assert_eq!(classify("-1", "0", "-1"), Case::Elliptic);
    }

    #[test]
    fn sign_change_gives_region_map() {
        // rs − q² = y changes sign across y = 0
        match classify("y", "0", "1") {
            Case::Mixed(map) => {
                assert_eq!(map.cells.len(), 64);
                for c in &map.cells {
                    let label = c.label.as_ref().unwrap();
                    if c.max[0] <= 0.0 {
                        assert_eq!(*label, Case::Hyperbolic);
                    } else {
                        assert_eq!(*label, Case::Elliptic);
                    }
                }
            }
            other => panic!("{other:?}"),
        }
    }
}
