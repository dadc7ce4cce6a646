//! Measurement-value spaces and their finite quantization.
//!
//! A space is either a categorical label set or a bounded axis-aligned box
//! quantized into a fixed grid of cells with side `gamma` (an ∞-ball of
//! radius `gamma/2` per cell). The grid is anchored at the lower corner and
//! never depends on observed samples, so bin indices are comparable across
//! estimates and intersections over initial states are well defined.
//!
//! Cells are half-open `[lo + i·gamma, lo + (i+1)·gamma)` along each axis;
//! the last cell per axis may be truncated by the upper bound and is closed
//! at it. Truncated cells count as full bins.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Flat bin index into a space's quantization, in `0..N`.
///
/// For a box the flattening is row-major over per-axis cell counts (first
/// axis varies slowest); for a categorical space it is the label position.
pub type BinIndex = usize;

/// A single measurement value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measurement {
    /// Categorical outcome.
    Label(String),
    /// Point in a bounded box, one entry per axis.
    Point(Vec<f64>),
}

impl Measurement {
    /// Convenience constructor for one-dimensional points.
    pub fn scalar(v: f64) -> Self {
        Measurement::Point(vec![v])
    }

    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            Measurement::Point(p) => Some(p),
            Measurement::Label(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("invalid space: {0}")]
    Invalid(String),
    #[error("coordinate {value} on axis {dimension} is outside [{lo}, {hi}]")]
    OutOfBounds { dimension: usize, value: f64, lo: f64, hi: f64 },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("measurement variant does not match the space")]
    MixedVariant,
    #[error("expected {expected} dimensions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bin index {index} out of range (N = {n})")]
    BinOutOfRange { index: usize, n: usize },
}

/// How `bin_of` treats points outside the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundsPolicy {
    /// Out-of-bounds coordinates are an error (the default; the theory
    /// assumes a bounded measurement space, silent clipping would corrupt
    /// estimates).
    #[default]
    Error,
    /// Clip coordinates to the box before binning. Opt-in.
    Clip,
}

/// A measurement-value space together with its quantization parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSpace {
    /// Finite label set. Quantization is the identity.
    Categorical { labels: Vec<String> },
    /// Bounded box in `lo.len()` dimensions with grid width `gamma`.
    #[serde(rename = "box")]
    BoundedBox { lo: Vec<f64>, hi: Vec<f64>, gamma: f64 },
}

/// Relative slack when counting cells, so that box extents that are exact
/// multiples of gamma up to floating-point noise (e.g. 0.4 / 0.05) do not
/// produce a spurious extra bin.
const CELL_COUNT_SLACK: f64 = 1e-9;

impl MeasurementSpace {
    /// A categorical space. Labels must be non-empty and distinct.
    pub fn categorical<S: Into<String>>(labels: Vec<S>) -> Result<Self, SpaceError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let space = MeasurementSpace::Categorical { labels };
        space.validate()?;
        Ok(space)
    }

    /// A bounded box with quantization width `gamma`.
    pub fn bounded_box(lo: Vec<f64>, hi: Vec<f64>, gamma: f64) -> Result<Self, SpaceError> {
        let space = MeasurementSpace::BoundedBox { lo, hi, gamma };
        space.validate()?;
        Ok(space)
    }

    /// Check the type invariants. Deserialized spaces must be validated
    /// before use.
    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            MeasurementSpace::Categorical { labels } => {
                if labels.is_empty() {
                    return Err(SpaceError::Invalid("labels must be non-empty".into()));
                }
                let distinct: BTreeSet<&String> = labels.iter().collect();
                if distinct.len() != labels.len() {
                    return Err(SpaceError::Invalid("labels must be distinct".into()));
                }
                Ok(())
            }
            MeasurementSpace::BoundedBox { lo, hi, gamma } => {
                if lo.is_empty() {
                    return Err(SpaceError::Invalid("box must have at least one axis".into()));
                }
                if lo.len() != hi.len() {
                    return Err(SpaceError::DimensionMismatch { expected: lo.len(), got: hi.len() });
                }
                if !gamma.is_finite() || *gamma <= 0.0 {
                    return Err(SpaceError::Invalid(format!("gamma must be positive, got {gamma}")));
                }
                for (d, (a, b)) in lo.iter().zip(hi).enumerate() {
                    if !a.is_finite() || !b.is_finite() {
                        return Err(SpaceError::Invalid(format!("axis {d} bounds must be finite")));
                    }
                    if a >= b {
                        return Err(SpaceError::Invalid(format!(
                            "axis {d}: lo ({a}) must be strictly below hi ({b})"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of axes (1 for categorical spaces, which are label-valued).
    pub fn dims(&self) -> usize {
        match self {
            MeasurementSpace::Categorical { .. } => 1,
            MeasurementSpace::BoundedBox { lo, .. } => lo.len(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, MeasurementSpace::Categorical { .. })
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            MeasurementSpace::Categorical { .. } => None,
            MeasurementSpace::BoundedBox { gamma, .. } => Some(*gamma),
        }
    }

    /// Cells per axis for a box space.
    pub fn cells_per_axis(&self) -> Vec<usize> {
        match self {
            MeasurementSpace::Categorical { labels } => vec![labels.len()],
            MeasurementSpace::BoundedBox { lo, hi, gamma } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| {
                    let ratio = (b - a) / gamma;
                    let cells = (ratio - CELL_COUNT_SLACK).ceil();
                    cells.max(1.0) as usize
                })
                .collect(),
        }
    }

    /// Covering number N: the cardinality of the quantization.
    ///
    /// Categorical spaces have one bin per label. A box is covered by a grid
    /// of axis-aligned cells of side `gamma`, so N is the product of per-axis
    /// cell counts; a truncated final cell still counts as one bin.
    pub fn covering_number(&self) -> usize {
        self.cells_per_axis().iter().product()
    }

    /// Bin of a measurement, erroring on out-of-bounds points.
    pub fn bin_of(&self, y: &Measurement) -> Result<BinIndex, SpaceError> {
        self.bin_of_with(y, BoundsPolicy::Error)
    }

    /// Bin of a measurement under the given bounds policy.
    ///
    /// Per axis the index is `min(floor((y - lo) / gamma), cells - 1)`:
    /// half-open cells with the upper bound closed into the last cell.
    pub fn bin_of_with(&self, y: &Measurement, policy: BoundsPolicy) -> Result<BinIndex, SpaceError> {
        match (self, y) {
            (MeasurementSpace::Categorical { labels }, Measurement::Label(l)) => labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| SpaceError::UnknownLabel(l.clone())),
            (MeasurementSpace::BoundedBox { lo, hi, gamma }, Measurement::Point(p)) => {
                if p.len() != lo.len() {
                    return Err(SpaceError::DimensionMismatch { expected: lo.len(), got: p.len() });
                }
                let cells = self.cells_per_axis();
                let mut flat = 0usize;
                for (d, &v) in p.iter().enumerate() {
                    let v = if v < lo[d] || v > hi[d] || !v.is_finite() {
                        match policy {
                            BoundsPolicy::Error => {
                                return Err(SpaceError::OutOfBounds {
                                    dimension: d,
                                    value: v,
                                    lo: lo[d],
                                    hi: hi[d],
                                })
                            }
                            BoundsPolicy::Clip => v.clamp(lo[d], hi[d]),
                        }
                    } else {
                        v
                    };
                    let idx = (((v - lo[d]) / gamma).floor() as usize).min(cells[d] - 1);
                    flat = flat * cells[d] + idx;
                }
                Ok(flat)
            }
            _ => Err(SpaceError::MixedVariant),
        }
    }

    /// Inverse of the flattening: per-axis cell indices of a flat bin.
    pub fn unflatten(&self, bin: BinIndex) -> Result<Vec<usize>, SpaceError> {
        let cells = self.cells_per_axis();
        let n = self.covering_number();
        if bin >= n {
            return Err(SpaceError::BinOutOfRange { index: bin, n });
        }
        let mut rem = bin;
        let mut idx = vec![0usize; cells.len()];
        for d in (0..cells.len()).rev() {
            idx[d] = rem % cells[d];
            rem /= cells[d];
        }
        Ok(idx)
    }

    /// Axis-aligned bounds of a bin's cell (box spaces only). The returned
    /// upper corner is clipped to the box, reflecting truncated final cells.
    pub fn cell_bounds(&self, bin: BinIndex) -> Result<(Vec<f64>, Vec<f64>), SpaceError> {
        match self {
            MeasurementSpace::Categorical { .. } => Err(SpaceError::MixedVariant),
            MeasurementSpace::BoundedBox { lo, hi, gamma } => {
                let idx = self.unflatten(bin)?;
                let cell_lo: Vec<f64> =
                    idx.iter().enumerate().map(|(d, &i)| lo[d] + i as f64 * gamma).collect();
                let cell_hi: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(d, &i)| (lo[d] + (i + 1) as f64 * gamma).min(hi[d]))
                    .collect();
                Ok((cell_lo, cell_hi))
            }
        }
    }

    /// Human-readable description of a bin: the label, or the cell bounds
    /// per axis, e.g. `"0.3..0.4"` or `"0.3..0.4 x 1.0..1.5"`.
    pub fn describe_bin(&self, bin: BinIndex) -> Result<String, SpaceError> {
        match self {
            MeasurementSpace::Categorical { labels } => labels
                .get(bin)
                .cloned()
                .ok_or(SpaceError::BinOutOfRange { index: bin, n: labels.len() }),
            MeasurementSpace::BoundedBox { .. } => {
                let (lo, hi) = self.cell_bounds(bin)?;
                Ok(lo
                    .iter()
                    .zip(&hi)
                    .map(|(a, b)| format!("{a}..{b}"))
                    .collect::<Vec<_>>()
                    .join(" x "))
            }
        }
    }

    /// All bins whose cell overlaps the closed box `[lo, hi]` with positive
    /// extent (box spaces only). Touching a cell only at its boundary does
    /// not count as overlap.
    pub fn bins_overlapping(&self, lo: &[f64], hi: &[f64]) -> Result<BTreeSet<BinIndex>, SpaceError> {
        match self {
            MeasurementSpace::Categorical { .. } => Err(SpaceError::MixedVariant),
            MeasurementSpace::BoundedBox { .. } => {
                if lo.len() != self.dims() || hi.len() != self.dims() {
                    return Err(SpaceError::DimensionMismatch { expected: self.dims(), got: lo.len() });
                }
                let mut out = BTreeSet::new();
                for bin in 0..self.covering_number() {
                    let (clo, chi) = self.cell_bounds(bin)?;
                    let overlaps = clo
                        .iter()
                        .zip(&chi)
                        .zip(lo.iter().zip(hi))
                        .all(|((cl, ch), (tl, th))| cl < th && ch > tl);
                    if overlaps {
                        out.insert(bin);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Union of closed ∞-balls of radius `gamma` around sampled points: the
/// sample-anchored reachable-set shape. Every member point is within `gamma`
/// of some sample, which is what makes the estimate tight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallCover {
    centers: Vec<Vec<f64>>,
    radius: f64,
}

impl BallCover {
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Is `q` within `gamma` (∞-norm, closed) of some sample?
    pub fn contains(&self, q: &[f64]) -> bool {
        self.centers.iter().any(|c| {
            c.len() == q.len()
                && c.iter().zip(q).all(|(a, b)| (a - b).abs() <= self.radius)
        })
    }
}

/// Build the ∞-ball cover of the samples: one ball per distinct sample.
///
/// All samples must be points of equal dimension; labels are rejected.
pub fn ball_cover(samples: &[Measurement], gamma: f64) -> Result<BallCover, SpaceError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(SpaceError::Invalid(format!("gamma must be positive, got {gamma}")));
    }
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    for s in samples {
        let p = s.as_point().ok_or(SpaceError::MixedVariant)?;
        match dim {
            None => dim = Some(p.len()),
            Some(d) if d != p.len() => {
                return Err(SpaceError::DimensionMismatch { expected: d, got: p.len() })
            }
            _ => {}
        }
        // Distinct samples only: exact (bitwise) duplicates collapse.
        if !centers.iter().any(|c| c.len() == p.len() && c.iter().zip(p).all(|(a, b)| a == b)) {
            centers.push(p.to_vec());
        }
    }
    Ok(BallCover { centers, radius: gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box(gamma: f64) -> MeasurementSpace {
        MeasurementSpace::bounded_box(vec![0.0], vec![1.0], gamma).unwrap()
    }

    #[test]
    fn covering_number_toxicity_range() {
        // 0.4 wide box with gamma 0.05 covers with 8 cells.
        let space = MeasurementSpace::bounded_box(vec![0.0], vec![0.4], 0.05).unwrap();
        assert_eq!(space.covering_number(), 8);
    }

    #[test]
    fn covering_number_categorical_is_label_count() {
        let space = MeasurementSpace::categorical(vec!["even", "odd"]).unwrap();
        assert_eq!(space.covering_number(), 2);
    }

    #[test]
    fn covering_number_product_over_axes() {
        let space =
            MeasurementSpace::bounded_box(vec![0.0, 0.0], vec![1.0, 1.0], 0.1).unwrap();
        assert_eq!(space.covering_number(), 100);
    }

    #[test]
    fn covering_number_counts_truncated_cell() {
        let space = MeasurementSpace::bounded_box(vec![0.0], vec![0.45], 0.1).unwrap();
        assert_eq!(space.covering_number(), 5);
    }

    #[test]
    fn bin_of_boundaries() {
        let space = unit_box(0.1);
        assert_eq!(space.bin_of(&Measurement::scalar(0.0)).unwrap(), 0);
        assert_eq!(space.bin_of(&Measurement::scalar(1.0)).unwrap(), 9);
        assert_eq!(space.bin_of(&Measurement::scalar(0.35)).unwrap(), 3);
    }

    #[test]
    fn bin_of_rejects_out_of_bounds_by_default() {
        let space = unit_box(0.1);
        let err = space.bin_of(&Measurement::scalar(1.5)).unwrap_err();
        assert!(matches!(err, SpaceError::OutOfBounds { dimension: 0, .. }));
        // Clip mode folds it into the last bin instead.
        assert_eq!(space.bin_of_with(&Measurement::scalar(1.5), BoundsPolicy::Clip).unwrap(), 9);
        assert_eq!(space.bin_of_with(&Measurement::scalar(-0.2), BoundsPolicy::Clip).unwrap(), 0);
    }

    #[test]
    fn bin_of_unknown_label() {
        let space = MeasurementSpace::categorical(vec!["even", "odd"]).unwrap();
        assert_eq!(space.bin_of(&Measurement::Label("odd".into())).unwrap(), 1);
        assert!(matches!(
            space.bin_of(&Measurement::Label("prime".into())),
            Err(SpaceError::UnknownLabel(_))
        ));
        assert!(matches!(space.bin_of(&Measurement::scalar(0.5)), Err(SpaceError::MixedVariant)));
    }

    #[test]
    fn multidim_flattening_round_trips() {
        let space =
            MeasurementSpace::bounded_box(vec![0.0, 0.0], vec![1.0, 1.0], 0.25).unwrap();
        // 4 x 4 grid; point (0.6, 0.1) -> axis cells (2, 0) -> flat 8.
        let bin = space.bin_of(&Measurement::Point(vec![0.6, 0.1])).unwrap();
        assert_eq!(bin, 8);
        assert_eq!(space.unflatten(bin).unwrap(), vec![2, 0]);
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(MeasurementSpace::bounded_box(vec![0.0], vec![0.0], 0.1).is_err());
        assert!(MeasurementSpace::bounded_box(vec![0.0], vec![1.0], 0.0).is_err());
        assert!(MeasurementSpace::bounded_box(vec![0.0], vec![1.0], -0.3).is_err());
        assert!(MeasurementSpace::categorical(Vec::<String>::new()).is_err());
        assert!(MeasurementSpace::categorical(vec!["a", "a"]).is_err());
    }

    #[test]
    fn ball_cover_single_sample_geometry() {
        let cover = ball_cover(&[Measurement::scalar(0.5)], 0.1).unwrap();
        assert!(cover.contains(&[0.59]));
        assert!(!cover.contains(&[0.61]));
        // Closed ball: the boundary is in.
        assert!(cover.contains(&[0.6]));
    }

    #[test]
    fn ball_cover_empty_and_union() {
        let cover = ball_cover(&[], 0.1).unwrap();
        assert!(cover.is_empty());
        assert!(!cover.contains(&[0.0]));

        let cover =
            ball_cover(&[Measurement::scalar(0.1), Measurement::scalar(0.12)], 0.05).unwrap();
        // Union covers [0.05, 0.17].
        for q in [0.05, 0.08, 0.12, 0.17] {
            assert!(cover.contains(&[q]), "q = {q}");
        }
        assert!(!cover.contains(&[0.0499]));
        assert!(!cover.contains(&[0.1701]));
    }

    #[test]
    fn ball_cover_dedupes_and_rejects_labels() {
        let cover = ball_cover(
            &[Measurement::scalar(0.5), Measurement::scalar(0.5), Measurement::scalar(0.2)],
            0.1,
        )
        .unwrap();
        assert_eq!(cover.centers().len(), 2);
        assert!(matches!(
            ball_cover(&[Measurement::Label("x".into())], 0.1),
            Err(SpaceError::MixedVariant)
        ));
    }

    #[test]
    fn bins_overlapping_excludes_boundary_touch() {
        let space = unit_box(0.05);
        // [0, 0.4] overlaps cells 0..=7; cell 8 starts exactly at 0.4.
        let bins = space.bins_overlapping(&[0.0], &[0.4]).unwrap();
        assert_eq!(bins, (0..8).collect());
    }

    #[test]
    fn serde_wire_format() {
        let space: MeasurementSpace =
            serde_json::from_str(r#"{"kind":"box","lo":[0.0],"hi":[1.0],"gamma":0.1}"#).unwrap();
        space.validate().unwrap();
        assert_eq!(space.covering_number(), 10);
        let space: MeasurementSpace =
            serde_json::from_str(r#"{"kind":"categorical","labels":["even","odd"]}"#).unwrap();
        space.validate().unwrap();
        assert_eq!(space.covering_number(), 2);
    }

    proptest! {
        // Round-trip containment: the cell of bin_of(y) contains y (up to a
        // few ulps of slack on the arithmetic used to materialize bounds).
        #[test]
        fn cell_of_bin_contains_point(
            lo in -10.0f64..10.0,
            width in 0.1f64..20.0,
            gamma in 0.01f64..2.0,
            frac in 0.0f64..=1.0,
        ) {
            let hi = lo + width;
            let space = MeasurementSpace::bounded_box(vec![lo], vec![hi], gamma).unwrap();
            let y = lo + frac * width;
            let y = y.clamp(lo, hi);
            let bin = space.bin_of(&Measurement::scalar(y)).unwrap();
            let (clo, chi) = space.cell_bounds(bin).unwrap();
            let tol = gamma * 1e-12;
            prop_assert!(y >= clo[0] - tol && y <= chi[0] + tol,
                "y = {y}, cell = [{}, {}]", clo[0], chi[0]);
        }

        // The covering number equals the number of distinct bins attained
        // over an exhaustive fine grid of the box.
        #[test]
        fn covering_number_matches_exhaustive_grid(
            lo in -5.0f64..5.0,
            width in 0.05f64..10.0,
            gamma in 0.02f64..1.0,
        ) {
            let hi = lo + width;
            let space = MeasurementSpace::bounded_box(vec![lo], vec![hi], gamma).unwrap();
            let mut seen = BTreeSet::new();
            let steps = 20_000usize;
            for i in 0..=steps {
                let y = lo + width * (i as f64 / steps as f64);
                seen.insert(space.bin_of_with(&Measurement::scalar(y.min(hi)), BoundsPolicy::Clip).unwrap());
            }
            prop_assert_eq!(seen.len(), space.covering_number());
        }

        // Tight-estimate claim: every point of a ball cover lies within
        // gamma of some sample. Verified by probing points near and far.
        #[test]
        fn ball_cover_tightness(
            centers in proptest::collection::vec(-5.0f64..5.0, 1..6),
            gamma in 0.01f64..1.0,
            probe in -6.0f64..6.0,
        ) {
            let samples: Vec<Measurement> = centers.iter().map(|&c| Measurement::scalar(c)).collect();
            let cover = ball_cover(&samples, gamma).unwrap();
            let inside = cover.contains(&[probe]);
            let near = centers.iter().any(|c| (c - probe).abs() <= gamma);
            prop_assert_eq!(inside, near);
        }
    }
}
