//! 0-dimensional persistence of a finite point set on the real line.
//!
//! Growing an interval of width `eps` around every point, two neighbouring
//! components merge when `eps` reaches the gap between them. With all births
//! at 0, the diagram is the list of gaps `a_{i+1} - a_i` of the sorted points.

use serde::Serialize;

/// One death of the diagram, drawn at the location of its left point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagramEntry {
    pub death: f64,
    pub left_point: f64,
    /// Position of `left_point` in the sorted, deduplicated input.
    pub left_index: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PersistenceDiagram {
    entries: Vec<DiagramEntry>,
    points: Vec<f64>,
}

impl PersistenceDiagram {
    /// Builds the diagram from points that are already strictly increasing.
    pub(crate) fn from_sorted_unique(points: Vec<f64>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let entries = points
            .windows(2)
            .enumerate()
            .map(|(i, w)| DiagramEntry {
                death: w[1] - w[0],
                left_point: w[0],
                left_index: i,
            })
            .collect();
        Self { entries, points }
    }

    /// Maps every coordinate through `x -> origin + scale * x`. Deaths are
    /// scaled directly, so integer-valued gaps stay exact multiples of `scale`.
    pub(crate) fn rescaled(self, origin: f64, scale: f64) -> Self {
        let entries = self
            .entries
            .into_iter()
            .map(|e| DiagramEntry {
                death: e.death * scale,
                left_point: origin + e.left_point * scale,
                left_index: e.left_index,
            })
            .collect();
        let points = self.points.into_iter().map(|p| origin + p * scale).collect();
        Self { entries, points }
    }

    /// Entries in ascending order of `left_point`.
    pub fn entries(&self) -> &[DiagramEntry] {
        &self.entries
    }

    /// The sorted, deduplicated point set the diagram was built from.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn source_size(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn deaths(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.death)
    }

    /// Right end of the gap recorded by `entry`.
    pub fn right_point(&self, entry: &DiagramEntry) -> f64 {
        self.points[entry.left_index + 1]
    }

    /// Number of components left once every gap of size `<= mu` has merged.
    pub fn components_at(&self, mu: f64) -> usize {
        if self.points.is_empty() {
            return 0;
        }
        1 + self.deaths().filter(|&d| d > mu).count()
    }
}

/// Computes the diagram of `points` (duplicates are collapsed first).
pub fn diagram(points: &[f64]) -> PersistenceDiagram {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    PersistenceDiagram::from_sorted_unique(sorted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram of the deaths over `[0, max death]`. The maximum
/// falls in the last bin.
pub fn histogram(d: &PersistenceDiagram, bins: usize) -> Vec<HistogramBin> {
    assert!(bins >= 1, "histogram needs at least one bin");
    let Some(max) = d.deaths().reduce(f64::max) else {
        return Vec::new();
    };
    let width = max / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: b as f64 * width,
            hi: if b + 1 == bins { max } else { (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for death in d.deaths() {
        let b = if width > 0.0 {
            ((death / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[b].count += 1;
    }
    out
}
