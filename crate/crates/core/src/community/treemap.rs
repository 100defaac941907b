//! Squarified treemap over community statistics.

use serde::{Deserialize, Serialize};

use super::partition::CommunityId;
use super::stats::CommunityStats;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMeasure {
    #[default]
    DefaultRate,
    Firms,
    LoanAmount,
    DefaultAmount,
}

impl SizeMeasure {
    fn of(self, s: &CommunityStats) -> f64 {
        match self {
            SizeMeasure::DefaultRate => s.ratio_default_firms,
            SizeMeasure::Firms => s.firms as f64,
            SizeMeasure::LoanAmount => s.total_loan_amount,
            SizeMeasure::DefaultAmount => s.total_default_amount,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreemapRect {
    pub community: CommunityId,
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub default_rate: f64,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreemapLayout {
    pub measure: SizeMeasure,
    pub rects: Vec<TreemapRect>,
}

/// Small blocks are inflated to this fraction of the mean measure.
const FLOOR_OF_MEAN: f64 = 0.02;

/// Rectangles fill the unit square with area proportional to
/// `max(measure, floor)`; largest blocks are placed first.
pub fn treemap_layout(stats: &[CommunityStats], measure: SizeMeasure) -> TreemapLayout {
    if stats.is_empty() {
        return TreemapLayout { measure, rects: Vec::new() };
    }
    let raw: Vec<f64> = stats.iter().map(|s| measure.of(s).max(0.0)).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let floor = FLOOR_OF_MEAN * mean;
    let mut sized: Vec<f64> = raw.iter().map(|&v| v.max(floor)).collect();
    if sized.iter().all(|&v| v == 0.0) {
        sized.iter_mut().for_each(|v| *v = 1.0);
    }
    let total: f64 = sized.iter().sum();
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| sized[b].total_cmp(&sized[a]).then(stats[a].community.cmp(&stats[b].community)));
    let areas: Vec<f64> = order.iter().map(|&i| sized[i] / total).collect();

    let boxes = squarify(&areas, Rect { x: 0.0, y: 0.0, w: 1.0, h: 1.0 });
    let rects = order
        .iter()
        .zip(boxes)
        .map(|(&i, r)| TreemapRect {
            community: stats[i].community,
            label: stats[i].community.to_string(),
            x: r.x,
            y: r.y,
            w: r.w,
            h: r.h,
            default_rate: stats[i].ratio_default_firms,
            measure: raw[i],
        })
        .collect();
    TreemapLayout { measure, rects }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// Worst aspect ratio of a row of `areas` laid along a side of length `side`.
fn worst(areas: &[f64], side: f64) -> f64 {
    let s: f64 = areas.iter().sum();
    let (lo, hi) = areas.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let s2 = s * s;
    let side2 = side * side;
    (side2 * hi / s2).max(s2 / (side2 * lo))
}

/// `areas` sorted descending and summing to the area of `space`.
fn squarify(areas: &[f64], mut space: Rect) -> Vec<Rect> {
    let mut out = Vec::with_capacity(areas.len());
    let mut start = 0;
    while start < areas.len() {
        let side = space.w.min(space.h);
        let mut end = start + 1;
        while end < areas.len() && worst(&areas[start..=end], side) <= worst(&areas[start..end], side) {
            end += 1;
        }
        let row = &areas[start..end];
        let row_area: f64 = row.iter().sum();
        let last = end == areas.len();
        if space.w >= space.h {
            // Column on the left.
            let w = if last { space.w } else { row_area / space.h };
            let mut y = space.y;
            for (i, &a) in row.iter().enumerate() {
                let h = if i + 1 == row.len() { space.y + space.h - y } else { a / w };
                out.push(Rect { x: space.x, y, w, h });
                y += h;
            }
            space = Rect { x: space.x + w, y: space.y, w: space.w - w, h: space.h };
        } else {
            // Row along the top.
            let h = if last { space.h } else { row_area / space.w };
            let mut x = space.x;
            for (i, &a) in row.iter().enumerate() {
                let w = if i + 1 == row.len() { space.x + space.w - x } else { a / h };
                out.push(Rect { x, y: space.y, w, h });
                x += w;
            }
            space = Rect { x: space.x, y: space.y + h, w: space.w, h: space.h - h };
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stat(c: u32, rate: f64) -> CommunityStats {
        CommunityStats {
            community: CommunityId(c),
            firms: 10,
            default_firms: (rate * 10.0) as usize,
            ratio_default_firms: rate,
            ratio_default_amount: None,
            spanners: 0,
            neighbour_communities: 0,
            total_loan_amount: 0.0,
            total_default_amount: 0.0,
        }
    }

    #[test]
    fn single_block_is_unit_square() {
        let t = treemap_layout(&[stat(1, 0.4)], SizeMeasure::DefaultRate);
        let r = &t.rects[0];
        assert_eq!((r.x, r.y, r.w, r.h), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn areas_follow_measure() {
        let t = treemap_layout(&[stat(1, 0.1), stat(2, 0.3)], SizeMeasure::DefaultRate);
        let area = |c: u32| t.rects.iter().find(|r| r.community == CommunityId(c)).map(|r| r.w * r.h).unwrap();
        assert!((area(2) / area(1) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_measure_gets_floor() {
        let t = treemap_layout(&[stat(1, 0.0), stat(2, 0.5)], SizeMeasure::DefaultRate);
        let small = t.rects.iter().find(|r| r.community == CommunityId(1)).unwrap();
        assert!(small.w * small.h > 0.0);
    }
}
