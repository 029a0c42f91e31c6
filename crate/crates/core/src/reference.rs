//! Published satisfaction percentages used for side-by-side comparison.

use crate::simulator::CiBucket;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub n: usize,
    pub pop_ev: f64,
    pub pop_gm: f64,
    pub poip_ev: f64,
    pub poip_gm: f64,
    pub th1: f64,
    /// Not reported for n >= 8.
    pub th2: Option<f64>,
}

const fn row(n: usize, pop_ev: f64, pop_gm: f64, poip_ev: f64, poip_gm: f64, th1: f64, th2: Option<f64>) -> ReferenceRow {
    ReferenceRow { n, pop_ev, pop_gm, poip_ev, poip_gm, th1, th2 }
}

/// Matrices with CI < 0.10.
pub const BELOW_010: [ReferenceRow; 7] = [
    row(3, 91.02, 91.02, 96.60, 96.60, 58.25, Some(7.60)),
    row(4, 90.44, 90.59, 95.79, 95.79, 40.39, Some(3.50)),
    row(5, 89.70, 89.88, 95.80, 95.82, 32.90, Some(2.53)),
    row(6, 89.91, 90.01, 95.80, 95.82, 29.41, Some(2.25)),
    row(7, 89.66, 89.74, 95.83, 95.85, 27.10, Some(2.12)),
    row(8, 89.57, 89.64, 95.98, 96.00, 26.45, None),
    row(9, 89.62, 89.70, 96.03, 96.05, 25.28, None),
];

/// Matrices with CI >= 0.10.
pub const AT_OR_ABOVE_010: [ReferenceRow; 7] = [
    row(3, 87.33, 87.33, 96.00, 96.00, 45.83, Some(5.29)),
    row(4, 85.88, 86.29, 94.01, 94.03, 21.30, Some(0.53)),
    row(5, 83.64, 84.21, 93.63, 93.69, 9.72, Some(0.05)),
    row(6, 82.70, 83.06, 93.56, 93.64, 5.45, Some(0.01)),
    row(7, 82.01, 82.55, 93.43, 93.50, 3.27, Some(0.00)),
    row(8, 81.71, 82.18, 93.48, 93.55, 2.22, None),
    row(9, 81.37, 81.83, 93.40, 93.46, 1.52, None),
];

pub fn lookup(n: usize, bucket: CiBucket) -> Option<&'static ReferenceRow> {
    let table: &'static [ReferenceRow; 7] = match bucket {
        CiBucket::Below010 => &BELOW_010,
        CiBucket::AtOrAbove010 => &AT_OR_ABOVE_010,
    };
    table.iter().find(|r| r.n == n)
}
