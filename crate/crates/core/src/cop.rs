//! Individual order-preservation conditions.
//!
//! A POP condition is indexed by an ordered pair `(i, j)`, `i != j`; it applies
//! when `c_ij > 1` and holds when `w_i > w_j`. A POIP condition is indexed by a
//! quadruple `(i, j, k, l)` with `i != j`, `k != l` and `(k, l)` different from
//! both `(i, j)` and `(j, i)`; it applies when `c_ij > 1`, `c_kl > 1` and
//! `c_ij > c_kl`, and holds when `w_i / w_j > w_k / w_l`. All comparisons are
//! strict, so ties count as violations.
//!
//! The two sufficient conditions based on Koczkodaj's index guarantee a POP
//! condition when `c_ij > 1/(1 - KI)` and a POIP condition when
//! `c_ij / c_kl > (1/(1 - KI))^2`.

use crate::pcm::PcMatrix;
use crate::priority::PriorityVector;

/// Number of POP conditions for order `n`: `n^2 - n`.
pub const fn pop_total(n: usize) -> u64 {
    (n * n - n) as u64
}

/// Number of POIP conditions for order `n`: `(n^2 - n)(n^2 - n - 2)`.
pub const fn poip_total(n: usize) -> u64 {
    let p = n * n - n;
    (p * (p - 2)) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionCount {
    pub applicable: u64,
    pub satisfied: u64,
}

impl ConditionCount {
    pub fn violated(&self) -> u64 {
        self.applicable - self.satisfied
    }

    /// Satisfied share of applicable conditions in percent, `None` when nothing applies.
    pub fn percent(&self) -> Option<f64> {
        (self.applicable > 0).then(|| self.satisfied as f64 / self.applicable as f64 * 100.0)
    }
}

/// Condition bookkeeping for one matrix and one priority vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopReport {
    pub pop_applicable: u64,
    pub pop_satisfied: u64,
    pub poip_applicable: u64,
    pub poip_satisfied: u64,
    pub pop_total: u64,
    pub poip_total: u64,
    pub th1_guaranteed: u64,
    /// `None` when the POIP guarantee count was not computed.
    pub th2_guaranteed: Option<u64>,
}

impl CopReport {
    pub fn evaluate(c: &PcMatrix, w: &PriorityVector, ki: f64, with_th2: bool) -> Self {
        let pop = pop_evaluate(c, w);
        let poip = poip_evaluate(c, w);
        let n = c.order();
        Self {
            pop_applicable: pop.applicable,
            pop_satisfied: pop.satisfied,
            poip_applicable: poip.applicable,
            poip_satisfied: poip.satisfied,
            pop_total: pop_total(n),
            poip_total: poip_total(n),
            th1_guaranteed: theorem1_count(c, ki),
            th2_guaranteed: with_th2.then(|| theorem2_count(c, ki)),
        }
    }

    pub fn pop(&self) -> ConditionCount {
        ConditionCount { applicable: self.pop_applicable, satisfied: self.pop_satisfied }
    }

    pub fn poip(&self) -> ConditionCount {
        ConditionCount { applicable: self.poip_applicable, satisfied: self.poip_satisfied }
    }
}

/// Guarantee threshold `1 / (1 - KI)`.
#[inline]
pub fn ki_threshold(ki: f64) -> f64 {
    1.0 / (1.0 - ki)
}

/// Ordered pairs `(i, j)` with `c_ij > 1`, row-major.
pub fn preferred_pairs(c: &PcMatrix) -> Vec<(usize, usize)> {
    let n = c.order();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in 0..n {
            if i != j && c.get(i, j) > 1.0 {
                out.push((i, j));
            }
        }
    }
    out
}

#[inline]
fn quadruple_in_universe((i, j): (usize, usize), (k, l): (usize, usize)) -> bool {
    i != j && k != l && (k, l) != (i, j) && (k, l) != (j, i)
}

pub fn pop_evaluate(c: &PcMatrix, w: &PriorityVector) -> ConditionCount {
    let mut count = ConditionCount::default();
    for (i, j) in preferred_pairs(c) {
        count.applicable += 1;
        if w.get(i) > w.get(j) {
            count.satisfied += 1;
        }
    }
    count
}

/// Applicable POP conditions whose weight order is not preserved.
pub fn pop_violations(c: &PcMatrix, w: &PriorityVector) -> Vec<(usize, usize)> {
    preferred_pairs(c).into_iter().filter(|&(i, j)| !(w.get(i) > w.get(j))).collect()
}

pub fn poip_evaluate(c: &PcMatrix, w: &PriorityVector) -> ConditionCount {
    let pairs: Vec<(usize, usize, f64, f64)> = preferred_pairs(c)
        .into_iter()
        .map(|(i, j)| (i, j, c.get(i, j), w.get(i) / w.get(j)))
        .collect();
    let mut count = ConditionCount::default();
    for &(i, j, cij, rij) in &pairs {
        for &(k, l, ckl, rkl) in &pairs {
            if cij > ckl && quadruple_in_universe((i, j), (k, l)) {
                count.applicable += 1;
                if rij > rkl {
                    count.satisfied += 1;
                }
            }
        }
    }
    count
}

/// Applicable POIP conditions `(i, j, k, l)` whose ratio order is not preserved.
pub fn poip_violations(c: &PcMatrix, w: &PriorityVector) -> Vec<(usize, usize, usize, usize)> {
    let pairs = preferred_pairs(c);
    let mut out = Vec::new();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            if c.get(i, j) > c.get(k, l)
                && quadruple_in_universe((i, j), (k, l))
                && !(w.get(i) / w.get(j) > w.get(k) / w.get(l))
            {
                out.push((i, j, k, l));
            }
        }
    }
    out
}

/// Pairs `(i, j)`, `i != j`, with `c_ij > 1/(1 - ki)`.
pub fn theorem1_pairs(c: &PcMatrix, ki: f64) -> Vec<(usize, usize)> {
    let t = ki_threshold(ki);
    let n = c.order();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && c.get(i, j) > t {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn theorem1_count(c: &PcMatrix, ki: f64) -> u64 {
    theorem1_pairs(c, ki).len() as u64
}

/// POIP-universe quadruples with `c_ij > 1`, `c_kl > 1` and
/// `c_ij / c_kl > (1/(1 - ki))^2`.
pub fn theorem2_count(c: &PcMatrix, ki: f64) -> u64 {
    let t2 = ki_threshold(ki).powi(2);
    let pairs = preferred_pairs(c);
    let mut count = 0;
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            if quadruple_in_universe((i, j), (k, l)) && c.get(i, j) / c.get(k, l) > t2 {
                count += 1;
            }
        }
    }
    count
}

/// Like [`theorem2_count`] but without requiring `c_ij > 1` and `c_kl > 1`.
pub fn theorem2_count_unrestricted(c: &PcMatrix, ki: f64) -> u64 {
    let t2 = ki_threshold(ki).powi(2);
    let n = c.order();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if quadruple_in_universe((i, j), (k, l)) && c.get(i, j) / c.get(k, l) > t2 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Result of checking the KI-based sufficient conditions against a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SoundnessReport {
    pub th1_flagged: u64,
    pub th1_failures: u64,
    pub th2_flagged: u64,
    pub th2_failures: u64,
    pub th2_unrestricted_flagged: u64,
    pub th2_unrestricted_failures: u64,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.th1_failures == 0 && self.th2_failures == 0 && self.th2_unrestricted_failures == 0
    }

    pub fn merge(&mut self, other: &SoundnessReport) {
        self.th1_flagged += other.th1_flagged;
        self.th1_failures += other.th1_failures;
        self.th2_flagged += other.th2_flagged;
        self.th2_failures += other.th2_failures;
        self.th2_unrestricted_flagged += other.th2_unrestricted_flagged;
        self.th2_unrestricted_failures += other.th2_unrestricted_failures;
    }
}

/// Checks that every pair and quadruple flagged by the KI thresholds is
/// actually preserved by `w`.
pub fn check_theorems(c: &PcMatrix, w: &PriorityVector, ki: f64) -> SoundnessReport {
    let n = c.order();
    let t = ki_threshold(ki);
    let t2 = t * t;
    let mut r = SoundnessReport::default();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cij = c.get(i, j);
            let rij = w.get(i) / w.get(j);
            if cij > t {
                r.th1_flagged += 1;
                if !(w.get(i) > w.get(j)) {
                    r.th1_failures += 1;
                }
            }
            for k in 0..n {
                for l in 0..n {
                    if !quadruple_in_universe((i, j), (k, l)) {
                        continue;
                    }
                    let ckl = c.get(k, l);
                    if cij / ckl > t2 {
                        let ok = rij > w.get(k) / w.get(l);
                        r.th2_unrestricted_flagged += 1;
                        r.th2_unrestricted_failures += u64::from(!ok);
                        if cij > 1.0 && ckl > 1.0 {
                            r.th2_flagged += 1;
                            r.th2_failures += u64::from(!ok);
                        }
                    }
                }
            }
        }
    }
    r
}
