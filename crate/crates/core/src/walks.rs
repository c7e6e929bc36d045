//! Weighted lattice walks behind the walk sums `S_k^{ij}`, `A_p` and `sigma_p`.
//!
//! A walk moves in steps of `±2` on the lattice `n + 2Z`. Every intermediate
//! vertex `j` must avoid `±n` and contributes the factor `1/(n² - j² + z)`;
//! every step contributes the amplitude `a` (Mathieu) or `V(step)` (generic).
//!
//! Two evaluators are provided. [`enumerate_walks`] lists every admissible
//! walk and is the oracle. [`crossing_sums`] and [`loop_sums`] are dynamic
//! programs over (step count, vertex) that return a whole range of family
//! sums in one pass.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::numeric::{ExactRational, Scalar};
use crate::potential::TrigPotential;

/// Which entry of the 2x2 reduced problem a walk family feeds.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WalkKind {
    /// `-n -> n`, the terms of `S^21`.
    CrossingUp,
    /// `n -> -n`, the terms of `S^12`.
    CrossingDown,
    /// `n -> n`, the terms of `S^11`.
    LoopPlus,
    /// `-n -> -n`, the terms of `S^22`.
    LoopMinus,
}

impl WalkKind {
    pub const ALL: [WalkKind; 4] = [
        WalkKind::CrossingUp,
        WalkKind::CrossingDown,
        WalkKind::LoopPlus,
        WalkKind::LoopMinus,
    ];

    pub fn start(self, n: u32) -> i64 {
        let n = i64::from(n);
        match self {
            WalkKind::CrossingUp | WalkKind::LoopMinus => -n,
            WalkKind::CrossingDown | WalkKind::LoopPlus => n,
        }
    }

    pub fn end(self, n: u32) -> i64 {
        let n = i64::from(n);
        match self {
            WalkKind::CrossingUp | WalkKind::LoopPlus => n,
            WalkKind::CrossingDown | WalkKind::LoopMinus => -n,
        }
    }

    pub fn is_loop(self) -> bool {
        matches!(self, WalkKind::LoopPlus | WalkKind::LoopMinus)
    }
}

/// A family of walks.
///
/// For crossings `p` counts minority-direction steps, so every member has
/// `n + 2p` steps. For loops `p` is the half length: members have `2p`
/// steps and sum to the series term `A_{2p-1}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalkFamily {
    pub n: u32,
    pub kind: WalkKind,
    pub p: u32,
}

impl WalkFamily {
    pub fn new(n: u32, kind: WalkKind, p: u32) -> Self {
        WalkFamily { n, kind, p }
    }

    /// Number of steps of every member.
    pub fn length(&self) -> u32 {
        if self.kind.is_loop() {
            2 * self.p
        } else {
            self.n + 2 * self.p
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub start: i64,
    pub steps: Vec<i8>,
}

impl Walk {
    /// Intermediate vertices `j_1, ..., j_k` (endpoints excluded).
    pub fn vertices(&self) -> Vec<i64> {
        let mut j = self.start;
        let mut out = Vec::with_capacity(self.steps.len().saturating_sub(1));
        for &s in &self.steps[..self.steps.len().saturating_sub(1)] {
            j += i64::from(s);
            out.push(j);
        }
        out
    }

    pub fn end(&self) -> i64 {
        self.start + self.steps.iter().map(|&s| i64::from(s)).sum::<i64>()
    }
}

/// A family sum together with the number of walks it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSum<S> {
    pub value: S,
    pub term_count: u128,
}

const ENUMERATION_LIMIT: u32 = 40;

/// Lists every admissible walk of `family` exactly once.
pub fn enumerate_walks(family: WalkFamily) -> Result<Vec<Walk>> {
    let len = family.length();
    if len > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(format!(
            "{:?} n={} p={} has {len} steps",
            family.kind, family.n, family.p
        )));
    }
    if family.n == 0 {
        return Ok(Vec::new());
    }
    Ok(enumerate_by_length(
        family.n,
        family.kind.start(family.n),
        family.kind.end(family.n),
        len,
    ))
}

/// All walks `start -> end` with exactly `len` steps whose intermediate
/// vertices avoid `±n`.
pub fn enumerate_by_length(n: u32, start: i64, end: i64, len: u32) -> Vec<Walk> {
    let n = i64::from(n);
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(len as usize);
    fn rec(n: i64, pos: i64, end: i64, left: u32, steps: &mut Vec<i8>, out: &mut Vec<Walk>, start: i64) {
        if left == 0 {
            if pos == end {
                out.push(Walk {
                    start,
                    steps: steps.clone(),
                });
            }
            return;
        }
        for s in [-2i8, 2] {
            let next = pos + i64::from(s);
            // the endpoint can no longer be reached
            if (end - next).abs() > 2 * i64::from(left - 1) {
                continue;
            }
            if left > 1 && (next == n || next == -n) {
                continue;
            }
            steps.push(s);
            rec(n, next, end, left - 1, steps, out, start);
            steps.pop();
        }
    }
    if len > 0 {
        rec(n, start, end, len, &mut steps, &mut out, start);
    }
    out
}

/// `1/(n² - j² + z)`; fails only when the denominator vanishes.
fn vertex_factor<S: Scalar>(n: i64, j: i64, z: &S) -> Result<S> {
    let d = S::from_int(n * n - j * j, z.context()) + z.clone();
    d.recip()
        .ok_or_else(|| Error::OutsideDisc(format!("n² - j² + z vanishes at j={j}")))
}

fn check_disc<S: Scalar>(z: &S) -> Result<()> {
    if z.in_unit_disc() {
        Ok(())
    } else {
        Err(Error::OutsideDisc(format!("|z| > 1 for z = {z:?}")))
    }
}

/// Weight of a single walk in the Mathieu case.
pub fn walk_weight<S: Scalar>(w: &Walk, n: u32, z: &S, a: &S) -> Result<S> {
    check_disc(z)?;
    let n = i64::from(n);
    let mut acc = a.pow(w.steps.len() as u32);
    for j in w.vertices() {
        acc = acc * vertex_factor(n, j, z)?;
    }
    Ok(acc)
}

/// `1/(n² - j² + z)` for `j = lo, lo + 2, ..., hi`; entries at `±n` are zero
/// placeholders that the walk programs never read.
pub fn vertex_weights<S: Scalar>(n: u32, z: &S, lo: i64, hi: i64) -> Result<Vec<S>> {
    let n = i64::from(n);
    let mut out = Vec::with_capacity(((hi - lo) / 2 + 1).max(0) as usize);
    let mut j = lo;
    while j <= hi {
        if j == n || j == -n {
            out.push(S::zero(z.context()));
        } else {
            out.push(vertex_factor(n, j, z)?);
        }
        j += 2;
    }
    Ok(out)
}

/// Lattice range a family evaluation needs vertex weights for.
pub fn crossing_vertex_range(n: u32) -> (i64, i64) {
    let n = i64::from(n);
    (-n, n)
}

pub fn loop_vertex_range(n: u32, kind: WalkKind, k_max: u32) -> (i64, i64) {
    let b = kind.start(n);
    let r = 2 * i64::from(k_max);
    (b - r, b + r)
}

/// Crossing sums `[sigma_0, ..., sigma_{p_max}]` from vertex weights.
///
/// `weights[i]` is the factor of vertex `-n + 2i`. The program tracks the
/// number `q` of minority steps taken; after `t` steps the walk sits at
/// `-n + 2t - 4q`, or at the mirror image for downward crossings.
pub fn crossing_sums_with<S: Scalar>(
    n: u32,
    kind: WalkKind,
    step: &S,
    weights: &[S],
    p_max: u32,
) -> Vec<S> {
    assert!(!kind.is_loop());
    let ctx = step.context();
    let ni = i64::from(n);
    let pm = p_max as usize;
    let mut sums = vec![S::zero(ctx); pm + 1];
    if n == 0 {
        return sums;
    }
    assert_eq!(weights.len() as i64, ni + 1, "weights must cover -n..=n");
    let down = kind == WalkKind::CrossingDown;
    let mut f: Vec<Option<S>> = vec![None; pm + 1];
    f[0] = Some(S::one(ctx));
    let t_max = ni + 2 * i64::from(p_max);
    for t in 1..=t_max {
        let mut g: Vec<Option<S>> = vec![None; pm + 1];
        for q in 0..=pm {
            let major = f[q].clone();
            let minor = if q > 0 { f[q - 1].clone() } else { None };
            let incoming = match (major, minor) {
                (Some(x), Some(y)) => x + y,
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => continue,
            };
            let rel = 2 * t - 4 * q as i64;
            let j_up = -ni + rel;
            if j_up == ni {
                sums[q] = sums[q].clone() + incoming * step.clone();
                continue;
            }
            if j_up <= -ni || j_up > ni {
                continue;
            }
            let j = if down { -j_up } else { j_up };
            let idx = ((j + ni) / 2) as usize;
            g[q] = Some(incoming * step.clone() * weights[idx].clone());
        }
        f = g;
    }
    sums
}

/// Loop sums `[A_1, A_3, ..., A_{2k_max-1}]` from vertex weights.
///
/// `weights[i]` is the factor of vertex `base - 2k_max + 2i`.
pub fn loop_sums_with<S: Scalar>(
    n: u32,
    kind: WalkKind,
    step: &S,
    weights: &[S],
    k_max: u32,
) -> Vec<S> {
    assert!(kind.is_loop());
    let ctx = step.context();
    let km = i64::from(k_max);
    let mut sums = vec![S::zero(ctx); k_max as usize];
    if k_max == 0 || n == 0 {
        return sums;
    }
    assert_eq!(weights.len() as i64, 2 * km + 1, "weights must cover base ± 2k_max");
    let base = kind.start(n);
    let width = (2 * km + 1) as usize;
    let mut f: Vec<Option<S>> = vec![None; width];
    f[km as usize] = Some(S::one(ctx));
    for t in 1..=2 * km {
        let mut g: Vec<Option<S>> = vec![None; width];
        // beyond this height the walk cannot come back in time
        let reach = t.min(2 * km - t);
        for h in -reach..=reach {
            let i = (h + km) as usize;
            let from_below = if h > -km { f[i - 1].clone() } else { None };
            let from_above = if h < km { f[i + 1].clone() } else { None };
            let incoming = match (from_below, from_above) {
                (Some(x), Some(y)) => x + y,
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => continue,
            };
            if h == 0 {
                let k = (t / 2) as usize;
                sums[k - 1] = sums[k - 1].clone() + incoming * step.clone();
                continue;
            }
            let j = base + 2 * h;
            if j == -base {
                continue;
            }
            g[i] = Some(incoming * step.clone() * weights[i].clone());
        }
        f = g;
    }
    sums
}

/// `[sigma_0(n,z), ..., sigma_{p_max}(n,z)]` for the given crossing kind.
pub fn crossing_sums<S: Scalar>(n: u32, kind: WalkKind, z: &S, a: &S, p_max: u32) -> Result<Vec<S>> {
    check_disc(z)?;
    let (lo, hi) = crossing_vertex_range(n);
    let w = vertex_weights(n, z, lo, hi)?;
    Ok(crossing_sums_with(n, kind, a, &w, p_max))
}

/// `[A_1(n,z), A_3(n,z), ..., A_{2k_max-1}(n,z)]` for the given loop kind.
pub fn loop_sums<S: Scalar>(n: u32, kind: WalkKind, z: &S, a: &S, k_max: u32) -> Result<Vec<S>> {
    check_disc(z)?;
    let (lo, hi) = loop_vertex_range(n, kind, k_max);
    let w = vertex_weights(n, z, lo, hi)?;
    Ok(loop_sums_with(n, kind, a, &w, k_max))
}

/// Sum of one family by dynamic programming, with its cardinality.
pub fn sum_family_dp<S: Scalar>(family: WalkFamily, z: &S, a: &S) -> Result<WeightedSum<S>> {
    let WalkFamily { n, kind, p } = family;
    let ctx = z.context();
    let one_q = ExactRational::from_int(1, ());
    let (value, count) = if kind.is_loop() {
        if p == 0 {
            return Ok(WeightedSum {
                value: S::zero(ctx),
                term_count: 0,
            });
        }
        let v = loop_sums(n, kind, z, a, p)?.pop().expect("k_max >= 1");
        let (lo, hi) = loop_vertex_range(n, kind, p);
        let ones = vec![one_q.clone(); ((hi - lo) / 2 + 1) as usize];
        let c = loop_sums_with(n, kind, &one_q, &ones, p).pop().expect("k_max >= 1");
        (v, c)
    } else {
        let v = crossing_sums(n, kind, z, a, p)?.pop().expect("p_max >= 0");
        let ones = vec![one_q.clone(); n as usize + 1];
        let c = crossing_sums_with(n, kind, &one_q, &ones, p).pop().expect("p_max >= 0");
        (v, c)
    };
    Ok(WeightedSum {
        value,
        term_count: count.numer().to_u128().expect("walk counts fit in u128"),
    })
}

/// `A_p(n,z)` for any `p >= 1`; even `p` gives zero (no such loops).
pub fn alpha_term<S: Scalar>(n: u32, p: u32, z: &S, a: &S) -> Result<S> {
    if p == 0 || p.is_multiple_of(2) {
        check_disc(z)?;
        return Ok(S::zero(z.context()));
    }
    let k = p.div_ceil(2);
    Ok(loop_sums(n, WalkKind::LoopPlus, z, a, k)?.pop().expect("k >= 1"))
}

/// Index pair of the reduced 2x2 problem.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SIndex {
    S11,
    S12,
    S21,
    S22,
}

impl SIndex {
    pub const ALL: [SIndex; 4] = [SIndex::S11, SIndex::S12, SIndex::S21, SIndex::S22];

    fn endpoints(self, n: i64) -> (i64, i64) {
        match self {
            SIndex::S11 => (n, n),
            SIndex::S12 => (n, -n),
            SIndex::S21 => (-n, n),
            SIndex::S22 => (-n, -n),
        }
    }
}

/// `S_k^{ij}(n, z)` for an arbitrary finite even-frequency potential.
///
/// Walk `start -> j_1 -> ... -> j_k -> end` with steps drawn from the
/// support of `V`; each step `d` contributes `V(d)`.
pub fn generic_s<S: Scalar>(k: u32, ij: SIndex, n: u32, z: &S, v: &TrigPotential<S>) -> Result<S> {
    check_disc(z)?;
    let ni = i64::from(n);
    let (start, end) = ij.endpoints(ni);
    let ctx = z.context();
    if k == 0 {
        return Ok(v.coefficient(end - start));
    }
    let support: Vec<(i64, S)> = v.support().map(|(m, c)| (m, c.clone())).collect();
    let mut weights: BTreeMap<i64, S> = BTreeMap::new();
    let mut f: BTreeMap<i64, S> = BTreeMap::new();
    f.insert(start, S::one(ctx));
    for _ in 0..k {
        let mut g: BTreeMap<i64, S> = BTreeMap::new();
        for (&i, fi) in &f {
            for (m, vm) in &support {
                let j = i + m;
                if j == ni || j == -ni {
                    continue;
                }
                let w = match weights.get(&j) {
                    Some(w) => w.clone(),
                    None => {
                        let w = vertex_factor(ni, j, z)?;
                        weights.insert(j, w.clone());
                        w
                    }
                };
                let term = fi.clone() * vm.clone() * w;
                let slot = g.entry(j).or_insert_with(|| S::zero(ctx));
                *slot = slot.clone() + term;
            }
        }
        f = g;
    }
    let mut acc = S::zero(ctx);
    for (i, fi) in f {
        let c = v.coefficient(end - i);
        if !c.is_zero() {
            acc = acc + fi * c;
        }
    }
    Ok(acc)
}

/// `sum_{j != ±n, j ≡ n mod 2} 1/|n² - j²|` in closed form,
/// `(H_n + H_{n-1}) / 2n`.
pub fn reciprocal_gap_sum(n: u32) -> f64 {
    let h = |m: u32| (1..=m).rev().map(|k| 1.0 / f64::from(k)).sum::<f64>();
    (h(n) + h(n - 1)) / (2.0 * f64::from(n))
}

/// Direct partial sum of the same series with an upper tail bound, at a
/// shifted denominator `|n² - j² + z|`.
pub fn shifted_gap_sum_upper(n: u32, z: (f64, f64), cutoff_factor: u32) -> f64 {
    let ni = i64::from(n);
    let cutoff = ni * i64::from(cutoff_factor.max(4));
    let mut s = 0.0;
    let mut j = -cutoff - (cutoff + ni).rem_euclid(2);
    while j <= cutoff {
        if j != ni && j != -ni {
            let re = (ni * ni - j * j) as f64 + z.0;
            s += 1.0 / re.hypot(z.1);
        }
        j += 2;
    }
    // for |j| > cutoff >= 2n+2: |n² - j² + z| >= j²/2, and sum_{|j|>J} 2/j² <= 4/J
    s + 4.0 / cutoff as f64
}

/// Right-hand side `2 log(6n) / n` of the single-sum bound.
pub fn reciprocal_gap_bound(n: u32) -> f64 {
    2.0 * (6.0 * f64::from(n)).ln() / f64::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{parse_complex_rational, BigComplex, ComplexRational, Precision};
    use proptest::prelude::*;

    fn q(num: i64, den: i64) -> ExactRational {
        ExactRational::new(num, den)
    }

    fn brute<S: Scalar>(family: WalkFamily, z: &S, a: &S) -> (S, usize) {
        let walks = enumerate_walks(family).unwrap();
        let mut acc = S::zero(z.context());
        for w in &walks {
            acc = acc + walk_weight(w, family.n, z, a).unwrap();
        }
        (acc, walks.len())
    }

    #[test]
    fn single_crossing_has_only_up_steps() {
        let ws = enumerate_walks(WalkFamily::new(4, WalkKind::CrossingUp, 0)).unwrap();
        assert_eq!(ws.len(), 1);
        assert!(ws[0].steps.iter().all(|&s| s == 2));
        assert_eq!(ws[0].vertices(), vec![-2, 0, 2]);
    }

    #[test]
    fn one_back_step_gives_n_minus_two_walks() {
        let ws = enumerate_walks(WalkFamily::new(4, WalkKind::CrossingUp, 1)).unwrap();
        assert_eq!(ws.len(), 2);
        for n in 3..=10 {
            let c = enumerate_walks(WalkFamily::new(n, WalkKind::CrossingUp, 1)).unwrap();
            assert_eq!(c.len() as u32, n - 2);
        }
    }

    #[test]
    fn short_loops_touch_one_neighbour() {
        let ws = enumerate_walks(WalkFamily::new(3, WalkKind::LoopPlus, 1)).unwrap();
        let mut firsts: Vec<i64> = ws.iter().map(|w| w.vertices()[0]).collect();
        firsts.sort();
        assert_eq!(firsts, vec![1, 5]);
    }

    #[test]
    fn enumeration_guard() {
        let err = enumerate_walks(WalkFamily::new(30, WalkKind::CrossingUp, 6)).unwrap_err();
        assert!(err.to_string().contains("enumeration too large; use DP"));
        assert!(enumerate_walks(WalkFamily::new(30, WalkKind::CrossingUp, 5)).is_ok());
        assert!(enumerate_walks(WalkFamily::new(3, WalkKind::LoopPlus, 21)).is_err());
    }

    #[test]
    fn confinement_is_automatic() {
        for p in 0..=3 {
            for w in enumerate_walks(WalkFamily::new(6, WalkKind::CrossingUp, p)).unwrap() {
                assert!(w.vertices().iter().all(|j| j.abs() < 6));
            }
            for w in enumerate_walks(WalkFamily::new(5, WalkKind::LoopPlus, p + 1)).unwrap() {
                let vs = w.vertices();
                assert!(vs.iter().all(|&j| j > 5) || vs.iter().all(|&j| j < 5 && j > -5));
            }
        }
    }

    #[test]
    fn leading_walk_weights() {
        // one walk: a^3 / ((9 - 1)(9 - 1)) = a^3/64
        let w = &enumerate_walks(WalkFamily::new(3, WalkKind::CrossingUp, 0)).unwrap()[0];
        assert_eq!(walk_weight(w, 3, &q(0, 1), &q(1, 1)).unwrap(), q(1, 64));
        assert_eq!(walk_weight(w, 3, &q(0, 1), &q(2, 1)).unwrap(), q(8, 64));
        let w2 = &enumerate_walks(WalkFamily::new(2, WalkKind::CrossingUp, 0)).unwrap()[0];
        assert_eq!(walk_weight(w2, 2, &q(0, 1), &q(3, 1)).unwrap(), q(9, 4));
        for n in [3u32, 7, 12] {
            let up = Walk {
                start: i64::from(n),
                steps: vec![2, -2],
            };
            let nn = i64::from(n);
            assert_eq!(
                walk_weight(&up, n, &q(0, 1), &q(1, 1)).unwrap(),
                q(1, nn * nn - (nn + 2) * (nn + 2))
            );
        }
    }

    #[test]
    fn weights_reject_points_outside_the_disc() {
        let w = &enumerate_walks(WalkFamily::new(3, WalkKind::CrossingUp, 0)).unwrap()[0];
        let err = walk_weight(w, 3, &q(8, 1), &q(1, 1)).unwrap_err();
        assert!(matches!(err, Error::OutsideDisc(_)));
    }

    #[test]
    fn sigma0_at_n5() {
        let s = sum_family_dp(WalkFamily::new(5, WalkKind::CrossingUp, 0), &q(0, 1), &q(1, 1)).unwrap();
        assert_eq!(s.value, q(1, 147456));
        assert_eq!(s.term_count, 1);
    }

    #[test]
    fn third_alpha_term_at_n3() {
        // oracle: the two loops 3-5-7-5-3 and 3-1-(-1)-1-3, summed exactly
        let (b, count) = brute(WalkFamily::new(3, WalkKind::LoopPlus, 2), &q(0, 1), &q(1, 1));
        assert_eq!(count, 2);
        assert_eq!(b, q(19, 10240));
        let a = q(3, 2);
        let dp = alpha_term(3, 3, &q(0, 1), &a).unwrap();
        assert_eq!(dp, q(19, 10240) * a.pow(4));
    }

    #[test]
    fn even_alpha_terms_vanish() {
        for n in 2..=12u32 {
            for k in 1..=4u32 {
                let len = 2 * k + 1;
                assert!(enumerate_by_length(n, i64::from(n), i64::from(n), len).is_empty());
                assert_eq!(alpha_term(n, 2 * k, &q(1, 3), &q(5, 1)).unwrap(), q(0, 1));
            }
        }
    }

    #[test]
    fn dp_matches_enumeration_exactly() {
        let zs = [q(0, 1), q(1, 3), q(-2, 7)];
        for n in 1..=8u32 {
            for kind in WalkKind::ALL {
                for p in 0..=3u32 {
                    let fam = WalkFamily::new(n, kind, p);
                    for z in &zs {
                        let a = q(3, 2);
                        let dp = sum_family_dp(fam, z, &a).unwrap();
                        let (b, count) = brute(fam, z, &a);
                        assert_eq!(dp.value, b, "{fam:?} z={z:?}");
                        assert_eq!(dp.term_count, count as u128, "{fam:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn one_pass_equals_single_family() {
        let z = q(1, 5);
        let a = q(-2, 3);
        let all = crossing_sums(7, WalkKind::CrossingUp, &z, &a, 4).unwrap();
        for (p, v) in all.iter().enumerate() {
            let single = sum_family_dp(WalkFamily::new(7, WalkKind::CrossingUp, p as u32), &z, &a).unwrap();
            assert_eq!(*v, single.value);
        }
    }

    #[test]
    fn sigma0_closed_form_up_to_30() {
        for n in 2..=30u32 {
            for a in [q(1, 1), q(-3, 5), q(7, 2)] {
                let s = crossing_sums(n, WalkKind::CrossingUp, &q(0, 1), &a, 0).unwrap();
                let four = q(4, 1);
                let want = four.clone()
                    * (a.clone() * q(1, 4)).pow(n)
                    * crate::numeric::factorial_squared(n).recip().unwrap();
                assert_eq!(s[0], want, "n={n}");
            }
        }
    }

    #[test]
    fn generic_s_matches_mathieu_walks() {
        let a = q(5, 3);
        let v = TrigPotential::mathieu(a.clone()).unwrap();
        let z = q(1, 4);
        // first term of S^21 is V(2n), absent for n >= 2
        assert_eq!(generic_s(0, SIndex::S21, 4, &z, &v).unwrap(), q(0, 1));
        assert_eq!(generic_s(0, SIndex::S21, 1, &z, &v).unwrap(), a);
        assert_eq!(
            generic_s(1, SIndex::S11, 3, &q(0, 1), &v).unwrap(),
            a.clone() * a.clone() * q(1, 16)
        );
        for n in 2..=6u32 {
            for k in 1..=6u32 {
                let want = alpha_term(n, k, &z, &a).unwrap();
                assert_eq!(generic_s(k, SIndex::S11, n, &z, &v).unwrap(), want);
                let cross = if k + 1 >= n && (k + 1 - n) % 2 == 0 {
                    let p = (k + 1 - n) / 2;
                    sum_family_dp(WalkFamily::new(n, WalkKind::CrossingUp, p), &z, &a)
                        .unwrap()
                        .value
                } else {
                    q(0, 1)
                };
                assert_eq!(generic_s(k, SIndex::S21, n, &z, &v).unwrap(), cross);
            }
        }
    }

    fn rational_strategy() -> impl Strategy<Value = ExactRational> {
        (-9i64..=9, 1i64..=5).prop_map(|(a, b)| ExactRational::new(a, b))
    }

    fn complex_strategy() -> impl Strategy<Value = ComplexRational> {
        (rational_strategy(), rational_strategy()).prop_map(|(r, i)| ComplexRational::new(r, i))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn loops_at_both_ends_agree(
            c2 in complex_strategy(), c2m in complex_strategy(),
            c4 in complex_strategy(), c4m in complex_strategy(),
            n in 2u32..7, k in 0u32..4,
            zr in -1i64..=1,
        ) {
            let v = TrigPotential::from_coeffs([(2, c2), (-2, c2m), (4, c4), (-4, c4m)], ()).unwrap();
            let z = ComplexRational::from_int(zr, ());
            prop_assert_eq!(
                generic_s(k, SIndex::S11, n, &z, &v).unwrap(),
                generic_s(k, SIndex::S22, n, &z, &v).unwrap()
            );
        }

        #[test]
        fn even_potentials_have_symmetric_crossings(
            c2 in complex_strategy(), c4 in complex_strategy(),
            n in 1u32..7, k in 0u32..4,
            zr in rational_strategy(),
        ) {
            let v = TrigPotential::from_coeffs(
                [(2, c2.clone()), (-2, c2), (4, c4.clone()), (-4, c4)], ()).unwrap();
            prop_assume!(v.is_even_potential());
            let z = ComplexRational::new(zr * ExactRational::new(1, 12), ExactRational::new(1, 3));
            prop_assert_eq!(
                generic_s(k, SIndex::S12, n, &z, &v).unwrap(),
                generic_s(k, SIndex::S21, n, &z, &v).unwrap()
            );
        }
    }

    #[test]
    fn hermitian_potentials_conjugate_crossings() {
        let prec = Precision::new(256).unwrap();
        let c = |s: &str| parse_complex_rational(s).unwrap();
        let v = TrigPotential::from_coeffs(
            [(2, c("1+2i")), (-2, c("1-2i")), (4, c("0.5-0.25i")), (-4, c("0.5+0.25i"))],
            (),
        )
        .unwrap()
        .to_big(prec);
        assert!(v.is_hermitian());
        let z = BigComplex::parse("0.3+0.4i", prec).unwrap();
        let tol = BigComplex::from_f64(1e-60, 0.0, prec).abs();
        for n in 1..=6u32 {
            for k in 0..=3u32 {
                let s12 = generic_s(k, SIndex::S12, n, &z, &v).unwrap();
                let s21 = generic_s(k, SIndex::S21, n, &z.conj(), &v).unwrap();
                assert!((s12 - s21.conj()).abs() <= tol, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn single_sum_bound() {
        for n in (1..=10_000u32).step_by(37).chain([1, 2, 3, 10_000]) {
            assert!(reciprocal_gap_sum(n) < reciprocal_gap_bound(n), "n={n}");
        }
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        for n in 1..=12u32 {
            let ni = i64::from(n);
            let direct: ExactRational = (-(ni + 4000)..=ni + 4000)
                .filter(|j| (j - ni).rem_euclid(2) == 0 && j.abs() != ni)
                .map(|j| ExactRational::new(1, (ni * ni - j * j).abs()))
                .fold(q(0, 1), |acc, t| acc + t);
            let d = direct.as_ratio().to_f64().unwrap();
            // the truncated tail is below 1/4000
            assert!((reciprocal_gap_sum(n) - d).abs() < 3e-4, "n={n}");
            assert!(reciprocal_gap_sum(n) >= d);
        }
    }

    #[test]
    fn multi_sum_bound_on_the_disc() {
        for n in [1u32, 2, 3, 5, 8, 13, 40, 150] {
            for (zr, zi) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (0.0, 0.0)] {
                let s = shifted_gap_sum_upper(n, (zr, zi), 64);
                let b = 2.0 * reciprocal_gap_bound(n);
                for nu in 1..=6 {
                    assert!(s.powi(nu) < b.powi(nu), "n={n} z=({zr},{zi}) nu={nu}");
                }
            }
        }
    }
}
