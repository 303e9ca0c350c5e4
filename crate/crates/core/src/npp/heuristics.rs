use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{residue, NppError, NppInstance, Partition};
use crate::problems::SpinConfig;
use crate::rng::rng_from_seed;
use crate::sa::random_spins;

/// Sort descending and put each number into the lighter set; ties go to the
/// first set (`s = +1`).
pub fn greedy_partition(instance: &NppInstance) -> Partition {
    let a = instance.numbers();
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].cmp(&a[i]).then(i.cmp(&j)));
    let (mut first, mut second) = (BigUint::zero(), BigUint::zero());
    let mut spins = vec![1i8; a.len()];
    for j in order {
        if first <= second {
            first += &a[j];
        } else {
            second += &a[j];
            spins[j] = -1;
        }
    }
    finish(instance, spins)
}

fn finish(instance: &NppInstance, spins: Vec<i8>) -> Partition {
    residue(instance, &SpinConfig::new(spins).expect("±1 spins")).expect("matching length")
}

/// Karmarkar-Karp differencing. The two largest numbers are replaced by their
/// difference until one remains; the differencing tree is then two-coloured.
pub fn kk_partition(instance: &NppInstance) -> Partition {
    let a = instance.numbers();
    let n = a.len();
    // ties pop the lower index first
    let mut heap: BinaryHeap<(BigUint, Reverse<usize>)> = a.iter().cloned().zip((0..n).map(Reverse)).collect();
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); n];
    while heap.len() > 1 {
        let (x, Reverse(i)) = heap.pop().expect("two entries");
        let (y, Reverse(j)) = heap.pop().expect("two entries");
        adjacent[i].push(j);
        adjacent[j].push(i);
        heap.push((x - y, Reverse(i)));
    }
    let mut spins = vec![0i8; n];
    let mut stack = vec![0usize];
    spins[0] = 1;
    while let Some(v) = stack.pop() {
        for &w in &adjacent[v] {
            if spins[w] == 0 {
                spins[w] = -spins[v];
                stack.push(w);
            }
        }
    }
    finish(instance, spins)
}

/// Which neighbourhoods algorithmic tunneling scans.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FlipGroups {
    /// Groups of exactly κ spins.
    #[default]
    Exactly,
    /// Every group of 1 to κ spins.
    AtMost,
}

/// Largest κ scanned without an explicit override.
pub const MAX_AT_KAPPA: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtOptions {
    pub kappa: usize,
    pub groups: FlipGroups,
    /// Defaults to `50·N/κ`.
    pub max_steps: Option<usize>,
    pub max_kappa: usize,
}

impl AtOptions {
    pub fn new(kappa: usize) -> Self {
        Self { kappa, groups: FlipGroups::Exactly, max_steps: None, max_kappa: MAX_AT_KAPPA }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtResult {
    pub partition: Partition,
    pub steps: usize,
    /// `|Ω|` at the start and after every accepted step.
    pub trace: Vec<u128>,
    /// True when no group of the scanned size lowers the residue.
    pub local_minimum: bool,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Steepest descent over κ-spin flips from a random start, or from `start` when given.
pub fn algorithmic_tunneling(
    instance: &NppInstance,
    opts: &AtOptions,
    seed: u64,
    start: Option<&SpinConfig>,
) -> Result<AtResult, NppError> {
    let n = instance.len();
    let k = opts.kappa;
    if k == 0 || k > n {
        return Err(NppError::Invalid(format!("need 1 <= kappa <= N = {n}, got {k}")));
    }
    if k > opts.max_kappa {
        let groups: f64 = match opts.groups {
            FlipGroups::Exactly => binomial(n, k),
            FlipGroups::AtMost => (1..=k).map(|m| binomial(n, m)).sum(),
        };
        return Err(NppError::TooLarge {
            what: "algorithmic tunneling",
            n,
            detail: format!("kappa {k} exceeds the guard {}; each step would scan {groups:.3e} groups", opts.max_kappa),
        });
    }
    let a = instance.as_i128().ok_or_else(|| NppError::TooLarge {
        what: "algorithmic tunneling",
        n,
        detail: format!("{}-bit numbers overflow the 128-bit residue", instance.bits()),
    })?;
    let mut spins = match start {
        Some(c) if c.len() == n => c.as_slice().to_vec(),
        Some(c) => return Err(NppError::Invalid(format!("start has {} spins for {n} numbers", c.len()))),
        None => random_spins(n, &mut rng_from_seed(seed)),
    };
    let max_steps = opts.max_steps.unwrap_or((50 * n).div_ceil(k));
    let mut omega: i128 = a.iter().zip(&spins).map(|(&x, &s)| x * s as i128).sum();
    let mut trace = vec![omega.unsigned_abs()];
    let sizes: Vec<usize> = match opts.groups {
        FlipGroups::Exactly => vec![k],
        FlipGroups::AtMost => (1..=k).collect(),
    };
    // flipping spin j changes Ω by −2 a_j s_j
    let mut steps = 0;
    let mut local_minimum = false;
    while steps < max_steps {
        let change: Vec<i128> = a.iter().zip(&spins).map(|(&x, &s)| -2 * x * s as i128).collect();
        let mut best: Option<(u128, Vec<usize>)> = None;
        let mut best_e = omega.unsigned_abs();
        for &m in &sizes {
            for_each_combination(n, m, |group| {
                let e = (omega + group.iter().map(|&j| change[j]).sum::<i128>()).unsigned_abs();
                if e < best_e {
                    best_e = e;
                    best = Some((e, group.to_vec()));
                }
            });
        }
        let Some((e, group)) = best else {
            local_minimum = true;
            break;
        };
        for &j in &group {
            omega += change[j];
            spins[j] = -spins[j];
        }
        debug_assert_eq!(omega.unsigned_abs(), e);
        trace.push(e);
        steps += 1;
    }
    Ok(AtResult { partition: finish(instance, spins), steps, trace, local_minimum })
}

/// Calls `f` on every `m`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub const MAX_NPP_BRUTE_FORCE: usize = 30;

/// Exact minimum residue by meet-in-the-middle with `s_0 = +1` fixed.
/// Among optimal partitions the one with the smallest left-half mask and
/// then the smallest right-half mask wins.
pub fn npp_brute_force(instance: &NppInstance) -> Result<Partition, NppError> {
    let n = instance.len();
    if n > MAX_NPP_BRUTE_FORCE {
        return Err(NppError::TooLarge { what: "exhaustive search", n, detail: format!("limit is N = {MAX_NPP_BRUTE_FORCE}") });
    }
    let a = instance.as_i128().ok_or_else(|| NppError::TooLarge {
        what: "exhaustive search",
        n,
        detail: format!("{}-bit numbers overflow the 128-bit residue", instance.bits()),
    })?;
    // spin j of a half is −1 when bit j of the mask is set
    let subset_sums = |part: &[i128]| -> Vec<i128> {
        let total: i128 = part.iter().sum();
        let mut sums = vec![total; 1 << part.len()];
        for mask in 1..sums.len() {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] - 2 * part[low];
        }
        sums
    };
    let half = n.div_ceil(2);
    let (left, right) = a.split_at(half);
    // left masks keep bit 0 clear so spin 0 stays +1
    let left_sums = subset_sums(&left[1..]);
    let left_total = left[0];
    let mut right_sorted: Vec<(i128, usize)> = subset_sums(right).into_iter().zip(0..).collect();
    right_sorted.sort_unstable();
    let mut best: Option<(u128, usize, usize)> = None;
    for (lm, &ls) in left_sums.iter().enumerate() {
        let x = ls + left_total;
        // the closest sums to −x sit on either side of this boundary; within a
        // run of equal sums the first entry has the smallest mask
        let pos = right_sorted.partition_point(|&(s, _)| s < -x);
        let mut candidates = Vec::with_capacity(2);
        if let Some(&c) = right_sorted.get(pos) {
            candidates.push(c);
        }
        if pos > 0 {
            let below = right_sorted[pos - 1].0;
            candidates.push(right_sorted[right_sorted.partition_point(|&(s, _)| s < below)]);
        }
        for (s, rm) in candidates {
            let cand = ((x + s).unsigned_abs(), lm, rm);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    let (_, lm, rm) = best.expect("at least one configuration");
    let mut spins = vec![1i8; n];
    for j in 1..half {
        if lm >> (j - 1) & 1 == 1 {
            spins[j] = -1;
        }
    }
    for j in half..n {
        if rm >> (j - half) & 1 == 1 {
            spins[j] = -1;
        }
    }
    Ok(finish(instance, spins))
}
