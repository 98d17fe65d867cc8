//! Type reduction of interval type-2 rule outputs to `[y_l, y_r]`.
//!
//! [`sc_reduce`] is the sorting-free switch-indicator scheme used by the
//! trainer. [`km_reduce`] is the classical Karnik-Mendel iteration, kept as the
//! baseline it is compared against, and [`brute_force_reduce`] enumerates every
//! lower/upper assignment for testing. [`wm_bounds`] gives the closed-form
//! Wu-Mendel uncertainty bounds used by the controllers.

use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::fuzzy::FiringInterval;

/// Rule firings paired with their crisp consequent values `w_j`.
#[derive(Debug, Clone, Copy)]
pub struct ReductionInput<'a> {
    firings: &'a [FiringInterval],
    consequents: &'a [f64],
}

impl<'a> ReductionInput<'a> {
    pub fn new(firings: &'a [FiringInterval], consequents: &'a [f64]) -> Result<Self> {
        if firings.is_empty() {
            return Err(FelmError::InvalidConfig("reduction needs at least one rule".into()));
        }
        if firings.len() != consequents.len() {
            return Err(FelmError::DimensionMismatch { expected: firings.len(), got: consequents.len() });
        }
        if consequents.iter().any(|w| !w.is_finite()) {
            return Err(FelmError::NonFinite("rule consequents"));
        }
        if !firings.iter().any(|f| f.upper > 0.0) {
            return Err(FelmError::NoRuleFires);
        }
        Ok(Self { firings, consequents })
    }

    pub fn rules(&self) -> usize {
        self.firings.len()
    }

    pub fn firings(&self) -> &'a [FiringInterval] {
        self.firings
    }

    pub fn consequents(&self) -> &'a [f64] {
        self.consequents
    }
}

/// Interval endpoints plus the switch indicators that produced them.
///
/// `z_left[j]` / `z_right[j]` is `true` when rule `j` contributes its upper
/// firing to that endpoint, `false` when it contributes its lower firing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeReducedSet {
    pub y_left: f64,
    pub y_right: f64,
    pub z_left: Vec<bool>,
    pub z_right: Vec<bool>,
}

/// Sweep counts of one [`sc_reduce_traced`] call, including the final clean sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepStats {
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Endpoint {
    Left,
    Right,
}

/// Value of the endpoint formula for a given indicator vector:
/// `(sum f_up w - sum (1-z) dw w) / (sum f_up - sum (1-z) dw)`.
pub fn endpoint_for_indicators(input: &ReductionInput<'_>, z: &[bool]) -> Result<f64> {
    if z.len() != input.rules() {
        return Err(FelmError::DimensionMismatch { expected: input.rules(), got: z.len() });
    }
    let (num, den) = accumulate(input, z);
    if den <= 0.0 {
        return Err(FelmError::NoRuleFires);
    }
    Ok(num / den)
}

fn accumulate(input: &ReductionInput<'_>, z: &[bool]) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((f, &w), &zj) in input.firings.iter().zip(input.consequents).zip(z) {
        let weight = if zj { f.upper } else { f.lower };
        num += weight * w;
        den += weight;
    }
    (num, den)
}

/// Relative tolerance under which `w_j` is treated as equal to the running
/// endpoint. A tie leaves the indicator untouched; flipping it would not move
/// the endpoint and only invites round-off ping-pong.
const TIE_TOLERANCE: f64 = 8.0 * f64::EPSILON;

fn sc_endpoint(input: &ReductionInput<'_>, side: Endpoint) -> Result<(f64, Vec<bool>, usize)> {
    let m = input.rules();
    let firings = input.firings;
    let w = input.consequents;

    // every indicator starts on the upper firing
    let mut z = vec![true; m];
    let mut delta1: f64 = firings.iter().map(|f| f.upper).sum();
    let mut delta2: f64 = firings.iter().zip(w).map(|(f, &wj)| f.upper * wj).sum();

    let cap = m + 1;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > cap {
            return Err(FelmError::NoConvergence(cap));
        }
        let mut flag = false;
        for j in 0..m {
            // sign of w_j relative to the running centroid delta2 / delta1
            let a = w[j] * delta1 - delta2;
            if a.abs() <= TIE_TOLERANCE * (w[j].abs() * delta1 + delta2.abs()) {
                continue;
            }
            let z_new = match side {
                Endpoint::Left => a < 0.0,
                Endpoint::Right => a > 0.0,
            };
            if z_new != z[j] {
                flag = true;
                let dw = firings[j].width();
                if z[j] {
                    delta1 -= dw;
                    delta2 -= w[j] * dw;
                } else {
                    delta1 += dw;
                    delta2 += w[j] * dw;
                }
                z[j] = z_new;
            }
        }
        if !flag {
            break;
        }
    }

    // final value from fresh sums so incremental round-off does not leak out
    let (num, den) = accumulate(input, &z);
    if den <= 0.0 {
        return Err(FelmError::NoRuleFires);
    }
    Ok((num / den, z, sweeps))
}

/// SC reduction with the number of sweeps each endpoint needed.
pub fn sc_reduce_traced(input: &ReductionInput<'_>) -> Result<(TypeReducedSet, SweepStats)> {
    let firings = input.firings;
    let w = input.consequents;

    if firings.iter().all(|f| f.lower == 0.0) {
        // only upper firings exist: the extremes are attained by the single
        // smallest / largest consequent among fired rules
        let fired = || firings.iter().zip(w).filter(|(f, _)| f.upper > 0.0).map(|(_, &wj)| wj);
        let y_left = fired().fold(f64::INFINITY, f64::min);
        let y_right = fired().fold(f64::NEG_INFINITY, f64::max);
        let z_left = w.iter().map(|&wj| wj <= y_left).collect();
        let z_right = w.iter().map(|&wj| wj >= y_right).collect();
        let set = TypeReducedSet { y_left, y_right, z_left, z_right };
        return Ok((set, SweepStats { left: 0, right: 0 }));
    }

    let (y_left, z_left, left) = sc_endpoint(input, Endpoint::Left)?;
    let (y_right, z_right, right) = sc_endpoint(input, Endpoint::Right)?;
    // the two endpoints are separate optimisations; round-off can cross them by an ulp
    let (y_left, y_right) = if y_left <= y_right { (y_left, y_right) } else { (y_right, y_left) };
    Ok((TypeReducedSet { y_left, y_right, z_left, z_right }, SweepStats { left, right }))
}

/// Sorting-free SC type reduction.
pub fn sc_reduce(input: &ReductionInput<'_>) -> Result<TypeReducedSet> {
    sc_reduce_traced(input).map(|(set, _)| set)
}

fn km_endpoint(input: &ReductionInput<'_>, order: &[usize], side: Endpoint) -> Result<(f64, usize)> {
    let firings = input.firings;
    let w = input.consequents;
    let n = order.len();

    let weighted = |switch: usize| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (rank, &j) in order.iter().enumerate() {
            let upper_side = match side {
                Endpoint::Left => rank < switch,
                Endpoint::Right => rank >= switch,
            };
            let f = if upper_side { firings[j].upper } else { firings[j].lower };
            num += f * w[j];
            den += f;
        }
        (num, den)
    };

    let (num, den) = order.iter().fold((0.0, 0.0), |(a, b), &j| {
        let theta = 0.5 * (firings[j].lower + firings[j].upper);
        (a + theta * w[j], b + theta)
    });
    let mut y = num / den;
    let mut switch = usize::MAX;

    for _ in 0..=n + 1 {
        let new_switch = match side {
            // first `switch` sorted rules (those at or below y) take their upper firing
            Endpoint::Left => order.iter().take_while(|&&j| w[j] <= y).count().clamp(1, n),
            // rules from `switch` on (strictly above y... or the last one) take upper
            Endpoint::Right => order.iter().take_while(|&&j| w[j] < y).count().min(n - 1),
        };
        if new_switch == switch {
            return Ok((y, switch));
        }
        let (n_num, n_den) = weighted(new_switch);
        if n_den <= 0.0 {
            return Err(FelmError::NoRuleFires);
        }
        let y_new = n_num / n_den;
        // exact KM moves y monotonically; with tied consequents round-off can
        // make it cycle between equivalent switch points, so stop once y stalls
        let improved = match side {
            Endpoint::Left => y_new < y,
            Endpoint::Right => y_new > y,
        };
        if switch != usize::MAX && !improved {
            return Ok((y, switch));
        }
        switch = new_switch;
        y = y_new;
    }
    Err(FelmError::NoConvergence(n + 2))
}

/// Classical Karnik-Mendel iterative type reduction.
pub fn km_reduce(input: &ReductionInput<'_>) -> Result<TypeReducedSet> {
    let m = input.rules();
    let w = input.consequents;
    // rules that never fire carry zero weight on either side
    let mut order: Vec<usize> = (0..m).filter(|&j| input.firings[j].upper > 0.0).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));

    let (y_left, left_switch) = km_endpoint(input, &order, Endpoint::Left)?;
    let (y_right, right_switch) = km_endpoint(input, &order, Endpoint::Right)?;

    let mut z_left = vec![true; m];
    let mut z_right = vec![true; m];
    for (rank, &j) in order.iter().enumerate() {
        z_left[j] = rank < left_switch;
        z_right[j] = rank >= right_switch;
    }
    let (y_left, y_right) = if y_left <= y_right { (y_left, y_right) } else { (y_right, y_left) };
    Ok(TypeReducedSet { y_left, y_right, z_left, z_right })
}

pub const BRUTE_FORCE_MAX_RULES: usize = 20;

/// Exhaustive min/max of the weighted average over all `2^M` lower/upper choices.
pub fn brute_force_reduce(input: &ReductionInput<'_>) -> Result<(f64, f64)> {
    let m = input.rules();
    if m > BRUTE_FORCE_MAX_RULES {
        return Err(FelmError::TooManyRules { max: BRUTE_FORCE_MAX_RULES, got: m });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << m) {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..m {
            let f = if mask >> j & 1 == 1 { input.firings[j].upper } else { input.firings[j].lower };
            num += f * input.consequents[j];
            den += f;
        }
        if den > 0.0 {
            let y = num / den;
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(FelmError::NoRuleFires)
    }
}

/// Summation pairing element `i` with element `n-1-i`. Reversing the input
/// therefore leaves the result bit-identical, which keeps mirrored rule bases
/// exactly odd-symmetric.
fn mirrored_sum(mut values: impl ExactSizeIterator<Item = f64> + DoubleEndedIterator + Clone) -> f64 {
    let n = values.len();
    let half = n / 2;
    let mut total = 0.0;
    for (a, b) in values.clone().take(half).zip(values.clone().rev().take(half)) {
        total += a + b;
    }
    if n % 2 == 1 {
        total += values.nth(half).unwrap_or(0.0);
    }
    total
}

/// Closed-form Wu-Mendel uncertainty bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBounds {
    /// Lower bound on `y_l`.
    pub outer_left: f64,
    /// Upper bound on `y_l`.
    pub inner_left: f64,
    /// Lower bound on `y_r`.
    pub inner_right: f64,
    /// Upper bound on `y_r`.
    pub outer_right: f64,
}

impl UncertaintyBounds {
    pub fn y_left(&self) -> f64 {
        0.5 * (self.outer_left + self.inner_left)
    }

    pub fn y_right(&self) -> f64 {
        0.5 * (self.inner_right + self.outer_right)
    }

    /// `(y_left + y_right) / 2`.
    pub fn output(&self) -> f64 {
        0.5 * (self.y_left() + self.y_right())
    }
}

/// All four Wu-Mendel boundary values.
pub fn uncertainty_bounds(input: &ReductionInput<'_>) -> Result<UncertaintyBounds> {
    let f = input.firings;
    let w = input.consequents;
    let lower = || f.iter().map(|fi| fi.lower);
    let upper = || f.iter().map(|fi| fi.upper);

    let sum_lower = mirrored_sum(lower());
    if sum_lower <= 0.0 {
        return Err(FelmError::NoLowerFiring);
    }
    let sum_upper = mirrored_sum(upper());

    let y_all_lower = mirrored_sum(f.iter().zip(w).map(|(fi, &wj)| fi.lower * wj)) / sum_lower;
    let y_all_upper = mirrored_sum(f.iter().zip(w).map(|(fi, &wj)| fi.upper * wj)) / sum_upper;
    let inner_left = y_all_lower.min(y_all_upper);
    let inner_right = y_all_lower.max(y_all_upper);

    let w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = mirrored_sum(f.iter().map(|fi| fi.upper - fi.lower)) / (sum_upper * sum_lower);

    let above_min = |g: fn(&FiringInterval) -> f64| mirrored_sum(f.iter().zip(w).map(move |(fi, &wj)| g(fi) * (wj - w_min)));
    let below_max = |g: fn(&FiringInterval) -> f64| mirrored_sum(f.iter().zip(w).map(move |(fi, &wj)| g(fi) * (w_max - wj)));
    let harmonic = |a: f64, b: f64| if a + b > 0.0 { a * b / (a + b) } else { 0.0 };

    let left_gap = spread * harmonic(above_min(|fi| fi.lower), below_max(|fi| fi.upper));
    let right_gap = spread * harmonic(above_min(|fi| fi.upper), below_max(|fi| fi.lower));

    Ok(UncertaintyBounds {
        outer_left: inner_left - left_gap,
        inner_left,
        inner_right,
        outer_right: inner_right + right_gap,
    })
}

/// Wu-Mendel approximate endpoints `(y_l_hat, y_r_hat)`.
pub fn wm_bounds(input: &ReductionInput<'_>) -> Result<(f64, f64)> {
    let b = uncertainty_bounds(input)?;
    Ok((b.y_left(), b.y_right()))
}

/// Centre of the type-reduced interval.
pub fn defuzz(reduced: &TypeReducedSet) -> f64 {
    0.5 * (reduced.y_left + reduced.y_right)
}

/// Which reducer a model or trainer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    #[default]
    Sc,
    Km,
}

impl Reducer {
    pub fn reduce(self, input: &ReductionInput<'_>) -> Result<TypeReducedSet> {
        match self {
            Reducer::Sc => sc_reduce(input),
            Reducer::Km => km_reduce(input),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fi(lower: f64, upper: f64) -> FiringInterval {
        FiringInterval::new(lower, upper).unwrap()
    }

    /// Frozen from enumerating the four assignments of the two-rule example:
    /// (0.2,0.4)->0.6667 (0.2,0.8)->0.8 (0.5,0.4)->0.4444 (0.5,0.8)->0.6154.
    const TWO_RULE_LEFT: f64 = 0.4 / 0.9;
    const TWO_RULE_RIGHT: f64 = 0.8;

    fn two_rule() -> ([FiringInterval; 2], [f64; 2]) {
        ([fi(0.2, 0.5), fi(0.4, 0.8)], [0.0, 1.0])
    }

    #[test]
    fn single_rule_returns_its_consequent() {
        let f = [fi(0.3, 0.7)];
        let input = ReductionInput::new(&f, &[2.0]).unwrap();
        for set in [sc_reduce(&input).unwrap(), km_reduce(&input).unwrap()] {
            assert_eq!((set.y_left, set.y_right), (2.0, 2.0));
        }
        assert_eq!(brute_force_reduce(&input).unwrap(), (2.0, 2.0));
        let (l, r) = wm_bounds(&input).unwrap();
        assert_abs_diff_eq!(l, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_lower_firings_take_extreme_consequents() {
        let f = [fi(0.0, 0.5), fi(0.0, 0.3)];
        let input = ReductionInput::new(&f, &[1.0, 3.0]).unwrap();
        let (set, stats) = sc_reduce_traced(&input).unwrap();
        assert_eq!((set.y_left, set.y_right), (1.0, 3.0));
        assert_eq!(stats, SweepStats { left: 0, right: 0 });
        assert_eq!(endpoint_for_indicators(&input, &set.z_left).unwrap(), 1.0);
        assert_eq!(endpoint_for_indicators(&input, &set.z_right).unwrap(), 3.0);
    }

    #[test]
    fn zero_lower_ignores_unfired_rules() {
        let f = [fi(0.0, 0.5), fi(0.0, 0.0), fi(0.0, 0.3)];
        let input = ReductionInput::new(&f, &[1.0, -50.0, 3.0]).unwrap();
        let set = sc_reduce(&input).unwrap();
        assert_eq!((set.y_left, set.y_right), (1.0, 3.0));
        let km = km_reduce(&input).unwrap();
        assert_eq!((km.y_left, km.y_right), (1.0, 3.0));
    }

    #[test]
    fn two_rule_example() {
        let (f, w) = two_rule();
        let input = ReductionInput::new(&f, &w).unwrap();
        let (bl, br) = brute_force_reduce(&input).unwrap();
        assert_abs_diff_eq!(bl, TWO_RULE_LEFT, epsilon = 1e-15);
        assert_abs_diff_eq!(br, TWO_RULE_RIGHT, epsilon = 1e-15);
        for set in [sc_reduce(&input).unwrap(), km_reduce(&input).unwrap()] {
            assert_abs_diff_eq!(set.y_left, TWO_RULE_LEFT, epsilon = 1e-12);
            assert_abs_diff_eq!(set.y_right, TWO_RULE_RIGHT, epsilon = 1e-12);
            assert_eq!(set.z_left, vec![true, false]);
            assert_eq!(set.z_right, vec![false, true]);
            assert_abs_diff_eq!(defuzz(&set), 0.5 * (TWO_RULE_LEFT + TWO_RULE_RIGHT), epsilon = 1e-12);
        }
    }

    #[test]
    fn crisp_firings_collapse() {
        let f = [FiringInterval::crisp(0.5), FiringInterval::crisp(0.5)];
        let input = ReductionInput::new(&f, &[0.0, 4.0]).unwrap();
        for set in [sc_reduce(&input).unwrap(), km_reduce(&input).unwrap()] {
            assert_eq!((set.y_left, set.y_right), (2.0, 2.0));
        }
        assert_eq!(brute_force_reduce(&input).unwrap(), (2.0, 2.0));
        assert_eq!(wm_bounds(&input).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn defuzz_examples() {
        let set = |l: f64, r: f64| TypeReducedSet { y_left: l, y_right: r, z_left: vec![], z_right: vec![] };
        assert_eq!(defuzz(&set(2.0, 2.0)), 2.0);
        assert_eq!(defuzz(&set(-1.0, 1.0)), 0.0);
        assert_abs_diff_eq!(defuzz(&set(TWO_RULE_LEFT, 0.8)), 0.6222222222, epsilon = 1e-9);
    }

    #[test]
    fn errors() {
        let f = [fi(0.0, 0.0)];
        assert!(matches!(ReductionInput::new(&f, &[1.0]), Err(FelmError::NoRuleFires)));
        let f = [fi(0.1, 0.2)];
        assert!(matches!(ReductionInput::new(&f, &[1.0, 2.0]), Err(FelmError::DimensionMismatch { .. })));
        let f = [fi(0.0, 0.5), fi(0.0, 0.4)];
        let input = ReductionInput::new(&f, &[1.0, 2.0]).unwrap();
        assert!(matches!(wm_bounds(&input), Err(FelmError::NoLowerFiring)));
        let f = vec![fi(0.1, 0.2); 21];
        let w = vec![0.0; 21];
        let input = ReductionInput::new(&f, &w).unwrap();
        assert!(matches!(brute_force_reduce(&input), Err(FelmError::TooManyRules { .. })));
    }

    #[test]
    fn equal_consequents_do_not_oscillate() {
        let f = [fi(0.1, 0.9), fi(0.3, 0.35), fi(0.05, 0.7), fi(0.2, 0.21)];
        let w = [0.1 + 0.2; 4];
        let input = ReductionInput::new(&f, &w).unwrap();
        let (set, stats) = sc_reduce_traced(&input).unwrap();
        assert!(stats.left <= 5 && stats.right <= 5);
        assert_abs_diff_eq!(set.y_left, w[0], epsilon = 1e-15);
        assert_abs_diff_eq!(set.y_right, w[0], epsilon = 1e-15);
    }

    #[test]
    fn mirrored_sum_is_reversal_invariant() {
        let v = [0.1, 1e16, -3.7, 2.2, 1e-9, 5.0, -1e16];
        let fwd = mirrored_sum(v.iter().copied());
        let rev = mirrored_sum(v.iter().rev().copied());
        assert_eq!(fwd.to_bits(), rev.to_bits());
    }

    fn instance() -> impl Strategy<Value = (Vec<FiringInterval>, Vec<f64>)> {
        (1usize..=12).prop_flat_map(|m| {
            (
                proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), m),
                proptest::collection::vec(-10.0..10.0f64, m),
            )
                .prop_filter_map("no firing", |(pairs, w)| {
                    let f: Vec<FiringInterval> =
                        pairs.iter().map(|&(a, b)| FiringInterval { lower: a.min(b), upper: a.max(b) }).collect();
                    f.iter().any(|x| x.upper > 0.0).then_some((f, w))
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn sc_and_km_match_enumeration((f, w) in instance()) {
            let input = ReductionInput::new(&f, &w).unwrap();
            let (bl, br) = brute_force_reduce(&input).unwrap();
            let (sc, stats) = sc_reduce_traced(&input).unwrap();
            let km = km_reduce(&input).unwrap();
            prop_assert!((sc.y_left - bl).abs() <= 1e-9 && (sc.y_right - br).abs() <= 1e-9);
            prop_assert!((km.y_left - bl).abs() <= 1e-9 && (km.y_right - br).abs() <= 1e-9);
            prop_assert!(stats.left <= f.len() + 1 && stats.right <= f.len() + 1);
        }

        #[test]
        fn sc_is_a_fixed_point((f, w) in instance()) {
            let input = ReductionInput::new(&f, &w).unwrap();
            let set = sc_reduce(&input).unwrap();
            prop_assert!((endpoint_for_indicators(&input, &set.z_left).unwrap() - set.y_left).abs() <= 1e-12 * (1.0 + set.y_left.abs()));
            prop_assert!((endpoint_for_indicators(&input, &set.z_right).unwrap() - set.y_right).abs() <= 1e-12 * (1.0 + set.y_right.abs()));
            let fired: Vec<f64> = f.iter().zip(&w).filter(|(fi, _)| fi.upper > 0.0).map(|(_, &wj)| wj).collect();
            let lo = fired.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = fired.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= set.y_left && set.y_left <= set.y_right && set.y_right <= hi + 1e-12);
        }

        #[test]
        fn shift_and_scale_covariance((f, w) in instance(), c in -5.0..5.0f64, s in 0.1..10.0f64) {
            let input = ReductionInput::new(&f, &w).unwrap();
            let base = sc_reduce(&input).unwrap();
            let shifted: Vec<f64> = w.iter().map(|x| x + c).collect();
            let scaled: Vec<f64> = w.iter().map(|x| x * s).collect();
            let sh = sc_reduce(&ReductionInput::new(&f, &shifted).unwrap()).unwrap();
            let sc = sc_reduce(&ReductionInput::new(&f, &scaled).unwrap()).unwrap();
            prop_assert!((sh.y_left - base.y_left - c).abs() <= 1e-9);
            prop_assert!((sh.y_right - base.y_right - c).abs() <= 1e-9);
            prop_assert!((sc.y_left - base.y_left * s).abs() <= 1e-9 * s.max(1.0));
            prop_assert!((sc.y_right - base.y_right * s).abs() <= 1e-9 * s.max(1.0));
        }

        #[test]
        fn crisp_collapse((f, w) in instance()) {
            let crisp: Vec<FiringInterval> = f.iter().map(|x| FiringInterval::crisp(x.upper)).collect();
            let input = ReductionInput::new(&crisp, &w).unwrap();
            let expected = crisp.iter().zip(&w).map(|(x, wj)| x.upper * wj).sum::<f64>()
                / crisp.iter().map(|x| x.upper).sum::<f64>();
            let set = sc_reduce(&input).unwrap();
            prop_assert!((set.y_left - expected).abs() <= 1e-9 && (set.y_right - expected).abs() <= 1e-9);
        }

        #[test]
        fn wu_mendel_brackets_km((f, w) in instance()) {
            prop_assume!(f.iter().all(|x| x.lower > 0.0));
            let input = ReductionInput::new(&f, &w).unwrap();
            let b = uncertainty_bounds(&input).unwrap();
            let km = km_reduce(&input).unwrap();
            let tol = 1e-9;
            prop_assert!(b.outer_left <= km.y_left + tol && km.y_left <= b.inner_left + tol);
            prop_assert!(b.inner_right <= km.y_right + tol && km.y_right <= b.outer_right + tol);
        }
    }
}
