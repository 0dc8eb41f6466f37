//! Parameters, shift maps, and point lattices of the Hahn symmetric calculus.
//!
//! A parameter pair (q, ω) with q ∈ (0, 1) and ω ≥ 0 induces the shift
//! σ(t) = qt + ω, whose unique fixed point is ω0 = ω / (1 − q). Forward
//! iterates contract every point geometrically toward ω0; backward iterates
//! expand away from it. The closed forms
//!
//! ```text
//! σ^k(t)  = q^k t + ω [k]_q            (k ≥ 0)
//! σ^{-k}(t) = q^{-k} (t − ω [k]_q)     (k ≥ 0)
//! ```
//!
//! with the q-bracket [k]_q = (1 − q^k)/(1 − q) evaluate any iterate in O(1)
//! without accumulating per-step rounding.
//!
//! The symmetric difference operator and its integral sample functions on the
//! odd-iterate lattice {σ^{2n+1}(a)} ∪ {σ^{2n+1}(b)} ∪ {ω0}, which
//! [`build_interval`] materializes to a finite depth.

use crate::error::{HahnError, Result};
use crate::util::same_point;

/// Validated (q, ω) pair together with the derived fixed point ω0.
///
/// q is rejected when 1 − q < 1e-12: the fixed point ω0 = ω/(1−q) and the
/// symmetric gap σ(t) − σ⁻¹(t) both lose all significance as q → 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HahnParams {
    q: f64,
    omega: f64,
    omega0: f64,
}

impl HahnParams {
    pub fn new(q: f64, omega: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(HahnError::InvalidParams(format!(
                "q must be finite, got {q}"
            )));
        }
        if q <= 0.0 || q >= 1.0 {
            return Err(HahnError::InvalidParams(format!(
                "q must lie strictly inside (0, 1), got {q}"
            )));
        }
        if 1.0 - q < 1e-12 {
            return Err(HahnError::InvalidParams(format!(
                "q = {q} is too close to 1; the fixed point omega/(1-q) is numerically meaningless"
            )));
        }
        if !omega.is_finite() {
            return Err(HahnError::InvalidParams(format!(
                "omega must be finite, got {omega}"
            )));
        }
        if omega < 0.0 {
            return Err(HahnError::InvalidParams(format!(
                "omega must be nonnegative, got {omega}"
            )));
        }
        Ok(HahnParams {
            q,
            omega,
            omega0: omega / (1.0 - q),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// The fixed point ω0 = ω / (1 − q) of σ, computed once at construction.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// q-bracket [k]_q = (1 − q^k) / (1 − q); [0]_q = 0, [k]_q → 1/(1−q).
    pub fn q_bracket(&self, k: u32) -> f64 {
        (1.0 - self.q.powi(k as i32)) / (1.0 - self.q)
    }

    /// Forward shift σ(t) = qt + ω.
    pub fn sigma(&self, t: f64) -> f64 {
        self.q * t + self.omega
    }

    /// Backward shift σ⁻¹(t) = (t − ω) / q.
    pub fn sigma_inv(&self, t: f64) -> f64 {
        (t - self.omega) / self.q
    }

    /// k-th iterate of σ for any integer k, by the closed form
    /// σ^k(t) = q^k t + ω[k]_q, evaluated centered as q^k(t − ω0) + ω0.
    ///
    /// The centered form is algebraically identical but keeps the iterate's
    /// distance to the fixed point relatively exact, which the difference
    /// quotients and lattice constructions depend on for deep iterates.
    pub fn sigma_pow(&self, k: i32, t: f64) -> f64 {
        self.q.powi(k) * (t - self.omega0) + self.omega0
    }

    /// Symmetric gap σ(t) − σ⁻¹(t), evaluated as (q − 1/q)(t − ω0).
    ///
    /// The factored form is exact in t − ω0, while the literal difference of
    /// the two shifts loses all significant digits once |t − ω0| drops below
    /// ~1e-12·|ω0|. Every quotient in the calculus divides by this gap, so it
    /// must stay relatively accurate arbitrarily close to the fixed point.
    pub fn sigma_gap(&self, t: f64) -> f64 {
        (self.q - 1.0 / self.q) * (t - self.omega0)
    }

    /// True when t is indistinguishable from the fixed point (within 4 ulp).
    pub fn is_fixed_point(&self, t: f64) -> bool {
        same_point(t, self.omega0)
    }
}

/// A depth-truncated sampling lattice for the interval [a, b].
///
/// Points are the odd σ-iterates of both endpoints, σ^{2n+1}(a) and
/// σ^{2n+1}(b) for 0 ≤ n < depth, together with the fixed point ω0, sorted
/// ascending and deduplicated at 4 ulp. The endpoints themselves are not
/// members unless an odd iterate happens to land on them.
#[derive(Debug, Clone, PartialEq)]
pub struct HahnInterval {
    a: f64,
    b: f64,
    depth: u32,
    points: Vec<f64>,
}

impl HahnInterval {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Lattice points, ascending, deduplicated, always containing ω0.
    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Materialize the sampling lattice of [a, b] down to `depth` odd iterates per endpoint.
pub fn build_interval(params: &HahnParams, a: f64, b: f64, depth: u32) -> Result<HahnInterval> {
    if !a.is_finite() || !b.is_finite() {
        return Err(HahnError::InvalidInterval(format!(
            "endpoints must be finite, got [{a}, {b}]"
        )));
    }
    if a >= b {
        return Err(HahnError::InvalidInterval(format!(
            "left endpoint must be strictly below right endpoint, got [{a}, {b}]"
        )));
    }
    if depth == 0 {
        return Err(HahnError::InvalidInterval("depth must be positive".into()));
    }

    let mut candidates = Vec::with_capacity(2 * depth as usize + 1);
    candidates.push(params.omega0());
    for endpoint in [a, b] {
        for n in 0..depth {
            candidates.push(params.sigma_pow(2 * n as i32 + 1, endpoint));
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).expect("lattice points are finite"));

    // Collapse runs of 4-ulp-equal values; a run containing ω0 collapses to
    // ω0 itself so the fixed-point fallback of the derivative triggers cleanly.
    let omega0 = params.omega0();
    let mut points: Vec<f64> = Vec::with_capacity(candidates.len());
    let mut run_start = 0;
    for i in 0..=candidates.len() {
        let run_continues =
            i < candidates.len() && same_point(candidates[run_start], candidates[i]);
        if !run_continues {
            let run = &candidates[run_start..i];
            let representative = if run.iter().any(|&p| same_point(p, omega0)) {
                omega0
            } else {
                run[0]
            };
            points.push(representative);
            run_start = i;
        }
    }

    Ok(HahnInterval {
        a,
        b,
        depth,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, omega: f64) -> HahnParams {
        HahnParams::new(q, omega).expect("valid test parameters")
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(HahnParams::new(0.0, 1.0).is_err());
        assert!(HahnParams::new(1.0, 1.0).is_err());
        assert!(HahnParams::new(-0.5, 1.0).is_err());
        assert!(HahnParams::new(1.5, 1.0).is_err());
        assert!(HahnParams::new(1.0 - 1e-13, 1.0).is_err());
        assert!(HahnParams::new(f64::NAN, 1.0).is_err());
        assert!(HahnParams::new(0.5, -0.1).is_err());
        assert!(HahnParams::new(0.5, f64::INFINITY).is_err());
        assert!(HahnParams::new(0.5, 0.0).is_ok());
        // 1.0 - 2e-12 survives the gate with float headroom; the literal
        // boundary 1.0 - 1e-12 rounds so that 1.0 - q lands just below 1e-12.
        assert!(HahnParams::new(1.0 - 2e-12, 1.0).is_ok());
    }

    #[test]
    fn fixed_point_matches_closed_form() {
        let p = params(0.5, 1.0);
        assert_eq!(p.omega0(), 2.0);
        let p = params(0.5, 0.0);
        assert_eq!(p.omega0(), 0.0);
        let p = params(0.25, 3.0);
        assert_eq!(p.omega0(), 4.0);
    }

    #[test]
    fn q_bracket_known_values() {
        let p = params(0.5, 1.0);
        assert_eq!(p.q_bracket(0), 0.0);
        assert_eq!(p.q_bracket(1), 1.0);
        assert_eq!(p.q_bracket(2), 1.5);
        assert_eq!(p.q_bracket(3), 1.75);
    }

    #[test]
    fn shifts_match_counterexample_arithmetic() {
        // q = 1/2, omega = 1: sigma(6) = 4, sigma_inv(6) = 10, sigma(4) = 3, sigma_inv(4) = 6.
        let p = params(0.5, 1.0);
        assert_eq!(p.sigma(6.0), 4.0);
        assert_eq!(p.sigma_inv(6.0), 10.0);
        assert_eq!(p.sigma(4.0), 3.0);
        assert_eq!(p.sigma_inv(4.0), 6.0);
        assert_eq!(p.sigma(2.0), 2.0);
        assert_eq!(p.sigma_inv(2.0), 2.0);
    }

    #[test]
    fn sigma_pow_agrees_with_iterated_shift() {
        // The closed form is the implementation; step-by-step composition is
        // the independent oracle.
        let cases = [
            (0.5_f64, 1.0_f64),
            (0.25, 0.0),
            (0.8, 2.0),
            (0.37, 0.41),
            (0.99, 1.7),
        ];
        for (q, omega) in cases {
            let p = params(q, omega);
            for t in [-3.0, 0.0, 0.7, 2.0, 6.0, 11.5] {
                for k in -12_i32..=12 {
                    let mut iterated = t;
                    for _ in 0..k.abs() {
                        iterated = if k >= 0 {
                            p.sigma(iterated)
                        } else {
                            p.sigma_inv(iterated)
                        };
                    }
                    let closed = p.sigma_pow(k, t);
                    let scale = iterated.abs().max(1.0);
                    assert!(
                        (closed - iterated).abs() <= 1e-12 * scale,
                        "sigma_pow({k}, {t}) with q={q}, omega={omega}: closed {closed} vs iterated {iterated}"
                    );
                }
            }
        }
    }

    #[test]
    fn sigma_gap_matches_direct_difference_away_from_fixed_point() {
        let p = params(0.37, 0.41);
        for t in [-2.0, 0.0, 1.0, 5.0, 9.3] {
            let direct = p.sigma(t) - p.sigma_inv(t);
            let gap = p.sigma_gap(t);
            assert!(
                (direct - gap).abs() <= 1e-12 * direct.abs().max(1.0),
                "gap mismatch at t={t}: {direct} vs {gap}"
            );
        }
    }

    #[test]
    fn sigma_gap_keeps_significance_near_fixed_point() {
        let p = params(0.5, 1.0);
        let t = 2.0 + 1e-13;
        // t - 2.0 is exact (Sterbenz) and (q - 1/q) = -1.5 is exact, so the
        // centered form carries full precision at this distance.
        let expected = (0.5 - 2.0) * (t - 2.0);
        let gap = p.sigma_gap(t);
        assert_eq!(gap, expected, "centered gap lost significance");
        // The naive difference sigma(t) - sigma_inv(t) rounds each shift at
        // ulp(2) and visibly pollutes a gap of magnitude ~1.5e-13.
        let naive = p.sigma(t) - p.sigma_inv(t);
        assert!(
            (naive / gap - 1.0).abs() > 1e-4,
            "expected the naive form to lose significance here: {naive} vs {gap}"
        );
    }

    #[test]
    fn interval_example_dyadic() {
        // q = 1/2, omega = 1, [2, 6], depth 2: orbit of 2 is the fixed point,
        // orbit of 6 contributes sigma(6) = 4 and sigma^3(6) = 2.5.
        let p = params(0.5, 1.0);
        let iv = build_interval(&p, 2.0, 6.0, 2).unwrap();
        assert_eq!(iv.points(), &[2.0, 2.5, 4.0]);
    }

    #[test]
    fn interval_example_omega_zero() {
        let p = params(0.5, 0.0);
        let iv = build_interval(&p, 0.0, 1.0, 1).unwrap();
        assert_eq!(iv.points(), &[0.0, 0.5]);
    }

    #[test]
    fn interval_always_contains_fixed_point() {
        // omega0 = 2 lies outside [3, 6] yet belongs to the lattice.
        let p = params(0.5, 1.0);
        let iv = build_interval(&p, 3.0, 6.0, 3).unwrap();
        assert!(iv.points().contains(&2.0));
        let mut sorted = iv.points().to_vec();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(sorted, iv.points());
    }

    #[test]
    fn interval_deduplicates_deep_orbit_collapse() {
        // At depth 40 with q = 0.2 the deep iterates round onto omega0 itself;
        // dedup must leave a strictly increasing point list containing omega0.
        let p = params(0.2, 1.6);
        let iv = build_interval(&p, 2.5, 7.0, 40).unwrap();
        assert!(iv.points().iter().any(|&x| x == p.omega0()));
        for w in iv.points().windows(2) {
            assert!(w[0] < w[1], "points not strictly increasing: {:?}", w);
        }
    }

    #[test]
    fn interval_rejects_bad_input() {
        let p = params(0.5, 1.0);
        assert!(build_interval(&p, 6.0, 2.0, 2).is_err());
        assert!(build_interval(&p, 2.0, 2.0, 2).is_err());
        assert!(build_interval(&p, 2.0, 6.0, 0).is_err());
        assert!(build_interval(&p, f64::NAN, 6.0, 2).is_err());
    }
}
