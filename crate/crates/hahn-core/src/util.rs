//! Floating-point comparison helpers shared across the engine.
//!
//! Equality of lattice points is decided in units in the last place rather
//! than with an absolute epsilon, so the same rule works at every scale the
//! lattice reaches (points contract geometrically toward the fixed point).

/// Size of one unit in the last place at `x`.
pub fn ulp(x: f64) -> f64 {
    let ax = x.abs();
    if !ax.is_finite() {
        return f64::INFINITY;
    }
    let up = ax.next_up();
    if up.is_finite() {
        up - ax
    } else {
        ax - ax.next_down()
    }
}

/// True when `a` and `b` differ by at most `n` ulp (measured at the larger magnitude).
pub fn within_ulps(a: f64, b: f64, n: u32) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= f64::from(n) * ulp(a.abs().max(b.abs()))
}

/// The engine-wide lattice-point equality: within 4 ulp.
pub fn same_point(a: f64, b: f64) -> bool {
    within_ulps(a, b, 4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_is_positive_and_tiny() {
        assert!(ulp(1.0) > 0.0);
        assert_eq!(ulp(1.0), f64::EPSILON);
        assert!(ulp(2.0) == 2.0 * f64::EPSILON);
        assert!(ulp(0.0) > 0.0);
    }

    #[test]
    fn same_point_accepts_nearby_and_rejects_distant() {
        let x = 2.0_f64;
        assert!(same_point(x, x));
        assert!(same_point(x, x + 3.0 * ulp(x)));
        assert!(!same_point(x, x + 5.0 * ulp(x)));
        assert!(!same_point(x, 2.1));
        assert!(!same_point(f64::NAN, f64::NAN));
    }

    #[test]
    fn same_point_is_scale_aware() {
        let big = 1.0e12;
        assert!(same_point(big, big + ulp(big)));
        assert!(!same_point(1.0e-12, 2.0e-12));
    }
}
