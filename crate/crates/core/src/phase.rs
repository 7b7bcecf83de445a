//! Roots of unity with the exponent reduced before evaluation.

use std::f64::consts::TAU;

use crate::C64;

/// `exp(2 pi i k / d)`, with `k` reduced mod `d` so large exponents stay exact.
pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let d = d as i64;
    let r = k.rem_euclid(d);
    match (r, d) {
        (0, _) => C64::new(1.0, 0.0),
        (r, d) if 2 * r == d => C64::new(-1.0, 0.0),
        (r, d) if 4 * r == d => C64::new(0.0, 1.0),
        (r, d) if 4 * r == 3 * d => C64::new(0.0, -1.0),
        _ => C64::from_polar(1.0, TAU * r as f64 / d as f64),
    }
}

/// Qutrit phase `omega^k` with `omega = exp(2 pi i / 3)`.
pub fn omega(k: i64) -> C64 {
    root_of_unity(3, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_cubes_to_one() {
        let w = omega(1);
        let w3 = w * w * w;
        assert!((w3 - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((omega(2) - w.conj()).norm() < 1e-15);
        assert_eq!(omega(-1), omega(2));
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(root_of_unity(4, 1), C64::new(0.0, 1.0));
        assert_eq!(root_of_unity(4, 6), C64::new(-1.0, 0.0));
        assert_eq!(root_of_unity(4, 3), C64::new(0.0, -1.0));
    }
}
