//! Closed-form oracles and seeded property sweeps shared by the
//! integration targets. Oracles are written from the formulas directly and
//! never call into the library.

#![allow(dead_code)]

pub mod properties;

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Manià problem `L = (z³ − s)² v⁶`, `y = ∛s`, reparametrized with the
/// initial end point fixed.
pub mod mania {
    pub fn y(s: f64) -> f64 {
        s.cbrt()
    }

    /// End of the fast set `{y' > ν}`.
    pub fn tau0(nu: f64) -> f64 {
        (1.0 / (3.0 * nu)).powf(1.5)
    }

    /// `φ_ν(τ₀)`.
    pub fn s0(nu: f64) -> f64 {
        1.0 / (3f64.sqrt() * nu.powf(1.5))
    }

    /// `s0 − τ0 = 2 / (3√3 ν^{3/2})`.
    pub fn shift(nu: f64) -> f64 {
        2.0 / (3.0 * 3f64.sqrt() * nu.powf(1.5))
    }

    pub fn y_nu(nu: f64, s: f64) -> f64 {
        if s <= s0(nu) {
            nu * s
        } else {
            (s - shift(nu)).cbrt()
        }
    }

    /// The closed form `68 ν^{3/2} / (945 √3)` displayed for `F(y_ν)`.
    pub fn displayed_energy(nu: f64) -> f64 {
        68.0 * nu.powf(1.5) / (945.0 * 3f64.sqrt())
    }

    /// `∫_0^{s0} ((νs)³ − s)² ν⁶ ds`, the energy of the linear piece alone.
    pub fn fast_piece_energy(nu: f64) -> f64 {
        let s = s0(nu);
        nu.powi(6) * (nu.powi(6) * s.powi(7) / 7.0 - 2.0 * nu.powi(3) * s.powi(5) / 5.0 + s.powi(3) / 3.0)
    }

    /// `‖y_ν' − y'‖₁` split as (linear piece) + (shifted piece).
    pub fn w11_terms(nu: f64) -> (f64, f64) {
        let (t0, s) = (tau0(nu), s0(nu));
        let first = 2.0 * y(t0) - 2.0 * nu * t0 + nu * s - y(s);
        let second = (y(1.0 - shift(nu)) - 1.0) + (y(s) - y(t0));
        (first, second)
    }

    /// The upper bound `1/√(3ν) + 1/(3^{1/6} √ν)` on the linear-piece term.
    pub fn w11_first_bound(nu: f64) -> f64 {
        1.0 / (3.0 * nu).sqrt() + 1.0 / (3f64.powf(1.0 / 6.0) * nu.sqrt())
    }
}

/// Alberti problem with `y = 1 − √(1 − s)`, reparametrized with the final
/// end point fixed.
pub mod alberti {
    pub fn t_nu(nu: f64) -> f64 {
        1.0 - 1.0 / (4.0 * nu * nu)
    }

    pub fn phi_t_nu(nu: f64) -> f64 {
        1.0 - 1.0 / (2.0 * nu * nu)
    }

    /// `y_ν` on `[φ(t_ν), 1]`.
    pub fn tail(nu: f64, s: f64) -> f64 {
        1.0 + s * nu - nu
    }
}
