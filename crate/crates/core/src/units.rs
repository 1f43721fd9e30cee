//! Conversions between ordinary frequencies and the angular rates used
//! internally. Times are in ns, so angular rates are in rad/ns.

use std::f64::consts::TAU;

/// Angular rate (rad/ns) for an ordinary frequency in GHz.
pub fn from_ghz(f_ghz: f64) -> f64 {
    TAU * f_ghz
}

/// Angular rate (rad/ns) for an ordinary frequency in MHz.
pub fn from_mhz(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e-3
}

pub fn to_ghz(rate: f64) -> f64 {
    rate / TAU
}

pub fn to_mhz(rate: f64) -> f64 {
    rate / TAU * 1e3
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Reduce an angle modulo pi into [0, pi).
pub fn mod_pi(x: f64) -> f64 {
    use std::f64::consts::PI;
    let y = x.rem_euclid(PI);
    if y >= PI {
        0.0
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ghz_round_trip() {
        assert!((to_ghz(from_ghz(2.8)) - 2.8).abs() < 1e-15);
        assert!((to_mhz(from_mhz(37.8)) - 37.8).abs() < 1e-12);
        assert!((from_ghz(1.0) - from_mhz(1000.0)).abs() < 1e-12);
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((mod_pi(1.3 * PI) - 0.3 * PI).abs() < 1e-12);
        assert!((mod_pi(-0.25 * PI) - 0.75 * PI).abs() < 1e-12);
    }
}
