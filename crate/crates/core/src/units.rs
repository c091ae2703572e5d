//! Physical constants and decibel helpers shared by every stage.

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference noise temperature (K).
pub const T0_KELVIN: f64 = 290.0;

/// Lowest level reported for a zero-valued sample, so that dB outputs stay finite.
pub const DB_FLOOR: f64 = -300.0;

#[inline]
pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// `10·log10(p)`, clamped to [`DB_FLOOR`].
#[inline]
pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// `20·log10(a)`, clamped to [`DB_FLOOR`].
#[inline]
pub fn amplitude_to_db(a: f64) -> f64 {
    if a > 0.0 {
        (20.0 * a.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Thermal noise power in dBm over `bandwidth_hz` for a receiver with the given noise figure.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    power_to_db(BOLTZMANN * T0_KELVIN * bandwidth_hz * 1e3) + noise_figure_db
}

/// Median of `v` (mean of the two middle values for even lengths, 0 when empty).
pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}
