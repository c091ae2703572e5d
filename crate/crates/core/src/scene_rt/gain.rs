use std::f64::consts::PI;

use crate::units::SPEED_OF_LIGHT;

/// Free-space path loss in dB, `20·log10(4π·d·f/c)`.
pub fn fspl_db(path_length: f64, carrier_freq: f64) -> f64 {
    20.0 * (4.0 * PI * path_length * carrier_freq / SPEED_OF_LIGHT).log10()
}

/// Received-to-transmitted power ratio of one tap in dB.
///
/// `l_ref_total_db` is the sum of the per-bounce surface losses along the path.
pub fn path_gain_db(
    path_length: f64,
    carrier_freq: f64,
    g_tx_db: f64,
    g_rx_db: f64,
    l_sys_db: f64,
    l_ref_total_db: f64,
) -> f64 {
    g_tx_db + g_rx_db - fspl_db(path_length, carrier_freq) - l_sys_db - l_ref_total_db
}
