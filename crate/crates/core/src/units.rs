//! Physical constants and unit conversions. Energies are in eV, times in
//! eV⁻¹ (ħ = 1).

/// Boltzmann constant in eV/K.
pub const K_B: f64 = 8.617333262e-5;

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// Inverse temperature β = 1/(k_B T) in eV⁻¹.
pub fn beta(t_kelvin: f64) -> f64 {
    1.0 / (K_B * t_kelvin)
}

pub fn ps_to_inv_ev(ps: f64) -> f64 {
    ps * 1000.0 / HBAR_EV_FS
}

pub fn inv_ev_to_ps(t: f64) -> f64 {
    t * HBAR_EV_FS / 1000.0
}

/// Converts a rate in eV per eV⁻¹ of time into eV/fs.
pub fn rate_to_ev_per_fs(rate: f64) -> f64 {
    rate / HBAR_EV_FS
}

/// Bose–Einstein occupation 1/(e^{βΔ} − 1) for Δ > 0.
pub fn bose(beta: f64, gap: f64) -> f64 {
    1.0 / (beta * gap).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_energy_at_room_temperature() {
        assert!((K_B * 300.0 - 0.0258520).abs() < 1e-6);
    }

    #[test]
    fn figure_horizons() {
        assert!((ps_to_inv_ev(8.27) - 12_564.34).abs() < 0.01);
        assert!((ps_to_inv_ev(827.0) - 1_256_434.18).abs() < 1.0);
        assert!((inv_ev_to_ps(ps_to_inv_ev(3.5)) - 3.5).abs() < 1e-12);
    }
}
