//! Physical constants (CODATA 2018 exact or recommended values) and the
//! derived scales used throughout the crate.

/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Reduced Planck constant in eV·fs; converts `eV·nm` current numerators to nm/fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;
/// Free electron mass in kg.
pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
/// Elementary charge in C.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV_K: f64 = 8.617_333_262e-5;

/// `ħ²/(2 m* )` in eV·nm² for an effective mass given in units of the free
/// electron mass.
pub fn hbar2_over_2m(m_eff: f64) -> f64 {
    HBAR_J_S * HBAR_J_S / (2.0 * m_eff * ELECTRON_MASS_KG) / ELEMENTARY_CHARGE_C * 1e18
}

/// Multiplies `(nm/fs)·nm⁻³` (a flux density of probability current) by the
/// elementary charge to give A/m².
pub const CURRENT_DENSITY_A_PER_M2: f64 = ELEMENTARY_CHARGE_C * 1e18 * 1e15;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaas_kinetic_scale() {
        // ħ²/(2 m_e) = 3.80998 eV·Å²
        let free = hbar2_over_2m(1.0);
        assert!((free - 0.038_099_82).abs() < 1e-7, "{free}");
        let gaas = hbar2_over_2m(0.067);
        assert!((gaas - 0.568_654).abs() < 1e-5, "{gaas}");
    }

    #[test]
    fn hbar_units_agree() {
        assert!((HBAR_J_S / ELEMENTARY_CHARGE_C / HBAR_EV_S - 1.0).abs() < 1e-9);
        assert!((HBAR_EV_S * 1e15 / HBAR_EV_FS - 1.0).abs() < 1e-12);
    }
}
