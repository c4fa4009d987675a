//! Dumbbell-core induction coil: effective permeability, induced voltage and
//! the power it delivers into a load.
//!
//! All field and voltage quantities are RMS magnitudes; the 90° phase lead
//! of the induced voltage is not tracked since only power is used downstream.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::magnetics::{FieldStrength, MU0};

/// Default loss-tangent threshold below which hysteresis is treated as negligible.
pub const DEFAULT_LOSS_TANGENT_THRESHOLD: f64 = 1e-3;

/// Magnetic core material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreMaterial {
    pub mu_r: f64,
    /// Ohm-metres.
    pub resistivity: f64,
    /// Upper bound on the magnetic loss tangent.
    pub loss_tangent: f64,
}

impl CoreMaterial {
    /// Ferroxcube 4B1 ferrite.
    pub const FERRITE_4B1: CoreMaterial = CoreMaterial {
        mu_r: 250.0,
        resistivity: 1.0e5,
        loss_tangent: 90.0e-6,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_r >= 1.0) {
            return Err(Error::domain(format!(
                "mu_r must be >= 1, got {}",
                self.mu_r
            )));
        }
        if !(self.resistivity > 0.0) {
            return Err(Error::domain(format!(
                "resistivity must be > 0 ohm*m, got {}",
                self.resistivity
            )));
        }
        if !(self.loss_tangent >= 0.0) {
            return Err(Error::domain(format!(
                "loss tangent must be >= 0, got {}",
                self.loss_tangent
            )));
        }
        Ok(())
    }
}

/// Harvester coil wound on a finite open core.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSpec {
    pub turns: u32,
    /// Mean enclosed core area, m².
    pub area: f64,
    /// Winding resistance, ohms.
    pub resistance: f64,
    /// Henries. Carried for reference; the matched-load model assumes the
    /// reactance is compensated.
    pub inductance: f64,
    pub material: CoreMaterial,
    pub mu_e: f64,
    /// Diameter of a single core rod, m.
    pub rod_diameter: f64,
}

/// Names accepted by [`CoilSpec::preset`].
pub const PRESET_NAMES: [&str; 2] = ["coil-a", "coil-b"];

impl CoilSpec {
    /// Seven 4B1 rods between steel end disks.
    pub fn coil_a() -> Self {
        Self {
            turns: 80_000,
            area: 590.0e-6,
            resistance: 17.2e3,
            inductance: 1000.0,
            material: CoreMaterial::FERRITE_4B1,
            mu_e: 23.5,
            rod_diameter: 8.0e-3,
        }
    }

    /// Three 4B1 rods between steel end disks.
    pub fn coil_b() -> Self {
        Self {
            turns: 62_000,
            area: 334.0e-6,
            resistance: 9.2e3,
            inductance: 500.0,
            material: CoreMaterial::FERRITE_4B1,
            mu_e: 31.3,
            rod_diameter: 8.0e-3,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "coil-a" => Some(Self::coil_a()),
            "coil-b" => Some(Self::coil_b()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if self.turns < 1 {
            return Err(Error::domain("coil needs at least one turn"));
        }
        if !(self.area > 0.0) {
            return Err(Error::domain(format!(
                "core area must be > 0 m2, got {}",
                self.area
            )));
        }
        if !(self.resistance > 0.0) {
            return Err(Error::domain(format!(
                "coil resistance must be > 0 ohm, got {}",
                self.resistance
            )));
        }
        if !(self.inductance >= 0.0) {
            return Err(Error::domain(format!(
                "inductance must be >= 0 H, got {}",
                self.inductance
            )));
        }
        if !(self.mu_e >= 1.0 && self.mu_e <= self.material.mu_r) {
            return Err(Error::domain(format!(
                "mu_e must lie in [1, {}], got {}",
                self.material.mu_r, self.mu_e
            )));
        }
        if !(self.rod_diameter >= 0.0) {
            return Err(Error::domain(format!(
                "rod diameter must be >= 0 m, got {}",
                self.rod_diameter
            )));
        }
        Ok(())
    }

    /// `N·A·μe·μ0`, the voltage per unit `ω·H`.
    pub fn coupling(&self) -> f64 {
        self.turns as f64 * self.area * self.mu_e * MU0
    }

    /// `(N·A·μe)² / R`; at fixed geometry and frequency the matched-load
    /// power of different coils is proportional to this figure.
    pub fn figure_of_merit(&self) -> f64 {
        let nam = self.turns as f64 * self.area * self.mu_e;
        nam * nam / self.resistance
    }
}

/// Internal state of a linear core in a uniform applied field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemagState {
    pub n_d: f64,
    /// Magnetisation, A/m.
    pub magnetisation: f64,
    /// Field inside the core, A/m.
    pub h_core: f64,
    /// Flux density inside the core, T.
    pub b_core: f64,
}

impl DemagState {
    /// Solves `H_c = H_0 − N_d·M` together with the linear response
    /// `M = (μr − 1)·H_c`.
    pub fn solve(h_applied: f64, mu_r: f64, n_d: f64) -> Result<Self> {
        check_mu_r(mu_r)?;
        check_n_d(n_d)?;
        let chi = mu_r - 1.0;
        let h_core = h_applied / (1.0 + n_d * chi);
        let magnetisation = chi * h_core;
        Ok(Self {
            n_d,
            magnetisation,
            h_core,
            b_core: MU0 * (h_core + magnetisation),
        })
    }
}

fn check_mu_r(mu_r: f64) -> Result<()> {
    if !(mu_r >= 1.0) || !mu_r.is_finite() {
        return Err(Error::domain(format!("mu_r must be >= 1, got {mu_r}")));
    }
    Ok(())
}

fn check_n_d(n_d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&n_d) {
        return Err(Error::domain(format!(
            "demagnetisation factor must lie in [0, 1], got {n_d}"
        )));
    }
    Ok(())
}

/// `μr / (1 + N_d (μr − 1))`.
pub fn effective_permeability(mu_r: f64, n_d: f64) -> Result<f64> {
    check_mu_r(mu_r)?;
    check_n_d(n_d)?;
    Ok(mu_r / (1.0 + n_d * (mu_r - 1.0)))
}

/// Demagnetisation factor that yields `mu_e` for a core of material `mu_r`.
pub fn demag_factor(mu_r: f64, mu_e: f64) -> Result<f64> {
    check_mu_r(mu_r)?;
    if mu_r == 1.0 {
        return Err(Error::domain(
            "demagnetisation factor is undefined for mu_r = 1",
        ));
    }
    if !(mu_e >= 1.0 && mu_e <= mu_r) {
        return Err(Error::domain(format!(
            "mu_e must lie in [1, {mu_r}], got {mu_e}"
        )));
    }
    Ok((mu_r / mu_e - 1.0) / (mu_r - 1.0))
}

/// Flux density in the core, T RMS.
pub fn core_flux_density(mu_e: f64, h0: &FieldStrength) -> f64 {
    mu_e * MU0 * h0.h_rms
}

/// Magnitude of the induced open-circuit voltage, V RMS.
pub fn open_circuit_voltage(coil: &CoilSpec, h0: &FieldStrength, frequency: f64) -> f64 {
    coil.coupling() * 2.0 * PI * frequency * h0.h_rms
}

/// Power into a load matched to the coil resistance with the reactance compensated.
pub fn matched_load_power(coil: &CoilSpec, h0: &FieldStrength, frequency: f64) -> f64 {
    let v = open_circuit_voltage(coil, h0, frequency);
    v * v / (4.0 * coil.resistance)
}

/// Power into a resistive load `r_load` driven through the coil resistance.
pub fn load_power(v_oc: f64, r_coil: f64, r_load: f64) -> Result<f64> {
    if !(r_coil > 0.0) || !(r_load > 0.0) {
        return Err(Error::domain(format!(
            "resistances must be > 0 ohm, got coil {r_coil}, load {r_load}"
        )));
    }
    let total = r_coil + r_load;
    Ok(v_oc * v_oc * r_load / (total * total))
}

/// Empirical eddy-current loss of a conducting cylinder,
/// `π² B_p² d² f² / (16 ρ)`.
///
/// The figure is returned exactly as the empirical expression gives it,
/// which reads as a loss per unit volume (W/m³) when every input is in SI
/// units. It is a diagnostic and is never subtracted from the harvested power.
pub fn eddy_loss(b_peak: f64, rod_diameter: f64, frequency: f64, resistivity: f64) -> Result<f64> {
    if !(resistivity > 0.0) {
        return Err(Error::domain(format!(
            "resistivity must be > 0 ohm*m, got {resistivity}"
        )));
    }
    if b_peak < 0.0 || rod_diameter < 0.0 || frequency < 0.0 {
        return Err(Error::domain(
            "flux density, diameter and frequency must be >= 0",
        ));
    }
    Ok(
        PI * PI * b_peak * b_peak * rod_diameter * rod_diameter * frequency * frequency
            / (16.0 * resistivity),
    )
}

/// Outcome of the linear-response check on a core material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisCheck {
    pub negligible: bool,
    /// Threshold the loss tangent was compared against.
    pub bound: f64,
}

pub fn hysteresis_negligible(material: &CoreMaterial) -> HysteresisCheck {
    hysteresis_negligible_with(material, DEFAULT_LOSS_TANGENT_THRESHOLD)
}

pub fn hysteresis_negligible_with(material: &CoreMaterial, threshold: f64) -> HysteresisCheck {
    HysteresisCheck {
        negligible: material.loss_tangent < threshold,
        bound: threshold,
    }
}
