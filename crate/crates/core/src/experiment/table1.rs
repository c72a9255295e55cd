//! The twelve N = 4 π-pulse configurations and their marker populations.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::noise::PulseSchedule;
use crate::protocol::Protocol;

use super::presets::AMPLITUDE_AXIS;

const P: f64 = PI;
const M: f64 = -PI;

pub const TABLE1_CONFIGS: [[f64; 4]; 12] = [
    [P, P, 0.0, 0.0],
    [P, 0.0, P, 0.0],
    [P, 0.0, 0.0, P],
    [0.0, P, P, 0.0],
    [0.0, P, 0.0, P],
    [0.0, 0.0, P, P],
    [P, P, M, M],
    [P, M, P, M],
    [P, M, M, P],
    [M, P, P, M],
    [M, P, M, P],
    [M, M, P, P],
];

/// Reference (cIFM, pIFM) values to three decimals.
pub const TABLE1_REFERENCE: [(f64, f64); 12] = [
    (0.611, 0.283),
    (0.646, 0.387),
    (0.393, 0.283),
    (0.937, 0.387),
    (0.646, 0.387),
    (0.611, 0.283),
    (0.599, 0.605),
    (0.183, 0.605),
    (0.361, 0.605),
    (0.361, 0.605),
    (0.183, 0.605),
    (0.599, 0.605),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub label: String,
    pub thetas: [f64; 4],
    pub cifm: f64,
    pub pifm: f64,
    pub reference_cifm: f64,
    pub reference_pifm: f64,
}

pub fn round3(x: f64) -> String {
    format!("{x:.3}")
}

impl Table1Row {
    pub fn cifm_matches(&self) -> bool {
        round3(self.cifm) == round3(self.reference_cifm)
    }

    pub fn pifm_matches(&self) -> bool {
        round3(self.pifm) == round3(self.reference_pifm)
    }
}

fn label(thetas: &[f64; 4]) -> String {
    let parts: Vec<&str> = thetas
        .iter()
        .map(|&t| {
            if t == 0.0 {
                "0"
            } else if t > 0.0 {
                "pi"
            } else {
                "-pi"
            }
        })
        .collect();
    format!("({})", parts.join(" "))
}

/// Evaluates all configurations with axes φ_j = −π/2, starting from |0⟩.
pub fn table1() -> Result<Vec<Table1Row>> {
    TABLE1_CONFIGS
        .iter()
        .zip(TABLE1_REFERENCE)
        .map(|(thetas, (rc, rp))| {
            let schedule = PulseSchedule::from_angles_fixed_axis(thetas, AMPLITUDE_AXIS)?;
            Ok(Table1Row {
                label: label(thetas),
                thetas: *thetas,
                cifm: Protocol::Cifm.run(&schedule)?.marker,
                pifm: Protocol::Pifm.run(&schedule)?.marker,
                reference_cifm: rc,
                reference_pifm: rp,
            })
        })
        .collect()
}
