//! One realization of each detector protocol on a pulse schedule.

use crate::error::{Error, Result};
use crate::noise::PulseSchedule;
use crate::pulse::{
    beam_splitter, composed_pulse, pifm_absorbing_channel, pifm_measure_channel, AbsorbingState,
    BeamSplitterSpec,
};
use crate::quantum::{apply_unitary, apply_unitary_dm, DensityMatrix, Dim, Populations, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Qubit,
    Cifm,
    Pifm,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Qubit, Protocol::Cifm, Protocol::Pifm];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Qubit => "qubit",
            Protocol::Cifm => "cifm",
            Protocol::Pifm => "pifm",
        }
    }

    /// Runs from the ground state (|g⟩ or |0⟩).
    pub fn run(self, schedule: &PulseSchedule) -> Result<ProtocolResult> {
        match self {
            Protocol::Qubit => run_qubit(schedule, &PureState::basis(Dim::Two, 0)?),
            Protocol::Cifm => run_cifm(schedule, &PureState::basis(Dim::Three, 0)?),
            Protocol::Pifm => run_pifm(
                schedule,
                &DensityMatrix::from_pure(&PureState::basis(Dim::Three, 0)?),
            ),
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("protocol", format!("unknown protocol `{s}`")))
    }
}

/// Final populations and the marker: p_e for the qubit, p0 for the qutrit.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolResult {
    pub populations: Vec<f64>,
    pub marker: f64,
}

impl ProtocolResult {
    fn qubit(populations: Vec<f64>) -> Self {
        let marker = populations[1];
        ProtocolResult {
            populations,
            marker,
        }
    }

    fn qutrit(populations: Vec<f64>) -> Self {
        let marker = populations[0];
        ProtocolResult {
            populations,
            marker,
        }
    }
}

fn require(dim: Dim, actual: Dim) -> Result<()> {
    if dim == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim.size(),
            actual: actual.size(),
        })
    }
}

/// Qubit detector: the N pulses act directly on the g–e transition.
pub fn run_qubit(schedule: &PulseSchedule, initial: &PureState) -> Result<ProtocolResult> {
    require(Dim::Two, initial.dim())?;
    let mut psi = initial.clone();
    for pulse in schedule.pulses() {
        psi = apply_unitary(&composed_pulse(pulse, Dim::Two)?, &psi)?;
    }
    Ok(ProtocolResult::qubit(psi.populations()))
}

/// S(φ_N)[B_N S(φ_N)]…[B_1 S(φ_N)] applied to the initial state.
pub fn run_cifm(schedule: &PulseSchedule, initial: &PureState) -> Result<ProtocolResult> {
    require(Dim::Three, initial.dim())?;
    let s = beam_splitter(&BeamSplitterSpec::new(schedule.n())?);
    let mut psi = apply_unitary(&s, initial)?;
    for pulse in schedule.pulses() {
        psi = apply_unitary(&composed_pulse(pulse, Dim::Three)?, &psi)?;
        psi = apply_unitary(&s, &psi)?;
    }
    Ok(ProtocolResult::qutrit(psi.populations()))
}

/// pIFM: |2⟩ is measured after every pulse; weight found there is removed
/// from the coherent dynamics and reported in p2.
pub fn run_pifm(schedule: &PulseSchedule, initial: &DensityMatrix) -> Result<ProtocolResult> {
    require(Dim::Three, initial.dim())?;
    let s = beam_splitter(&BeamSplitterSpec::new(schedule.n())?);
    let mut state = AbsorbingState::new(initial)?.evolve(&s)?;
    for pulse in schedule.pulses() {
        state = state.evolve(&composed_pulse(pulse, Dim::Three)?)?;
        state = pifm_absorbing_channel(&state).evolve(&s)?;
    }
    Ok(ProtocolResult::qutrit(state.populations().to_vec()))
}

/// pIFM variant with the nonselective channel P₂ρP₂ + P₀₁ρP₀₁, where the
/// |2⟩ population stays in the dynamics.
pub fn run_pifm_nonselective(schedule: &PulseSchedule, initial: &DensityMatrix) -> Result<ProtocolResult> {
    require(Dim::Three, initial.dim())?;
    let s = beam_splitter(&BeamSplitterSpec::new(schedule.n())?);
    let mut rho = apply_unitary_dm(&s, initial)?;
    for pulse in schedule.pulses() {
        rho = apply_unitary_dm(&composed_pulse(pulse, Dim::Three)?, &rho)?;
        rho = apply_unitary_dm(&s, &pifm_measure_channel(&rho)?)?;
    }
    Ok(ProtocolResult::qutrit(rho.populations()))
}
