"""Named parameter sets and initial states used throughout the test suite.

Two reference regimes, both in units delta_c = 1:

  set "a": deep-detuning, very weak bare coupling, strong squeezing (r = 4);
           chaos diagnostics run on the E = 0.018 energy shell.
  set "b": moderate detuning and coupling with r = 2; diagnostics run on the
           E = 0.75 energy shell.

Initial product states are labelled by their coherent-state parameters
(tau for the qubit, beta for the cavity):

  C1 / C2: seeds inside the chaotic sea of the respective section,
  R1 / R2: seeds on regular rings,
  plus_vac: sigma_x eigenstate times the cavity vacuum (correlator runs).
"""

from dataclasses import dataclass

from .model import SystemParams

PARAMETER_SETS = {
    "a": SystemParams(delta_a=0.02, g=2e-4, r=4.0),
    "b": SystemParams(delta_a=0.75, g=0.0375, r=2.0),
}

SHELL_ENERGIES = {"a": 0.018, "b": 0.75}


@dataclass(frozen=True)
class InitialStatePreset:
    name: str
    tau: complex
    beta: complex
    parameter_set: str
    description: str


INITIAL_STATES = {
    "C1": InitialStatePreset(
        name="C1", tau=0.825 + 0j, beta=5.4461j, parameter_set="a",
        description="chaotic-sea seed on the E=0.018 shell of set a"),
    "R1": InitialStatePreset(
        name="R1", tau=7.0 + 0j, beta=3.5384j, parameter_set="a",
        description="regular-ring seed on the E=0.018 shell of set a"),
    "C2": InitialStatePreset(
        name="C2", tau=0.0999 + 0.4081j, beta=5.3065j, parameter_set="b",
        description="chaotic-sea seed on the E=0.75 shell of set b"),
    "R2": InitialStatePreset(
        name="R2", tau=-0.9419 + 1.4653j, beta=3.9644j, parameter_set="b",
        description="regular-ring seed on the E=0.75 shell of set b"),
    "plus_vac": InitialStatePreset(
        name="plus_vac", tau=1.0 + 0j, beta=0j, parameter_set="a",
        description="sigma_x eigenstate (|G>+|E>)/sqrt(2) times the vacuum"),
}


def get_params(name: str) -> SystemParams:
    try:
        return PARAMETER_SETS[name]
    except KeyError:
        raise KeyError(f"unknown parameter set {name!r}; available: "
                       f"{sorted(PARAMETER_SETS)}") from None


def get_initial_state(name: str) -> InitialStatePreset:
    try:
        return INITIAL_STATES[name]
    except KeyError:
        raise KeyError(f"unknown initial-state preset {name!r}; available: "
                       f"{sorted(INITIAL_STATES)}") from None
