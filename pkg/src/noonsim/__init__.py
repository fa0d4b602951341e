"""NOON states of microwave photons on two resonators via a ladder qutrit.

Modules, bottom up: ``hilbert`` (basis and operators), ``hamiltonian``
(segment generators), ``protocol`` (schedule compiler and timing),
``oracle`` (closed-form ideal gates), ``dynamics`` (exact propagation and an
RK4 cross-check), ``analysis`` (fidelity, reduced states, run report),
``config``/``cli`` (YAML runs and file outputs).
"""
from .analysis import fidelity, photon_statistics, purity, reduced_state
from .dynamics import Mode, RunConfig, cross_validate, propagate_segment, run_schedule
from .hamiltonian import DeviceParams, build_drive, build_static, to_rotating_frame
from .hilbert import BasisLabel, Level, Slot, SpaceConfig, Transition, basis_index, initial_state
from .oracle import expected_state, ideal_pi_pulse, ideal_swap, noon_state
from .protocol import ProtocolSpec, compile_schedule, phase_correction_angles, timing

__version__ = "0.1.0"
