# Copyright 2021 cqedpy developers

# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at

#     http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Four step CPHASE protocol for two flux qubits sharing one resonator.

Frequencies are stored as f = omega / 2 pi in GHz and times in ns; the factor 2 pi is
applied once, when a Hamiltonian or a phase is assembled. The two-qubit Hamiltonian of a
step is

    H / hbar = sum_i w_qi / 2 sz_i + sum_n w_n a_n^dag a_n
               - sum_i sum_n g_in (a_n + a_n^dag) (c_z,i sz_i + c_x,i sx_i)

with g_in = g_i cos(pi f3_i) (Delta psi_n / Delta psi_1) and f3_i the coupler flux of qubit
i during the step.
"""

import math
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np
from loguru import logger

from cqedpy.circuit.junction import flux_cosine
from cqedpy.operators.algebra import (
    OperatorMatrix,
    SpaceShape,
    StateVector,
    annihilation,
    apply_propagator,
    basis_state,
    displacement,
    eigendecompose,
    fock_factor,
    fock_populations,
    free_rotation,
    plus_state,
    product_state,
    qubit_cavity_shape,
    qubit_factor,
    qubit_projector,
    reduced_density_matrix,
    tensor,
)
from cqedpy.utils.exceptions import (
    ConfigError,
    InvalidArgumentError,
    NumericalFailureError,
    TruncationError,
    UnsatisfiableConditionError,
    UnsupportedError,
)

CPHASE_THRESHOLD = math.pi / 16
TAIL_LEVELS = 5
NORM_TOLERANCE = 1e-10
RAMP_SUBSTEPS = 100
RAMP_CONVERGENCE = 1e-8
MAX_HALVINGS = 8
UNITARITY_TOLERANCE = 1e-8
MAX_DENSE_DIMENSION = 7000

STANDARD_FLUX_SETTINGS = ((0.0, 0.5), (0.5, 0.0), (0.0, 0.5), (0.5, 0.0))
ALLOWED_FLUX = (0.0, 0.5, 1.0)

INITIAL_STATES = ("plus_plus", "ee", "eg", "ge", "gg")

PROTOCOL_SETTINGS_DEFAULTS = {
    "resonator_frequency_ghz": 8.01,
    "g_over_wr": [0.509, 0.509],
    "qubit_frequency_up_ghz": [10.94, 10.94],
    "qubit_frequency_down_ghz": [10.99, 10.99],
    "c_z": [1.0, 1.0],
    "c_x": [0.04, 0.04],
    "c_x_flipped": [0.135, 0.135],
    "n_modes": 1,
    "n_trunc": 30,
    "n_trunc_higher": 10,
    "truncation_tolerance": 1e-6,
    "multimode_n_trunc": 15,
    "multimode_truncation_tolerance": 1e-4,
    "ramp_time_ns": 0.0,
    "t1_ns": None,
    "step_flux_settings": [list(step) for step in STANDARD_FLUX_SETTINGS],
    "initial_state": "plus_plus",
}


def _pair(values, name):
    values = tuple(float(v) for v in values)
    if len(values) != 2:
        raise InvalidArgumentError(f"{name} needs one value per qubit, got {len(values)}")
    return values


@dataclass(frozen=True)
class GateParams:
    """
    Parameters of the two-qubit dynamics. Per qubit pairs are ordered (qubit 1, qubit 2).
    Couplings are signed and may exceed the resonator frequency.

    `transverse` is the c_x weight used while a qubit sits at f3 = 0, `transverse_flipped`
    the one used at f3 = 1. Higher modes (n_modes > 1) take their frequencies and the
    coupling scale Delta psi_n / Delta psi_1 from a solved ModeSet, see with_modes.
    """

    resonator_frequency_ghz: float
    couplings_ghz: tuple
    qubit_frequencies_up_ghz: tuple
    qubit_frequencies_down_ghz: tuple
    longitudinal: tuple = (1.0, 1.0)
    transverse: tuple = (0.0, 0.0)
    transverse_flipped: tuple = (0.0, 0.0)
    n_modes: int = 1
    n_trunc: int = 30
    n_trunc_higher: int = 10
    higher_mode_frequencies_ghz: tuple = ()
    higher_mode_coupling_scales: tuple = ()
    truncation_tolerance: float = 1e-6

    def __post_init__(self):
        for name in (
            "couplings_ghz",
            "qubit_frequencies_up_ghz",
            "qubit_frequencies_down_ghz",
            "longitudinal",
            "transverse",
            "transverse_flipped",
        ):
            object.__setattr__(self, name, _pair(getattr(self, name), name))
        for name in ("higher_mode_frequencies_ghz", "higher_mode_coupling_scales"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

        if not self.resonator_frequency_ghz > 0:
            raise InvalidArgumentError("resonator_frequency_ghz must be positive")
        if self.n_modes not in (1, 2, 3):
            raise InvalidArgumentError(f"n_modes must be 1, 2 or 3, got {self.n_modes}")
        for name in ("higher_mode_frequencies_ghz", "higher_mode_coupling_scales"):
            if len(getattr(self, name)) != self.n_modes - 1:
                raise InvalidArgumentError(
                    f"{name} needs {self.n_modes - 1} entries for {self.n_modes} modes"
                )
        if min(self.n_trunc, self.n_trunc_higher) <= TAIL_LEVELS:
            raise InvalidArgumentError(f"Fock truncations must exceed {TAIL_LEVELS} levels")
        dimension = 4 * int(np.prod(self.fock_dims))
        if dimension > MAX_DENSE_DIMENSION:
            raise InvalidArgumentError(
                f"Dense dimension {dimension} for Fock truncations {self.fock_dims} exceeds "
                f"{MAX_DENSE_DIMENSION}, lower n_trunc or n_trunc_higher"
            )
        if not self.truncation_tolerance > 0:
            raise InvalidArgumentError("truncation_tolerance must be positive")

    @property
    def fock_dims(self):
        return (self.n_trunc,) + (self.n_trunc_higher,) * (self.n_modes - 1)

    @property
    def shape(self):
        return qubit_cavity_shape(2, self.fock_dims)

    @property
    def mode_frequencies_ghz(self):
        return (self.resonator_frequency_ghz,) + self.higher_mode_frequencies_ghz

    @property
    def mode_coupling_scales(self):
        return (1.0,) + self.higher_mode_coupling_scales

    def qubit_frequency(self, qubit, f3):
        if flux_cosine(f3) == 0:
            return self.qubit_frequencies_down_ghz[qubit]
        return self.qubit_frequencies_up_ghz[qubit]

    def coupling(self, qubit, f3):
        return self.couplings_ghz[qubit] * flux_cosine(f3)

    def transverse_weight(self, qubit, f3):
        if float(f3) % 2 == 1.0:
            return self.transverse_flipped[qubit]
        return self.transverse[qubit]

    def with_modes(self, modes, n_modes):
        """Copy using the higher modes 2..n_modes of a solved ModeSet."""
        if not 1 <= n_modes <= min(3, modes.n_modes):
            raise InvalidArgumentError(
                f"Cannot take {n_modes} modes from a ModeSet of {modes.n_modes}"
            )
        if not math.isclose(
            modes.frequencies_ghz[0], self.resonator_frequency_ghz, rel_tol=1e-3
        ):
            logger.warning(
                "Fundamental mode at {0:.4f} GHz differs from the gate resonator frequency "
                "{1:.4f} GHz",
                modes.frequencies_ghz[0],
                self.resonator_frequency_ghz,
            )
        return replace(
            self,
            n_modes=n_modes,
            higher_mode_frequencies_ghz=tuple(modes.frequencies_ghz[1:n_modes]),
            higher_mode_coupling_scales=tuple(modes.coupling_scales()[1:n_modes]),
        )


@dataclass(frozen=True)
class ProtocolSchedule:
    """
    Durations of the four steps (t1, t2, t1, t2) and the coupler flux of each qubit during
    each step. With the standard settings qubit 1 couples in steps 1 and 3 and qubit 2 in
    steps 2 and 4. A non-zero ramp_time switches couplings on and off smoothly inside each
    step window.
    """

    resonator_frequency_ghz: float
    t1_ns: float
    t2_ns: float
    step_flux_settings: tuple = STANDARD_FLUX_SETTINGS
    ramp_time_ns: float = 0.0

    def __post_init__(self):
        settings = tuple(tuple(float(f) for f in step) for step in self.step_flux_settings)
        object.__setattr__(self, "step_flux_settings", settings)

        if len(settings) != 4 or any(len(step) != 2 for step in settings):
            raise InvalidArgumentError("step_flux_settings needs 4 steps of 2 flux values")
        if any(f not in ALLOWED_FLUX for step in settings for f in step):
            raise InvalidArgumentError(f"Coupler flux values must be one of {ALLOWED_FLUX}")
        if not self.resonator_frequency_ghz > 0:
            raise InvalidArgumentError("resonator_frequency_ghz must be positive")

        theta1, theta2 = self.rotation_angles[:2]
        if not 0 < theta1 <= math.pi / 2 + 1e-12:
            raise InvalidArgumentError(f"w_r t1 = {theta1:.6g} lies outside (0, pi/2]")
        if abs(theta1 + theta2 - math.pi) > 1e-9:
            raise InvalidArgumentError(f"w_r t2 = {theta2:.6g} must equal pi - w_r t1")

        if self.ramp_time_ns < 0:
            raise InvalidArgumentError("ramp_time_ns must not be negative")
        if 2 * self.ramp_time_ns > min(self.t1_ns, self.t2_ns) * (1 + 1e-12):
            raise InvalidArgumentError(
                f"Ramps of {self.ramp_time_ns} ns do not fit in steps of "
                f"{min(self.t1_ns, self.t2_ns):.6g} ns"
            )

    @classmethod
    def from_t1(
        cls, resonator_frequency_ghz, t1_ns, step_flux_settings=STANDARD_FLUX_SETTINGS, ramp_time_ns=0.0
    ):
        angular = 2 * math.pi * resonator_frequency_ghz
        t2_ns = (math.pi - angular * t1_ns) / angular
        return cls(resonator_frequency_ghz, t1_ns, t2_ns, step_flux_settings, ramp_time_ns)

    @property
    def durations(self):
        return (self.t1_ns, self.t2_ns, self.t1_ns, self.t2_ns)

    @property
    def rotation_angles(self):
        angular = 2 * math.pi * self.resonator_frequency_ghz
        return tuple(angular * t for t in (self.t1_ns, self.t2_ns, self.t1_ns, self.t2_ns))

    @property
    def gate_time_ns(self):
        return sum(self.durations)


@dataclass
class GateReport:
    fidelity: float
    two_qubit_phase: float
    qubit_purity: float
    gate_time_ns: float
    ramp_time_ns: float = 0.0
    time_step_ns: float = None
    n_modes: int = 1
    truncation_diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("fidelity", "qubit_purity"):
            value = getattr(self, name)
            if not -1e-10 <= value <= 1 + 1e-10:
                raise NumericalFailureError(f"{name} = {value!r} lies outside [0, 1]")

    def as_dict(self):
        return {
            "fidelity": self.fidelity,
            "two_qubit_phase": self.two_qubit_phase,
            "qubit_purity": self.qubit_purity,
            "gate_time_ns": self.gate_time_ns,
            "ramp_time_ns": self.ramp_time_ns,
            "time_step_ns": self.time_step_ns,
            "n_modes": self.n_modes,
            "truncation_diagnostics": self.truncation_diagnostics,
        }


def solve_t1(g1, g2, resonator_frequency_ghz):
    """
    Duration of steps 1 and 3 such that 4 sin(w_r t1) g1 g2 / w_r^2 = pi / 4.

    The sign of g1 g2 only flips the sign of the entangling phase, so |g1 g2| is used.

    Args:
        g1 (float): Coupling of qubit 1 in GHz.
        g2 (float): Coupling of qubit 2 in GHz.
        resonator_frequency_ghz (float): Resonator frequency in GHz.

    Returns:
        float: t1 in ns, with w_r t1 in (0, pi/2].
    """
    if not resonator_frequency_ghz > 0:
        raise InvalidArgumentError("resonator_frequency_ghz must be positive")

    ratio = abs(g1 * g2) / resonator_frequency_ghz ** 2
    if ratio < CPHASE_THRESHOLD * (1 - 1e-12):
        raise UnsatisfiableConditionError(
            f"|g1 g2| / w_r^2 = {ratio:.5f} is below the required minimum "
            f"pi/16 = {CPHASE_THRESHOLD:.5f}"
        )

    angle = math.asin(min(1.0, CPHASE_THRESHOLD / ratio))
    return angle / (2 * math.pi * resonator_frequency_ghz)


def _check_consistent(sched, gp):
    if not math.isclose(sched.resonator_frequency_ghz, gp.resonator_frequency_ghz, rel_tol=1e-12):
        raise InvalidArgumentError(
            f"Schedule built for {sched.resonator_frequency_ghz} GHz, gate parameters use "
            f"{gp.resonator_frequency_ghz} GHz"
        )


def _signs():
    """sigma_z eigenvalues (s1, s2) in basis order |ee>, |eg>, |ge>, |gg>"""
    return list(product((1, -1), repeat=2))


def _step_terms(step, sched, gp, signs):
    """
    Exact single mode step with sigma_z fixed to `signs`:

        U_s = exp(i phi) R(theta) D(lam (e^{i theta} - 1)),  lam = sum_i g_i c_z,i s_i / w_r

    Returns (phi, theta, displacement amplitude).
    """
    fluxes = sched.step_flux_settings[step - 1]
    duration = sched.durations[step - 1]
    theta = sched.rotation_angles[step - 1]

    lam = sum(
        gp.coupling(i, fluxes[i]) * gp.longitudinal[i] * s for i, s in enumerate(signs)
    ) / gp.resonator_frequency_ghz
    local = -sum(
        math.pi * gp.qubit_frequency(i, fluxes[i]) * s * duration for i, s in enumerate(signs)
    )
    phase = local + lam ** 2 * (theta - math.sin(theta))
    return phase, theta, lam * (np.exp(1j * theta) - 1)


def _check_step(step):
    if step not in (1, 2, 3, 4):
        raise InvalidArgumentError(f"Protocol steps are numbered 1..4, got {step}")


def analytic_step_unitary(step, sched, gp):
    """
    Closed form propagator of one protocol step (single mode, transverse terms dropped):
    qubit phases, free cavity rotation and a displacement conditioned on sigma_z of the
    coupled qubit(s). Includes the state independent phase lam^2 (theta - sin theta), so
    it equals the propagator of the step Hamiltonian with c_x = 0.
    """
    _check_step(step)
    _check_consistent(sched, gp)
    if gp.n_modes != 1:
        raise UnsupportedError("The analytic step unitary is only defined for a single mode")

    n_trunc = gp.n_trunc
    total = np.zeros((gp.shape.dim, gp.shape.dim), dtype=np.complex128)
    for signs in _signs():
        phase, theta, beta = _step_terms(step, sched, gp, signs)
        cavity = free_rotation(theta, n_trunc) @ displacement(beta, n_trunc)
        term = tensor(qubit_projector(signs[0]), qubit_projector(signs[1]), cavity)
        total += np.exp(1j * phase) * term.entries
    return OperatorMatrix(gp.shape, total)


def _closed_form_phases(sched, gp):
    """
    Diagonal phases of the composed single mode protocol, one per basis state.

    Moving every rotation to the left turns the product of the steps into
    R(sum theta) D(gamma_4) ... D(gamma_1) with gamma_k = beta_k exp(i sum_{j<k} theta_j);
    D(a) D(b) = exp(i Im(a b^*)) D(a + b) then leaves a pure phase when the loop closes.
    """
    thetas = sched.rotation_angles
    turns = sum(thetas) / (2 * math.pi)
    if abs(turns - round(turns)) > 1e-9:
        raise InvalidArgumentError("The schedule does not bring the cavity back to vacuum")

    phases = []
    for signs in _signs():
        total = 0.0
        gammas = []
        accumulated = 0.0
        for step in (1, 2, 3, 4):
            phase, theta, beta = _step_terms(step, sched, gp, signs)
            total += phase
            gammas.append(beta * np.exp(1j * accumulated))
            accumulated += theta
        if abs(sum(gammas)) > 1e-9:
            raise InvalidArgumentError("The schedule does not bring the cavity back to vacuum")
        for k, later in enumerate(gammas):
            for earlier in gammas[:k]:
                total += np.imag(later * np.conj(earlier))
        phases.append(total)
    return np.array(phases)


def gate_global_phase(sched, gp):
    """Phase dropped by compose_gate_closed_form (mean of the four diagonal phases)."""
    _check_consistent(sched, gp)
    return float(np.mean(_closed_form_phases(sched, gp)))


def compose_gate_closed_form(sched, gp):
    """
    Two-qubit unitary of the full protocol with c_x = 0. For the standard schedule this is

        exp(-i (w1_up t1 + w1_down t2) sz1) exp(-i (w2_down t1 + w2_up t2) sz2)
            exp(4 i sin(w_r t1) g1 g2 / w_r^2 sz1 sz2)

    with the state independent global phase removed. The cavity ends in vacuum and does
    not appear.

    Returns:
        OperatorMatrix: diagonal 4x4 operator on [Q, Q].
    """
    _check_consistent(sched, gp)
    phases = _closed_form_phases(sched, gp)
    shape = SpaceShape((qubit_factor(), qubit_factor()))
    return OperatorMatrix(shape, np.diag(np.exp(1j * (phases - phases.mean()))))


def _kron_all(matrices):
    result = np.ones((1, 1))
    for matrix in matrices:
        result = np.kron(result, matrix)
    return result


def step_hamiltonian(step, sched, gp, coupling_scale=1.0):
    """
    Hamiltonian of one step in rad/ns on [Q, Q, Fock...], transverse terms included.
    `coupling_scale` multiplies every qubit-field coupling (used for ramps).
    """
    _check_step(step)
    _check_consistent(sched, gp)

    fluxes = sched.step_flux_settings[step - 1]
    dims = gp.fock_dims
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye2 = np.eye(2)

    qubit_diagonal = 0.5 * (
        gp.qubit_frequency(0, fluxes[0]) * np.kron(np.diag(sz), np.ones(2))
        + gp.qubit_frequency(1, fluxes[1]) * np.kron(np.ones(2), np.diag(sz))
    )
    fock_diagonal = np.zeros(1)
    for dim, frequency in zip(dims, gp.mode_frequencies_ghz):
        fock_diagonal = np.add.outer(fock_diagonal, frequency * np.arange(dim)).ravel()
    entries = np.diag(np.add.outer(qubit_diagonal, fock_diagonal).ravel())

    coupling = sum(
        gp.coupling(i, fluxes[i])
        * (gp.longitudinal[i] * ops[0] + gp.transverse_weight(i, fluxes[i]) * ops[1])
        for i, ops in enumerate(
            ((np.kron(sz, eye2), np.kron(sx, eye2)), (np.kron(eye2, sz), np.kron(eye2, sx)))
        )
    )
    if np.any(coupling):
        for n, (dim, scale) in enumerate(zip(dims, gp.mode_coupling_scales)):
            a = annihilation(dim).entries
            field_op = _kron_all(
                [np.eye(d) for d in dims[:n]] + [a + a.T] + [np.eye(d) for d in dims[n + 1 :]]
            )
            entries -= coupling_scale * scale * np.kron(coupling, field_op)

    return OperatorMatrix(gp.shape, 2 * math.pi * entries)


def _envelope(t, duration, ramp):
    if ramp == 0:
        return 1.0
    if t < ramp:
        return math.sin(math.pi * t / (2 * ramp)) ** 2
    if t > duration - ramp:
        return math.sin(math.pi * (duration - t) / (2 * ramp)) ** 2
    return 1.0


class _Propagator:
    """Evolves a block of column vectors through protocol steps, caching spectra."""

    def __init__(self, sched, gp, time_step_ns=None):
        self.sched = sched
        self.gp = gp
        self.time_step_ns = time_step_ns
        self._spectra = {}
        self.diagnostics = {
            f"mode_{n + 1}": {"max_mean_photons": 0.0, "max_tail_population": 0.0}
            for n in range(gp.n_modes)
        }

    def _spectrum(self, step):
        key = self.sched.step_flux_settings[step - 1]
        if key not in self._spectra:
            self._spectra[key] = eigendecompose(step_hamiltonian(step, self.sched, self.gp))
        return self._spectra[key]

    def _ramp(self, step, columns, start, stop):
        duration = self.sched.durations[step - 1]
        n_sub = max(1, math.ceil((stop - start) / self.time_step_ns - 1e-9))
        h = (stop - start) / n_sub
        for j in range(n_sub):
            scale = _envelope(start + (j + 0.5) * h, duration, self.sched.ramp_time_ns)
            spectrum = eigendecompose(step_hamiltonian(step, self.sched, self.gp, scale))
            columns = apply_propagator(spectrum, h, columns)
        return columns

    def step(self, step, columns):
        duration = self.sched.durations[step - 1]
        ramp = self.sched.ramp_time_ns
        if ramp == 0:
            columns = apply_propagator(self._spectrum(step), duration, columns)
        else:
            columns = self._ramp(step, columns, 0.0, ramp)
            if duration - 2 * ramp > 0:
                columns = apply_propagator(self._spectrum(step), duration - 2 * ramp, columns)
            columns = self._ramp(step, columns, duration - ramp, duration)
        self._check_truncation(step, columns)
        return columns

    def _check_truncation(self, step, columns):
        states = [
            StateVector(self.gp.shape, column / np.linalg.norm(column)) for column in columns.T
        ]
        for n, dim in enumerate(self.gp.fock_dims):
            populations = np.column_stack([fock_populations(psi, 2 + n) for psi in states])
            tail = float(populations[-TAIL_LEVELS:].sum(axis=0).max())
            mean = float((np.arange(dim) @ populations).max())

            entry = self.diagnostics[f"mode_{n + 1}"]
            entry["max_mean_photons"] = max(entry["max_mean_photons"], mean)
            entry["max_tail_population"] = max(entry["max_tail_population"], tail)

            logger.debug(
                "Step {0} mode {1}: <n> = {2:.4f}, top level population {3:.3e}",
                step,
                n + 1,
                mean,
                tail,
            )
            if tail > self.gp.truncation_tolerance:
                raise TruncationError(
                    f"Mode {n + 1} has population {tail:.3e} in its top {TAIL_LEVELS} levels "
                    f"after step {step}; increase the Fock truncation ({dim})",
                    report={
                        "mode": n + 1,
                        "step": step,
                        "populations": populations.max(axis=1).tolist(),
                    },
                )

    def run(self, columns, steps=(1, 2, 3, 4)):
        for step in steps:
            _check_step(step)
            columns = self.step(step, columns)
        return columns


def _vacuum_rows(gp):
    """Indices of |q1 q2> (x) |0...0> in the full basis."""
    fock_dim = int(np.prod(gp.fock_dims))
    return np.arange(4) * fock_dim


def _qubit_part(initial, gp):
    if initial.shape != gp.shape:
        raise InvalidArgumentError(
            f"Initial state on {initial.shape.dims} does not match the gate space {gp.shape.dims}"
        )
    part = initial.amplitudes[_vacuum_rows(gp)]
    if abs(np.linalg.norm(part) - 1.0) > NORM_TOLERANCE:
        raise InvalidArgumentError("The initial state must have every cavity mode in vacuum")
    return StateVector(SpaceShape((qubit_factor(), qubit_factor())), part / np.linalg.norm(part))


def _basis_columns(gp):
    columns = np.zeros((gp.shape.dim, 4))
    columns[_vacuum_rows(gp), np.arange(4)] = 1.0
    return columns


def _invariant_phase(diagonal):
    d00, d01, d10, d11 = diagonal
    return float(np.angle(d00 * d11 * np.conj(d01) * np.conj(d10)))


def initial_state(gp, label="plus_plus"):
    """
    Product state of the two qubits with every cavity mode in vacuum. `label` is
    "plus_plus" for |+>|+> or a pair of "e"/"g" letters.
    """
    if label not in INITIAL_STATES:
        raise InvalidArgumentError(f"Unknown initial state {label!r}, expected one of {INITIAL_STATES}")
    if label == "plus_plus":
        qubits = [plus_state(), plus_state()]
    else:
        qubits = [basis_state(qubit_factor(), "eg".index(letter)) for letter in label]
    vacua = [basis_state(fock_factor(dim), 0) for dim in gp.fock_dims]
    return product_state(*qubits, *vacua)


def _finalise(columns, gp):
    norm = np.linalg.norm(columns[:, 0])
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NumericalFailureError(
            f"State norm drifted to {norm!r} during the protocol", report={"norm": norm}
        )
    return StateVector(gp.shape, columns[:, 0] / norm)


def evolve_steps(sched, gp, initial, steps=(1, 2, 3, 4)):
    """
    State after the listed protocol steps, applied in the given order. Ramped schedules
    use the base time step ramp_time / 100 without refinement.
    """
    _check_consistent(sched, gp)
    if initial.shape != gp.shape:
        raise InvalidArgumentError(
            f"Initial state on {initial.shape.dims} does not match the gate space {gp.shape.dims}"
        )
    time_step = sched.ramp_time_ns / RAMP_SUBSTEPS if sched.ramp_time_ns > 0 else None
    columns = _Propagator(sched, gp, time_step).run(
        np.asarray(initial.amplitudes)[:, None], steps
    )
    return _finalise(columns, gp)


def numeric_gate_block(sched, gp):
    """
    Two-qubit block of the numerically propagated protocol on the cavity vacuum:
    <q' ; 0| U |q ; 0>. Unitary when the cavity returns to vacuum.
    """
    _check_consistent(sched, gp)
    time_step = sched.ramp_time_ns / RAMP_SUBSTEPS if sched.ramp_time_ns > 0 else None
    columns = _Propagator(sched, gp, time_step).run(_basis_columns(gp))
    shape = SpaceShape((qubit_factor(), qubit_factor()))
    return OperatorMatrix(shape, columns[_vacuum_rows(gp)])


def state_fidelity(final, gp, sched, initial):
    """
    <psi|rho|psi> with rho the two-qubit state of `final` (cavity traced out) and psi the
    closed form gate applied to the qubit part of `initial`.
    """
    if final.shape != gp.shape:
        raise InvalidArgumentError(
            f"Final state on {final.shape.dims} does not match the gate space {gp.shape.dims}"
        )
    ideal = compose_gate_closed_form(sched, gp) @ _qubit_part(initial, gp)
    rho = reduced_density_matrix(final, [0, 1])
    return rho.expectation(ideal)


def cphase_equivalence(unitary):
    """
    Local invariant phase phi00 + phi11 - phi01 - phi10 of a diagonal two-qubit gate,
    wrapped to (-pi, pi]. |result| = pi for a gate equivalent to CPHASE.
    """
    if unitary.shape.dims != (2, 2):
        raise InvalidArgumentError(f"Expected a two-qubit operator, got {unitary.shape.dims}")
    error = unitary.unitarity_error()
    if error > UNITARITY_TOLERANCE:
        raise InvalidArgumentError(f"Operator is not unitary (error {error:.3e})")
    return _invariant_phase(np.diag(unitary.entries))


def _run_columns(sched, gp, columns, time_step):
    propagator = _Propagator(sched, gp, time_step)
    return propagator.run(columns), propagator.diagnostics


def _report(sched, gp, columns, diagnostics, initial, time_step):
    final = _finalise(columns, gp)
    ideal = compose_gate_closed_form(sched, gp) @ _qubit_part(initial, gp)
    rho = reduced_density_matrix(final, [0, 1])
    block = columns[_vacuum_rows(gp)][:, 1:]
    report = GateReport(
        fidelity=rho.expectation(ideal),
        two_qubit_phase=_invariant_phase(np.diag(block)),
        qubit_purity=rho.purity(),
        gate_time_ns=sched.gate_time_ns,
        ramp_time_ns=sched.ramp_time_ns,
        time_step_ns=time_step,
        n_modes=gp.n_modes,
        truncation_diagnostics=diagnostics,
    )
    return final, report


def numeric_protocol(sched, gp, initial):
    """
    Propagate `initial` through the four steps with the full Hamiltonian, transverse terms
    and higher modes included.

    Steps with instantaneous switching are propagated exactly through one eigendecomposition
    per distinct step Hamiltonian. With ramp_time > 0 the coupling follows sin^2 edges of
    length ramp_time inside each step; the edges are integrated with midpoint exponential
    steps starting at ramp_time / 100 and halved until the fidelity changes by less than
    1e-8.

    Args:
        sched (ProtocolSchedule): Step durations and coupler fluxes.
        gp (GateParams): Parameters of the dynamics.
        initial (StateVector): Initial state with every cavity mode in vacuum.

    Returns:
        tuple: (final StateVector, GateReport)
    """
    _check_consistent(sched, gp)
    _qubit_part(initial, gp)
    logger.info(
        "Simulating protocol: w_r t1 = {0:.4f}, {1} mode(s), dimension {2}",
        sched.rotation_angles[0],
        gp.n_modes,
        gp.shape.dim,
    )

    columns = np.column_stack([np.asarray(initial.amplitudes, dtype=complex), _basis_columns(gp)])

    if sched.ramp_time_ns == 0:
        evolved, diagnostics = _run_columns(sched, gp, columns, None)
        final, report = _report(sched, gp, evolved, diagnostics, initial, None)
    else:
        time_step = sched.ramp_time_ns / RAMP_SUBSTEPS
        evolved, diagnostics = _run_columns(sched, gp, columns, time_step)
        final, report = _report(sched, gp, evolved, diagnostics, initial, time_step)
        for _ in range(MAX_HALVINGS):
            time_step /= 2
            evolved, diagnostics = _run_columns(sched, gp, columns, time_step)
            refined_final, refined = _report(sched, gp, evolved, diagnostics, initial, time_step)
            change = abs(refined.fidelity - report.fidelity)
            final, report = refined_final, refined
            logger.debug("Time step {0:.3e} ns: fidelity change {1:.3e}", time_step, change)
            if change < RAMP_CONVERGENCE:
                break
        else:
            raise NumericalFailureError(
                f"Ramp integration did not converge after {MAX_HALVINGS} halvings",
                report={"time_step_ns": time_step, "fidelity": report.fidelity},
            )

    logger.info(
        "Fidelity {0:.6f}, invariant phase {1:.6f} rad, purity {2:.6f}",
        report.fidelity,
        report.two_qubit_phase,
        report.qubit_purity,
    )
    return final, report


def _pad_state(state, gp):
    """Embed a state in the larger Fock spaces of gp by padding with empty levels."""
    amplitudes = state.tensor()
    padding = [(0, 0), (0, 0)] + [
        (0, new - old) for old, new in zip(amplitudes.shape[2:], gp.fock_dims)
    ]
    return StateVector(gp.shape, np.pad(amplitudes, padding).ravel())


def truncation_convergence(sched, gp, initial, extra=10):
    """
    Fidelity change when every Fock truncation grows by `extra` levels. `initial` lives
    on the space of gp and is padded with empty levels for the larger run.

    Returns:
        float: |F(N + extra) - F(N)|
    """
    if initial.shape != gp.shape:
        raise InvalidArgumentError("The initial state does not live on the gate space")
    larger = replace(gp, n_trunc=gp.n_trunc + extra, n_trunc_higher=gp.n_trunc_higher + extra)
    fidelities = [
        numeric_protocol(sched, params, _pad_state(initial, params))[1].fidelity
        for params in (gp, larger)
    ]
    shift = abs(fidelities[1] - fidelities[0])
    logger.debug("Fock truncation {0} -> {1}: fidelity shift {2:.3e}", gp.n_trunc, larger.n_trunc, shift)
    return shift


def _setting(settings, key):
    try:
        return settings[key]
    except KeyError as err:
        raise ConfigError(f"Protocol settings are missing the key {key!r}") from err


def gate_params_from_settings(settings, modes=None):
    """
    Build GateParams from a protocol settings section. Couplings are given as g / w_r. When
    n_modes > 1 the higher modes are taken from `modes` (a solved ModeSet), and the first mode
    uses multimode_n_trunc and multimode_truncation_tolerance so the dense problem stays
    within MAX_DENSE_DIMENSION.
    """
    n_modes = int(_setting(settings, "n_modes"))
    if n_modes > 1:
        n_trunc = _setting(settings, "multimode_n_trunc")
        tolerance = _setting(settings, "multimode_truncation_tolerance")
    else:
        n_trunc = _setting(settings, "n_trunc")
        tolerance = _setting(settings, "truncation_tolerance")

    try:
        frequency = float(_setting(settings, "resonator_frequency_ghz"))
        ratios = _pair(_setting(settings, "g_over_wr"), "g_over_wr")
        params = GateParams(
            resonator_frequency_ghz=frequency,
            couplings_ghz=tuple(r * frequency for r in ratios),
            qubit_frequencies_up_ghz=_setting(settings, "qubit_frequency_up_ghz"),
            qubit_frequencies_down_ghz=_setting(settings, "qubit_frequency_down_ghz"),
            longitudinal=_setting(settings, "c_z"),
            transverse=_setting(settings, "c_x"),
            transverse_flipped=_setting(settings, "c_x_flipped"),
            n_trunc=int(n_trunc),
            n_trunc_higher=int(_setting(settings, "n_trunc_higher")),
            truncation_tolerance=float(tolerance),
        )
        if n_modes > 1:
            if modes is None:
                raise ConfigError(f"n_modes = {n_modes} needs the resonator section to be solved")
            params = params.with_modes(modes, n_modes)
    except InvalidArgumentError as err:
        raise ConfigError(f"Invalid protocol settings: {err}") from err
    return params


def schedule_from_settings(settings, gp):
    """Schedule for a settings section; t1_ns defaults to solve_t1 of the couplings."""
    fluxes = _setting(settings, "step_flux_settings")
    t1 = settings.get("t1_ns")
    if t1 is None:
        t1 = solve_t1(
            gp.couplings_ghz[0] * gp.longitudinal[0],
            gp.couplings_ghz[1] * gp.longitudinal[1],
            gp.resonator_frequency_ghz,
        )
    try:
        return ProtocolSchedule.from_t1(
            gp.resonator_frequency_ghz,
            float(t1),
            fluxes,
            float(_setting(settings, "ramp_time_ns")),
        )
    except InvalidArgumentError as err:
        raise ConfigError(f"Invalid protocol settings: {err}") from err


def run_cphase_gate(settings=PROTOCOL_SETTINGS_DEFAULTS, modes=None):
    """
    Simulate the protocol described by a settings section.

    Returns:
        tuple: (ProtocolSchedule, GateParams, final StateVector, GateReport)
    """
    gp = gate_params_from_settings(settings, modes)
    sched = schedule_from_settings(settings, gp)
    initial = initial_state(gp, settings.get("initial_state", "plus_plus"))
    final, report = numeric_protocol(sched, gp, initial)
    return sched, gp, final, report
