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
Two degree of freedom junction array in the charge basis |n1, n2>.

The inductive potential, in units of E_J, is

    U = -[cos(phi1) + cos(phi2) + alpha cos(phi2 - phi1 + 2 pi f1)
          + 2 alpha4 cos(pi f3) cos(phi2 - phi1 + 2 pi (f1 + f2 + f3 / 2) + dpsi)]

where dpsi is the phase slip shared with the resonator. exp(i phi_j) raises n_j by one.
"""

import math
from collections import namedtuple
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from loguru import logger
from scipy.linalg import eigh
from scipy.optimize import brentq

from cqedpy.operators.algebra import OperatorMatrix, SpaceShape, charge_factor
from cqedpy.utils.exceptions import (
    CalibrationError,
    ConfigError,
    DegeneracyError,
    InvalidArgumentError,
    NumericalFailureError,
)

DEGENERACY_RTOL = 1e-6
CALIBRATION_BOUNDS_GHZ = (0.1, 20.0)
CALIBRATION_TOLERANCE_GHZ = 0.01
CALIBRATION_SCAN_POINTS = 96

QUBIT_SETTINGS_DEFAULTS = {
    "josephson_energy_ghz": 221.0,
    "alpha": 1.2,
    "alpha4": 0.058,
    "charging_energy_ghz": 5.0,
    "kinetic_a": 1.0,
    "kinetic_b": 0.0,
    "f1": 0.505,
    "f2": 0.5,
    "f3": 0.0,
    "n_max": 12,
    "target_frequency_ghz": None,
}

PauliCoefficients = namedtuple("PauliCoefficients", ["x", "y", "z", "identity"])

ChargeOperators = namedtuple("ChargeOperators", ["n1", "n2", "cos1", "cos2", "hop"])


def flux_cosine(f3):
    """cos(pi f3), exact at integer and half integer f3"""
    doubled = 2 * f3
    if float(doubled).is_integer():
        return (1.0, 0.0, -1.0, 0.0)[int(doubled) % 4]
    return math.cos(math.pi * f3)


@dataclass(frozen=True)
class CircuitParams:
    """
    One qubit cell. Energies are E/h in GHz, frustrations in units of the flux quantum.
    """

    josephson_energy_ghz: float
    alpha: float
    alpha4: float
    charging_energy_ghz: float = 5.0
    kinetic_a: float = 1.0
    kinetic_b: float = 0.0
    f1: float = 0.5
    f2: float = 0.5
    f3: float = 0.0
    n_max: int = 12

    def __post_init__(self):
        if not self.josephson_energy_ghz > 0:
            raise InvalidArgumentError("josephson_energy_ghz must be > 0")
        if not self.charging_energy_ghz > 0:
            raise InvalidArgumentError("charging_energy_ghz must be > 0")
        if not self.alpha >= 0:
            raise InvalidArgumentError("alpha must be >= 0")
        if not self.alpha4 >= 0:
            raise InvalidArgumentError("alpha4 must be >= 0")
        if int(self.n_max) != self.n_max or self.n_max < 5:
            raise InvalidArgumentError(f"n_max must be an integer >= 5, got {self.n_max}")

    @property
    def total_frustration(self):
        return self.f1 + self.f2 + self.f3 / 2

    @property
    def effective_alpha4(self):
        """alpha4(f3) = alpha4 cos(pi f3)"""
        return self.alpha4 * flux_cosine(self.f3)

    @property
    def coupling_prefactor_ghz(self):
        """2 E_J alpha4(f3), the scale the coupling coefficients are relative to"""
        return 2 * self.josephson_energy_ghz * self.effective_alpha4


@dataclass(frozen=True, eq=False)
class QubitModel:
    """
    Two level reduction of the junction circuit.

    first_order and second_order hold the c^1 and c^2 coefficients of the qubit projected
    sin and (1/2) cos operators, relative to 2 E_J alpha4(f3). eigenvectors has the charge
    basis states |e> and |g> as its two columns, in that order.
    """

    params: CircuitParams
    frequency_ghz: float
    energies_ghz: tuple
    first_order: PauliCoefficients
    second_order: PauliCoefficients
    eigenvectors: np.ndarray
    delta_psi: float = None
    resonator_frequency_ghz: float = None

    @property
    def transverse_magnitude(self):
        """sqrt(c_x^2 + c_y^2), independent of the eigenvector gauge"""
        return math.hypot(self.first_order.x, self.first_order.y)

    @property
    def coupling_ghz(self):
        if self.delta_psi is None:
            return None
        return coupling_strength(self.params, self.delta_psi)

    @property
    def g_over_wr(self):
        if self.delta_psi is None or self.resonator_frequency_ghz is None:
            return None
        return self.coupling_ghz / self.resonator_frequency_ghz

    def as_record(self):
        return {
            "f1": self.params.f1,
            "f2": self.params.f2,
            "f3": self.params.f3,
            "alpha": self.params.alpha,
            "alpha4": self.params.alpha4,
            "charging_energy_ghz": self.params.charging_energy_ghz,
            "frequency_ghz": self.frequency_ghz,
            "c1_x": self.first_order.x,
            "c1_y": self.first_order.y,
            "c1_z": self.first_order.z,
            "c1_identity": self.first_order.identity,
            "c1_perp": self.transverse_magnitude,
            "c2_x": self.second_order.x,
            "c2_y": self.second_order.y,
            "c2_z": self.second_order.z,
            "c2_identity": self.second_order.identity,
            "coupling_ghz": self.coupling_ghz,
            "g_over_wr": self.g_over_wr,
        }


@lru_cache(maxsize=8)
def _charge_operators(n_max):
    charges = np.arange(-n_max, n_max + 1, dtype=float)
    size = len(charges)
    eye = np.eye(size)
    raising = np.eye(size, k=-1)

    ops = ChargeOperators(
        n1=np.repeat(charges, size),
        n2=np.tile(charges, size),
        cos1=np.kron(raising + raising.T, eye) / 2,
        cos2=np.kron(eye, raising + raising.T) / 2,
        hop=np.kron(raising.T, raising),
    )
    for arr in ops:
        arr.setflags(write=False)
    return ops


def _phase_cosine(hop, theta):
    """cos(phi2 - phi1 + theta) as (e^{i theta} S2+ S1- + h.c.) / 2"""
    shifted = np.exp(1j * theta) * hop
    return (shifted + shifted.conj().T) / 2


def _phase_sine(hop, theta):
    shifted = np.exp(1j * theta) * hop
    return (shifted - shifted.conj().T) / 2j


def _charge_shape(n_max):
    return SpaceShape((charge_factor(n_max), charge_factor(n_max)))


def inductive_potential(phi1, phi2, delta_psi, p):
    """
    U(phi1, phi2) / E_J for the given phase slip.

    Args:
        phi1, phi2 (float or np.ndarray): Junction phases in rad.
        delta_psi (float): Phase slip in rad.
        p (CircuitParams): The circuit.

    Returns:
        float or np.ndarray: The potential in units of E_J.
    """
    theta = np.asarray(phi2) - np.asarray(phi1)
    return -(
        np.cos(phi1)
        + np.cos(phi2)
        + p.alpha * np.cos(theta + 2 * math.pi * p.f1)
        + 2 * p.effective_alpha4 * np.cos(theta + 2 * math.pi * p.total_frustration + delta_psi)
    )


def potential_matrix(p, delta_psi):
    """E_J U in the charge basis (GHz), without the charging term."""
    ops = _charge_operators(p.n_max)
    potential = (
        ops.cos1
        + ops.cos2
        + p.alpha * _phase_cosine(ops.hop, 2 * math.pi * p.f1)
        + 2
        * p.effective_alpha4
        * _phase_cosine(ops.hop, 2 * math.pi * p.total_frustration + delta_psi)
    )
    return OperatorMatrix(_charge_shape(p.n_max), -p.josephson_energy_ghz * potential)


def build_junction_hamiltonian(p, delta_psi=0.0):
    """
    Charge basis Hamiltonian (GHz)

        H = 4 A E_c (n1^2 + n2^2) + 8 B E_c n1 n2 + E_J U(phi1, phi2; dpsi)

    Args:
        p (CircuitParams): The circuit.
        delta_psi (float, optional): Phase slip in rad. Defaults to 0.

    Returns:
        OperatorMatrix: Hermitian matrix of dimension (2 n_max + 1)^2.
    """
    ops = _charge_operators(p.n_max)
    kinetic = p.charging_energy_ghz * (
        4 * p.kinetic_a * (ops.n1 ** 2 + ops.n2 ** 2) + 8 * p.kinetic_b * ops.n1 * ops.n2
    )
    potential = potential_matrix(p, delta_psi)
    return OperatorMatrix(potential.shape, potential.entries + np.diag(kinetic))


def junction_spectrum(p, n_levels=4, delta_psi=0.0):
    """Lowest n_levels eigenvalues of the junction Hamiltonian in GHz."""
    hamiltonian = build_junction_hamiltonian(p, delta_psi)
    return eigh(hamiltonian.entries, eigvals_only=True, subset_by_index=[0, n_levels - 1])


def charge_convergence(p, extra=4):
    """Ground energy change (GHz) when the charge cutoff grows from n_max to n_max + extra."""
    base = junction_spectrum(p, 1)[0]
    enlarged = junction_spectrum(replace(p, n_max=p.n_max + extra), 1)[0]
    shift = abs(enlarged - base)
    logger.debug("Charge cutoff {0} -> {1}: ground shift {2:.3e} GHz", p.n_max, p.n_max + extra, shift)
    return shift


def _fix_gauge(vector):
    """Make the largest magnitude amplitude real and positive."""
    pivot = vector[np.argmax(np.abs(vector))]
    return vector * (np.conj(pivot) / abs(pivot))


def _pauli_coefficients(block):
    """Decompose a Hermitian 2x2 matrix in the (e, g) basis as c_I I + c . sigma"""
    return PauliCoefficients(
        x=float(np.real(block[0, 1])),
        y=float(-np.imag(block[0, 1])),
        z=float(np.real(block[0, 0] - block[1, 1]) / 2),
        identity=float(np.real(block[0, 0] + block[1, 1]) / 2),
    )


def project_qubit(p, delta_psi=None, resonator_frequency_ghz=None):
    """
    Reduce the junction circuit to a qubit.

    The two lowest eigenstates at zero phase slip define |g> and |e>. The first and
    second order expansions of the potential in the phase slip,

        O1 = 2 E_J alpha4(f3) sin(phi2 - phi1 + 2 pi f~)
        O2 = 2 E_J alpha4(f3) (1/2) cos(phi2 - phi1 + 2 pi f~)

    are projected onto the qubit and decomposed over the Pauli basis. The coefficients are
    taken from the bare sin and cos projections, so they remain defined when
    alpha4(f3) = 0.

    Args:
        p (CircuitParams): The circuit.
        delta_psi (float, optional): First mode phase slip, used for the coupling strength.
        resonator_frequency_ghz (float, optional): Used for g / omega_r.

    Returns:
        QubitModel: The projected qubit.
    """
    hamiltonian = build_junction_hamiltonian(p, 0.0)
    energies, vectors = eigh(hamiltonian.entries, subset_by_index=[0, 2])

    threshold = DEGENERACY_RTOL * p.josephson_energy_ghz
    if energies[1] - energies[0] <= threshold or energies[2] - energies[1] <= threshold:
        raise DegeneracyError(
            f"Lowest junction levels are degenerate within {threshold:.3e} GHz",
            report={"energies_ghz": energies.tolist()},
        )

    excited = _fix_gauge(vectors[:, 1])
    ground = _fix_gauge(vectors[:, 0])
    basis = np.column_stack([excited, ground])

    ops = _charge_operators(p.n_max)
    theta = 2 * math.pi * p.total_frustration
    sine = _phase_sine(ops.hop, theta)
    half_cosine = _phase_cosine(ops.hop, theta) / 2

    first = _pauli_coefficients(basis.conj().T @ sine @ basis)
    second = _pauli_coefficients(basis.conj().T @ half_cosine @ basis)

    model = QubitModel(
        params=p,
        frequency_ghz=float(energies[1] - energies[0]),
        energies_ghz=(float(energies[0]), float(energies[1])),
        first_order=first,
        second_order=second,
        eigenvectors=basis,
        delta_psi=delta_psi,
        resonator_frequency_ghz=resonator_frequency_ghz,
    )

    logger.debug(
        "f = ({0}, {1}, {2}): omega_q = {3:.6f} GHz, c1 = ({4:.6f}, {5:.3e}, {6:.6f})",
        p.f1,
        p.f2,
        p.f3,
        model.frequency_ghz,
        first.x,
        first.y,
        first.z,
    )
    return model


def coupling_strength(p, delta_psi):
    """g = 2 E_J alpha4 cos(pi f3) dpsi_1 in cyclic GHz, signed"""
    return p.coupling_prefactor_ghz * delta_psi


def calibrate_charging(
    p,
    target_frequency_ghz,
    bounds_ghz=CALIBRATION_BOUNDS_GHZ,
    n_scan=CALIBRATION_SCAN_POINTS,
):
    """
    Fit the charging energy so the qubit frequency matches the target.

    omega_q(E_c) is not monotone: next to the flux qubit branch there are narrow windows
    where the two lowest levels belong to different wells. A logarithmic scan over bounds_ghz
    brackets every sign change of omega_q(E_c) - target, each bracket is refined with Brent's
    method, and the root closest (on a log scale) to p.charging_energy_ghz is kept. The other
    roots are listed in a warning.

    Args:
        p (CircuitParams): The circuit; charging_energy_ghz seeds the choice between roots.
        target_frequency_ghz (float): The desired qubit frequency.
        bounds_ghz (tuple, optional): Search interval for E_c. Defaults to (0.1, 20).
        n_scan (int, optional): Number of scan points. Defaults to 96.

    Returns:
        CircuitParams: A copy of p with the fitted charging energy.
    """

    def frequency(charging_energy):
        return project_qubit(replace(p, charging_energy_ghz=charging_energy)).frequency_ghz

    grid = np.geomspace(bounds_ghz[0], bounds_ghz[1], n_scan)
    scan = np.full(n_scan, np.nan)
    for i, charging_energy in enumerate(grid):
        try:
            scan[i] = frequency(charging_energy)
        except DegeneracyError:
            logger.debug("Degenerate qubit at E_c = {0:.4g} GHz", charging_energy)

    offset = scan - target_frequency_ghz
    brackets = [
        i
        for i in range(n_scan - 1)
        if np.isfinite(offset[i])
        and np.isfinite(offset[i + 1])
        and (offset[i] == 0 or np.sign(offset[i]) != np.sign(offset[i + 1]))
    ]

    if not brackets:
        achievable = None
        if np.any(np.isfinite(scan)):
            achievable = (float(np.nanmin(scan)), float(np.nanmax(scan)))
        raise CalibrationError(
            f"Qubit frequency {target_frequency_ghz} GHz not reached for E_c in "
            f"{bounds_ghz} GHz (scanned {achievable} GHz)",
            achievable=achievable,
            report={"charging_energy_ghz": grid.tolist(), "frequency_ghz": scan.tolist()},
        )

    roots = []
    rejected = []
    for i in brackets:
        if offset[i] == 0:
            charging_energy = float(grid[i])
        else:
            try:
                charging_energy = brentq(
                    lambda ec: frequency(ec) - target_frequency_ghz,
                    grid[i],
                    grid[i + 1],
                    xtol=1e-10,
                )
            except DegeneracyError:
                rejected.append({"bracket_ghz": (grid[i], grid[i + 1]), "reason": "degenerate"})
                continue

        reached = frequency(charging_energy)
        if abs(reached - target_frequency_ghz) > CALIBRATION_TOLERANCE_GHZ:
            # A sign change across a level crossing is a jump, not a root
            rejected.append({"charging_energy_ghz": charging_energy, "frequency_ghz": reached})
            continue
        roots.append(float(charging_energy))

    if not roots:
        raise NumericalFailureError(
            f"Charging calibration found no root for target {target_frequency_ghz} GHz",
            report={"brackets": [(grid[i], grid[i + 1]) for i in brackets], "rejected": rejected},
        )

    seed = math.log(p.charging_energy_ghz)
    charging_energy = min(roots, key=lambda ec: abs(math.log(ec) - seed))
    if len(roots) > 1:
        logger.warning(
            "omega_q = {0} GHz has {1} solutions E_c = {2} GHz, keeping {3:.6g} GHz (closest to "
            "the starting value {4} GHz)",
            target_frequency_ghz,
            len(roots),
            ", ".join(f"{ec:.6g}" for ec in roots),
            charging_energy,
            p.charging_energy_ghz,
        )

    logger.info(
        "Calibrated E_c = {0:.6g} GHz for omega_q = {1} GHz", charging_energy, target_frequency_ghz
    )
    return replace(p, charging_energy_ghz=charging_energy)


def circuit_params_from_settings(settings):
    """Build CircuitParams from a (unit suffixed) qubit settings section."""
    try:
        return CircuitParams(
            josephson_energy_ghz=float(settings["josephson_energy_ghz"]),
            alpha=float(settings["alpha"]),
            alpha4=float(settings["alpha4"]),
            charging_energy_ghz=float(settings["charging_energy_ghz"]),
            kinetic_a=float(settings["kinetic_a"]),
            kinetic_b=float(settings["kinetic_b"]),
            f1=float(settings["f1"]),
            f2=float(settings["f2"]),
            f3=float(settings["f3"]),
            n_max=int(settings["n_max"]),
        )
    except KeyError as e:
        raise ConfigError(f"qubit section is missing '{e.args[0]}'") from e
    except (TypeError, InvalidArgumentError) as e:
        raise ConfigError(f"invalid qubit section: {e}") from e


def run_qubit_models(
    settings=QUBIT_SETTINGS_DEFAULTS,
    delta_psi=None,
    resonator_frequency_ghz=None,
    flux_settings=(0.0, 1.0, 0.5),
):
    """
    Project the qubit of a settings section at each coupler flux in flux_settings. If the
    section carries target_frequency_ghz, E_c is first calibrated at the section's own f3.

    Returns:
        dict: f3 -> QubitModel
    """
    params = circuit_params_from_settings(settings)

    target = settings.get("target_frequency_ghz")
    if target is not None:
        params = calibrate_charging(params, float(target))

    return {
        f3: project_qubit(replace(params, f3=f3), delta_psi, resonator_frequency_ghz)
        for f3 in flux_settings
    }
