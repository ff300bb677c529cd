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
Eigenmodes of a transmission line resonator of length 2l interrupted at its centre by a
Josephson junction (inductance L_J, capacitance C_J).

Antisymmetric modes solve

    k = (2 L_0 / L_J) (1 - omega^2 / omega_p^2) cot(k l),   omega = k / sqrt(L_0 C_0)

With x = k l this reads x = r (1 - (x / x_p)^2) cot(x) where r = Z^2 C_r / L_J and
x_p = omega_p Z C_r / 2. The solver works on the pole free form
x sin(x) - r (1 - (x / x_p)^2) cos(x) = 0, bracketing roots between consecutive
singularities of cot(x).
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from loguru import logger
from scipy import constants
from scipy.optimize import bisect, brentq

from cqedpy.utils.exceptions import (
    CalibrationError,
    ConfigError,
    InvalidArgumentError,
    NumericalFailureError,
)

FEMTO = 1e-15
NANO = 1e-9
GIGA = 1e9

REDUCED_FLUX_QUANTUM = constants.hbar / (2 * constants.e)

RESIDUAL_TOLERANCE = 1e-10
SAMPLES_PER_INTERVAL = 4096
CALIBRATION_BOUNDS_NH = (1e-3, 1e3)
CALIBRATION_TOLERANCE_GHZ = 1e-4

RESONATOR_SETTINGS_DEFAULTS = {
    "impedance_ohm": 50.0,
    "capacitance_ff": 850.0,
    "half_length_mm": 5.0,
    "junction_capacitance_ff": 10.0,
    "junction_inductance_nh": None,
    "target_frequency_ghz": 7.0,
    "n_modes": 1,
}


@dataclass(frozen=True)
class ResonatorSpec:
    """
    Transmission line constants. junction_inductance_nh may be left as None until the spec
    is passed through calibrate_resonator.
    """

    impedance_ohm: float
    capacitance_ff: float
    half_length_mm: float
    junction_capacitance_ff: float
    junction_inductance_nh: float = None
    n_modes: int = 1

    def __post_init__(self):
        for name in (
            "impedance_ohm",
            "capacitance_ff",
            "half_length_mm",
            "junction_capacitance_ff",
        ):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidArgumentError(f"{name} must be > 0, got {value}")

        if self.junction_inductance_nh is not None and not self.junction_inductance_nh > 0:
            raise InvalidArgumentError(
                f"junction_inductance_nh must be > 0, got {self.junction_inductance_nh}"
            )

        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidArgumentError(f"n_modes must be a positive integer, got {self.n_modes}")

    @property
    def capacitance_per_mm(self):
        """C_0 in fF/mm"""
        return self.capacitance_ff / (2 * self.half_length_mm)

    @property
    def inductance_per_mm(self):
        """L_0 = Z^2 C_0 in nH/mm"""
        return self.impedance_ohm ** 2 * self.capacitance_per_mm * FEMTO / NANO

    @property
    def modified_capacitance_ff(self):
        return self.capacitance_ff + self.junction_capacitance_ff

    @property
    def line_time_s(self):
        """Z C_r, the time constant relating x = k l to the angular frequency."""
        return self.impedance_ohm * self.capacitance_ff * FEMTO

    @property
    def half_wave_frequency_ghz(self):
        """Fundamental of the uninterrupted line of length 2l (transparent junction)."""
        return self.x_to_frequency_ghz(math.pi / 2)

    @property
    def coupling_ratio(self):
        """r = 2 L_0 l / L_J"""
        self._require_inductance()
        return 2 * self.inductance_per_mm * self.half_length_mm / self.junction_inductance_nh

    @property
    def plasma_frequency_ghz(self):
        self._require_inductance()
        lc = self.junction_inductance_nh * NANO * self.junction_capacitance_ff * FEMTO
        return 1 / (2 * math.pi * math.sqrt(lc)) / GIGA

    @property
    def plasma_x(self):
        """x_p, the value of k l at which the line frequency meets the junction plasma frequency"""
        return 2 * math.pi * self.plasma_frequency_ghz * GIGA * self.line_time_s / 2

    def x_to_frequency_ghz(self, x):
        return 2 * np.asarray(x) / self.line_time_s / (2 * math.pi) / GIGA

    def _require_inductance(self):
        if self.junction_inductance_nh is None:
            raise InvalidArgumentError(
                "junction_inductance_nh is not set, use calibrate_resonator to obtain it"
            )


@dataclass(frozen=True, eq=False)
class ModeSet:
    """
    Solved antisymmetric modes, ordered by frequency. Arrays are indexed by mode number - 1.

    amplitudes holds the normalisation A of u_n(x) = A cos(k (l - x)) on x > 0, and
    discontinuities the jump delta_n = u_n(0+) - u_n(0-) = 2 A cos(k l).
    """

    spec: ResonatorSpec
    wavenumbers_per_mm: np.ndarray
    frequencies_ghz: np.ndarray
    amplitudes: np.ndarray
    discontinuities: np.ndarray
    phase_slips: np.ndarray
    residuals_per_mm: np.ndarray
    brackets: tuple

    @property
    def n_modes(self):
        return len(self.frequencies_ghz)

    def coupling_scales(self):
        """Delta psi_n / Delta psi_1, the factor applied to the coupling of mode n."""
        return self.phase_slips / self.phase_slips[0]

    def to_frame(self):
        return pd.DataFrame(
            {
                "mode": np.arange(1, self.n_modes + 1),
                "frequency_ghz": self.frequencies_ghz,
                "wavenumber_per_mm": self.wavenumbers_per_mm,
                "discontinuity": self.discontinuities,
                "phase_slip": self.phase_slips,
                "residual_per_mm": self.residuals_per_mm,
            }
        )


def _stiffness(spec, x):
    return spec.coupling_ratio * (1.0 - (x / spec.plasma_x) ** 2)


def _regular_form(spec, x):
    return x * np.sin(x) - _stiffness(spec, x) * np.cos(x)


def dispersion_residual(spec, wavenumber_per_mm):
    """|k - (2 L_0 / L_J)(1 - omega^2 / omega_p^2) cot(k l)| in 1/mm"""
    x = np.asarray(wavenumber_per_mm) * spec.half_length_mm
    return np.abs(x - _stiffness(spec, x) / np.tan(x)) / spec.half_length_mm


def _find_roots(spec, n_roots):
    """
    First n_roots positive roots of the pole free dispersion function.

    Each interval (m pi, (m + 1) pi) between singularities of cot is sampled for sign
    changes and every sign change is refined by bisection.
    """
    roots = []
    brackets = []
    report = []

    max_intervals = 4 * n_roots + 8
    interval = 0
    while len(roots) < n_roots and interval < max_intervals:
        lower, upper = interval * math.pi, (interval + 1) * math.pi
        grid = np.linspace(lower, upper, SAMPLES_PER_INTERVAL + 1)[1:-1]
        values = _regular_form(spec, grid)

        changes = np.nonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))[0]
        for i in changes:
            if values[i] == 0:
                root = grid[i]
            else:
                root = bisect(
                    lambda x: _regular_form(spec, x),
                    grid[i],
                    grid[i + 1],
                    xtol=1e-15,
                    maxiter=200,
                )
            roots.append(root)
            brackets.append((grid[i], grid[i + 1]))

        report.append({"interval": (lower, upper), "sign_changes": len(changes)})
        interval += 1

    if len(roots) < n_roots:
        raise NumericalFailureError(
            f"Found {len(roots)} of {n_roots} requested modes",
            report={"requested": n_roots, "found": len(roots), "intervals": report},
        )

    return np.array(roots[:n_roots]), tuple(brackets[:n_roots])


def phase_slip(discontinuity, frequency_ghz, capacitance_ff):
    """
    Zero point phase slip across the central junction

        Delta psi = (delta / phi_0) sqrt(hbar / (2 omega C))

    with phi_0 the reduced flux quantum and omega the angular mode frequency.
    """
    omega = 2 * math.pi * np.asarray(frequency_ghz) * GIGA
    flux_zpf = np.sqrt(constants.hbar / (2 * omega * capacitance_ff * FEMTO))
    return np.asarray(discontinuity) * flux_zpf / REDUCED_FLUX_QUANTUM


def solve_modes(spec):
    """
    Solve the first spec.n_modes antisymmetric modes of the resonator.

    Modes are normalised so that the integral of C_0 u_n^2 over the line plus
    C_J delta_n^2 equals the modified capacitance C_r + C_J.

    Args:
        spec (ResonatorSpec): The resonator. junction_inductance_nh must be set.

    Returns:
        ModeSet: Frequencies, wavenumbers, discontinuities and phase slips per mode.
    """
    spec._require_inductance()  # pylint: disable=protected-access

    x, brackets = _find_roots(spec, spec.n_modes)

    wavenumbers = x / spec.half_length_mm
    frequencies = spec.x_to_frequency_ghz(x)

    line_weight = spec.capacitance_ff / 2 * (1 + np.sin(2 * x) / (2 * x))
    junction_weight = 4 * spec.junction_capacitance_ff * np.cos(x) ** 2
    amplitudes = np.sqrt(spec.modified_capacitance_ff / (line_weight + junction_weight))
    discontinuities = 2 * amplitudes * np.cos(x)

    slips = phase_slip(discontinuities, frequencies, spec.modified_capacitance_ff)

    residuals = dispersion_residual(spec, wavenumbers)
    for n, residual in enumerate(residuals, start=1):
        logger.debug(
            "Mode {0}: {1:.6f} GHz, k l = {2:.12f}, phase slip {3:.6f}",
            n,
            frequencies[n - 1],
            x[n - 1],
            slips[n - 1],
        )
        if residual > RESIDUAL_TOLERANCE:
            logger.warning("Mode {0} dispersion residual {1:.3e} per mm", n, residual)

    return ModeSet(
        spec=spec,
        wavenumbers_per_mm=wavenumbers,
        frequencies_ghz=frequencies,
        amplitudes=amplitudes,
        discontinuities=discontinuities,
        phase_slips=slips,
        residuals_per_mm=residuals,
        brackets=brackets,
    )


def mode_function(modes, n, x_mm):
    """
    Spatial profile u_n(x) of mode n (1 based) at x in mm, x in [-l, l].

    u_n(x) = A cos(k (l - x)) for x >= 0 and -A cos(k (l + x)) for x < 0, so u_n is
    continuous everywhere except at the junction, x = 0.
    """
    if not 1 <= n <= modes.n_modes:
        raise InvalidArgumentError(f"Mode {n} not in 1..{modes.n_modes}")

    half_length = modes.spec.half_length_mm
    x = np.asarray(x_mm, dtype=float)
    if np.any(np.abs(x) > half_length):
        raise InvalidArgumentError(f"x must lie in [-{half_length}, {half_length}] mm")

    k = modes.wavenumbers_per_mm[n - 1]
    amplitude = modes.amplitudes[n - 1]
    values = np.where(
        x >= 0,
        amplitude * np.cos(k * (half_length - x)),
        -amplitude * np.cos(k * (half_length + x)),
    )

    if values.ndim == 0:
        return float(values)
    return values


def _fundamental_frequency(spec, inductance_nh):
    single = replace(spec, junction_inductance_nh=inductance_nh, n_modes=1)
    x, _ = _find_roots(single, 1)
    return float(single.x_to_frequency_ghz(x[0]))


def calibrate_resonator(spec, target_frequency_ghz, bounds_nh=CALIBRATION_BOUNDS_NH):
    """
    Find the junction inductance that places the fundamental mode at the target frequency.

    The fundamental decreases monotonically with L_J, so the search is a one dimensional
    root find on log(L_J) within bounds_nh.

    Args:
        spec (ResonatorSpec): The resonator; junction_inductance_nh is ignored.
        target_frequency_ghz (float): Desired fundamental, cyclic GHz.
        bounds_nh (tuple, optional): Search interval for L_J. Defaults to (1e-3, 1e3).

    Returns:
        ResonatorSpec: A copy of spec with junction_inductance_nh set.
    """
    lower_nh, upper_nh = bounds_nh
    highest = _fundamental_frequency(spec, lower_nh)
    lowest = _fundamental_frequency(spec, upper_nh)

    logger.debug(
        "Achievable fundamental for L_J in [{0}, {1}] nH: [{2:.6f}, {3:.6f}] GHz",
        lower_nh,
        upper_nh,
        lowest,
        highest,
    )

    if highest < target_frequency_ghz <= spec.half_wave_frequency_ghz:
        logger.warning(
            "Target {0} GHz is at the transparent junction limit, using L_J = {1} nH",
            target_frequency_ghz,
            lower_nh,
        )
        return replace(spec, junction_inductance_nh=lower_nh)

    if not lowest <= target_frequency_ghz <= highest:
        raise CalibrationError(
            f"Target {target_frequency_ghz} GHz outside the achievable band "
            f"[{lowest:.6f}, {highest:.6f}] GHz",
            achievable=(lowest, highest),
        )

    log_inductance = brentq(
        lambda s: _fundamental_frequency(spec, math.exp(s)) - target_frequency_ghz,
        math.log(lower_nh),
        math.log(upper_nh),
        xtol=1e-14,
        maxiter=200,
    )
    inductance = math.exp(log_inductance)

    reached = _fundamental_frequency(spec, inductance)
    if abs(reached - target_frequency_ghz) > CALIBRATION_TOLERANCE_GHZ:
        raise NumericalFailureError(
            f"Calibration reached {reached} GHz for target {target_frequency_ghz} GHz",
            report={"junction_inductance_nh": inductance, "frequency_ghz": reached},
        )

    span = math.log(upper_nh) - math.log(lower_nh)
    if min(log_inductance - math.log(lower_nh), math.log(upper_nh) - log_inductance) < 0.01 * span:
        logger.warning("Calibrated L_J = {0:.6g} nH is close to a search bound", inductance)

    logger.info("Calibrated L_J = {0:.9g} nH for {1} GHz", inductance, target_frequency_ghz)
    return replace(spec, junction_inductance_nh=inductance)


def resonator_spec_from_settings(settings):
    """Build a ResonatorSpec from a (unit suffixed) resonator settings section."""
    try:
        inductance = settings.get("junction_inductance_nh")
        return ResonatorSpec(
            impedance_ohm=float(settings["impedance_ohm"]),
            capacitance_ff=float(settings["capacitance_ff"]),
            half_length_mm=float(settings["half_length_mm"]),
            junction_capacitance_ff=float(settings["junction_capacitance_ff"]),
            junction_inductance_nh=None if inductance is None else float(inductance),
            n_modes=int(settings["n_modes"]),
        )
    except KeyError as e:
        raise ConfigError(f"resonator section is missing '{e.args[0]}'") from e
    except (TypeError, InvalidArgumentError) as e:
        raise ConfigError(f"invalid resonator section: {e}") from e


def run_resonator_modes(settings=RESONATOR_SETTINGS_DEFAULTS):
    """
    Solve the resonator described by a settings section. If no junction inductance is given,
    it is first calibrated against target_frequency_ghz.

    Returns:
        ModeSet: The solved modes (modes.spec holds the resolved inductance).
    """
    spec = resonator_spec_from_settings(settings)

    if spec.junction_inductance_nh is None:
        target = settings.get("target_frequency_ghz")
        if target is None:
            raise ConfigError(
                "resonator section needs junction_inductance_nh or target_frequency_ghz"
            )
        spec = calibrate_resonator(spec, float(target))

    return solve_modes(spec)
