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
Pinned reproductions of the published coupling maps, qubit spectra and gate figures. Each id
has a recipe in recipes/<id>.yaml; the run writes <id>.csv with the data and
<id>_summary.csv with one row per check against the published value.
"""

import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from cqedpy.circuit.junction import (
    CircuitParams,
    QUBIT_SETTINGS_DEFAULTS,
    calibrate_charging,
    circuit_params_from_settings,
    coupling_strength,
    junction_spectrum,
    project_qubit,
    run_parameter_sweep,
)
from cqedpy.circuit.resonator import RESONATOR_SETTINGS_DEFAULTS, run_resonator_modes
from cqedpy.gate.cphase import (
    PROTOCOL_SETTINGS_DEFAULTS,
    gate_params_from_settings,
    initial_state,
    numeric_protocol,
    schedule_from_settings,
)
from cqedpy.utils.exceptions import ConfigError, NumericalFailureError
from cqedpy.utils.tools import load_config, merge_section, write_table

RECIPE_DIRECTORY = Path(__file__).parent / "recipes"

REPRODUCE_IDS = ("fig2a", "fig2b", "fig2c", "fig2d", "gate-table")

SUMMARY_COLUMNS = ("check", "kind", "value", "expected", "tolerance", "passed")


def load_recipe(figure_id):
    if figure_id not in REPRODUCE_IDS:
        raise ConfigError(f"Unknown id '{figure_id}', expected one of {', '.join(REPRODUCE_IDS)}")
    return load_config(RECIPE_DIRECTORY / f"{figure_id}.yaml")


def _within(check, value, expected, tolerance):
    passed = bool(np.isfinite(value) and abs(value - expected) <= tolerance)
    return {
        "check": check,
        "kind": "within",
        "value": value,
        "expected": expected,
        "tolerance": tolerance,
        "passed": passed,
    }


def _at_least(check, value, minimum):
    return {
        "check": check,
        "kind": "at_least",
        "value": value,
        "expected": minimum,
        "tolerance": np.nan,
        "passed": bool(value >= minimum),
    }


def _at_most(check, value, maximum):
    return {
        "check": check,
        "kind": "at_most",
        "value": value,
        "expected": maximum,
        "tolerance": np.nan,
        "passed": bool(np.isfinite(value) and value <= maximum),
    }


def _holds(check, value, passed):
    return {
        "check": check,
        "kind": "holds",
        "value": value,
        "expected": np.nan,
        "tolerance": np.nan,
        "passed": bool(passed),
    }


def _nearest(frame, column, value):
    values = frame[column].to_numpy()
    return values[np.argmin(np.abs(values - value))]


def _qubit_settings(recipe):
    return merge_section("qubit", QUBIT_SETTINGS_DEFAULTS, recipe["qubit"])


def _coefficient_map(recipe, workers):
    data = run_parameter_sweep(_qubit_settings(recipe), dict(recipe["sweep"], workers=workers))
    checks = recipe["checks"]
    coefficient = recipe["coefficient"]

    row = data[data["alpha"] == _nearest(data, "alpha", checks["alpha"])]
    working = row[row["f1"] == _nearest(row, "f1", checks["working_f1"])].iloc[0]
    symmetric = row[row["f1"] == _nearest(row, "f1", checks["symmetric_f1"])].iloc[0]

    summary = [
        _holds(
            "c1_z changes sign across f1 at the working alpha",
            float(row["c1_z"].max() - row["c1_z"].min()),
            row["c1_z"].min() < 0 < row["c1_z"].max(),
        ),
        _holds(
            "longitudinal coupling dominates at the working point",
            float(abs(working["c1_z"]) - working["c1_perp"]),
            abs(working["c1_z"]) > working["c1_perp"],
        ),
        _holds(
            "transverse coupling dominates at the symmetry point",
            float(symmetric["c1_perp"] - abs(symmetric["c1_z"])),
            symmetric["c1_perp"] > abs(symmetric["c1_z"]),
        ),
        _holds(
            f"{coefficient} bounded by 1",
            float(data[coefficient].abs().max()),
            data[coefficient].abs().max() <= 1,
        ),
    ]
    return data, summary


def run_fig2a(recipe, workers=None):
    return _coefficient_map(recipe, workers)


def run_fig2b(recipe, workers=None):
    return _coefficient_map(recipe, workers)


def run_fig2c(recipe, workers=None):
    data = run_parameter_sweep(
        _qubit_settings(recipe),
        dict(recipe["sweep"], workers=workers),
        delta_psi=float(recipe["delta_psi"]),
        resonator_frequency_ghz=float(recipe["resonator_frequency_ghz"]),
    )
    checks = recipe["checks"]
    working_f1 = _nearest(data, "f1", checks["working_f1"])

    summary = []
    for f3, expected in checks["g_over_wr"].items():
        point = data[(data["f3"] == float(f3)) & (data["f1"] == working_f1)].iloc[0]
        summary.append(
            _within(f"g / w_r at f3 = {f3:g}", float(point["g_over_wr"]), expected, checks["tolerance"])
        )
        summary.append(
            _holds(
                f"longitudinal coupling dominates at f3 = {f3:g}",
                float(abs(point["c1_z"]) - point["c1_perp"]),
                abs(point["c1_z"]) > point["c1_perp"],
            )
        )
    return data, summary


def run_fig2d(recipe, workers=None):
    settings = _qubit_settings(recipe)
    params = circuit_params_from_settings(settings)
    calibrated = True
    try:
        params = calibrate_charging(params, float(settings["target_frequency_ghz"]))
    except NumericalFailureError as e:
        logger.warning("Keeping E_c = {0} GHz: {1}", params.charging_energy_ghz, e)
        calibrated = False

    grid = recipe["f1_range"]
    n_levels = int(recipe["n_levels"])
    rows = []
    for f3 in recipe["flux_settings"]:
        for f1 in np.linspace(grid["start"], grid["stop"], int(grid["points"])):
            levels = junction_spectrum(replace(params, f1=float(f1), f3=float(f3)), n_levels)
            row = {"f3": float(f3), "f1": float(f1)}
            row.update({f"level_{n}_ghz": levels[n] - levels[0] for n in range(1, n_levels)})
            rows.append(row)
    data = pd.DataFrame(rows)

    checks = recipe["checks"]
    working_f1 = float(checks["working_f1"])
    summary = [_holds("calibrated charging energy (GHz)", params.charging_energy_ghz, calibrated)]
    for f3, expected in checks["frequency_ghz"].items():
        model = project_qubit(replace(params, f1=working_f1, f3=float(f3)))
        summary.append(
            _within(f"qubit frequency at f3 = {f3:g}", model.frequency_ghz, expected, checks["tolerance"])
        )
    targets = _calibration_targets(params, checks["frequency_ghz"], working_f1)
    summary.extend(targets)
    summary.append(_charging_spread(targets, float(checks["charging_spread"])))
    return data, summary


def _calibration_targets(params, targets, working_f1):
    """E_c that would place each flux setting on its own published frequency."""
    rows = []
    for f3, target in targets.items():
        check = f"charging energy for {target:g} GHz at f3 = {f3:g}"
        try:
            fitted = calibrate_charging(replace(params, f1=working_f1, f3=float(f3)), target)
            rows.append(_holds(check, fitted.charging_energy_ghz, True))
        except NumericalFailureError as e:
            logger.warning("{0}: {1}", check, e)
            rows.append(_holds(check, np.nan, False))
    return rows


def _charging_spread(targets, maximum):
    """One E_c has to serve all flux settings; NaN when any fit failed."""
    fitted = np.array([row["value"] for row in targets], dtype=float)
    spread = float(fitted.max() / fitted.min() - 1) if np.all(np.isfinite(fitted)) else np.nan
    row = _at_most("charging energy spread across flux settings", spread, maximum)
    if not row["passed"]:
        logger.warning(
            "The published frequencies need E_c = {0} GHz, no single E_c fits them within {1:.0%}",
            ", ".join(f"{value:.4g}" for value in fitted),
            maximum,
        )
    return row


def _coupling_checks(recipe):
    summary = []
    tolerance = float(recipe["coupling_tolerance"])
    for case in recipe["couplings"]:
        params = CircuitParams(
            josephson_energy_ghz=case["josephson_energy_ghz"],
            alpha=QUBIT_SETTINGS_DEFAULTS["alpha"],
            alpha4=case["alpha4"],
            f3=case["f3"],
        )
        ratio = coupling_strength(params, case["delta_psi"]) / case["resonator_frequency_ghz"]
        summary.append(
            _within(
                f"g / w_r (alpha4 = {case['alpha4']:g}, f3 = {case['f3']:g})",
                ratio,
                case["expected"],
                tolerance,
            )
        )
    return summary


def _phase_slip_check(recipe):
    settings = merge_section("resonator", RESONATOR_SETTINGS_DEFAULTS, recipe["resonator"])
    modes = run_resonator_modes(settings)
    expected = recipe["phase_slip"]["expected"]
    return _within(
        f"phase slip at {modes.frequencies_ghz[0]:.3f} GHz",
        float(modes.phase_slips[0]),
        expected,
        recipe["phase_slip"]["relative_tolerance"] * expected,
    )


def _multimode_run(multimode, settings, sched):
    resonator = merge_section("resonator", RESONATOR_SETTINGS_DEFAULTS, multimode["resonator"])
    modes = run_resonator_modes(resonator)
    gp = gate_params_from_settings(dict(settings, n_modes=int(multimode["n_modes"])), modes)
    logger.info("Running the gate with Fock truncations {0}", gp.fock_dims)
    _, report = numeric_protocol(sched, gp, initial_state(gp))
    return modes, report


def _fidelity_shift_check(modes, shift, multimode):
    n_modes = int(multimode["n_modes"])
    row = _within(
        f"fidelity shift with {n_modes} resonator modes",
        shift,
        0.0,
        float(multimode["max_fidelity_shift"]),
    )
    if not row["passed"]:
        logger.warning(
            "Higher modes at {0} GHz with coupling scales {1} shift the fidelity by {2:.4g}",
            ", ".join(f"{f:.3f}" for f in modes.frequencies_ghz[:n_modes]),
            ", ".join(f"{s:.3f}" for s in modes.coupling_scales()[:n_modes]),
            shift,
        )
    return row


def run_gate_table(recipe, workers=None):
    settings = merge_section("protocol", PROTOCOL_SETTINGS_DEFAULTS, recipe["protocol"])
    gp = gate_params_from_settings(settings)
    sched = schedule_from_settings(settings, gp)
    checks = recipe["checks"]

    rows = []
    for c_x in recipe["transverse_table"]:
        params = replace(gp, transverse=(c_x, c_x))
        _, report = numeric_protocol(sched, params, initial_state(params))
        rows.append(dict(case="instantaneous", c_x=c_x, **_report_columns(report)))

    ramped = replace(sched, ramp_time_ns=recipe["ramp_fraction"] * sched.t1_ns)
    _, ramped_report = numeric_protocol(ramped, gp, initial_state(gp))
    rows.append(dict(case="ramped", c_x=gp.transverse[0], **_report_columns(ramped_report)))

    multimode = recipe.get("multimode")
    if multimode is not None:
        modes, multi_report = _multimode_run(multimode, settings, sched)
        rows.append(dict(case="multimode", c_x=gp.transverse[0], **_report_columns(multi_report)))
    data = pd.DataFrame(rows)

    working = data[(data["case"] == "instantaneous") & (data["c_x"] == gp.transverse[0])].iloc[0]
    fidelities = data[data["case"] == "instantaneous"]["fidelity"].to_numpy()

    summary = _coupling_checks(recipe)
    summary.append(_phase_slip_check(recipe))
    summary.extend(
        [
            _within(
                "w_r t1",
                sched.rotation_angles[0],
                checks["omega_r_t1"]["expected"],
                checks["omega_r_t1"]["tolerance"],
            ),
            _within(
                "gate time (ns)",
                sched.gate_time_ns,
                checks["gate_time_ns"]["expected"],
                checks["gate_time_ns"]["tolerance"],
            ),
            _at_least(
                f"fidelity at c_x = {gp.transverse[0]:g}",
                float(working["fidelity"]),
                checks["minimum_fidelity"],
            ),
            _within(
                "|invariant phase| (rad), c_x = 0",
                abs(float(data.iloc[0]["two_qubit_phase"])),
                math.pi,
                1e-6,
            ),
            _holds(
                "fidelity decreases with c_x",
                float(fidelities[0] - fidelities[-1]),
                np.all(np.diff(fidelities) < 0),
            ),
        ]
    )
    if multimode is not None:
        summary.append(
            _fidelity_shift_check(
                modes, float(data.iloc[-1]["fidelity"]) - float(working["fidelity"]), multimode
            )
        )
    return data, summary


def _report_columns(report):
    return {
        "ramp_time_ns": report.ramp_time_ns,
        "fidelity": report.fidelity,
        "two_qubit_phase": report.two_qubit_phase,
        "qubit_purity": report.qubit_purity,
        "gate_time_ns": report.gate_time_ns,
        "max_mean_photons": report.truncation_diagnostics["mode_1"]["max_mean_photons"],
    }


RUNNERS = {
    "fig2a": run_fig2a,
    "fig2b": run_fig2b,
    "fig2c": run_fig2c,
    "fig2d": run_fig2d,
    "gate-table": run_gate_table,
}


def run_reproduction(figure_id, output_directory, workers=None):
    """
    Run one pinned reproduction and write its data and summary tables.

    Args:
        figure_id (str): One of REPRODUCE_IDS.
        output_directory (str or Path): Where <id>.csv and <id>_summary.csv are written.
        workers (int, optional): Process pool size for sweeps (default: all CPUs).

    Returns:
        tuple: (data DataFrame, summary DataFrame)
    """
    recipe = load_recipe(figure_id)
    logger.info("Reproducing {0}: {1}", figure_id, recipe.get("description", ""))

    data, summary = RUNNERS[figure_id](recipe, workers)
    summary = pd.DataFrame(summary, columns=list(SUMMARY_COLUMNS))

    output_directory = Path(output_directory)
    provenance = {"id": figure_id, "recipe": recipe}
    write_table(data, output_directory / f"{figure_id}.csv", provenance)
    write_table(summary, output_directory / f"{figure_id}_summary.csv", provenance)

    failed = summary[~summary["passed"]]
    for _, row in failed.iterrows():
        logger.warning("Check failed: {0} (value {1:.6g})", row["check"], row["value"])
    logger.info("{0}: {1} of {2} checks passed", figure_id, len(summary) - len(failed), len(summary))
    return data, summary
