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
Parameter sweeps of the projected qubit over one or two circuit parameters.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import product

import numpy as np
import pandas as pd
import psutil
from loguru import logger

from cqedpy.circuit.junction.hamiltonian import (
    calibrate_charging,
    circuit_params_from_settings,
    project_qubit,
)
from cqedpy.utils.exceptions import ConfigError, InvalidArgumentError, NumericalFailureError

SWEEP_VARIABLES = ("alpha", "f1", "f3", "alpha4")

RESULT_COLUMNS = (
    "frequency_ghz",
    "c1_x",
    "c1_y",
    "c1_z",
    "c1_identity",
    "c1_perp",
    "c2_x",
    "c2_y",
    "c2_z",
    "c2_identity",
    "coupling_ghz",
    "g_over_wr",
    "error",
)

SWEEP_SETTINGS_DEFAULTS = {
    "axes": [
        {"variable": "f1", "start": 0.48, "stop": 0.53, "points": 26},
    ],
    "qubit": 0,
    "workers": None,
}


def sweep_grid(axes):
    """
    Validate the sweep axes and expand them into a grid in row major order (the last axis
    varies fastest).

    Returns:
        tuple: (variable names, list of value tuples)
    """
    if not isinstance(axes, list) or not 1 <= len(axes) <= 2:
        raise ConfigError("A sweep needs one or two axes")

    names = []
    values = []
    for axis in axes:
        try:
            name = axis["variable"]
            start, stop, points = float(axis["start"]), float(axis["stop"]), int(axis["points"])
        except KeyError as e:
            raise ConfigError(f"Sweep axis is missing '{e.args[0]}'") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid sweep axis {axis}: {e}") from e

        if name not in SWEEP_VARIABLES:
            raise ConfigError(f"Cannot sweep '{name}', expected one of {SWEEP_VARIABLES}")
        if name in names:
            raise ConfigError(f"Sweep variable '{name}' appears twice")
        if points < 2 or start == stop:
            raise ConfigError(f"Sweep axis '{name}' needs at least 2 distinct points")
        names.append(name)
        values.append(np.linspace(start, stop, points))

    return tuple(names), [tuple(float(v) for v in point) for point in product(*values)]


def _evaluate(task):
    params, names, point, delta_psi, resonator_frequency_ghz = task
    row = dict(zip(names, point))
    try:
        model = project_qubit(
            replace(params, **row),
            delta_psi=delta_psi,
            resonator_frequency_ghz=resonator_frequency_ghz,
        )
    except (NumericalFailureError, InvalidArgumentError) as e:
        row.update({column: np.nan for column in RESULT_COLUMNS})
        row["error"] = f"{type(e).__name__}: {e}"
        return row

    record = model.as_record()
    for column in RESULT_COLUMNS[:-1]:
        value = record[column]
        row[column] = np.nan if value is None else value
    row["error"] = ""
    return row


def run_parameter_sweep(
    qubit_settings, sweep_settings=SWEEP_SETTINGS_DEFAULTS, delta_psi=None, resonator_frequency_ghz=None
):
    """
    Project the qubit on every point of the sweep grid. A target_frequency_ghz in the qubit
    section calibrates E_c once, before the sweep.

    Points are distributed over a process pool (`workers`, default: all CPUs) and gathered
    in grid order. A point that fails keeps its row, with NaN values and the error message.

    Returns:
        pandas.DataFrame: One row per grid point; swept variables first, then RESULT_COLUMNS.
    """
    names, grid = sweep_grid(sweep_settings.get("axes"))
    params = circuit_params_from_settings(qubit_settings)
    target = qubit_settings.get("target_frequency_ghz")
    if target is not None:
        params = calibrate_charging(params, float(target))

    workers = sweep_settings.get("workers") or psutil.cpu_count() or 1
    workers = max(1, min(int(workers), len(grid)))
    logger.info("Sweeping {0} over {1} points with {2} worker(s)", names, len(grid), workers)

    tasks = [(params, names, point, delta_psi, resonator_frequency_ghz) for point in grid]
    if workers == 1:
        rows = [_evaluate(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_evaluate, tasks))

    failed = sum(1 for row in rows if row["error"])
    if failed:
        logger.warning("{0} of {1} sweep points failed", failed, len(rows))

    return pd.DataFrame(rows, columns=list(names) + list(RESULT_COLUMNS))
