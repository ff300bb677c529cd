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

import sys

import click
import pandas as pd
from loguru import logger

from cqedpy.circuit.junction import run_qubit_models
from cqedpy.cli.config import (
    output_directory,
    print_defaults,
    qubit_sections,
    read_config,
    resonator_section,
    solve_resonator,
)
from cqedpy.utils.tools import configure_logging, exit_on_error, write_table

FLUX_SETTINGS = (0.0, 1.0, 0.5)

logger.remove()
logger.add(sys.stderr, level="DEBUG")


@click.command()
@click.option(
    "--config",
    "-c",
    required=False,
    type=click.Path(exists=True, dir_okay=False),
    help="Path to the YAML run configuration",
)
@click.option(
    "--out",
    "-o",
    required=False,
    type=click.Path(file_okay=False),
    help="Directory for output, overrides output.directory",
)
@click.option("--default", "-d", is_flag=True, help="Print the default configuration")
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages")
@exit_on_error
def click_command(config, out, default, verbose):
    """
    Project every qubit of the configuration at the coupler fluxes f3 = 0, 1 and 0.5.
    Couplings g and g / w_r are filled in when the configuration has a resonator section.
    Writes qubits.csv and its JSON sidecar.
    """
    if default:
        print_defaults()
        return
    configure_logging(verbose)

    run_config = read_config(config)
    sections = qubit_sections(run_config)

    delta_psi = None
    resonator_frequency = None
    resonator = resonator_section(run_config, optional=True)
    if resonator is not None:
        mode_set = solve_resonator(resonator)
        delta_psi = float(mode_set.phase_slips[0])
        resonator_frequency = float(mode_set.frequencies_ghz[0])
        logger.info(
            "Resonator at {0:.4f} GHz with phase slip {1:.4f}", resonator_frequency, delta_psi
        )

    rows = []
    for index, settings in enumerate(sections):
        models = run_qubit_models(settings, delta_psi, resonator_frequency, FLUX_SETTINGS)
        for f3 in FLUX_SETTINGS:
            rows.append(dict(qubit=index + 1, **models[f3].as_record()))

    frame = pd.DataFrame(rows)
    write_table(
        frame,
        output_directory(run_config, out) / "qubits.csv",
        {"qubits": sections, "resonator": resonator, "delta_psi": delta_psi},
    )
    click.echo(
        frame[["qubit", "f3", "frequency_ghz", "c1_z", "c1_x", "c1_perp", "g_over_wr"]].to_string(
            index=False
        )
    )


if __name__ == "__main__":
    click_command()  # pylint: disable=no-value-for-parameter
