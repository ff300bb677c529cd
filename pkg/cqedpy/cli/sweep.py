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
from loguru import logger

from cqedpy.circuit.junction import run_parameter_sweep
from cqedpy.cli.config import (
    output_directory,
    print_defaults,
    qubit_sections,
    read_config,
    resonator_section,
    solve_resonator,
    sweep_section,
)
from cqedpy.utils.exceptions import ConfigError
from cqedpy.utils.tools import configure_logging, exit_on_error, write_table

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
    Sweep one or two of alpha, f1, f3 and alpha4 for one qubit of the configuration and
    write the projected coefficients to sweep.csv, one row per grid point in grid order.

    Columns: the swept variables, then frequency_ghz, c1_x, c1_y, c1_z, c1_identity,
    c1_perp, c2_x, c2_y, c2_z, c2_identity, coupling_ghz, g_over_wr, error.
    """
    if default:
        print_defaults()
        return
    configure_logging(verbose)

    run_config = read_config(config)
    settings = sweep_section(run_config)
    sections = qubit_sections(run_config)

    index = settings["qubit"]
    if not isinstance(index, int) or not 0 <= index < len(sections):
        raise ConfigError(f"sweep.qubit = {index!r} does not name one of {len(sections)} qubits")

    delta_psi = None
    resonator_frequency = None
    resonator = resonator_section(run_config, optional=True)
    if resonator is not None:
        mode_set = solve_resonator(resonator)
        delta_psi = float(mode_set.phase_slips[0])
        resonator_frequency = float(mode_set.frequencies_ghz[0])

    logger.info("========== Starting sweep ==========")
    frame = run_parameter_sweep(sections[index], settings, delta_psi, resonator_frequency)
    write_table(
        frame,
        output_directory(run_config, out) / "sweep.csv",
        {"sweep": settings, "qubit": sections[index], "resonator": resonator, "delta_psi": delta_psi},
    )
    logger.info("========== Sweep complete ==========")


if __name__ == "__main__":
    click_command()  # pylint: disable=no-value-for-parameter
