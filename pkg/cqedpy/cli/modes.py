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

from cqedpy.cli.config import (
    output_directory,
    print_defaults,
    read_config,
    resonator_section,
    solve_resonator,
)
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
@click.option("--modes", "-m", type=click.IntRange(1, 20), help="Number of modes to solve")
@click.option("--default", "-d", is_flag=True, help="Print the default configuration")
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages")
@exit_on_error
def click_command(config, out, modes, default, verbose):
    """
    Solve the normal modes of the resonator interrupted by the coupling junction. When the
    resonator section has no junction_inductance_nh it is calibrated to target_frequency_ghz
    first. Writes modes.csv and its JSON sidecar.
    """
    if default:
        print_defaults()
        return
    configure_logging(verbose)

    run_config = read_config(config)
    settings = resonator_section(run_config)
    mode_set = solve_resonator(settings, modes)

    resolved = dict(settings, n_modes=mode_set.n_modes)
    resolved["junction_inductance_nh"] = mode_set.spec.junction_inductance_nh

    frame = mode_set.to_frame()
    write_table(frame, output_directory(run_config, out) / "modes.csv", {"resonator": resolved})

    click.echo(f"L_J = {mode_set.spec.junction_inductance_nh:.6g} nH")
    click.echo(frame.to_string(index=False))


if __name__ == "__main__":
    click_command()  # pylint: disable=no-value-for-parameter
