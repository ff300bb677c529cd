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

from cqedpy.projects.reproduce.run import REPRODUCE_IDS, run_reproduction
from cqedpy.utils.tools import configure_logging, exit_on_error

logger.remove()
logger.add(sys.stderr, level="DEBUG")


@click.command()
@click.argument("figure_id", nargs=1, type=click.Choice(REPRODUCE_IDS))
@click.option(
    "--out",
    "-o",
    default=".",
    show_default=True,
    type=click.Path(file_okay=False),
    help="Directory for output",
)
@click.option("--workers", "-w", type=click.IntRange(1), help="Process pool size for sweeps")
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages")
@exit_on_error
def click_command(figure_id, out, workers, verbose):
    """
    Run one of the pinned reproductions shipped with cqedpy and compare it with the
    published values. Writes FIGURE_ID.csv, FIGURE_ID_summary.csv and their JSON sidecars.
    """
    configure_logging(verbose)

    _, summary = run_reproduction(figure_id, out, workers)
    click.echo(summary.to_string(index=False))


if __name__ == "__main__":
    click_command()  # pylint: disable=no-value-for-parameter
