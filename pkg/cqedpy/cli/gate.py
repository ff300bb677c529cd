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
from dataclasses import asdict

import click
from loguru import logger

import cqedpy
from cqedpy.cli.config import (
    output_directory,
    print_defaults,
    protocol_section,
    read_config,
    resonator_section,
    solve_resonator,
)
from cqedpy.gate.cphase import run_cphase_gate
from cqedpy.utils.tools import configure_logging, exit_on_error, write_json

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
@click.option(
    "--modes",
    "-m",
    type=click.IntRange(1, 3),
    help="Number of resonator modes in the dynamics, overrides protocol.n_modes",
)
@click.option(
    "--ramp-ns",
    type=click.FloatRange(min=0),
    help="Length of the coupling ramps in ns, overrides protocol.ramp_time_ns",
)
@click.option(
    "--fock",
    type=click.IntRange(6),
    help="Fock truncation of the first mode, overrides protocol.n_trunc "
    "(protocol.multimode_n_trunc with more than one mode)",
)
@click.option("--default", "-d", is_flag=True, help="Print the default configuration")
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages")
@exit_on_error
def click_command(config, out, modes, ramp_ns, fock, default, verbose):
    """
    Simulate the four step CPHASE protocol of the protocol section and write
    gate_report.json with the fidelity, the two-qubit invariant phase, the gate time,
    the truncation diagnostics and the resolved parameters.

    With more than one mode the resonator section is solved for the higher modes.
    """
    if default:
        print_defaults()
        return
    configure_logging(verbose)

    run_config = read_config(config)
    settings = protocol_section(run_config)
    overrides = {"n_modes": modes, "ramp_time_ns": ramp_ns}
    settings.update({key: value for key, value in overrides.items() if value is not None})
    if fock is not None:
        settings["n_trunc" if settings["n_modes"] == 1 else "multimode_n_trunc"] = fock

    mode_set = None
    if settings["n_modes"] > 1:
        resonator = resonator_section(run_config)
        mode_set = solve_resonator(resonator, max(settings["n_modes"], resonator["n_modes"]))

    logger.info("========== Starting gate simulation ==========")
    sched, gp, _, report = run_cphase_gate(settings, mode_set)
    logger.info("========== Gate simulation complete ==========")

    result = report.as_dict()
    result["t1_ns"] = sched.t1_ns
    result["t2_ns"] = sched.t2_ns
    result["omega_r_t1"] = sched.rotation_angles[0]
    result["parameters"] = {"gate": asdict(gp), "schedule": asdict(sched)}
    result["config"] = settings
    result["version"] = cqedpy.__version__

    path = write_json(result, output_directory(run_config, out) / "gate_report.json")
    click.echo(f"w_r t1 = {sched.rotation_angles[0]:.4f}, gate time = {sched.gate_time_ns:.4f} ns")
    click.echo(f"Fidelity = {report.fidelity:.6f}, invariant phase = {report.two_qubit_phase:.6f} rad")
    click.echo(f"Report written to {path}")


if __name__ == "__main__":
    click_command()  # pylint: disable=no-value-for-parameter
