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
Run configuration shared by the subcommands. A YAML file holds the sections `resonator`,
`qubits` (a list, one entry per qubit), `protocol`, `sweep` and `output`. Keys left out of a
section take their defaults, apart from the physical keys listed in REQUIRED_KEYS.
"""

import json
from pathlib import Path

import click

from cqedpy.circuit.junction import QUBIT_SETTINGS_DEFAULTS, SWEEP_SETTINGS_DEFAULTS
from cqedpy.circuit.resonator import RESONATOR_SETTINGS_DEFAULTS, run_resonator_modes
from cqedpy.gate.cphase import PROTOCOL_SETTINGS_DEFAULTS
from cqedpy.utils.exceptions import ConfigError
from cqedpy.utils.tools import load_config, merge_section, resolve_section

OUTPUT_SETTINGS_DEFAULTS = {"directory": "."}

REQUIRED_KEYS = {
    "resonator": ("impedance_ohm", "capacitance_ff", "half_length_mm", "junction_capacitance_ff"),
    "qubits": ("josephson_energy_ghz", "alpha", "alpha4"),
    "protocol": ("resonator_frequency_ghz", "g_over_wr"),
    "sweep": ("axes",),
    "output": (),
}

RUN_CONFIG_DEFAULTS = {
    "resonator": RESONATOR_SETTINGS_DEFAULTS,
    "qubits": [QUBIT_SETTINGS_DEFAULTS, QUBIT_SETTINGS_DEFAULTS],
    "protocol": PROTOCOL_SETTINGS_DEFAULTS,
    "sweep": SWEEP_SETTINGS_DEFAULTS,
    "output": OUTPUT_SETTINGS_DEFAULTS,
}


def print_defaults():
    """JSON is valid YAML, so the output can be saved and edited as a configuration."""
    click.echo(json.dumps(RUN_CONFIG_DEFAULTS, indent=4))


def read_config(path):
    if path is None:
        raise click.UsageError("Missing option '--config'")
    return load_config(path)


def resonator_section(config, optional=False):
    return resolve_section(
        config, "resonator", RESONATOR_SETTINGS_DEFAULTS, REQUIRED_KEYS["resonator"], optional
    )


def qubit_sections(config):
    given = config.get("qubits")
    if not given:
        raise ConfigError("Configuration is missing the 'qubits' section")
    if not isinstance(given, list):
        raise ConfigError("Section 'qubits' must be a list with one entry per qubit")
    return [
        merge_section(f"qubits[{i}]", QUBIT_SETTINGS_DEFAULTS, section, REQUIRED_KEYS["qubits"])
        for i, section in enumerate(given)
    ]


def protocol_section(config):
    return resolve_section(
        config, "protocol", PROTOCOL_SETTINGS_DEFAULTS, REQUIRED_KEYS["protocol"]
    )


def sweep_section(config):
    return resolve_section(config, "sweep", SWEEP_SETTINGS_DEFAULTS, REQUIRED_KEYS["sweep"])


def solve_resonator(settings, n_modes=None):
    """ModeSet of a resonator section, with n_modes overridden when given."""
    if n_modes is not None:
        settings = dict(settings, n_modes=n_modes)
    return run_resonator_modes(settings)


def output_directory(config, out):
    if out is not None:
        return Path(out)
    section = resolve_section(config, "output", OUTPUT_SETTINGS_DEFAULTS, optional=True)
    return Path(section["directory"] if section else OUTPUT_SETTINGS_DEFAULTS["directory"])
