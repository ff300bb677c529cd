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
Configuration loading and result writers shared by the command line tools.
"""

import json
import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np
import yaml
from loguru import logger

import cqedpy
from cqedpy.utils.exceptions import (
    ConfigError,
    InvalidArgumentError,
    NumericalFailureError,
    UnsatisfiableConditionError,
)

FLOAT_FORMAT = "%.12g"

# Checked in order; the first matching error kind decides the exit code
EXIT_CODES = (
    (UnsatisfiableConditionError, 4),
    (ConfigError, 2),
    (InvalidArgumentError, 2),
    (NumericalFailureError, 3),
)


def load_config(path):
    """
    Read a YAML run configuration.

    Returns:
        dict: The top level sections.
    """
    try:
        with open(path, "r") as file_obj:
            config = yaml.safe_load(file_obj)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Configuration {path} is not valid YAML: {e}") from e

    if config is None:
        config = {}
    if not isinstance(config, dict):
        raise ConfigError(f"Configuration {path} must hold a mapping of sections")
    logger.debug("Loaded configuration sections {0} from {1}", sorted(config), path)
    return config


def resolve_section(config, name, defaults, required=(), optional=False):
    """
    Settings for one section: the keys given in the file override the defaults, except the
    keys in `required`, which the file has to provide.

    Args:
        config (dict): Loaded configuration.
        name (str): Section name.
        defaults (dict): Defaults of the section.
        required (tuple): Keys without a usable default.
        optional (bool): Return None instead of raising when the section is absent.

    Returns:
        dict: The resolved section, or None.
    """
    if name not in config or config[name] is None:
        if optional:
            return None
        raise ConfigError(f"Configuration is missing the '{name}' section")
    return merge_section(name, defaults, config[name], required)


def merge_section(name, defaults, given, required=()):
    if not isinstance(given, dict):
        raise ConfigError(f"Section '{name}' must be a mapping")

    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"Section '{name}' has unknown keys: {', '.join(unknown)}")
    for key in required:
        if key not in given:
            raise ConfigError(f"Section '{name}' is missing '{key}'")

    settings = dict(defaults)
    settings.update(given)
    return settings


def _serialisable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def write_json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as file_obj:
        json.dump(data, file_obj, indent=4, sort_keys=True, default=_serialisable)
        file_obj.write("\n")
    return path


def write_table(frame, path, config):
    """
    Write a data frame as CSV (12 significant digits, no index) together with a JSON
    sidecar holding the resolved configuration and the tool version.

    Returns:
        Path: The CSV path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    write_json({"version": cqedpy.__version__, "config": config}, path.with_suffix(".json"))
    logger.info("Wrote {0} rows to {1}", len(frame), path)
    return path


def exit_code(error):
    for kind, code in EXIT_CODES:
        if isinstance(error, kind):
            return code
    return 1


def exit_on_error(func):
    """Turn cqedpy errors raised by a command into messages and exit codes."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValueError, NumericalFailureError) as e:
            code = exit_code(e)
            if code == 1:
                raise
            click.echo(f"Error ({type(e).__name__}): {e}", err=True)
            report = getattr(e, "report", None)
            if report:
                logger.error("Diagnostics: {0}", report)
            sys.exit(code)

    return wrapper


def configure_logging(verbose=False):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")
