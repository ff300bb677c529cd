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
Error kinds raised by the cqedpy tools. The command line interface maps these onto
process exit codes (see cqedpy.cli.run).
"""


class ConfigError(ValueError):
    """A configuration file is missing a required key or holds an invalid value."""


class InvalidArgumentError(ValueError):
    """An argument violates the documented preconditions of an operation."""


class UnsatisfiableConditionError(ValueError):
    """The requested gate condition cannot be met with the given couplings."""


class UnsupportedError(NotImplementedError):
    """The requested variant is not available for this operation."""


class NumericalFailureError(RuntimeError):
    """A numerical routine failed. `report` holds diagnostics for the caller."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class CalibrationError(NumericalFailureError):
    """A calibration target lies outside the achievable interval."""

    def __init__(self, message, achievable=None, report=None):
        super().__init__(message, report=report)
        self.achievable = achievable


class DegeneracyError(NumericalFailureError):
    """The two lowest junction states are (nearly) degenerate."""


class TruncationError(NumericalFailureError):
    """A Fock space truncation was reached during time evolution."""
