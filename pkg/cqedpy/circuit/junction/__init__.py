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

from .hamiltonian import (
    CircuitParams,
    QubitModel,
    PauliCoefficients,
    QUBIT_SETTINGS_DEFAULTS,
    flux_cosine,
    inductive_potential,
    potential_matrix,
    build_junction_hamiltonian,
    junction_spectrum,
    charge_convergence,
    project_qubit,
    coupling_strength,
    calibrate_charging,
    circuit_params_from_settings,
    run_qubit_models,
)
from .sweep import (
    SWEEP_VARIABLES,
    SWEEP_SETTINGS_DEFAULTS,
    RESULT_COLUMNS,
    sweep_grid,
    run_parameter_sweep,
)
