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

from .operator_algebra import (
    Factor,
    SpaceShape,
    OperatorMatrix,
    StateVector,
    DensityMatrix,
    qubit_factor,
    fock_factor,
    charge_factor,
    qubit_cavity_shape,
    annihilation,
    creation,
    number,
    free_rotation,
    identity,
    sigma_x,
    sigma_y,
    sigma_z,
    qubit_projector,
    displacement,
    controlled_displacement,
    embed,
    tensor,
    product_state,
    basis_state,
    plus_state,
    eigendecompose,
    apply_propagator,
    matrix_exponential_propagator,
    partial_trace,
    density_matrix,
    reduced_density_matrix,
    fock_populations,
)
