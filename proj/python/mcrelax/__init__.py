# Copyright 2026 The mcrelax Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convex relaxations of day-ahead market clearing with block orders."""

from mcrelax._core import (
    Instance,
    RunRecord,
    emit_table,
    generate,
    improvement,
    load_instance,
    min_eigenvalue,
    proj_psd,
    records_from_csv,
    records_to_csv,
    run_grid,
    save_instance,
    solve_lp,
    solve_milp,
    solve_milp_bruteforce,
    solve_relaxation,
)

__all__ = [
    "Instance",
    "RunRecord",
    "emit_table",
    "generate",
    "improvement",
    "load_instance",
    "min_eigenvalue",
    "proj_psd",
    "records_from_csv",
    "records_to_csv",
    "run_grid",
    "save_instance",
    "solve_lp",
    "solve_milp",
    "solve_milp_bruteforce",
    "solve_relaxation",
]
