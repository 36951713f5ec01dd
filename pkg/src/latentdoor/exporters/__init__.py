# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
CSV exporters for every tabular artifact latentdoor writes.
"""

from latentdoor.exporters.csv_exporter import (
    BATCH_COLUMNS,
    HISTORY_COLUMNS,
    INTERPOLATION_COLUMNS,
    REPORT_COLUMNS,
    read_csv,
    to_batch_frame,
    to_beta_sweep_frame,
    to_csv,
    to_history_frame,
    to_interpolation_frame,
    to_label_histogram_frame,
    to_projection_frame,
    to_report_frame,
    to_step_curve_frame,
    write_csv,
)

__all__ = [
    "BATCH_COLUMNS",
    "HISTORY_COLUMNS",
    "INTERPOLATION_COLUMNS",
    "REPORT_COLUMNS",
    "read_csv",
    "to_batch_frame",
    "to_beta_sweep_frame",
    "to_csv",
    "to_history_frame",
    "to_interpolation_frame",
    "to_label_histogram_frame",
    "to_projection_frame",
    "to_report_frame",
    "to_step_curve_frame",
    "write_csv",
]
