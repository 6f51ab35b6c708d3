"""
Utils module initialization.
"""

from .export_utils import (
    export_acfs,
    export_temporal_grid,
    export_lag_table,
    export_burn_in,
    export_traces,
    export_cm,
    export_cm_checkpoints,
    read_table,
)
from .config_utils import load_config_file, apply_config_defaults

__all__ = [
    # CSV exports
    "export_acfs",
    "export_temporal_grid",
    "export_lag_table",
    "export_burn_in",
    "export_traces",
    "export_cm",
    "export_cm_checkpoints",
    "read_table",
    # Config files
    "load_config_file",
    "apply_config_defaults",
]
