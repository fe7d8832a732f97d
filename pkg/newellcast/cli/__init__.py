"""Command-line pipeline: configuration, detector files and subcommands"""

from .config import RunConfig, component_seed, load_config
from .ingest import COLUMNS, detector_frame, ingest, write_detector_csv
from .commands import COMMANDS, load_data, section_fd

__all__ = [
    "RunConfig",
    "component_seed",
    "load_config",
    "COLUMNS",
    "detector_frame",
    "ingest",
    "write_detector_csv",
    "COMMANDS",
    "load_data",
    "section_fd",
]
