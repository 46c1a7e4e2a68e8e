"""Experiment drivers, file I/O and the ``entcost`` command line."""

from .experiments import EXPERIMENTS, ExperimentResult, ExperimentSpec, ResultRow, rows_to_csv, run
from .io import FormatError, read_channel, read_state, write_channel, write_state

__all__ = ["EXPERIMENTS", "ExperimentSpec", "ExperimentResult", "ResultRow", "run", "rows_to_csv",
           "FormatError", "read_state", "read_channel", "write_state", "write_channel"]
