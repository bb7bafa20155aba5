"""Blind delegated quantum computation: simulators, protocols and bound checks."""
from .analysis import PreparationModel, certify, fail_abort_bound
from .core import Angle8, plus_state, trace_distance
from .i1dc import client_theta, run_i1dc
from .mbqc import BrickworkPattern, output_distribution, run_plain_mbqc
from .rbsp import ChannelModel, Honest, SuppressSingles, required_pulses, run_rbsp
from .ubqc import run_ubqc

__all__ = [
    "Angle8", "BrickworkPattern", "ChannelModel", "Honest", "PreparationModel", "SuppressSingles",
    "certify", "client_theta", "fail_abort_bound", "output_distribution", "plus_state", "required_pulses",
    "run_i1dc", "run_plain_mbqc", "run_rbsp", "run_ubqc", "trace_distance",
]
