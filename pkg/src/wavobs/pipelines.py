"""Named observation pipelines: a semi-discrete system plus the row that observes it.

Grammar (as used on the command line and in config files)::

    classical
    truncated[:fraction]          keep M = floor(fraction * N) - 2 modes (fraction defaults to 2/pi)
    filter:<name>[:p[:alpha]]     filtered classical observation
    mixed
    nitsche-sym:<gamma>[:drop]    ``drop`` removes the gamma N^2 u(1) observation term
    nitsche-nonsym:<gamma>[:drop]
"""
from dataclasses import dataclass
import math

import numpy as np

from .assembly import Formulation, FormulationKind, assemble
from .filters import Filter, filtered_observation_row
from .observability import modal_subspace, spectrum, truncated_observation

TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class Pipeline:
    name: str
    system: object
    obs_row: np.ndarray
    subspace: np.ndarray = None
    tag: str = ""


def truncation_order(N, fraction=TWO_OVER_PI):
    return max(1, min(N - 1, math.floor(fraction * N) - 2))


def build(spec, N):
    parts = spec.strip().split(":")
    head = parts[0]
    if head == "classical" and len(parts) == 1:
        system = assemble(Formulation.classical(), N)
        return Pipeline(spec, system, np.array(system.observation_row))
    if head == "truncated" and len(parts) <= 2:
        fraction = float(parts[1]) if len(parts) == 2 else TWO_OVER_PI
        system = assemble(Formulation.classical(), N)
        report = spectrum(system)
        M = truncation_order(N, fraction)
        return Pipeline(spec, system, truncated_observation(system, report, M),
                        subspace=modal_subspace(report, M), tag=f"M={M}")
    if head == "filter" and len(parts) >= 2:
        filt = Filter.parse(":".join(parts[1:]))
        system = assemble(Formulation.classical(), N)
        return Pipeline(spec, system, filtered_observation_row(system, filt), tag=str(filt))
    if head == "mixed" and len(parts) == 1:
        system = assemble(Formulation.mixed(), N)
        return Pipeline(spec, system, np.array(system.observation_row))
    if head in ("nitsche-sym", "nitsche-nonsym") and len(parts) in (2, 3):
        kind = FormulationKind(head)
        system = assemble(Formulation(kind, float(parts[1])), N)
        if len(parts) == 3:
            if parts[2] != "drop":
                raise ValueError(f"unknown Nitsche option {parts[2]!r} in {spec!r}")
            return Pipeline(spec, system, system.position_row(system.slope_row), tag="drop")
        return Pipeline(spec, system, np.array(system.observation_row))
    raise ValueError(f"cannot parse pipeline {spec!r}")
