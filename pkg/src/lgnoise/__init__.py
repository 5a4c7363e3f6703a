"""Leggett-Garg correlations of a qubit under random telegraph and
Ornstein-Uhlenbeck dephasing."""

from .correlators import (
    CorrelatorTriple,
    LGResult,
    MeasurementSetting,
    chain_batch,
    correlator_chain,
    correlator_closed,
    correlator_joint,
    k3,
    k3_unitary,
    k3_values,
)
from .extrema import (
    ConditionKind,
    ExtremumCondition,
    SweepReport,
    max_k3,
    solve_extremum,
    violation_census,
)
from .noise import (
    NoiseChannel,
    OunParams,
    Regime,
    RtnParams,
    UnitaryParams,
    classify_regime,
    kraus_oun,
    kraus_rtn,
    lambda_rtn,
    mu,
    q_oun,
)
from .qubit import DensityMatrix, KrausSet, Projector, apply_channel, measure, observable

__version__ = "0.1.0"
