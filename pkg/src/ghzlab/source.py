"""Entangled-pair source: Bell pairs, truncated pair-number statistics, pump scaling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ModeCollisionError, ValidationError
from .state import H, V, EnsembleState, PureState, Role, boson_product, normalize

# 1.2e6 detected pairs/s at 0.57 W with filters
DEFAULT_CALIB = 1.2e6 / 0.57
REP_RATE = 76e6


class TagPolicy(str, enum.Enum):
    ORTHOGONAL_BINS = "orthogonal_bins"
    SAME_BIN = "same_bin"


@dataclass(frozen=True)
class SourceParams:
    p: float = 0.0
    rep_rate: float = REP_RATE
    overlap: float = 1.0
    truncation_order: int = 2
    double_pair_tag_policy: TagPolicy = TagPolicy.ORTHOGONAL_BINS

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.2:
            raise ValidationError(f"pair probability p={self.p} outside [0, 0.2]")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValidationError(f"overlap={self.overlap} outside [0, 1]")
        if self.rep_rate <= 0:
            raise ValidationError("rep_rate must be positive")
        if self.truncation_order not in (1, 2):
            raise ValidationError("truncation_order must be 1 or 2")
        object.__setattr__(self, "double_pair_tag_policy", TagPolicy(self.double_pair_tag_policy))


def bell_pair(o_mode: int, e_mode: int, tag: int = 0) -> PureState:
    """(|H_o V_e> + |V_o H_e>)/sqrt(2)."""
    if o_mode == e_mode:
        raise ModeCollisionError("o and e photons need distinct spatial modes")
    a = 1 / math.sqrt(2)
    return PureState(
        {((o_mode, H, tag, 1), (e_mode, V, tag, 1)): a,
         ((o_mode, V, tag, 1), (e_mode, H, tag, 1)): a},
        {o_mode: Role.ORDINARY, e_mode: Role.EXTRAORDINARY},
    )


def double_pair(o_mode: int, e_mode: int, policy: TagPolicy | str = TagPolicy.ORTHOGONAL_BINS) -> PureState:
    """Two pairs from one pulse. Under orthogonal bins the second pair has tag 1."""
    second_tag = 1 if TagPolicy(policy) is TagPolicy.ORTHOGONAL_BINS else 0
    return normalize(boson_product(bell_pair(o_mode, e_mode), bell_pair(o_mode, e_mode, second_tag)))


def emission_weights(p: float, order: int = 2) -> tuple[float, ...]:
    """Normalized weights of 0, 1 (and 2) pairs per pulse, proportional to p**k."""
    raw = [p ** k for k in range(order + 1)]
    total = math.fsum(raw)
    return tuple(w / total for w in raw)


def emission_ensemble(params: SourceParams, o_mode: int, e_mode: int) -> EnsembleState:
    weights = emission_weights(params.p, params.truncation_order)
    states = [PureState.vacuum({o_mode: Role.ORDINARY, e_mode: Role.EXTRAORDINARY}),
              bell_pair(o_mode, e_mode)]
    if params.truncation_order == 2:
        states.append(double_pair(o_mode, e_mode, params.double_pair_tag_policy))
    return EnsembleState(zip(weights, states))


def pump_to_pair_rate(power_w: float, calib: float = DEFAULT_CALIB) -> float:
    if power_w < 0:
        raise ValidationError("pump power must be nonnegative")
    return calib * power_w
