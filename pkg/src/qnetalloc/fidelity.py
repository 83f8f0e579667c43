"""End-to-end fidelity of entanglement-swapping repeater chains.

A chain of ``L + 1`` links joined by ``L`` swaps, each link producing
Werner states of fidelity ``F``, delivers an end-to-end pair of fidelity

    F' = 1/4 + 3/4 * g**L * w**(L + 1)

with Werner weight ``w = (4F - 1) / 3`` and gate factor
``g = p1**2 * p2 * (4 * eta**2 - 1) / 3``. ``p1`` and ``p2`` are the
reliabilities of one- and two-qubit operations and ``eta`` the measurement
parameter; ``p1 = p2 = eta = 1`` gives perfect swapping (``g = 1``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

FIDELITY_FLOOR = 0.25


class DomainError(ValueError):
    pass


def _check_fidelity(f: float, name: str) -> float:
    if not (FIDELITY_FLOOR < f <= 1.0):
        raise DomainError(f"{name}={f!r} outside (0.25, 1]")
    return float(f)


@dataclass(frozen=True)
class Ops:
    """Reliability of the swapping hardware."""

    p1: float = 1.0
    p2: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):
                raise DomainError(f"{name}={val!r} outside (0, 1]")
        if not (0.5 < self.eta <= 1.0):
            raise DomainError(f"eta={self.eta!r} outside (0.5, 1]")

    @property
    def gate_factor(self) -> float:
        return self.p1 ** 2 * self.p2 * (4.0 * self.eta ** 2 - 1.0) / 3.0

    @property
    def perfect(self) -> bool:
        return self.p1 == 1.0 and self.p2 == 1.0 and self.eta == 1.0


PERFECT_OPS = Ops()


@dataclass(frozen=True)
class SwapChainParams:
    elementary_fidelity: float
    num_intermediate: int
    p1: float = 1.0
    p2: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        _check_fidelity(self.elementary_fidelity, "elementary_fidelity")
        if isinstance(self.num_intermediate, bool) or not isinstance(self.num_intermediate, int) \
                or self.num_intermediate < 0:
            raise DomainError(f"num_intermediate={self.num_intermediate!r} must be an integer >= 0")
        Ops(self.p1, self.p2, self.eta)

    @property
    def ops(self) -> Ops:
        return Ops(self.p1, self.p2, self.eta)


def werner_weight(f: float) -> float:
    """(4f - 1) / 3, for f in (0.25, 1]."""
    _check_fidelity(f, "f")
    return (4.0 * f - 1.0) / 3.0


def fidelity_generic(params: SwapChainParams) -> float:
    L = params.num_intermediate
    w = werner_weight(params.elementary_fidelity)
    return 0.25 + 0.75 * params.ops.gate_factor ** L * w ** (L + 1)


def fidelity_perfect(f_bar: float, L: int) -> float:
    """Chain fidelity with perfect swapping operations."""
    if isinstance(L, bool) or not isinstance(L, int) or L < 0:
        raise DomainError(f"L={L!r} must be an integer >= 0")
    return 0.25 + 0.75 * werner_weight(f_bar) ** (L + 1)


def path_fidelity(weights: Sequence[float], ops: Ops = PERFECT_OPS) -> float:
    """Chain fidelity over links with individual Werner weights.

    With all weights equal this matches ``fidelity_generic`` up to rounding.
    """
    if len(weights) == 0:
        raise DomainError("path needs at least one link")
    prod = 1.0
    for w in weights:
        if not (0.0 < w <= 1.0):
            raise DomainError(f"Werner weight {w!r} outside (0, 1]")
        prod *= w
    L = len(weights) - 1
    return 0.25 + 0.75 * ops.gate_factor ** L * prod


class Reach(str, enum.Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class RepeaterLimit:
    """Outcome of ``max_intermediate_repeaters``; ``l_max`` set only when bounded."""

    reach: Reach
    l_max: Optional[int] = None

    def __str__(self):
        return str(self.l_max) if self.reach is Reach.BOUNDED else self.reach.value


def max_intermediate_repeaters(f_bar: float, f_min: float) -> RepeaterLimit:
    """Largest L with ``fidelity_perfect(f_bar, L) >= f_min``."""
    _check_fidelity(f_bar, "f_bar")
    _check_fidelity(f_min, "f_min")
    # the direct evaluation decides ties at f_bar == f_min
    if f_bar < f_min or fidelity_perfect(f_bar, 0) < f_min:
        return RepeaterLimit(Reach.INFEASIBLE)
    if f_bar == 1.0:
        return RepeaterLimit(Reach.UNBOUNDED)

    # w**(L+1) >= (f_min - 1/4) / (3/4)
    w = werner_weight(f_bar)
    target = (f_min - 0.25) / 0.75
    guess = max(0, int(math.floor(math.log(target) / math.log(w))) - 1)
    while guess > 0 and fidelity_perfect(f_bar, guess) < f_min:
        guess -= 1
    while fidelity_perfect(f_bar, guess + 1) >= f_min:
        guess += 1
    return RepeaterLimit(Reach.BOUNDED, guess)
