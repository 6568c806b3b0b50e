from __future__ import annotations

from dataclasses import dataclass

from censored_regret.core import StepCDF
from censored_regret.errors import InvalidParameterError

_CHAIN_TOL = 1e-12


@dataclass(frozen=True)
class MonotonePoint:
    """CDF levels around each design level: f_k = F(x_k), f_plus_k = F just right of x_k."""

    f_plus_0: float
    pairs: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        chain = self.chain()
        if any(not -_CHAIN_TOL <= c <= 1.0 + _CHAIN_TOL for c in chain):
            raise InvalidParameterError("monotone point coordinates must lie in [0, 1]")
        if any(b < a - _CHAIN_TOL for a, b in zip(chain, chain[1:])):
            raise InvalidParameterError(f"coordinates {chain} violate the monotone chain")

    def chain(self) -> tuple[float, ...]:
        return (self.f_plus_0,) + tuple(c for pair in self.pairs for c in pair)


@dataclass(frozen=True)
class RegretCertificate:
    """Worst-case regret of a policy under a design, with a distribution attaining it."""

    policy: str
    value: float
    witness: StepCDF
    grid_error_bound: float
    piece_index: int | None = None
    v_star: float | None = None
    w_star: float | None = None
    point: MonotonePoint | None = None

    def __post_init__(self) -> None:
        if self.grid_error_bound < 0:
            raise InvalidParameterError("grid_error_bound must be nonnegative")
        if self.value < 0:
            object.__setattr__(self, "value", 0.0)
