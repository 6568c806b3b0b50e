"""Domain types and exact newsvendor arithmetic for finite-support demand models.

All costs are per unit; demand lives in [0, 1]. Every type is an immutable value
after construction.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from censored_regret.errors import InvalidInputError, InvalidParameterError

# Absolute tolerance for comparisons where a CDF value may sit exactly at q.
TOL = 1e-12

# Probabilities in literals and atom lists must sum to one within this slack.
MASS_TOL = 1e-9

_RANK_GUARD = 1e-9


@dataclass(frozen=True)
class CostParameters:
    c_u: float
    c_o: float

    def __post_init__(self) -> None:
        for name, value in (("c_u", self.c_u), ("c_o", self.c_o)):
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be a positive real, got {value!r}")

    @property
    def q(self) -> float:
        return self.c_u / (self.c_u + self.c_o)

    @property
    def scale(self) -> float:
        return self.c_u + self.c_o

    @classmethod
    def normalized(cls, q: float) -> CostParameters:
        """Costs with c_u + c_o = 1, so that c_u equals the critical fractile."""
        if not 0.0 < q < 1.0:
            raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {q!r}")
        return cls(c_u=q, c_o=1.0 - q)


def critical_fractile(cp: CostParameters) -> float:
    return cp.q


def no_information_regret(q: float) -> float:
    """Minimax regret when only the support [0, 1] is known."""
    return q * (1.0 - q)


def quantile_rank(q: float, n: int) -> int:
    """ceil(q * n), guarded so that products like 0.8 * 100 do not round up to 81."""
    return max(1, math.ceil(q * n - _RANK_GUARD * max(n, 1)))


def uniform_grid(lo: float, hi: float, mesh: float) -> NDArray[np.float64]:
    """Points from lo to hi inclusive with spacing at most `mesh`."""
    if mesh <= 0:
        raise InvalidParameterError(f"mesh must be positive, got {mesh!r}")
    if hi <= lo:
        return np.array([lo], dtype=float)
    count = math.ceil((hi - lo) / mesh - 1e-9) + 1
    return np.linspace(lo, hi, max(count, 2))


@dataclass(frozen=True)
class StepCDF:
    """Right-continuous distribution function with finitely many jumps on [0, 1]."""

    support: tuple[float, ...]
    cdf_values: tuple[float, ...]

    def __post_init__(self) -> None:
        support = tuple(float(s) for s in self.support)
        values = [float(c) for c in self.cdf_values]
        if not support:
            raise InvalidInputError("a step CDF needs at least one support point")
        if len(support) != len(values):
            raise InvalidInputError("support and cdf_values must have the same length")
        if support[0] < 0.0 or support[-1] > 1.0:
            raise InvalidInputError("support points must lie in [0, 1]")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise InvalidInputError("support must be strictly ascending")
        if any(c < 0.0 or c > 1.0 + MASS_TOL for c in values):
            raise InvalidInputError("cdf values must lie in [0, 1]")
        if any(b < a for a, b in zip(values, values[1:])):
            raise InvalidInputError("cdf values must be nondecreasing")
        if abs(values[-1] - 1.0) > MASS_TOL:
            raise InvalidInputError(f"the last cdf value must be 1, got {values[-1]!r}")
        values[-1] = 1.0
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "cdf_values", tuple(min(c, 1.0) for c in values))

    @classmethod
    def from_atoms(cls, points: ArrayLike, probs: ArrayLike) -> StepCDF:
        pts = np.asarray(points, dtype=float).ravel()
        mass = np.asarray(probs, dtype=float).ravel()
        if pts.size == 0 or pts.shape != mass.shape:
            raise InvalidInputError("points and probabilities must be nonempty and of equal length")
        if np.any(mass < -MASS_TOL):
            raise InvalidInputError("probabilities must be nonnegative")
        if abs(float(mass.sum()) - 1.0) > MASS_TOL:
            raise InvalidInputError(f"probabilities must sum to 1, got {float(mass.sum())!r}")
        uniq, inverse = np.unique(pts, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, np.clip(mass, 0.0, None))
        keep = merged > 0.0
        uniq, merged = uniq[keep], merged[keep]
        cdf = np.minimum(np.cumsum(merged), 1.0)
        cdf[-1] = 1.0
        return cls(tuple(uniq.tolist()), tuple(cdf.tolist()))

    @classmethod
    def point_mass(cls, x: float) -> StepCDF:
        return cls((float(x),), (1.0,))

    def __call__(self, z: float) -> float:
        idx = bisect.bisect_right(self.support, z) - 1
        return 0.0 if idx < 0 else self.cdf_values[idx]

    def left_limit(self, z: float) -> float:
        idx = bisect.bisect_left(self.support, z) - 1
        return 0.0 if idx < 0 else self.cdf_values[idx]

    def evaluate(self, z: ArrayLike) -> NDArray[np.float64]:
        idx = np.searchsorted(np.asarray(self.support), np.asarray(z, dtype=float), side="right") - 1
        values = np.concatenate(([0.0], np.asarray(self.cdf_values)))
        return values[idx + 1]

    @property
    def probabilities(self) -> NDArray[np.float64]:
        return np.diff(np.concatenate(([0.0], np.asarray(self.cdf_values))))

    def quantile(self, q: float) -> float:
        """Lower quantile inf{u : F(u) >= q}."""
        for point, value in zip(self.support, self.cdf_values):
            if value >= q - TOL:
                return point
        return self.support[-1]


def expected_cost(a: float, F: StepCDF, cp: CostParameters) -> float:
    if not 0.0 <= a <= 1.0:
        raise InvalidParameterError(f"order quantity must lie in [0, 1], got {a!r}")
    return float(expected_costs(np.array([a]), F, cp)[0])


def expected_costs(actions: ArrayLike, F: StepCDF, cp: CostParameters) -> NDArray[np.float64]:
    """Expected newsvendor cost of each order quantity in `actions`."""
    a = np.asarray(actions, dtype=float)[..., None]
    d = np.asarray(F.support)
    loss = cp.c_o * np.maximum(a - d, 0.0) + cp.c_u * np.maximum(d - a, 0.0)
    return loss @ F.probabilities


def optimal_decision(F: StepCDF, cp: CostParameters) -> tuple[float, float]:
    action = F.quantile(cp.q)
    return action, expected_cost(action, F, cp)


def regret(a: float, F: StepCDF, cp: CostParameters) -> float:
    _, opt = optimal_decision(F, cp)
    return max(expected_cost(a, F, cp) - opt, 0.0)


def regrets(actions: ArrayLike, F: StepCDF, cp: CostParameters) -> NDArray[np.float64]:
    _, opt = optimal_decision(F, cp)
    return np.maximum(expected_costs(actions, F, cp) - opt, 0.0)


@dataclass(frozen=True)
class Observation:
    sale: float
    uncensored: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.sale <= 1.0:
            raise InvalidInputError(f"sale must lie in [0, 1], got {self.sale!r}")


def censor(demand: float, level: float) -> Observation:
    return Observation(sale=min(demand, level), uncensored=demand <= level)


@dataclass(frozen=True)
class CensoringDesign:
    """Historical inventory levels x_1 <= ... <= x_K with n_k samples each."""

    levels: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        levels = tuple(float(x) for x in self.levels)
        counts = tuple(self.counts)
        if not levels:
            raise InvalidInputError("a design needs at least one level")
        if len(levels) != len(counts):
            raise InvalidInputError("levels and counts must have the same length")
        if any(not 0.0 <= x <= 1.0 for x in levels):
            raise InvalidInputError("levels must lie in [0, 1]")
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise InvalidInputError("levels must be sorted ascending")
        if any(isinstance(c, bool) or int(c) != c or c < 1 for c in counts):
            raise InvalidInputError("counts must be positive integers")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "counts", tuple(int(c) for c in counts))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]]) -> CensoringDesign:
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(c for _, c in pairs))

    @property
    def K(self) -> int:
        return len(self.levels)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def sigma(self) -> tuple[int, ...]:
        """Cumulative counts sigma_0 = 0, ..., sigma_K = n."""
        out = [0]
        for c in self.counts:
            out.append(out[-1] + c)
        return tuple(out)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (0.0,) + self.levels + (1.0,)

    @property
    def lengths(self) -> tuple[float, ...]:
        bp = self.breakpoints
        return tuple(bp[k + 1] - bp[k] for k in range(self.K + 1))

    def sample_levels(self) -> NDArray[np.float64]:
        """Level of every sample, in design order."""
        return np.repeat(np.asarray(self.levels), self.counts)

    def unit_count_expansion(self) -> CensoringDesign:
        return CensoringDesign(tuple(self.sample_levels().tolist()), (1,) * self.n)


@dataclass(frozen=True)
class SampleSet:
    design: CensoringDesign
    groups: tuple[tuple[Observation, ...], ...]

    def __post_init__(self) -> None:
        groups = tuple(tuple(g) for g in self.groups)
        if len(groups) != self.design.K:
            raise InvalidInputError("one observation group per design level is required")
        for level, count, group in zip(self.design.levels, self.design.counts, groups):
            if len(group) != count:
                raise InvalidInputError(f"level {level} expects {count} observations, got {len(group)}")
            for obs in group:
                if obs.uncensored and obs.sale > level:
                    raise InvalidInputError(f"uncensored sale {obs.sale} exceeds its level {level}")
                if not obs.uncensored and obs.sale != level:
                    raise InvalidInputError(f"censored sale {obs.sale} must equal its level {level}")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_groups(cls, levels: Sequence[float], groups: Sequence[Sequence[Observation]]) -> SampleSet:
        if not groups or not any(groups):
            raise InvalidInputError("empty sample set")
        design = CensoringDesign(tuple(levels), tuple(len(g) for g in groups))
        return cls(design, tuple(tuple(g) for g in groups))

    @classmethod
    def from_demands(cls, design: CensoringDesign, demands: Sequence[float]) -> SampleSet:
        if len(demands) != design.n:
            raise InvalidInputError(f"expected {design.n} demands, got {len(demands)}")
        observations = [censor(float(d), float(x)) for d, x in zip(demands, design.sample_levels())]
        groups, start = [], 0
        for count in design.counts:
            groups.append(tuple(observations[start:start + count]))
            start += count
        return cls(design, tuple(groups))

    @property
    def n(self) -> int:
        return self.design.n

    def pooled(self) -> list[Observation]:
        return [obs for group in self.groups for obs in group]


@dataclass(frozen=True)
class GridSpec:
    """Grid meshes for V in [0, q] and W in [q, 1], plus the target optimality gap."""

    mesh_v: float
    mesh_w: float
    eps: float | None = None

    def __post_init__(self) -> None:
        if not (self.mesh_v > 0 and self.mesh_w > 0):
            raise InvalidParameterError("grid meshes must be positive")
        if self.eps is not None and not self.eps > 0:
            raise InvalidParameterError("eps must be positive")

    @property
    def mesh(self) -> float:
        return max(self.mesh_v, self.mesh_w)

    @classmethod
    def uniform(cls, mesh: float) -> GridSpec:
        return cls(mesh, mesh)

    @staticmethod
    def delta(eps: float, n_max: int) -> float:
        return eps / (2.0 * (n_max + 2))

    @classmethod
    def for_design(cls, eps: float, n_max: int) -> GridSpec:
        d = cls.delta(eps, n_max)
        return cls(d, d, eps)
