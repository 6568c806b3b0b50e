"""Text literals shared by the CLI and the tests.

design        ``0.7:90,1.0:10``             level:count pairs, levels ascending
distribution  ``0:0.3,0.7:0.4,1:0.3``       point:prob pairs summing to one
samples       ``0.7|0.3u,0.7;1.0|0.2u``     groups of sales, trailing ``u`` = uncensored
"""
from __future__ import annotations

import math

from censored_regret.core import MASS_TOL, CensoringDesign, Observation, SampleSet, StepCDF
from censored_regret.errors import InvalidInputError, LiteralParseError


def _pairs(text: str, what: str) -> list[tuple[str, str]]:
    if not text or not text.strip():
        raise LiteralParseError(f"empty {what} literal")
    out = []
    for item in text.split(","):
        head, sep, tail = item.strip().partition(":")
        if not sep or not head or not tail:
            raise LiteralParseError(f"malformed {what} entry {item!r}; expected a:b")
        out.append((head.strip(), tail.strip()))
    return out


def _real(token: str, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise LiteralParseError(f"{what} {token!r} is not a number") from None
    if not math.isfinite(value):
        raise LiteralParseError(f"{what} {token!r} is not finite")
    return value


def parse_design(text: str) -> CensoringDesign:
    levels, counts = [], []
    for level, count in _pairs(text, "design"):
        levels.append(_real(level, "level"))
        try:
            counts.append(int(count))
        except ValueError:
            raise LiteralParseError(f"count {count!r} is not an integer") from None
    try:
        return CensoringDesign(tuple(levels), tuple(counts))
    except InvalidInputError as e:
        raise LiteralParseError(f"invalid design {text!r}: {e}") from e


def parse_distribution(text: str) -> StepCDF:
    pairs = [(_real(p, "point"), _real(w, "probability")) for p, w in _pairs(text, "distribution")]
    if abs(math.fsum(w for _, w in pairs) - 1.0) > MASS_TOL:
        raise LiteralParseError(f"probabilities in {text!r} do not sum to 1")
    try:
        return StepCDF.from_atoms([p for p, _ in pairs], [w for _, w in pairs])
    except InvalidInputError as e:
        raise LiteralParseError(f"invalid distribution {text!r}: {e}") from e


def parse_samples(text: str) -> SampleSet:
    if not text or not text.strip():
        raise LiteralParseError("empty sample-set literal")
    levels, groups = [], []
    for chunk in text.split(";"):
        head, sep, body = chunk.strip().partition("|")
        if not sep:
            raise LiteralParseError(f"malformed sample group {chunk!r}; expected level|sales")
        levels.append(_real(head, "level"))
        group = []
        for token in body.split(","):
            token = token.strip()
            uncensored = token.endswith("u")
            if uncensored:
                token = token[:-1]
            try:
                group.append(Observation(_real(token, "sale"), uncensored))
            except InvalidInputError as e:
                raise LiteralParseError(str(e)) from e
        groups.append(group)
    try:
        return SampleSet.from_groups(levels, groups)
    except InvalidInputError as e:
        raise LiteralParseError(f"invalid sample set {text!r}: {e}") from e


def format_distribution(F: StepCDF) -> str:
    return ",".join(f"{x:.12g}:{p:.12g}" for x, p in zip(F.support, F.probabilities) if p > 0)


def format_design(design: CensoringDesign) -> str:
    return ",".join(f"{x:g}:{c}" for x, c in zip(design.levels, design.counts))
