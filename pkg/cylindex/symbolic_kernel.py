"""Exact L^2 kernels of D+ and D- per Fourier weight from the asymptotic exponent.

On the flat ends rho = m +- 1/2 and f = |r|, so the mode solution of D+ is
exp(Phi_n) with

    Phi_n(r) ~ 2 pi (n - m -+ 1/2)(r + t r|r|^eps2 / (eps2 + 1))
               - 2 pi (m +- 1/2) s r|r|^eps1 / (eps1 + 1)

and D- has exp(-Phi_n). Square integrability is decided by the sign of the
top-degree coefficient at each end, computed exactly whenever the inputs are
rational (floats always are).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import NonFredholmError
from .profiles import PerturbationParams

log = logging.getLogger(__name__)

SIGN_TOL = 1e-12
HALF = Fraction(1, 2)


class End(str, Enum):
    PLUS_INFINITY = "plus_infinity"
    MINUS_INFINITY = "minus_infinity"


class Operator(str, Enum):
    D_PLUS = "plus"
    D_MINUS = "minus"


def _exact(value) -> Optional[Fraction]:
    try:
        return Fraction(value)
    except (TypeError, ValueError, OverflowError):
        return None


def _sign(value) -> int:
    if isinstance(value, Fraction):
        return (value > 0) - (value < 0)
    if abs(value) <= SIGN_TOL:
        return 0
    return 1 if value > 0 else -1


@dataclass(frozen=True)
class ExponentTerm:
    degree: Fraction | float
    # coefficient of r|r|^(degree-1) in Phi_n divided by 2 pi
    reduced: Fraction | float

    @property
    def coefficient(self) -> float:
        return 2.0 * math.pi * float(self.reduced)

    @property
    def sign(self) -> int:
        return _sign(self.reduced)

    def to_dict(self) -> dict:
        return {"degree": float(self.degree), "coefficient": self.coefficient}


@dataclass(frozen=True)
class AsymptoticExponent:
    end: End
    # merged terms, highest degree first; may contain a cancelled (zero) term
    terms: tuple[ExponentTerm, ...]

    @property
    def top(self) -> ExponentTerm:
        return self.terms[0]

    @property
    def top_cancelled(self) -> bool:
        return self.top.sign == 0

    @property
    def leading(self) -> Optional[ExponentTerm]:
        for term in self.terms:
            if term.sign != 0:
                return term
        return None

    @property
    def decays(self) -> bool:
        """exp(Phi_n) -> 0 at this end (Phi_n -> -infinity)."""
        lead = self.leading
        if lead is None:
            return False
        return lead.sign < 0 if self.end is End.PLUS_INFINITY else lead.sign > 0

    @property
    def grows(self) -> bool:
        lead = self.leading
        if lead is None:
            return False
        return not self.decays

    def to_dict(self) -> dict:
        lead = self.leading
        return {
            "end": self.end.value,
            "terms": [term.to_dict() for term in self.terms],
            "leading": lead.to_dict() if lead else None,
        }


def solution_exponent(params: PerturbationParams, n: int, end: End | str) -> AsymptoticExponent:
    end = End(end)
    values = [_exact(v) for v in (params.m, params.s, params.t, params.eps1, params.eps2, n)]
    if any(v is None for v in values):
        m, s, t, eps1, eps2, n_val = (float(v) for v in (params.m, params.s, params.t, params.eps1, params.eps2, n))
        half, one = 0.5, 1.0
    else:
        m, s, t, eps1, eps2, n_val = values
        half, one = HALF, Fraction(1)

    level = m + half if end is End.PLUS_INFINITY else m - half
    offset = n_val - level
    raw: list[tuple[Fraction | float, Fraction | float]] = [(one, offset)]
    if params.t > 0:
        raw.append((one + eps2, offset * t / (eps2 + 1)))
    if params.s > 0:
        raw.append((one + eps1, -level * s / (eps1 + 1)))

    merged: dict[Fraction | float, Fraction | float] = {}
    for degree, coef in raw:
        merged[degree] = merged.get(degree, 0) + coef
    terms = tuple(ExponentTerm(d, merged[d]) for d in sorted(merged, reverse=True))
    return AsymptoticExponent(end, terms)


def is_threshold_mode(params: PerturbationParams, n: int) -> bool:
    """The top-degree coefficient cancels at one end: n sits on the boundary of the open interval."""
    return any(
        solution_exponent(params, n, end).top_cancelled
        for end in (End.PLUS_INFINITY, End.MINUS_INFINITY)
    )


def mode_in_kernel(params: PerturbationParams, n: int, operator: Operator | str = Operator.D_PLUS) -> bool:
    if params.is_unperturbed:
        raise NonFredholmError()
    operator = Operator(operator)
    plus = solution_exponent(params, n, End.PLUS_INFINITY)
    minus = solution_exponent(params, n, End.MINUS_INFINITY)
    if plus.top_cancelled or minus.top_cancelled:
        # strict inequalities: boundary modes are left out
        return False
    if operator is Operator.D_PLUS:
        return plus.decays and minus.decays
    # D- solutions are exp(-Phi_n)
    return plus.grows and minus.grows


def case_label(params: PerturbationParams) -> str:
    if params.s > 0 and params.eps1 > params.eps2:
        return "I"
    if params.t > 0 and params.eps1 < params.eps2:
        return "II"
    if params.t > 0 and params.eps1 == params.eps2 and params.eps1 > 0:
        return "III"
    return "general"


class WeightVariant(str, Enum):
    EMPTY = "empty"
    FINITE = "finite"
    ALL_INTEGERS = "all_integers"
    COFINITE_ABOVE = "cofinite_above"
    COFINITE_BELOW = "cofinite_below"


@dataclass(frozen=True)
class WeightSet:
    variant: WeightVariant
    weights: tuple[int, ...] = ()
    # first (COFINITE_ABOVE) or last (COFINITE_BELOW) weight of a cofinite set
    bound: Optional[int] = None
    case: Optional[str] = None

    def __post_init__(self) -> None:
        if self.variant is WeightVariant.FINITE:
            if any(b <= a for a, b in zip(self.weights, self.weights[1:])):
                raise ValueError(f"finite weights must be strictly increasing: {self.weights}")
        elif self.weights:
            raise ValueError(f"{self.variant.value} weight set carries no explicit weights")
        if self.variant in (WeightVariant.COFINITE_ABOVE, WeightVariant.COFINITE_BELOW) and self.bound is None:
            raise ValueError("cofinite weight sets need a bound")

    @classmethod
    def empty(cls, case: Optional[str] = None) -> "WeightSet":
        return cls(WeightVariant.EMPTY, case=case)

    @classmethod
    def finite(cls, weights: Iterable[int], case: Optional[str] = None) -> "WeightSet":
        ordered = tuple(sorted(set(int(w) for w in weights)))
        if not ordered:
            return cls.empty(case)
        return cls(WeightVariant.FINITE, ordered, case=case)

    @classmethod
    def all_integers(cls, case: Optional[str] = None) -> "WeightSet":
        return cls(WeightVariant.ALL_INTEGERS, case=case)

    def contains(self, n: int) -> bool:
        if self.variant is WeightVariant.FINITE:
            return n in self.weights
        if self.variant is WeightVariant.ALL_INTEGERS:
            return True
        if self.variant is WeightVariant.COFINITE_ABOVE:
            return n >= self.bound
        if self.variant is WeightVariant.COFINITE_BELOW:
            return n <= self.bound
        return False

    @property
    def dimension(self) -> Optional[int]:
        """Number of weights, None when infinite or undefined."""
        if self.variant is WeightVariant.FINITE:
            return len(self.weights)
        if self.variant is WeightVariant.EMPTY:
            return 0
        return None

    def to_dict(self) -> dict:
        data: dict = {"variant": self.variant.value}
        if self.variant is WeightVariant.FINITE:
            data["weights"] = list(self.weights)
        if self.bound is not None:
            data["bound"] = self.bound
        if self.case is not None:
            data["case"] = self.case
        return data


@dataclass(frozen=True)
class CharacterFunctional:
    """Element of Hom(R(S^1), Z): C_(n) -> mult+(n) - mult-(n)."""

    plus: WeightSet
    minus: WeightSet = WeightSet.empty()
    # explicit multiplicities; weights in a set without an entry count once
    plus_multiplicities: tuple[tuple[int, int], ...] = ()
    minus_multiplicities: tuple[tuple[int, int], ...] = ()

    def _side(self, weights: WeightSet, overrides: tuple[tuple[int, int], ...], n: int) -> int:
        if not weights.contains(n):
            return 0
        return dict(overrides).get(n, 1)

    def __call__(self, n: int) -> int:
        return self._side(self.plus, self.plus_multiplicities, n) - self._side(
            self.minus, self.minus_multiplicities, n
        )

    def values(self, lo: int, hi: int) -> list[int]:
        return [self(n) for n in range(lo, hi + 1)]

    def is_zero_on(self, lo: int, hi: int) -> bool:
        return not any(self.values(lo, hi))

    @property
    def pattern(self) -> str:
        return self.plus.variant.value

    def to_dict(self, window: Optional[Sequence[int]] = None) -> dict:
        data = {"plus": self.plus.to_dict(), "minus": self.minus.to_dict(), "pattern": self.pattern}
        if window is not None:
            lo, hi = window
            data["window"] = [lo, hi]
            data["multiplicities"] = self.values(lo, hi)
        return data


def default_window(m: int) -> tuple[int, int]:
    return (m - 6, m + 6)


def _top_degree_split(params: PerturbationParams) -> tuple[Fraction, Fraction, Fraction]:
    """Top degree D and the n-coefficient A / level-coefficient B of Phi_n at degree D (divided by 2 pi)."""
    t, s = _exact(params.t), _exact(params.s)
    e1, e2 = _exact(params.eps1), _exact(params.eps2)
    degrees = [Fraction(1)]
    if params.t > 0:
        degrees.append(1 + e2)
    if params.s > 0:
        degrees.append(1 + e1)
    top = max(degrees)
    a = Fraction(0)
    if top == 1:
        a += 1
    if params.t > 0 and 1 + e2 == top:
        a += t / (1 + e2)
    b = s / (1 + e1) if params.s > 0 and 1 + e1 == top else Fraction(0)
    return top, a, b


def kernel_weights(
    params: PerturbationParams,
    operator: Operator | str = Operator.D_PLUS,
    window: Optional[Sequence[int]] = None,
) -> WeightSet:
    if params.is_unperturbed:
        raise NonFredholmError()
    operator = Operator(operator)
    lo, hi = window if window is not None else default_window(params.m)
    if lo > hi:
        raise ValueError(f"window lower bound {lo} exceeds upper bound {hi}")
    case = case_label(params)

    _, a, b = _top_degree_split(params)
    if a == 0:
        # top term is the s-term alone: membership does not depend on n
        if mode_in_kernel(params, params.m, operator):
            return WeightSet.all_integers(case)
        return WeightSet.empty(case)

    # D+ modes satisfy (m - 1/2)(1 + B/A) < n < (m + 1/2)(1 + B/A)
    scale = 1 + b / a
    left = (params.m - HALF) * scale
    right = (params.m + HALF) * scale
    candidates = set(range(math.floor(left), math.ceil(right) + 1))
    if operator is Operator.D_MINUS:
        candidates |= set(range(lo, hi + 1))
    weights = [n for n in sorted(candidates) if mode_in_kernel(params, n, operator)]
    log.debug("kernel %s for %s: candidates %s..%s -> %s", operator.value, params, min(candidates), max(candidates), weights)
    return WeightSet.finite(weights, case)


def kernel_index(params: PerturbationParams, window: Optional[Sequence[int]] = None) -> CharacterFunctional:
    """dim ker D+ - dim ker D- per weight."""
    return CharacterFunctional(
        kernel_weights(params, Operator.D_PLUS, window),
        kernel_weights(params, Operator.D_MINUS, window),
    )


def chi_character(m: int, eps1: float = 1.0, eps2: float = 0.0) -> CharacterFunctional:
    """Transverse index: s = 1, t = 0 with eps1 > eps2."""
    if not eps1 > eps2:
        raise ValueError(f"transverse index needs eps1 > eps2, got eps1={eps1}, eps2={eps2}")
    return kernel_index(PerturbationParams(m, s=1.0, t=0.0, eps1=eps1, eps2=eps2))


def rr_loc_character(m: int, t: float = 1.0, eps1: float = 0.0) -> CharacterFunctional:
    """Local Riemann-Roch character: s = eps2 = 0, t > 0."""
    if not t > 0:
        raise ValueError(f"rr-loc character needs t > 0, got t={t}")
    return kernel_index(PerturbationParams(m, s=0.0, t=t, eps1=eps1, eps2=0.0))
