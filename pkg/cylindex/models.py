"""Catalog of prequantized rotation-invariant surfaces and their local index data."""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import ModelError
from .numeric_spectra import Discretization, MatrixKind, count_eigen_below, schrodinger_matrix
from .profiles import OrbitHolonomy, make_profiles, moment_holonomy, orbit_holonomy
from .symbolic_kernel import CharacterFunctional, WeightSet, WeightVariant, chi_character

log = logging.getLogger(__name__)


class ModelKind(str, Enum):
    CYLINDER = "cylinder"
    DISC = "disc"
    SPHERE = "sphere"


class Polarity(str, Enum):
    MIN = "min"
    MAX = "max"


class LevelStatus(str, Enum):
    REGULAR = "regular"
    FIXED_POINT = "fixed_point"
    OUTSIDE_IMAGE = "outside_image"


@dataclass(frozen=True)
class FixedPoint:
    level: int
    polarity: Polarity

    def to_dict(self) -> dict:
        return {"level": self.level, "polarity": self.polarity.value}


@dataclass(frozen=True)
class MomentInterval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def interior(self, value: float) -> bool:
        return self.lo < value < self.hi

    def closure(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        return {
            "lo": None if math.isinf(self.lo) else self.lo,
            "hi": None if math.isinf(self.hi) else self.hi,
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }


@dataclass(frozen=True)
class RotationModel:
    kind: ModelKind
    m: int = 0
    level0: int = 0
    polarity: Polarity = Polarity.MIN
    k: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if self.kind is ModelKind.SPHERE and self.k < 1:
            raise ValueError(f"sphere level k must be a positive integer, got {self.k}")

    @classmethod
    def cylinder(cls, m: int) -> "RotationModel":
        return cls(ModelKind.CYLINDER, m=int(m))

    @classmethod
    def disc(cls, level0: int, polarity: Polarity | str = Polarity.MIN) -> "RotationModel":
        return cls(ModelKind.DISC, level0=int(level0), polarity=Polarity(polarity))

    @classmethod
    def sphere(cls, k: int) -> "RotationModel":
        return cls(ModelKind.SPHERE, k=int(k))

    @property
    def name(self) -> str:
        if self.kind is ModelKind.CYLINDER:
            return f"Cylinder({self.m})"
        if self.kind is ModelKind.DISC:
            return f"Disc({self.level0}, {self.polarity.value.capitalize()})"
        return f"Sphere({self.k})"

    @property
    def moment_interval(self) -> MomentInterval:
        if self.kind is ModelKind.CYLINDER:
            return MomentInterval(self.m - 0.5, self.m + 0.5, False, False)
        if self.kind is ModelKind.DISC:
            if self.polarity is Polarity.MIN:
                return MomentInterval(float(self.level0), math.inf, True, False)
            return MomentInterval(-math.inf, float(self.level0), False, True)
        return MomentInterval(0.0, float(self.k), True, True)

    @property
    def fixed_points(self) -> tuple[FixedPoint, ...]:
        if self.kind is ModelKind.DISC:
            return (FixedPoint(self.level0, self.polarity),)
        if self.kind is ModelKind.SPHERE:
            return (FixedPoint(0, Polarity.MIN), FixedPoint(self.k, Polarity.MAX))
        return ()

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind.value,
            "name": self.name,
            "moment_interval": self.moment_interval.to_dict(),
            "fixed_points": [p.to_dict() for p in self.fixed_points],
        }
        if self.kind is ModelKind.CYLINDER:
            data["m"] = self.m
        elif self.kind is ModelKind.DISC:
            data["level0"] = self.level0
            data["polarity"] = self.polarity.value
        else:
            data["k"] = self.k
        return data


@dataclass(frozen=True)
class LevelClassification:
    n: int
    status: LevelStatus

    def to_dict(self) -> dict:
        return {"n": self.n, "status": self.status.value}


def classify_level(model: RotationModel, n: int) -> LevelClassification:
    for point in model.fixed_points:
        if point.level == n:
            return LevelClassification(n, LevelStatus.FIXED_POINT)
    if model.moment_interval.interior(n):
        return LevelClassification(n, LevelStatus.REGULAR)
    return LevelClassification(n, LevelStatus.OUTSIDE_IMAGE)


def bargmann_norm(j: int) -> float:
    """Squared L2 norm of z^j against exp(-pi |z|^2) on C; equals j!/pi^j."""
    value, _ = quad(lambda r: 2.0 * math.pi * r ** (2 * j + 1) * math.exp(-math.pi * r * r), 0.0, math.inf)
    return value


# log-radius chart tau = log|z| at a fixed point, shifted so the box [-R, R] covers tau in [-13, 3]
CHART_SHIFT = 5.0
CHART_DISC = Discretization(R=8.0, h=0.01)


def chart_coefficient(j: int) -> Callable[[np.ndarray], np.ndarray]:
    """c_j for the weight-j chart mode u = exp((j + 1) tau - pi e^{2 tau} / 2), so that u' = c_j u.

    The L2 norm of u in tau is the Bargmann norm of z^j.
    """

    def coef(x):
        tau = np.asarray(x, dtype=float) - CHART_SHIFT
        return (j + 1.0) - math.pi * np.exp(2.0 * tau)

    return coef


@lru_cache(maxsize=None)
def chart_zero_modes(j: int, disc: Discretization = CHART_DISC, tau_zero: float = 1e-6) -> tuple[int, int]:
    """Eigenvalues of L*L and LL* below tau_zero for the weight-j chart mode."""
    coef = chart_coefficient(j)
    plus = count_eigen_below(schrodinger_matrix(coef, disc, MatrixKind.STAR_L_L), tau_zero)
    minus = count_eigen_below(schrodinger_matrix(coef, disc, MatrixKind.L_STAR_L), tau_zero)
    log.debug("chart weight %s: zero modes %s/%s", j, plus, minus)
    return plus, minus


def fixed_point_contribution(level0: int, polarity: Polarity | str, n: int) -> int:
    """Multiplicity of weight n among L2 holomorphic chart modes at a fixed point.

    z^j carries weight level0 + j at a minimum and level0 - j at a maximum.
    """
    polarity = Polarity(polarity)
    j = (n - level0) if polarity is Polarity.MIN else (level0 - n)
    plus, _ = chart_zero_modes(j)
    return plus


@dataclass(frozen=True)
class FixedPointOracleCheck:
    norms: tuple[float, ...]
    closed_forms: tuple[float, ...]
    zero_modes_plus: int
    zero_modes_minus: int

    @property
    def passed(self) -> bool:
        norms_ok = all(math.isclose(a, b, rel_tol=1e-8) for a, b in zip(self.norms, self.closed_forms))
        return norms_ok and self.zero_modes_plus == 1 and self.zero_modes_minus == 0

    def to_dict(self) -> dict:
        return {
            "norms": list(self.norms),
            "closed_forms": list(self.closed_forms),
            "zero_modes_plus": self.zero_modes_plus,
            "zero_modes_minus": self.zero_modes_minus,
            "passed": self.passed,
        }


def validate_fixed_point_oracle(
    max_degree: int = 5, disc: Discretization = CHART_DISC, tau_zero: float = 1e-6
) -> FixedPointOracleCheck:
    """Check the Bargmann norms against j!/pi^j and count weight-0 chart zero modes numerically.

    The weight-level0 mode has exactly one L2 solution and its adjoint has none.
    """
    norms = tuple(bargmann_norm(j) for j in range(max_degree + 1))
    closed = tuple(math.factorial(j) / math.pi**j for j in range(max_degree + 1))
    plus, minus = chart_zero_modes(0, disc, tau_zero)
    check = FixedPointOracleCheck(norms, closed, plus, minus)
    if not check.passed:
        log.error("fixed-point oracle failed validation: %s", check.to_dict())
    return check


def local_index(model: RotationModel, n: int) -> int:
    status = classify_level(model, n).status
    if status is LevelStatus.OUTSIDE_IMAGE:
        return 0
    if status is LevelStatus.REGULAR:
        # reduced space at a connected regular level is a point
        return 1
    point = next(p for p in model.fixed_points if p.level == n)
    return fixed_point_contribution(point.level, point.polarity, n)


def _chart_orbit(model: RotationModel, n: int) -> tuple[float, float]:
    """Chart radius of the orbit at level n and the moment read back at that radius."""
    if model.kind is ModelKind.DISC:
        sign = 1.0 if model.polarity is Polarity.MIN else -1.0
        radius = math.sqrt(sign * (n - model.level0) / math.pi)
        return radius, model.level0 + sign * math.pi * radius**2
    # affine chart at the nearer pole, enclosing area k |z|^2 / (1 + |z|^2)
    k = model.k
    near_min = 2 * n <= k
    area = n if near_min else k - n
    radius = math.sqrt(area / (k - area))
    enclosed = k * radius**2 / (1.0 + radius**2)
    return radius, enclosed if near_min else k - enclosed


def level_holonomy(model: RotationModel, n: int) -> Optional[OrbitHolonomy]:
    """Holonomy of the prequantum connection around the orbit at level n, None off the image."""
    interval = model.moment_interval
    if not interval.closure(n):
        return None
    if model.kind is ModelKind.CYLINDER:
        # the only integer level is n = m, where rho is the identity
        return orbit_holonomy(make_profiles(model.m), float(n))
    radius, moment = _chart_orbit(model, n)
    return moment_holonomy(radius, moment)


def _check_window(window: Sequence[int]) -> tuple[int, int]:
    lo, hi = (int(v) for v in window)
    if lo > hi:
        raise ValueError(f"window lower end {lo} exceeds upper end {hi}")
    return lo, hi


def rr_loc_character_model(model: RotationModel, window: Sequence[int], jobs: int = 1) -> CharacterFunctional:
    lo, hi = _check_window(window)
    levels = list(range(lo, hi + 1))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            indices = list(pool.map(lambda n: local_index(model, n), levels))
    else:
        indices = [local_index(model, n) for n in levels]

    overrides = tuple((n, idx) for n, idx in zip(levels, indices) if idx not in (0, 1))
    if model.kind is ModelKind.DISC:
        variant = WeightVariant.COFINITE_ABOVE if model.polarity is Polarity.MIN else WeightVariant.COFINITE_BELOW
        return CharacterFunctional(WeightSet(variant, bound=model.level0), plus_multiplicities=overrides)
    weights = [n for n, idx in zip(levels, indices) if idx]
    return CharacterFunctional(WeightSet.finite(weights), plus_multiplicities=overrides)


def total_character_oracle(model: RotationModel) -> CharacterFunctional:
    """Weights of the monomial sections z0^a z1^b, a + b = k, of the level-k bundle on the sphere."""
    if model.kind is not ModelKind.SPHERE:
        raise ModelError(f"section-count oracle needs a closed model, got {model.name}")
    counts = Counter(b for a in range(model.k + 1) for b in range(model.k + 1) if a + b == model.k)
    overrides = tuple(sorted((w, c) for w, c in counts.items() if c != 1))
    return CharacterFunctional(WeightSet.finite(counts), plus_multiplicities=overrides)


def chi_character_model(model: RotationModel) -> CharacterFunctional:
    if model.kind is not ModelKind.CYLINDER:
        raise ModelError(f"transverse index is only computed on cylinders, got {model.name}")
    return chi_character(model.m, eps1=1.0, eps2=0.0)
