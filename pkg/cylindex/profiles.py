"""Profile functions of the perturbed Dirac family on the cylinder R x S^1.

The cutoff rho, the admissible weight f and the per-mode coefficient

    c_n(r) = 2*pi*((1 + t f^eps2)(n - rho) - s f^eps1 rho)

are the only way the background geometry reaches the kernel analysis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi

# integer test for rho when deciding whether an orbit carries a parallel section
HOLONOMY_TOL = 1e-12


@dataclass(frozen=True)
class PerturbationParams:
    m: int
    s: float = 0.0
    t: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self) -> None:
        if int(self.m) != self.m:
            raise ValueError(f"m must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        for name in ("s", "t", "eps1", "eps2"):
            value = getattr(self, name)
            if not math.isfinite(float(value)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")

    @property
    def is_unperturbed(self) -> bool:
        return self.s == 0 and self.t == 0

    def scaled(self, factor: float) -> "PerturbationParams":
        """Same exponents and level with (s, t) multiplied by factor."""
        return PerturbationParams(self.m, self.s * factor, self.t * factor, self.eps1, self.eps2)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "s": float(self.s),
            "t": float(self.t),
            "eps1": float(self.eps1),
            "eps2": float(self.eps2),
        }


@dataclass(frozen=True, eq=False)
class CylinderGeometry:
    """Flat background on R x S^1: g = dr^2 + dtheta^2, omega = dr ^ dtheta.

    W = W+ (+) W- with W+ the trivial line and W- = (TM, J) framed by d/dtheta.
    """

    m: int = 0
    c_dr: np.ndarray = field(
        default_factory=lambda: np.array([[0, -1j], [-1j, 0]], dtype=complex)
    )
    c_dtheta: np.ndarray = field(
        default_factory=lambda: np.array([[0, -1], [1, 0]], dtype=complex)
    )
    # J: d/dr -> d/dtheta, d/dtheta -> -d/dr in the (d/dr, d/dtheta) basis
    complex_structure: np.ndarray = field(
        default_factory=lambda: np.array([[0.0, -1.0], [1.0, 0.0]])
    )

    def clifford_relations_hold(self) -> bool:
        ident = np.eye(2)
        return bool(
            np.array_equal(self.c_dr @ self.c_dr, -ident)
            and np.array_equal(self.c_dtheta @ self.c_dtheta, -ident)
            and np.array_equal(self.c_dr @ self.c_dtheta + self.c_dtheta @ self.c_dr, np.zeros((2, 2)))
        )

    def connection_form(self, profiles: "ProfilePair", r):
        """dtheta-component of the connection: -2 pi rho(r) Id."""
        return -TWO_PI * profiles.rho(r)

    def moment(self, profiles: "ProfilePair", r):
        """mu = -2 pi rho; level logic keys on rho itself (see DESIGN.md)."""
        return -TWO_PI * profiles.rho(r)

    def induced_vector_field(self, profiles: "ProfilePair", r):
        """Coefficient of d/dtheta in mu^M."""
        return -TWO_PI * profiles.rho(r)


class RhoSmoothing(str, Enum):
    CUBIC_HERMITE = "cubic_hermite"
    QUINTIC_SMOOTHSTEP = "quintic_smoothstep"


class FSmoothing(str, Enum):
    QUADRATIC_CAP = "quadratic_cap"
    COSH_BLEND = "cosh_blend"


def _blend(u: np.ndarray, kind: RhoSmoothing) -> tuple[np.ndarray, np.ndarray]:
    """Interpolant H on [0, 1] with H(0)=0, H'(0)=1, H(1)=1, H'(1)=0 and its derivative."""
    if kind is RhoSmoothing.CUBIC_HERMITE:
        return -u**3 + u**2 + u, (1 - u) * (3 * u + 1)
    # H''(0) = H''(1) = 0 as well, so rho is C^2 at both junctions
    return u + 4 * u**3 - 7 * u**4 + 3 * u**5, (1 - u) ** 2 * (15 * u**2 + 2 * u + 1)


def _cosh_blend_constants() -> tuple[float, float]:
    # a cosh(r/b) matching value 1/2 and slope 1 at r = 1/2: x tanh x = 1 with x = 1/(2b)
    x = brentq(lambda x: x * math.tanh(x) - 1.0, 0.5, 3.0)
    return 0.5 / math.cosh(x), 1.0 / (2.0 * x)


@dataclass(frozen=True)
class ProfilePair:
    m: int
    rho_smoothing: RhoSmoothing = RhoSmoothing.QUINTIC_SMOOTHSTEP
    f_smoothing: FSmoothing = FSmoothing.QUADRATIC_CAP

    @cached_property
    def _cosh(self) -> tuple[float, float]:
        return _cosh_blend_constants()

    def rho(self, r):
        return self._rho_and_derivative(r)[0]

    def rho_prime(self, r):
        return self._rho_and_derivative(r)[1]

    def _rho_and_derivative(self, r):
        scalar = np.ndim(r) == 0
        x = np.atleast_1d(np.asarray(r, dtype=float)) - self.m
        value = np.clip(x, -0.5, 0.5)
        slope = np.where(np.abs(x) <= 0.25, 1.0, 0.0)

        # rho is odd about m: the lower blend mirrors the upper one
        for sign in (1.0, -1.0):
            band = (sign * x > 0.25) & (sign * x < 0.5)
            if np.any(band):
                h, dh = _blend((sign * x[band] - 0.25) * 4.0, self.rho_smoothing)
                value[band] = sign * (0.25 + h / 4.0)
                slope[band] = dh

        # rounding in the blend polynomials must not leave [-1/2, 1/2]
        value = np.clip(value, -0.5, 0.5) + self.m
        if scalar:
            return float(value[0]), float(slope[0])
        return value, slope

    def f(self, r):
        r_arr = np.asarray(r, dtype=float)
        out = np.abs(r_arr)
        if self.m == 0:
            cap = np.abs(r_arr) <= 0.5
            if self.f_smoothing is FSmoothing.QUADRATIC_CAP:
                inner = r_arr**2 + 0.25
            else:
                a, b = self._cosh
                inner = a * np.cosh(r_arr / b)
            out = np.where(cap, inner, out)
        if out.ndim == 0:
            return float(out)
        return out

    def f_power(self, r, eps: float):
        """f^eps as exp(eps * log f); f vanishes only at r = 0 when m != 0."""
        f = np.asarray(self.f(r), dtype=float)
        if eps == 0:
            out = np.ones_like(f)
        else:
            with np.errstate(divide="ignore"):
                out = np.exp(float(eps) * np.log(f))
        if out.ndim == 0:
            return float(out)
        return out


def make_profiles(
    m: int,
    rho_smoothing: RhoSmoothing | str = RhoSmoothing.QUINTIC_SMOOTHSTEP,
    f_smoothing: FSmoothing | str = FSmoothing.QUADRATIC_CAP,
) -> ProfilePair:
    return ProfilePair(int(m), RhoSmoothing(rho_smoothing), FSmoothing(f_smoothing))


@dataclass(frozen=True)
class ModeCoefficient:
    """c_n(r) for the Fourier weight n; D+ annihilates a_n e^{2 pi i n theta} iff a_n' = c_n a_n."""

    n: int
    params: PerturbationParams
    profiles: ProfilePair

    def __call__(self, r):
        p = self.params
        rho = np.asarray(self.profiles.rho(r), dtype=float)
        value = TWO_PI * (
            (1.0 + p.t * np.asarray(self.profiles.f_power(r, p.eps2))) * (self.n - rho)
            - p.s * np.asarray(self.profiles.f_power(r, p.eps1)) * rho
        )
        if value.ndim == 0:
            return float(value)
        return value

    def flat(self, r, upper: bool = True):
        """Closed form on r > m + 1/2 (upper) or r < m - 1/2, where rho is constant and f = |r|."""
        p = self.params
        level = p.m + 0.5 if upper else p.m - 0.5
        a = np.abs(np.asarray(r, dtype=float))
        tpow = np.ones_like(a) if p.eps2 == 0 else a ** float(p.eps2)
        spow = np.ones_like(a) if p.eps1 == 0 else a ** float(p.eps1)
        value = TWO_PI * ((1.0 + p.t * tpow) * (self.n - level) - p.s * spow * level)
        if value.ndim == 0:
            return float(value)
        return value


def mode_coefficient(params: PerturbationParams, profiles: ProfilePair, n: int) -> ModeCoefficient:
    if profiles.m != params.m:
        raise ValueError(f"profiles built for m={profiles.m} but params have m={params.m}")
    return ModeCoefficient(int(n), params, profiles)


@dataclass(frozen=True)
class OrbitHolonomy:
    r: float
    # rho on the cylinder; the moment itself in disc and sphere charts
    rho: float
    holonomy: complex
    parallel_section: bool
    # weight of the parallel section when it exists
    weight: int | None


def moment_holonomy(r: float, value: float) -> OrbitHolonomy:
    """exp(2 pi i value) around the orbit at radius r, where the moment coordinate reads `value`."""
    nearest = round(value)
    has_section = abs(value - nearest) <= HOLONOMY_TOL
    hol = complex(np.exp(2j * math.pi * value))
    if has_section:
        hol = 1.0 + 0.0j
    return OrbitHolonomy(float(r), float(value), hol, has_section, int(nearest) if has_section else None)


def orbit_holonomy(profiles: ProfilePair, r: float) -> OrbitHolonomy:
    return moment_holonomy(r, float(profiles.rho(r)))
