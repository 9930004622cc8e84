"""Numerical oracle for the per-mode kernels.

The mode part of D+ is L = d/dr - c_n. On a Dirichlet box [m - R, m + R] we
assemble L*L and LL* as symmetric tridiagonal matrices through an exact
discrete factorization (see schrodinger_matrix) and count eigenvalues below
the zero and gap thresholds with a Sturm sequence.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import eigvalsh_tridiagonal

from .errors import IndeterminateSpectrumError, NonFredholmError
from .profiles import ModeCoefficient, PerturbationParams, ProfilePair, make_profiles, mode_coefficient
from .symbolic_kernel import End, Operator, solution_exponent

log = logging.getLogger(__name__)

# |h c| beyond this would overflow exp(.)/h^2; only reached far out on the ends
EXPONENT_CLIP = 600.0
EIGEN_TOL = 1e-14
NEGATIVE_SLACK = -1e-10


@dataclass(frozen=True)
class Discretization:
    R: float = 12.0
    h: float = 0.01

    def __post_init__(self) -> None:
        if not self.R >= 4:
            raise ValueError(f"R must be >= 4 to contain [m - 1/2, m + 1/2] with margin, got {self.R}")
        if not 0 < self.h <= 0.05:
            raise ValueError(f"h must lie in (0, 0.05], got {self.h}")

    @property
    def N(self) -> int:
        """Interior grid points."""
        return int(math.floor(2.0 * self.R / self.h + 1e-9)) - 1

    def nodes(self, m: float) -> np.ndarray:
        """Interior nodes r_1 .. r_N of [m - R, m + R]."""
        return m - self.R + self.h * np.arange(1, self.N + 1)

    def full_nodes(self, m: float) -> np.ndarray:
        """Nodes r_0 .. r_{N+1} including both Dirichlet ends."""
        return m - self.R + self.h * np.arange(0, self.N + 2)

    def half_nodes(self, m: float) -> np.ndarray:
        """Midpoints r_{i+1/2}, i = 0 .. N."""
        return m - self.R + self.h * (np.arange(0, self.N + 1) + 0.5)

    def to_dict(self) -> dict:
        return {"R": float(self.R), "h": float(self.h), "N": self.N, "boundary": "dirichlet"}


@dataclass(frozen=True)
class Thresholds:
    tau_zero: float = 1e-6
    tau_gap: float = 1e-3

    def __post_init__(self) -> None:
        if not 0 < self.tau_zero < self.tau_gap:
            raise ValueError(f"need 0 < tau_zero < tau_gap, got {self.tau_zero}, {self.tau_gap}")

    def to_dict(self) -> dict:
        return {"tau_zero": float(self.tau_zero), "tau_gap": float(self.tau_gap)}


class MatrixKind(str, Enum):
    STAR_L_L = "star_l_l"
    L_STAR_L = "l_star_l"


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self) -> None:
        if len(self.off_diagonal) != max(len(self.diagonal) - 1, 0):
            raise ValueError("off-diagonal must have one entry fewer than the diagonal")

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)


def _centre(coef: Callable) -> float:
    params = getattr(coef, "params", None)
    return float(params.m) if params is not None else 0.0


def _scaled_half_values(coef: Callable, disc: Discretization, sign: float) -> np.ndarray:
    x = sign * disc.h * np.asarray(coef(disc.half_nodes(_centre(coef))), dtype=float)
    if np.any(np.abs(x) > EXPONENT_CLIP):
        log.warning("clipping |h c_n| above %s on the far ends of the box", EXPONENT_CLIP)
        x = np.clip(x, -EXPONENT_CLIP, EXPONENT_CLIP)
    return x


def schrodinger_matrix(
    coef: Callable, disc: Discretization, which: MatrixKind | str = MatrixKind.STAR_L_L
) -> TridiagonalMatrix:
    """L*L (or LL*) with Dirichlet ends as A^T A for a bidiagonal A.

    Row i+1/2 of A is (-exp(h c/2) f_i + exp(-h c/2) f_{i+1}) / h with c taken at the
    midpoint, so the off-diagonal is exactly -1/h^2 and the diagonal is
    (exp(h c_{i+1/2}) + exp(-h c_{i-1/2})) / h^2 = 2/h^2 + c^2 + c' + O(h^2).
    LL* uses -c_n, which flips the sign of the c' term.
    """
    sign = 1.0 if MatrixKind(which) is MatrixKind.STAR_L_L else -1.0
    x = _scaled_half_values(coef, disc, sign)
    inv_h2 = 1.0 / disc.h**2
    diagonal = (np.exp(x[1:]) + np.exp(-x[:-1])) * inv_h2
    off = np.full(disc.N - 1, -inv_h2)
    return TridiagonalMatrix(diagonal, off)


def partner_matrix(coef: Callable, disc: Discretization) -> TridiagonalMatrix:
    """A A^T restricted to the interior half nodes: the exact partner of L*L away from the ends."""
    x = _scaled_half_values(coef, disc, 1.0)[1:-1]
    inv_h2 = 1.0 / disc.h**2
    diagonal = 2.0 * np.cosh(x) * inv_h2
    off = -np.exp(0.5 * (x[1:] - x[:-1])) * inv_h2
    return TridiagonalMatrix(diagonal, off)


def count_eigen_below(matrix: TridiagonalMatrix, lam: float) -> int:
    """Eigenvalues strictly below lam: negative pivots of the LDL^T factorization of T - lam."""
    diagonal = matrix.diagonal.tolist()
    off_sq = (matrix.off_diagonal**2).tolist()
    pivmin = np.finfo(float).eps * max(1.0, max(off_sq, default=0.0))
    count = 0
    q = 1.0
    for i, d in enumerate(diagonal):
        q = d - lam - (off_sq[i - 1] / q if i else 0.0)
        if q == 0.0:
            # an eigenvalue exactly at lam is not below it
            q = pivmin
        if q < 0.0:
            count += 1
    return count


def low_eigenvalues(matrix: TridiagonalMatrix, k: int) -> np.ndarray:
    k = min(k, matrix.size)
    if k <= 0:
        return np.empty(0)
    if matrix.size == 1:
        return matrix.diagonal.copy()
    return eigvalsh_tridiagonal(
        matrix.diagonal,
        matrix.off_diagonal,
        select="i",
        select_range=(0, k - 1),
        lapack_driver="stebz",
        tol=EIGEN_TOL,
    )


@dataclass(frozen=True)
class EndFit:
    end: End
    degree: float
    coefficient: float

    def to_dict(self) -> dict:
        return {"end": self.end.value, "degree": self.degree, "coefficient": self.coefficient}


@dataclass(frozen=True, eq=False)
class QuadratureProfile:
    r: np.ndarray
    phi: np.ndarray
    anchor_index: int
    fits: tuple[EndFit, ...]

    def fit(self, end: End | str) -> EndFit:
        end = End(end)
        return next(f for f in self.fits if f.end is end)


def _fit_end(coef: ModeCoefficient, r: np.ndarray, phi: np.ndarray, end: End) -> EndFit:
    exponent = solution_exponent(coef.params, coef.n, end)
    degrees = [float(term.degree) for term in exponent.terms]
    columns = [r * np.abs(r) ** (d - 1.0) for d in degrees] + [np.ones_like(r)]
    solution, *_ = np.linalg.lstsq(np.column_stack(columns), phi, rcond=None)
    lead = exponent.leading or exponent.top
    index = degrees.index(float(lead.degree))
    return EndFit(end, float(lead.degree), float(solution[index]))


def quadrature_solution(coef: ModeCoefficient, disc: Discretization) -> QuadratureProfile:
    """Phi_n = int c_n by composite Simpson, anchored to 0 at the node nearest m."""
    r = disc.full_nodes(coef.params.m)
    phi = cumulative_simpson(np.asarray(coef(r), dtype=float), x=r, initial=0.0)
    anchor = int(np.argmin(np.abs(r - coef.params.m)))
    phi = phi - phi[anchor]

    tail = max(3, int(0.2 * len(r)))
    fits = (
        _fit_end(coef, r[-tail:], phi[-tail:], End.PLUS_INFINITY),
        _fit_end(coef, r[:tail], phi[:tail], End.MINUS_INFINITY),
    )
    return QuadratureProfile(r, phi, anchor, fits)


def end_decay(profile: QuadratureProfile, operator: Operator | str = Operator.D_PLUS) -> tuple[bool, bool]:
    """Whether exp(+-Phi_n) falls off at (-infinity, +infinity), read from the fitted leading terms."""
    sign = 1.0 if Operator(operator) is Operator.D_PLUS else -1.0
    lower = sign * profile.fit(End.MINUS_INFINITY).coefficient > 0
    upper = sign * profile.fit(End.PLUS_INFINITY).coefficient < 0
    return lower, upper


@dataclass(frozen=True, eq=False)
class SpectralReport:
    n: int
    params: PerturbationParams
    disc: Discretization
    thresholds: Thresholds
    low_plus: tuple[float, ...]
    low_minus: tuple[float, ...]
    # None while undecided (only seen on the report attached to IndeterminateSpectrumError)
    kernel_plus: Optional[bool]
    kernel_minus: Optional[bool]
    rho_smoothing: str = "quintic_smoothstep"
    # (lower, upper) end decay of exp(Phi_n) and exp(-Phi_n)
    decay_plus: tuple[bool, bool] = (False, False)
    decay_minus: tuple[bool, bool] = (False, False)

    def __post_init__(self) -> None:
        for values in (self.low_plus, self.low_minus):
            if list(values) != sorted(values):
                raise ValueError("eigenvalue lists must be sorted ascending")
            if values and values[0] < NEGATIVE_SLACK:
                raise ValueError(f"eigenvalue {values[0]} below the numerical slack {NEGATIVE_SLACK}")

    @property
    def decided(self) -> bool:
        return self.kernel_plus is not None and self.kernel_minus is not None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "params": self.params.to_dict(),
            "discretization": self.disc.to_dict(),
            "thresholds": self.thresholds.to_dict(),
            "rho_smoothing": self.rho_smoothing,
            "low_plus": list(self.low_plus),
            "low_minus": list(self.low_minus),
            "kernel_plus": self.kernel_plus,
            "kernel_minus": self.kernel_minus,
            "decay_plus": {"minus_infinity": self.decay_plus[0], "plus_infinity": self.decay_plus[1]},
            "decay_minus": {"minus_infinity": self.decay_minus[0], "plus_infinity": self.decay_minus[1]},
        }


def _decide(matrix: TridiagonalMatrix, thresholds: Thresholds) -> Optional[bool]:
    below_zero = count_eigen_below(matrix, thresholds.tau_zero)
    below_gap = count_eigen_below(matrix, thresholds.tau_gap)
    if below_zero == below_gap == 0:
        return False
    if below_zero == below_gap == 1:
        return True
    return None


def _combine(spectral: Optional[bool], decay: tuple[bool, bool]) -> Optional[bool]:
    """A solution growing at either end is never L2, whatever the box spectrum says.

    Otherwise the box must show the zero mode; a clean gap with no eigenvalue below
    tau_zero means the decaying solution is not captured by [m - R, m + R].
    """
    if not all(decay):
        return False
    return True if spectral else None


def numeric_kernel(
    params: PerturbationParams,
    n: int,
    disc: Discretization = Discretization(),
    thresholds: Thresholds = Thresholds(),
    profiles: Optional[ProfilePair] = None,
    k: int = 5,
) -> SpectralReport:
    if params.is_unperturbed:
        raise NonFredholmError()
    profiles = profiles or make_profiles(params.m)
    coef = mode_coefficient(params, profiles, n)
    star_l_l = schrodinger_matrix(coef, disc, MatrixKind.STAR_L_L)
    l_star_l = schrodinger_matrix(coef, disc, MatrixKind.L_STAR_L)
    profile = quadrature_solution(coef, disc)
    decay_plus = end_decay(profile, Operator.D_PLUS)
    decay_minus = end_decay(profile, Operator.D_MINUS)
    report = SpectralReport(
        n=int(n),
        params=params,
        disc=disc,
        thresholds=thresholds,
        low_plus=tuple(float(v) for v in low_eigenvalues(star_l_l, k)),
        low_minus=tuple(float(v) for v in low_eigenvalues(l_star_l, k)),
        kernel_plus=_combine(_decide(star_l_l, thresholds), decay_plus),
        kernel_minus=_combine(_decide(l_star_l, thresholds), decay_minus),
        rho_smoothing=profiles.rho_smoothing.value,
        decay_plus=decay_plus,
        decay_minus=decay_minus,
    )
    log.debug(
        "mode n=%s %s: plus=%s %s minus=%s %s",
        n, params, report.low_plus[:2], decay_plus, report.low_minus[:2], decay_minus,
    )
    if not report.decided:
        log.warning("indeterminate spectrum for n=%s, %s at R=%s h=%s", n, params, disc.R, disc.h)
        raise IndeterminateSpectrumError(
            f"no clean gap between tau_zero={thresholds.tau_zero} and tau_gap={thresholds.tau_gap} "
            f"for n={n}; refine R or h",
            report,
        )
    return report


def numeric_kernels(
    params: PerturbationParams,
    modes: Iterable[int],
    disc: Discretization = Discretization(),
    thresholds: Thresholds = Thresholds(),
    profiles: Optional[ProfilePair] = None,
    jobs: int = 1,
) -> list[SpectralReport]:
    """Reports for several modes, in the order given, fanned out over `jobs` threads."""
    modes = list(modes)

    def run(n: int) -> SpectralReport:
        return numeric_kernel(params, n, disc, thresholds, profiles)

    if jobs <= 1:
        return [run(n) for n in modes]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, modes))


def _turning_points(slope: np.ndarray) -> tuple[int, int]:
    """(maxima, minima) of a profile with the given sampled slope."""
    signs = np.sign(slope)
    changes = np.diff(signs[signs != 0])
    return int(np.count_nonzero(changes < 0)), int(np.count_nonzero(changes > 0))


def _signs_settled(coef: ModeCoefficient, disc: Discretization) -> bool:
    m = coef.params.m
    for upper in (True, False):
        edge = m + disc.R if upper else m - disc.R
        far = m + 1e6 if upper else m - 1e6
        if np.sign(coef.flat(edge, upper)) != np.sign(coef.flat(far, upper)):
            return False
    return True


def _profile_resolved(
    profile: QuadratureProfile, slope: np.ndarray, operator: Operator, margin: float, drop: float
) -> bool:
    sign = 1.0 if operator is Operator.D_PLUS else -1.0
    phi, slope = sign * profile.phi, sign * slope
    maxima, minima = _turning_points(slope)
    if slope[-1] > 0 or slope[0] < 0:
        # growth at a wall: an interior bump would leave a spurious near-zero eigenvalue
        return maxima == 0
    if maxima != 1 or minima:
        return False
    r = profile.r
    peak = int(np.argmax(phi))
    if min(r[peak] - r[0], r[-1] - r[peak]) < margin:
        return False
    return min(phi[peak] - phi[0], phi[peak] - phi[-1]) >= drop


def resolves_mode(
    coef: ModeCoefficient,
    disc: Discretization,
    margin: float = 3.0,
    drop: float = 20.0,
    operator: Operator | str | None = None,
) -> bool:
    """Whether the box spectrum alone decides this mode the way the whole line does.

    The sign of c_n must have settled at both box ends. A solution exp(+-Phi_n) that grows
    towards a wall must be monotone there with no interior maximum; one that decays at
    both walls must have a single maximum `margin` inside the box that falls by `drop`.
    """
    if not _signs_settled(coef, disc):
        return False
    profile = quadrature_solution(coef, disc)
    slope = np.asarray(coef(profile.r), dtype=float)
    operators = list(Operator) if operator is None else [Operator(operator)]
    return all(_profile_resolved(profile, slope, op, margin, drop) for op in operators)


def decides_mode(coef: ModeCoefficient, disc: Discretization, margin: float = 3.0, drop: float = 20.0) -> bool:
    """Whether numeric_kernel's verdict on this box is trustworthy.

    Growth at an end settles an operator on its own; a solution decaying at both ends
    still needs its bump resolved by the box.
    """
    if not _signs_settled(coef, disc):
        return False
    profile = quadrature_solution(coef, disc)
    slope = np.asarray(coef(profile.r), dtype=float)
    return all(
        _profile_resolved(profile, slope, op, margin, drop)
        for op in Operator
        if all(end_decay(profile, op))
    )


def pairing_error(coef: Callable, disc: Discretization, tau_gap: float = 1e-3, k: int = 5) -> float:
    """Largest relative gap between the k lowest eigenvalues above tau_gap of L*L and its partner."""
    star = low_eigenvalues(schrodinger_matrix(coef, disc, MatrixKind.STAR_L_L), k + 2)
    partner = low_eigenvalues(partner_matrix(coef, disc), k + 2)
    a = star[star > tau_gap][:k]
    b = partner[partner > tau_gap][:k]
    if len(a) != len(b) or not len(a):
        return math.inf
    return float(np.max(np.abs(a - b) / np.abs(a)))


@dataclass(frozen=True)
class ConvergenceStudy:
    steps: tuple[float, ...]
    eigenvalues: tuple[float, ...]
    reference: float
    errors: tuple[float, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(a / b for a, b in zip(self.errors, self.errors[1:]))

    def to_dict(self) -> dict:
        return {
            "steps": list(self.steps),
            "eigenvalues": list(self.eigenvalues),
            "reference": self.reference,
            "errors": list(self.errors),
            "ratios": list(self.ratios),
        }


def _lowest_nonzero(coef: Callable, disc: Discretization, tau_gap: float) -> float:
    values = low_eigenvalues(schrodinger_matrix(coef, disc, MatrixKind.STAR_L_L), 3)
    return float(values[values > tau_gap][0])


def convergence_study(
    coef: ModeCoefficient,
    steps: Sequence[float] = (0.05, 0.025, 0.0125),
    R: float = 12.0,
    tau_gap: float = 1e-3,
) -> ConvergenceStudy:
    """Smallest nonzero eigenvalue of L*L under step halving.

    The reference is the Richardson extrapolation (4 lam(h/2) - lam(h)) / 3 from the
    finest step and its half. Steps dividing 1/4 keep the junctions of rho on nodes.
    """
    steps = tuple(float(h) for h in steps)
    values = tuple(_lowest_nonzero(coef, Discretization(R, h), tau_gap) for h in steps)
    finer = _lowest_nonzero(coef, Discretization(R, steps[-1] / 2.0), tau_gap)
    reference = (4.0 * finer - values[-1]) / 3.0
    errors = tuple(abs(v - reference) for v in values)
    log.debug("convergence: steps %s values %s reference %s", steps, values, reference)
    return ConvergenceStudy(steps, values, reference, errors)
