import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the repository root is on path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from cylindex.profiles import (
    CylinderGeometry,
    FSmoothing,
    PerturbationParams,
    RhoSmoothing,
    make_profiles,
    mode_coefficient,
    orbit_holonomy,
)


def test_params_validation():
    with pytest.raises(ValueError):
        PerturbationParams(0, s=-1.0)
    with pytest.raises(ValueError):
        PerturbationParams(1.5)
    with pytest.raises(ValueError):
        PerturbationParams(0, t=float("inf"))
    p = PerturbationParams(2.0, s=1, t=0.5)
    assert p.m == 2 and isinstance(p.m, int)
    assert PerturbationParams(0).is_unperturbed
    assert p.to_dict() == {"m": 2, "s": 1.0, "t": 0.5, "eps1": 0.0, "eps2": 0.0}
    assert p.scaled(10).s == 10 and p.scaled(10).t == 5


def test_clifford_relations():
    geometry = CylinderGeometry()
    assert geometry.clifford_relations_hold()
    profiles = make_profiles(3)
    assert geometry.moment(profiles, 3.0) == pytest.approx(-2 * math.pi * 3)
    assert geometry.connection_form(profiles, 10.0) == pytest.approx(-2 * math.pi * 3.5)


@pytest.mark.parametrize("kind", list(RhoSmoothing))
@pytest.mark.parametrize("m", [-2, 0, 3])
def test_rho_shape(kind, m):
    profiles = make_profiles(m, kind)
    assert profiles.rho(m) == m
    assert profiles.rho(m + 0.2) == pytest.approx(m + 0.2)
    assert profiles.rho(m + 10) == m + 0.5
    assert profiles.rho(m - 10) == m - 0.5

    r = np.linspace(m - 1, m + 1, 10_001)
    rho = profiles.rho(r)
    assert np.all(np.diff(rho) >= 0)
    assert np.all((rho >= m - 0.5) & (rho <= m + 0.5))
    assert np.all(profiles.rho_prime(r) >= 0)


@pytest.mark.parametrize("kind", list(RhoSmoothing))
def test_rho_prime_matches_difference_quotient(kind):
    profiles = make_profiles(1, kind)
    d = 1e-6
    for x in (1.1, 1.3, 1.4, 1.45, 0.6, 0.7, 2.0):
        numeric = (profiles.rho(x + d) - profiles.rho(x - d)) / (2 * d)
        assert profiles.rho_prime(x) == pytest.approx(numeric, abs=1e-6)


def test_rho_junctions_are_continuous():
    for kind in RhoSmoothing:
        profiles = make_profiles(0, kind)
        for x in (0.25, 0.5, -0.25, -0.5):
            assert profiles.rho(x - 1e-9) == pytest.approx(profiles.rho(x + 1e-9), abs=1e-8)
            assert profiles.rho_prime(x - 1e-9) == pytest.approx(profiles.rho_prime(x + 1e-9), abs=1e-6)


def test_f_quadratic_cap_and_cosh_blend():
    cap = make_profiles(0)
    assert cap.f(0.0) == 0.25
    assert cap.f(2.0) == 2.0
    assert cap.f(-0.5) == pytest.approx(0.5)
    cosh = make_profiles(0, f_smoothing=FSmoothing.COSH_BLEND)
    assert cosh.f(0.5) == pytest.approx(0.5, abs=1e-12)
    slope = (cosh.f(0.5) - cosh.f(0.5 - 1e-7)) / 1e-7
    assert slope == pytest.approx(1.0, abs=1e-5)
    r = np.linspace(-3, 3, 601)
    assert np.all(cosh.f(r) > 0)


def test_f_away_from_zero_level():
    profiles = make_profiles(3)
    assert profiles.f(3.0) == 3.0
    assert profiles.f(0.0) == 0.0
    assert profiles.f_power(0.0, 0.0) == 1.0
    assert profiles.f_power(0.0, 0.5) == 0.0
    assert profiles.f_power(4.0, 0.5) == pytest.approx(2.0)


def test_mode_coefficient_examples():
    c = mode_coefficient(PerturbationParams(0, s=0, t=0), make_profiles(0), 1)
    assert c(0.0) == pytest.approx(2 * math.pi)

    c = mode_coefficient(PerturbationParams(2, t=1), make_profiles(2), 2)
    assert c(5.0) == pytest.approx(-2 * math.pi)

    c = mode_coefficient(PerturbationParams(0, s=1, eps1=1), make_profiles(0), 0)
    for r in (0.75, 2.0, 7.5):
        assert c(r) == pytest.approx(-math.pi * (1 + r))


def test_mode_coefficient_flat_closed_form():
    params = PerturbationParams(-1, s=0.5, t=2, eps1=0.5, eps2=1)
    coef = mode_coefficient(params, make_profiles(-1), 3)
    r = np.linspace(-0.4, 6.0, 50)
    assert np.allclose(coef(r), coef.flat(r, upper=True), rtol=1e-13, atol=1e-12)
    r = np.linspace(-8.0, -1.6, 50)
    assert np.allclose(coef(r), coef.flat(r, upper=False), rtol=1e-13, atol=1e-12)


def test_mode_coefficient_rejects_wrong_level():
    with pytest.raises(ValueError):
        mode_coefficient(PerturbationParams(1, t=1), make_profiles(0), 0)


def test_orbit_holonomy():
    orbit = orbit_holonomy(make_profiles(0), 0.0)
    assert orbit.parallel_section and orbit.weight == 0 and orbit.holonomy == 1
    orbit = orbit_holonomy(make_profiles(3), 3.0)
    assert orbit.parallel_section and orbit.weight == 3
    orbit = orbit_holonomy(make_profiles(0), 0.2)
    assert not orbit.parallel_section and orbit.weight is None
    assert orbit.holonomy == pytest.approx(np.exp(0.4j * math.pi))


@pytest.mark.parametrize("kind", list(RhoSmoothing))
@pytest.mark.parametrize("m", [0, 2])
def test_orbit_holonomy_in_blend_band(kind, m):
    profiles = make_profiles(m, kind)
    for offset in (0.3, 0.4, 0.45, -0.4):
        orbit = orbit_holonomy(profiles, m + offset)
        frac = orbit.rho - m
        assert 0.25 < abs(frac) < 0.5
        assert not orbit.parallel_section and orbit.weight is None
        assert orbit.holonomy == pytest.approx(np.exp(2j * math.pi * orbit.rho))
        assert abs(orbit.holonomy - 1) > 0.5
