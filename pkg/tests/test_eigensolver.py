import math

import mpmath
import numpy as np
import pytest
from conftest import fd_ground
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from salpeter_bounds.eigensolver import (
    EigensolveConfig,
    build_kernel,
    kernel_eval,
    load_kernel,
    nonrelativistic_energy,
    save_kernel,
    solve_e,
    solve_state,
)
from salpeter_bounds.errors import ConfigurationError, ConvergenceError, DomainError
from salpeter_bounds.special import AIRY_FIRST_ZERO

# Frozen from the finite-difference oracle in conftest (n = 1000/2000/4000,
# two Richardson stages); the oracle itself is good to about 1e-9.
E_TABLE = [
    (0.0, 2.3381074099492656),
    (0.3, 2.373879485341719),
    (1.0, 2.664012611968175),
    (10.0, 10.661857392047773),
    (100.0, 100.21203842481069),
    (1e4, 10000.021213194057),
]


@pytest.mark.parametrize("m,expected", E_TABLE)
def test_energy_table(m, expected):
    assert solve_e(m) == pytest.approx(expected, abs=5e-9)


@pytest.mark.parametrize("m", [0.05, 2.0, 37.0])
def test_energy_against_live_oracle(m):
    assert abs(solve_e(m) - fd_ground(m)) < 1e-8


def test_massless_case_is_airy_zero():
    exact = float(-mpmath.airyaizero(1))
    assert abs(solve_e(0.0) - exact) < 1e-9
    assert abs(solve_e(0.0) - AIRY_FIRST_ZERO) < 1e-6


@pytest.mark.parametrize("m", [100.0, 400.0, 1e4])
def test_heavy_mass_asymptote(m):
    e = solve_e(m)
    assert abs(e - nonrelativistic_energy(m)) / (e - m) < 1e-3


def test_asymptote_deviation_shrinks():
    devs = [abs(solve_e(m) - nonrelativistic_energy(m)) / (solve_e(m) - m) for m in (50.0, 100.0, 200.0)]
    assert devs[0] > devs[1] > devs[2]


@pytest.mark.parametrize("m", [0.0, 1.0, 10.0])
def test_discretisation_invariance(m):
    base = EigensolveConfig()
    e = solve_e(m, base)
    finer = solve_e(m, EigensolveConfig(grid_points=2 * base.grid_points))
    wider = solve_e(m, EigensolveConfig(r_max=1.5 * base.radius(m)))
    assert abs(finer - e) < 1e-9
    assert abs(wider - e) < 1e-9


@pytest.mark.parametrize("m", [0.0, 0.7, 5.0, 300.0])
def test_state_is_nodeless_and_above_rest_mass(m):
    s = solve_state(m)
    assert s.nodes == 0
    assert s.energy > m
    assert s.error < EigensolveConfig().tol_energy


def test_gaussian_trial_is_above():
    # <-u''> + <sqrt(1+r^2)> for u = r exp(-a r^2 / 2), minimised over a
    def expectation(a):
        norm = quad(lambda r: r * r * math.exp(-a * r * r), 0, np.inf)[0]
        kin = quad(lambda r: (1 - a * r * r) ** 2 * math.exp(-a * r * r), 0, np.inf)[0]
        pot = quad(lambda r: math.sqrt(1 + r * r) * r * r * math.exp(-a * r * r), 0, np.inf)[0]
        return (kin + pot) / norm

    best = min(expectation(a) for a in np.linspace(0.4, 1.6, 61))
    e1 = solve_e(1.0)
    assert e1 < best
    assert best - e1 < 0.05


@pytest.mark.parametrize("m", [0.2, 1.0, 8.0, 150.0])
def test_slope_matches_finite_difference(m):
    h = 1e-3 * max(m, 1.0)
    fd = (solve_e(m + h) - solve_e(m - h)) / (2 * h)
    assert solve_state(m).slope == pytest.approx(fd, abs=1e-5)


def test_slope_limits():
    assert solve_state(0.0).slope == 0.0
    assert 0.99 < solve_state(1e4).slope < 1.0


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_bad_mass(bad):
    with pytest.raises(DomainError):
        solve_e(bad)


def test_box_too_small():
    with pytest.raises(ConfigurationError):
        solve_e(1.0, EigensolveConfig(r_max=3.0))


def test_unreachable_tolerance():
    with pytest.raises(ConvergenceError):
        solve_e(1.0, EigensolveConfig(tol_energy=1e-17, grid_points=1000, max_refinements=0))


@pytest.mark.parametrize(
    "kwargs", [dict(r_max=-1.0), dict(grid_points=10), dict(tol_energy=0.0), dict(max_bisections=0)]
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        EigensolveConfig(**kwargs)


def test_config_digest_is_stable():
    assert EigensolveConfig().digest() == EigensolveConfig().digest()
    assert EigensolveConfig().digest() != EigensolveConfig(tol_energy=1e-7).digest()


# ------------------------------------------------------------------ kernel

SMALL_GRID = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]


@pytest.fixture(scope="module")
def small_kernel():
    return build_kernel(SMALL_GRID)


def test_requested_nodes_are_exact(small_kernel):
    for m in SMALL_GRID:
        assert m in small_kernel.masses
        assert small_kernel(m) == solve_e(m)


def test_small_kernel_monotone(small_kernel):
    assert small_kernel.monotonicity_audit()


@pytest.mark.parametrize("m", [0.25, 0.75, 3.3, 14.0, 70.0])
def test_interpolation_between_nodes(small_kernel, m):
    assert abs(small_kernel(m) - solve_e(m)) <= 10 * EigensolveConfig().tol_energy


def test_default_kernel_accuracy(kernel):
    rng = np.random.default_rng(7)
    for m in np.expm1(rng.uniform(0.0, math.log1p(1e4), 12)):
        assert abs(kernel(m) - solve_e(m)) <= 10 * kernel.config.tol_energy
    assert kernel.monotonicity_audit()


def test_tail_above_table(kernel):
    m = 2 * kernel.m_max
    assert kernel.is_extrapolated(m)
    assert kernel(m) == pytest.approx(solve_e(m), abs=1e-8)
    assert abs(kernel(m) - nonrelativistic_energy(m)) < 1e-6


def test_tail_is_continuous(kernel):
    top = kernel.m_max
    assert kernel(top * (1 + 1e-12)) == pytest.approx(kernel(top), rel=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=2e4), st.floats(min_value=1e-6, max_value=1.0))
def test_kernel_monotone_property(kernel, m, dm):
    lo, hi = kernel(m), kernel(m + dm)
    assert hi >= lo
    assert hi - (m + dm) <= lo - m + 1e-12


def test_kernel_is_vectorised(kernel):
    ms = np.array([0.0, 1.0, 3e4])
    assert np.array_equal(kernel(ms), np.array([kernel(v) for v in ms]))
    assert kernel_eval(kernel, 1.0) == kernel(1.0)


@pytest.mark.parametrize("bad", [-0.1, math.nan])
def test_kernel_rejects_bad_mass(kernel, bad):
    with pytest.raises(DomainError):
        kernel(bad)


@pytest.mark.parametrize("grid", [[1.0], [0.0, 2.0, 1.0], [-1.0, 1.0]])
def test_kernel_grid_validation(grid):
    with pytest.raises(DomainError):
        build_kernel(grid)


def test_kernel_is_read_only(kernel):
    with pytest.raises(ValueError):
        kernel.energies[0] = 0.0


def test_cache_round_trip(small_kernel, tmp_path):
    path = tmp_path / "kernel.txt"
    save_kernel(small_kernel, path)
    loaded = load_kernel(path)
    assert np.array_equal(loaded.masses, small_kernel.masses)
    assert np.array_equal(loaded.energies, small_kernel.energies)
    assert np.array_equal(loaded.slopes, small_kernel.slopes)
    assert loaded.config == small_kernel.config
    ms = np.linspace(0, 150, 301)
    assert np.array_equal(loaded(ms), small_kernel(ms))


def test_cache_rejects_tampering(small_kernel, tmp_path):
    path = tmp_path / "kernel.txt"
    save_kernel(small_kernel, path)
    text = path.read_text().replace('"grid_points": 20000', '"grid_points": 40000')
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_kernel(path)


def test_cache_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("hello\n")
    with pytest.raises(ConfigurationError):
        load_kernel(path)
