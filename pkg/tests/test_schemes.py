import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srj.chebyshev import amplification_eval, lambda_max, lambda_star
from srj.schemes import (LEVEL_TABLE_M, MAX_LEVEL, build_level_table, generate_cjm_scheme,
                         generate_srj_scheme, order_for_stability, scheme_for_level,
                         stiffness_slope)

# factor multisets for the five short schemes (published values)
TABLE_FACTORS = {
    1: [0.66666667],
    2: [1.70710678, 0.56903559],
    3: [3.49402108, 0.53277784, 0.92457411],
    5: [9.23070105, 0.51215173, 0.97045899, 0.62486988, 2.1713295],
    7: [17.84007924, 0.50624677, 0.9845549, 1.69891732, 0.56014439, 4.06304526,
        0.69311375],
}


def test_scheme_factors_match_published_table():
    for M, expected in TABLE_FACTORS.items():
        got = sorted(generate_srj_scheme(M).omegas)
        assert got == pytest.approx(sorted(expected), abs=1e-6)


def test_scheme_length_bounds():
    with pytest.raises(ValueError):
        generate_srj_scheme(0)
    with pytest.raises(ValueError):
        generate_srj_scheme(10_001)


@given(st.integers(min_value=1, max_value=200))
@settings(max_examples=25, deadline=None)
def test_scheme_roundtrip_and_positivity(M):
    scheme = generate_srj_scheme(M)
    assert len(scheme.omegas) == M
    assert sorted(scheme.application_order) == list(range(M))
    assert min(scheme.omegas) > 0.5
    ls = lambda_star(M)
    max_root = math.cos(math.pi / (2 * M))
    assert max(scheme.omegas) == pytest.approx((ls + 1.0) / (2.0 * (ls - max_root)), rel=1e-12)
    for w in scheme.omegas:
        lam_root = 1.0 - 1.0 / w
        assert abs(amplification_eval(M, lam_root)) < 1e-8


def test_stiffness_slope_degree_one():
    assert stiffness_slope(1) == pytest.approx(2.0 / 3.0, abs=1e-14)


def test_stiffness_slope_matches_finite_difference():
    h = 1e-7
    for M in (2, 3, 5, 7):
        fd = (amplification_eval(M, 1.0 + h) - amplification_eval(M, 1.0 - h)) / (2 * h)
        assert stiffness_slope(M) == pytest.approx(fd, rel=1e-6)


def test_stiffness_slope_increases():
    slopes = [stiffness_slope(M) for M in (1, 2, 3, 5, 7)]
    assert all(b > a for a, b in zip(slopes, slopes[1:]))


def test_level_table_is_published_ladder():
    table = build_level_table(24, 1.5)
    assert [m for _, m in table.levels] == list(LEVEL_TABLE_M)
    assert [lv for lv, _ in table.levels] == list(range(25))
    assert table.m_for_level(0) == 1
    assert table.m_for_level(4) == 7
    assert table.m_for_level(10) == 47
    assert table.m_for_level(24) == 2362


def test_level_table_growth_filter_holds():
    for a, b in zip(LEVEL_TABLE_M, LEVEL_TABLE_M[1:]):
        assert stiffness_slope(b) >= 1.5 * stiffness_slope(a)


def test_level_table_prefix_and_other_growth():
    assert [m for _, m in build_level_table(4, 1.5).levels] == [1, 2, 3, 5, 7]
    # a different growth factor falls back to the greedy filter
    table = build_level_table(3, 3.0)
    ms = [m for _, m in table.levels]
    assert ms[0] == 1
    for a, b in zip(ms, ms[1:]):
        assert stiffness_slope(b) >= 3.0 * stiffness_slope(a)
        assert stiffness_slope(b - 1) < 3.0 * stiffness_slope(a) or b - 1 == a


def test_order_single_factor():
    assert generate_srj_scheme(1).application_order == (0,)


def _running_and_suffix_max(omegas, order, M, grid_size=512):
    grid = np.linspace(-1.0, lambda_max(M), grid_size)
    ordered = [omegas[j] for j in order]
    logs = [np.log(np.maximum(np.abs(1.0 - w * (1.0 - grid)), 1e-300)) for w in ordered]
    run = np.zeros_like(grid)
    prefix_max = 0.0
    for lg in logs:
        run = run + lg
        prefix_max = max(prefix_max, float(run.max()))
    sfx = np.zeros_like(grid)
    suffix_max = 0.0
    for lg in reversed(logs):
        sfx = sfx + lg
        suffix_max = max(suffix_max, float(sfx.max()))
    return math.exp(prefix_max), math.exp(suffix_max)


def test_order_degree_two_applies_overrelaxation_first():
    scheme = generate_srj_scheme(2)
    ordered = scheme.ordered_omegas()
    assert ordered[0] > 1.0 > ordered[1]
    # the chosen order beats the alternative on worst suffix amplification
    _, s_chosen = _running_and_suffix_max(scheme.omegas, scheme.application_order, 2)
    _, s_other = _running_and_suffix_max(scheme.omegas, scheme.application_order[::-1], 2)
    assert s_chosen < s_other


def test_order_degree_47_running_max_bounded():
    scheme = generate_srj_scheme(47)
    prefix_max, suffix_max = _running_and_suffix_max(scheme.omegas, scheme.application_order, 47)
    assert prefix_max < 1e8
    assert suffix_max < 10.0


def test_order_largest_scheme_certifies():
    scheme = scheme_for_level(MAX_LEVEL)
    assert scheme.M == 2362
    prefix_max, _ = _running_and_suffix_max(scheme.omegas, scheme.application_order, 2362)
    assert prefix_max < 1e8


def test_order_rejects_tiny_grid():
    with pytest.raises(ValueError):
        order_for_stability(generate_srj_scheme(3), grid_size=32)


def test_ordering_preserves_final_product():
    M = 13
    scheme = generate_srj_scheme(M)
    grid = np.linspace(-1.0, lambda_max(M), 257)
    prod_ordered = np.ones_like(grid)
    for j in scheme.application_order:
        prod_ordered *= 1.0 - scheme.omegas[j] * (1.0 - grid)
    prod_plain = np.ones_like(grid)
    for w in scheme.omegas:
        prod_plain *= 1.0 - w * (1.0 - grid)
    scale = np.maximum(np.abs(prod_plain), 1e-30)
    assert np.max(np.abs(prod_ordered - prod_plain) / scale) < 1e-9


def test_cjm_reduces_to_srj_on_native_interval():
    for M in (1, 2, 5, 12):
        srj_set = sorted(generate_srj_scheme(M).omegas)
        cjm_set = sorted(generate_cjm_scheme(M, -1.0, lambda_max(M)).omegas)
        assert cjm_set == pytest.approx(srj_set, abs=1e-10)


def test_cjm_degree_one_midpoint():
    assert generate_cjm_scheme(1, -1.0, 0.0).omegas == pytest.approx([2.0 / 3.0])


def test_cjm_hand_computed_pair():
    # roots +-sqrt(2)/2 scaled by 0.5 give lam = -+0.35355339; w = 1/(1 - lam)
    got = sorted(generate_cjm_scheme(2, -0.5, 0.5).omegas)
    assert got == pytest.approx([0.73879613, 1.54691816], abs=1e-6)


def test_cjm_rejects_bad_interval():
    with pytest.raises(ValueError):
        generate_cjm_scheme(3, 0.5, 0.5)
    with pytest.raises(ValueError):
        generate_cjm_scheme(3, -1.2, 0.5)
    with pytest.raises(ValueError):
        generate_cjm_scheme(3, -0.5, 1.0)


def test_scheme_for_level_bounds():
    assert scheme_for_level(0).M == 1
    assert scheme_for_level(MAX_LEVEL).M == 2362
    with pytest.raises(ValueError):
        scheme_for_level(MAX_LEVEL + 1)
    with pytest.raises(ValueError):
        scheme_for_level(-1)


def test_schemes_are_cached_and_immutable():
    a = generate_srj_scheme(7)
    b = generate_srj_scheme(7)
    assert a is b
    with pytest.raises(AttributeError):
        a.M = 8
