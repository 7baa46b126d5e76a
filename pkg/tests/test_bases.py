import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upliftsim.bases import (
    MixtureBase,
    PolyBase,
    SineBase,
    TabulatedBase,
    mixture_base,
    poly_base,
    read_grid_csv,
    sine_base,
    tabulated_base,
    write_grid_csv,
)
from upliftsim.drift import DriftSpec
from upliftsim.errors import ConfigError
from upliftsim.fixtures import NAMES, load_fixture

FIG1A = SineBase(lambdas=(2, 1), g=(0.7, 0.7))
NO_DRIFT = DriftSpec()

# 0.5 * (sin(0.98) + 1), evaluated with mpmath at 40 digits
FIG1A_CONTROL_AT_ORIGIN = 0.91524868524598523404
# fig1b polynomial fixture at x' = (0.2, -0.4), d = 0; re-derived with mpmath
# from the frozen selector tables and coefficients
FIG1B_AT_POINT = (0.88370569573398094487, 0.37061018651307825467)


def _grid(n=41, m=2):
    axes = [np.linspace(-1, 1, n)] * m
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


# sine -------------------------------------------------------------------

def test_sine_treated_at_origin():
    assert sine_base(1, [0.0, 0.0], 0, FIG1A, NO_DRIFT) == 0.5


def test_sine_control_at_origin():
    assert sine_base(0, [0.0, 0.0], 0, FIG1A, NO_DRIFT) == pytest.approx(FIG1A_CONTROL_AT_ORIGIN, abs=1e-15)


def test_sine_zero_displacement_collapses_arms():
    base = SineBase(lambdas=(3, 3), g=(0.0, 0.0))
    grid = _grid()
    for d in (0.0, 0.4, 2.0):
        assert np.array_equal(base(0, grid, d), base(1, grid, d))


def test_sine_matches_closed_form_pointwise():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.uniform(-1, 1, 2)
        d = rng.uniform(0, 3)
        expected0 = 0.5 * (math.sin(d + 2 * (x[0] + 0.7) * (x[1] + 0.7)) + 1)
        expected1 = 0.5 * (math.sin(d + 1 * x[0] * x[1]) + 1)
        assert FIG1A(0, x, d) == pytest.approx(expected0, abs=1e-14)
        assert FIG1A(1, x, d) == pytest.approx(expected1, abs=1e-14)


@pytest.mark.parametrize("level", [0.0, 0.3, 1.7, 12.0])
def test_sine_constant_drift_pass_through(level):
    grid = _grid()
    drift = DriftSpec(kind="constant", level=level)
    for arm in (0, 1):
        got = sine_base(arm, grid, 123, FIG1A, drift)
        g = np.array([0.7, 0.7]) if arm == 0 else np.zeros(2)
        expected = 0.5 * (np.sin(level + FIG1A.lambdas[arm] * np.prod(grid + g, axis=-1)) + 1.0)
        assert np.array_equal(got, expected)


def test_sine_dimension_mismatch():
    with pytest.raises(ConfigError):
        FIG1A(0, [0.1, 0.2, 0.3], 0.0)


def test_sine_requires_positive_integer_frequency():
    with pytest.raises(ConfigError):
        SineBase(lambdas=(0, 1), g=(0.0,)).validate()
    with pytest.raises(ConfigError):
        SineBase(lambdas=(1.5, 1), g=(0.0,)).validate()


def test_sine_multi_arm_displacements():
    base = SineBase(lambdas=(1, 1, 1), g=(0.5,))
    assert base.displacement(0).tolist() == [0.5]
    assert base.displacement(2).tolist() == [0.0]
    explicit = SineBase(lambdas=(1, 1, 1), g=(0.5,), displacements=((0.5,), (0.0,), (0.25,)))
    assert explicit(2, [0.2], 0.0) == 0.5 * (math.sin(0.45) + 1)


# polynomial ----------------------------------------------------------------

def test_poly_zero_coefficients():
    base = PolyBase(q=4, coefficients=((0.0,) * 4, (0.0,) * 4), m=2, h_range=(0.0, 0.0))
    assert base(0, [0.3, -0.9], 1.3) == 0.5


def test_poly_fig1b_fixture():
    base = load_fixture("fig1b").bases[0]
    assert base.q == 5
    for arm in (0, 1):
        assert poly_base(arm, [0.2, -0.4], 0, base, NO_DRIFT) == pytest.approx(FIG1B_AT_POINT[arm], rel=1e-14)


def test_poly_fig1b_reproducible_across_constructions():
    a = load_fixture("fig1b").bases[0]
    b = load_fixture("fig1b").bases[0]
    assert a.tables == b.tables
    assert a(0, [0.2, -0.4], 0.0) == b(0, [0.2, -0.4], 0.0)


def test_poly_inner_product_independent_reimplementation():
    base = PolyBase(q=5, coefficients=((1.0, -2.0, 0.5, 3.0, -1.0), (0.0, 1.0, 1.0, -1.0, 2.0)), m=3,
                    h_range=(-1.0, 2.0), selector_seed=42)
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.uniform(-1, 1, 3)
        d = rng.uniform(0, 5)
        h = -1.0 + 3.0 * (math.sin(d) + 1) / 2
        for arm in (0, 1):
            terms = [1.0]
            for idx in base.tables[arm]:
                prod = 1.0
                for j in idx:
                    prod *= x[j]
                terms.append(prod)
            z = sum((k + h) * v for k, v in zip(base.coefficients[arm], terms))
            assert base(arm, x, d) == pytest.approx(1 / (1 + math.exp(-z)), rel=1e-12)


def test_poly_q1_ignores_context():
    base = PolyBase(q=1, coefficients=((0.4,), (-0.2,)), m=2, h_range=(0.1, 0.3))
    d = 0.7
    h = 0.1 + 0.2 * (math.sin(d) + 1) / 2
    for x in ([0, 0], [1, -1], [0.3, 0.9]):
        assert base(0, x, d) == pytest.approx(1 / (1 + math.exp(-(0.4 + h))), abs=1e-15)
        assert base(1, x, d) == pytest.approx(1 / (1 + math.exp(-(-0.2 + h))), abs=1e-15)


def test_poly_term_structure():
    base = PolyBase(q=6, coefficients=((0.0,) * 6, (1.0,) * 6), m=4, selector_seed=1)
    for table in base.tables:
        assert [len(t) for t in table] == [1, 2, 3, 4, 5]
        assert all(0 <= j < 4 for t in table for j in t)
    assert base.tables[0] != base.tables[1]


def test_poly_selection_differs_across_arms_for_many_seeds():
    for seed in range(50):
        base = PolyBase(q=2, coefficients=((0.0, 1.0), (1.0, 0.0), (2.0, 2.0)), m=3, selector_seed=seed)
        assert len(set(base.tables)) == 3


def test_poly_seed_changes_surface():
    kw = dict(q=5, coefficients=((0.5, -2, 3, -4, 2.5), (-0.5, 2.5, -3, 3.5, -2)), m=2)
    a, b = PolyBase(selector_seed=1, **kw), PolyBase(selector_seed=2, **kw)
    grid = _grid()
    assert np.array_equal(a(0, grid, 0.0), PolyBase(selector_seed=1, **kw)(0, grid, 0.0))
    assert not np.array_equal(a(0, grid, 0.0), b(0, grid, 0.0))


def test_poly_validation():
    with pytest.raises(ConfigError) as info:
        PolyBase(q=0, coefficients=((), ()), m=2).validate()
    assert info.value.field == "base.q"
    with pytest.raises(ConfigError) as info:
        PolyBase(q=2, coefficients=((1.0, 2.0), (1.0, 2.0)), m=2).validate()
    assert info.value.field == "base.k_i"
    with pytest.raises(ConfigError):
        PolyBase(q=2, coefficients=((1.0, 2.0), (1.0,)), m=2).validate()
    with pytest.raises(ConfigError):
        PolyBase(q=2, coefficients=((1.0, 2.0), (0.0, 2.0)), m=2, h_range=(1.0, 0.0)).validate()


def test_poly_drift_moves_surface_periodically():
    base = load_fixture("fig1b").bases[0]
    x = [0.2, -0.4]
    assert base(0, x, 0.0) != base(0, x, 1.0)
    assert base(0, x, 1.0) == pytest.approx(base(0, x, 1.0 + 2 * math.pi), abs=1e-12)


# tabulated -------------------------------------------------------------------

def test_tabulated_node_identity():
    axes = (np.array([-1.0, 0.0, 1.0]), np.array([-1.0, 1.0]))
    values = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    base = TabulatedBase(axes, values)
    for i, a in enumerate(axes[0]):
        for j, b in enumerate(axes[1]):
            assert tabulated_base(0, [a, b], base) == values[i, j]


def test_tabulated_linear_midpoint():
    base = TabulatedBase((np.array([0.0, 1.0]),), np.array([0.2, 0.8]))
    assert base(0, [0.5]) == pytest.approx(0.5, abs=1e-15)


def test_tabulated_constant_field():
    base = TabulatedBase.constant(0.3, m=2)
    rng = np.random.default_rng(0)
    assert np.all(base(1, rng.uniform(-1, 1, (500, 2))) == 0.3)


def test_tabulated_bilinear_centre():
    base = TabulatedBase((np.array([0.0, 1.0]),) * 2, np.array([[0.0, 0.2], [0.4, 1.0]]))
    assert base(0, [0.5, 0.5]) == pytest.approx(0.4, abs=1e-15)


def test_tabulated_clamps_outside_hull():
    base = TabulatedBase((np.array([0.0, 1.0]),), np.array([0.2, 0.8]))
    assert base(0, [-5.0]) == 0.2
    assert base(0, [7.0]) == 0.8


def test_tabulated_ignores_arm_and_drift():
    base = TabulatedBase((np.array([0.0, 1.0]),), np.array([0.2, 0.8]))
    assert base(0, [0.25], 0.0) == base(3, [0.25], 9.0)


def test_grid_csv_round_trip(tmp_path):
    axes = (np.linspace(-1, 1, 7), np.linspace(-1, 1, 5))
    values = FIG1A(1, np.stack(np.meshgrid(*axes, indexing="ij"), -1), 0.0)
    path = tmp_path / "grid.csv"
    write_grid_csv(path, axes, values)
    base = read_grid_csv(path)
    assert np.array_equal(base.values, values)
    assert all(np.array_equal(a, b) for a, b in zip(base.axes, axes))
    write_grid_csv(tmp_path / "again.csv", base.axes, base.values)
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


@pytest.mark.parametrize(
    "text",
    [
        "",
        "x,y,value\n0,0,0.1\n",
        "dim_0,value\n0,0.1\n",
        "dim_0,value\n0,0.1\n1,abc\n",
        "dim_0,dim_1,value\n0,0,0.1\n0,1,0.1\n1,0,0.1\n",
        "dim_0,value\n0,0.1\n1,1.5\n",
        "dim_0,value\n0,0.1\n0,0.2\n",
    ],
    ids=["empty", "bad-header", "single-row", "non-numeric", "incomplete", "out-of-range", "duplicate"],
)
def test_malformed_grid_files(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    if text == "dim_0,value\n0,0.1\n":
        # a single node is a valid (degenerate) lattice
        assert read_grid_csv(path)(0, [0.0]) == 0.1
        return
    with pytest.raises(ConfigError):
        read_grid_csv(path)


def test_missing_grid_file(tmp_path):
    with pytest.raises(ConfigError):
        read_grid_csv(tmp_path / "nope.csv")


# mixture -----------------------------------------------------------------

def test_mixture_single_component_is_identity():
    mix = MixtureBase(((1.0, FIG1A),))
    grid = _grid()
    for arm in (0, 1):
        assert np.array_equal(mixture_base(arm, grid, 0, mix, NO_DRIFT), FIG1A(arm, grid, 0.0))


def test_mixture_convex_midpoint():
    mix = MixtureBase(((0.5, TabulatedBase.constant(0.0, 2)), (0.5, TabulatedBase.constant(1.0, 2))))
    assert mix(0, [0.1, 0.2], 0.0) == 0.5


def test_mixture_weights_must_sum_to_one():
    with pytest.raises(ConfigError):
        MixtureBase(((0.5, FIG1A), (0.4, FIG1A))).validate()
    with pytest.raises(ConfigError):
        MixtureBase(((1.5, FIG1A), (-0.5, FIG1A))).validate()
    MixtureBase(((0.3, FIG1A), (0.7 + 1e-12, FIG1A))).validate()


def test_mixture_shares_drift_with_components():
    poly = load_fixture("fig1b").bases[0]
    mix = MixtureBase(((0.25, FIG1A), (0.75, poly)))
    drift = DriftSpec(kind="sinusoidal", amplitude=2.0, omega=0.1)
    from upliftsim.drift import eval_drift

    d = eval_drift(drift, 7)
    x = [0.3, -0.2]
    assert mixture_base(1, x, 7, mix, drift) == pytest.approx(0.25 * FIG1A(1, x, d) + 0.75 * poly(1, x, d), abs=1e-15)


# range / causal-difference properties --------------------------------------

FLAVOURS = {
    "sine": SineBase(lambdas=(7, 3), g=(1.3, -2.1)),
    "polynomial": PolyBase(q=6, coefficients=((3, -5, 8, -2, 6, -9), (-4, 2, -7, 5, -3, 8)), m=2,
                           h_range=(-3.0, 3.0), selector_seed=5),
    "tabulated": TabulatedBase((np.linspace(-1, 1, 9),) * 2, np.random.default_rng(1).uniform(0, 1, (9, 9))),
}
FLAVOURS["mixture"] = MixtureBase(tuple((0.25, b) for b in FLAVOURS.values()) + ((0.25, FIG1A),))


@pytest.mark.parametrize("name", list(FLAVOURS))
def test_range_on_random_tuples(name):
    base = FLAVOURS[name]
    rng = np.random.default_rng(0)
    x = rng.uniform(-3, 3, (100_000, 2))
    d = rng.uniform(0, 50, 100_000)
    arms = rng.integers(0, 2, 100_000)
    for arm in (0, 1):
        for dv in np.unique(np.round(d[arms == arm], 0)):
            sel = (arms == arm) & (np.round(d, 0) == dv)
            b = np.asarray(base(arm, x[sel], float(dv)))
            assert np.all((b >= 0) & (b <= 1))


@settings(max_examples=200, deadline=None)
@given(
    lam0=st.integers(1, 50),
    lam1=st.integers(1, 50),
    g=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    x=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    d=st.floats(0, 1e3),
)
def test_sine_range_property(lam0, lam1, g, x, d):
    base = SineBase(lambdas=(lam0, lam1), g=tuple(g))
    for arm in (0, 1):
        assert 0.0 <= base(arm, x, d) <= 1.0


@pytest.mark.parametrize("name", [n for n in NAMES if n != "null_effect"])
def test_shipped_configs_have_a_causal_difference(name):
    config = load_fixture(name)
    low, high = config.policy.domain_box()
    axes = [np.linspace(lo, hi, 41) for lo, hi in zip(low, high)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    gap = np.abs(np.asarray(config.response(1, grid, 0.0)) - np.asarray(config.response(0, grid, 0.0)))
    assert gap.max() > 0


def test_confounder_axis_influences_b():
    config = load_fixture("confounded")
    assert config.policy.n_confounders == 1
    u = np.linspace(-3, 3, 61)
    for x in (-0.8, 0.1, 0.6):
        pts = np.stack([np.full_like(u, x), u], -1)
        for arm in (0, 1):
            assert np.var(config.response(arm, pts, 0.0)) > 0
