import numpy as np
import pytest
from hypothesis import given, strategies as st

from fourtwotwo.analysis import (
    ConfigScheme,
    CurvePoint,
    ErrorConfiguration,
    analytic_no_intrinsic,
    brute_force_oracle,
    config_count,
    configurations,
    curve_csv,
    error_curves,
    fit_noise_params,
    logical_error_rate,
    oracle_coefficients,
    parse_grid,
    physical_baseline,
    restart_points,
    statistical_importance,
    weight2_orbits,
)
from fourtwotwo.code import PauliString
from fourtwotwo.experiments import InjectionRow, run_injection_campaign, table1_plans
from fourtwotwo.sim import (
    Circuit,
    GateOp,
    NoiseModel,
    apply_spam,
    measure_distribution,
    run,
)

GRID = np.linspace(0, 0.5, 50)


@pytest.fixture(scope="module")
def ideal_full_table():
    return run_injection_campaign([c.pauli for c in ConfigScheme.build("full54").configs])


@pytest.fixture(scope="module")
def fitted_full_table():
    scheme = ConfigScheme.build("full54")
    return run_injection_campaign([c.pauli for c in scheme.configs], NoiseModel.fitted())


def test_config_counts():
    assert [config_count(w) for w in range(5)] == [1, 12, 54, 108, 81]
    assert [len(configurations(w)) for w in range(5)] == [1, 12, 54, 108, 81]
    with pytest.raises(ValueError):
        config_count(5)


def test_orbits_partition_weight_two():
    orbits = weight2_orbits()
    assert sum(len(o) for o in orbits) == 54
    assert len({p for o in orbits for p in o}) == 54


@pytest.mark.parametrize("name", ["orbit", "random27", "full54"])
def test_scheme_weights(name):
    s = ConfigScheme.build(name)
    assert s.total_weight(0) == 1 and s.total_weight(1) == 12
    assert s.total_weight(2) == 54
    assert all(c.weight <= 2 for c in s.configs)


def test_random27_is_seeded():
    a, b = ConfigScheme.build("random27", 7), ConfigScheme.build("random27", 7)
    c = ConfigScheme.build("random27", 8)
    w2 = [x for x in a.configs if x.weight == 2]
    assert a == b and a != c
    assert len({x.key for x in w2}) == 27 and all(x.multiplicity == 2 for x in w2)
    with pytest.raises(ValueError):
        ConfigScheme.build("all")


def test_error_configuration():
    cfg = ErrorConfiguration("-IXYI")
    assert cfg.weight == 2 and cfg.key == "IXYI"
    with pytest.raises(ValueError):
        ErrorConfiguration("XY")
    with pytest.raises(ValueError):
        CurvePoint(0.1, 0.1, "Lc")


def test_statistical_importance_examples():
    assert statistical_importance(0, 0.0) == 1
    assert statistical_importance(PauliString("XIII"), 0.3) == pytest.approx(0.0343, abs=1e-15)
    with pytest.raises(ValueError):
        statistical_importance(1, 1.5)


@given(st.floats(0, 1))
def test_statistical_importance_normalised(p):
    total = sum(statistical_importance(w, p) * config_count(w) for w in range(5))
    assert total == pytest.approx(1, abs=1e-12)


def test_logical_error_rate_examples():
    scheme = ConfigScheme("one", (ErrorConfiguration("IIII"),))
    table = {"IIII": InjectionRow(PauliString("IIII"), 1.0, 0.1, 0.0, 0.1)}
    assert logical_error_rate(table, scheme, 0.0) == pytest.approx(0.1)
    table = {"IIII": InjectionRow(PauliString("IIII"), 1.0, 0.0, 0.0, 0.0)}
    assert logical_error_rate(table, scheme, 0.2) == 0
    table = {"IIII": InjectionRow(PauliString("IIII"), 0.0, 0.0, 0.0, 0.0)}
    with pytest.raises(ValueError):
        logical_error_rate(table, scheme, 0.0)
    with pytest.raises(KeyError):
        logical_error_rate({}, scheme, 0.0)


def test_analytic_examples():
    assert analytic_no_intrinsic(0.0) == 0
    assert analytic_no_intrinsic(0.3) == pytest.approx(0.0784 / 0.5243, abs=1e-12)
    assert analytic_no_intrinsic(0.3) == pytest.approx(0.14953, abs=1e-5)
    with pytest.raises(ValueError):
        analytic_no_intrinsic(1.0)


def test_analytic_asymptote_and_monotone():
    assert analytic_no_intrinsic(1e-6) / 1e-12 == pytest.approx(16 / 9, rel=1e-4)
    vals = [analytic_no_intrinsic(p) for p in GRID]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_oracle_coefficients():
    for which in ("a", "b"):
        c = oracle_coefficients(which)
        assert [round(c["accepted"][w], 9) for w in (0, 1, 2)] == [1, 4, 30]
        assert [round(c["failed"][w], 9) for w in (0, 1, 2)] == [0, 0, 16]
    # any-error definition counts the XaXb pairs once more
    assert round(oracle_coefficients("any")["failed"][2], 9) == 24


def test_oracle_matches_analytic():
    c = oracle_coefficients("a")
    for p in GRID:
        assert brute_force_oracle(p, "a", c) == pytest.approx(analytic_no_intrinsic(p), abs=1e-12)


@pytest.mark.parametrize("name", ["orbit", "full54"])
def test_eq5_reduces_to_analytic(ideal_full_table, name):
    scheme = ConfigScheme.build(name)
    for p in GRID:
        for which in ("a", "b"):
            got = logical_error_rate(ideal_full_table, scheme, p, which)
            assert got == pytest.approx(analytic_no_intrinsic(p), abs=1e-12)


def test_random27_delta_is_bounded(ideal_full_table):
    scheme = ConfigScheme.build("random27")
    delta = max(abs(logical_error_rate(ideal_full_table, scheme, p) - analytic_no_intrinsic(p))
                for p in GRID)
    assert delta < 0.15


def test_orbit_scheme_under_noise_close_to_full(fitted_full_table):
    full, orbit = ConfigScheme.build("full54"), ConfigScheme.build("orbit")
    delta = max(abs(logical_error_rate(fitted_full_table, full, p, w)
                    - logical_error_rate(fitted_full_table, orbit, p, w))
                for p in GRID for w in "ab")
    assert delta < 5e-3


def test_physical_baseline():
    assert physical_baseline(0) == 0.003
    # 0.003 + 0.1994
    assert physical_baseline(0.3) == pytest.approx(0.2024, abs=1e-15)
    assert physical_baseline(0.04) == pytest.approx(0.0296, abs=1e-4)
    assert physical_baseline(0.1, r=0.0, F_x=1.0) == pytest.approx(0.1 * 2 / 3)


def test_fitted_curves_properties(fitted_full_table):
    rows = error_curves(parse_grid("0:0.25:0.01"), fitted_full_table, ConfigScheme.build("orbit"))
    assert rows[0].pL_a < rows[0].pL_b
    assert all(r.pL_a < r.p_physical for r in rows)
    crossing = next(r.p for r in rows if r.pL_b < r.p_physical)
    assert abs(crossing - 0.04) <= 0.03
    last = rows[-1]
    assert last.pL_a / last.pL_b > 0.8
    assert len(last.points()) == 4


def test_curve_csv_header():
    rows = error_curves([0.0, 0.1], run_injection_campaign(
        [c.pauli for c in ConfigScheme.build("orbit").configs]), ConfigScheme.build("orbit"))
    text = curve_csv(rows)
    assert text.splitlines()[0] == "p,pL_a,pL_b,pL_analytic,p_physical"
    assert len(text.splitlines()) == 3
    with pytest.raises(ValueError):
        error_curves([], {}, ConfigScheme.build("orbit"))


def test_parse_grid():
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]
    for bad in ("", "0:1", "1:0:0.1", "0:1:0"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_restart_points_deterministic():
    a, b = restart_points(5, 3), restart_points(5, 3)
    assert len(a) == 5 and np.allclose(a[0], 0.025)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(((0 <= x) & (x <= 0.05)).all() for x in a)


def test_fit_zero_noise_targets():
    plans = table1_plans(NoiseModel.zero())[:3]
    res = fit_noise_params([(p, p.observed_distribution()) for p in plans], restarts=2)
    assert np.allclose(res.params, 0, atol=1e-4)
    assert res.objective < 1e-6


def test_fit_flags_unidentifiable_parameter():
    circ = Circuit((GateOp("H", (1,)), GateOp("RX", (2,), 0.7)))
    noise = NoiseModel.fitted()
    obs = apply_spam(measure_distribution(run(circ, noise)), noise.spam)
    with pytest.warns(RuntimeWarning, match="eps_stark"):
        res = fit_noise_params([(circ, obs)], base=noise, restarts=1)
    assert "eps_stark" in res.flat_params and res.warning_flag
    assert res.params[0] == pytest.approx(0.005, abs=1e-4)
    assert '"warnings": [' in res.report_text()


def test_fit_reports_non_convergence():
    circ = Circuit((GateOp("H", (1,)), GateOp("CNOT", (1, 2))))
    noise = NoiseModel.fitted()
    obs = apply_spam(measure_distribution(run(circ, noise)), noise.spam)
    with pytest.warns(RuntimeWarning, match="max_iter"):
        res = fit_noise_params([(circ, obs)], base=noise, restarts=1, max_iter=3)
    assert not res.converged


def test_fit_requires_targets():
    with pytest.raises(ValueError):
        fit_noise_params([])
