import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from podar import (
    CalibrationConfig,
    GridConfig,
    InvalidInputError,
    NormalizationError,
    PodarParams,
    SignalParseError,
    SyntheticSpec,
    build_grid_scenarios,
    calibrate,
    evaluate_scene,
    generate_synthetic,
    load_signals,
    read_grid_config,
    write_grid_config,
    write_signals,
)
from podar.experiment import signals_csv

MAIN_IDS = ["O6", "O17", "O28", "O39", "O50", "O61", "O72"]


# --------------------------------------------------------------------------
# Grid


def test_default_grid(grid):
    assert len(grid) == 77
    assert [grid.obstacle_ids[i] for i in grid.main_sequence] == MAIN_IDS
    xs = grid.positions[grid.main_sequence, 0]
    np.testing.assert_array_equal(xs, [175, 150, 125, 100, 75, 50, 25])


def test_grid_scenes_share_host_and_static_obstacles(grid):
    host = grid[0].host
    for scene in grid:
        assert scene.host == host
        (obj,) = scene.objects
        assert obj.state.velocity == (0.0, 0.0)
        assert obj.geometry.is_point


def test_sub_sequence_outside_host_width(grid):
    lateral = np.abs(grid.positions[:, 1])
    gaps = lateral[lateral > 0] - 1.0
    assert gaps.min() == pytest.approx(0.2) and gaps.max() == pytest.approx(2.0)


def test_farthest_contact_time(grid):
    res = evaluate_scene(grid[grid.index_of("O6")], PodarParams(7.0, 1.0, 0.0, 0.0))
    np.testing.assert_allclose(res.distance[0], np.maximum(173.0 - 25.0 * res.times, 0.0),
                               atol=1e-9)
    first_contact = res.times[np.argmax(res.distance[0] == 0.0)]
    assert (175.0 - 2.0) / 25.0 <= first_contact < (175.0 - 2.0) / 25.0 + 0.1


def test_reflected_grid_is_relabeling(grid):
    cfg = grid.config
    mirrored = build_grid_scenarios(GridConfig(lateral=tuple(-y for y in cfg.lateral)))
    key = lambda p: (p[0], p[1])
    assert sorted(map(key, mirrored.positions)) == sorted(map(key, grid.positions))


@pytest.mark.parametrize("kwargs", [
    dict(lateral=(-3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7)),
    dict(lateral=(-5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6)),
    dict(longitudinal=(25, 50, 75)),
    dict(host_speed=0.0),
    dict(host_width=0.0),
])
def test_grid_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        GridConfig(**kwargs)


def test_grid_config_file_round_trip(tmp_path):
    cfg = GridConfig(host_speed=20.0, longitudinal=(10, 20, 30, 40, 50, 60, 70))
    write_grid_config(tmp_path / "grid.ini", cfg)
    assert read_grid_config(tmp_path / "grid.ini") == cfg


def test_grid_config_partial_file(tmp_path):
    (tmp_path / "g.ini").write_text("[grid]\nhost_speed = 22.5\n")
    assert read_grid_config(tmp_path / "g.ini") == GridConfig(host_speed=22.5)


@pytest.mark.parametrize("text", ["[grid]\nspeed = 3\n", "[other]\n", "[grid]\nhost_speed = fast\n",
                                  "not an ini file"])
def test_grid_config_bad_file(tmp_path, text):
    (tmp_path / "g.ini").write_text(text)
    with pytest.raises(SignalParseError):
        read_grid_config(tmp_path / "g.ini")


# --------------------------------------------------------------------------
# Grid-level properties

params_strategy = st.builds(PodarParams, st.sampled_from([1.0, 3.0, 5.0, 7.0]),
                            st.floats(0.1, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 6.0))


@settings(max_examples=20, deadline=None)
@given(params_strategy)
def test_mirrored_cells_equal(grid, params):
    values = {tuple(p): evaluate_scene(s, params).final_podar
              for p, s in zip(grid.positions, grid)}
    for (x, y), v in values.items():
        assert values[(x, -y)] == v


@settings(max_examples=20, deadline=None)
@given(params_strategy.filter(lambda p: p.B > 0))
def test_main_sequence_dominates_column(grid, params):
    values = np.array([evaluate_scene(s, params).final_podar for s in grid])
    for i in grid.main_sequence:
        column = grid.positions[:, 0] == grid.positions[i, 0]
        assert values[i] == values[column].max()


# --------------------------------------------------------------------------
# Signal files


def sample_signals(n_drivers=8, seed=0):
    rng = np.random.default_rng(seed)
    return {f"P{i}": rng.uniform(0, 30, 77) for i in range(1, n_drivers + 1)}


def test_load_eight_drivers(tmp_path):
    data = sample_signals()
    write_signals(tmp_path / "s.csv", data)
    back = load_signals(tmp_path / "s.csv")
    assert list(back) == list(data)
    for d in data:
        assert back[d].shape == (77,)
        np.testing.assert_array_equal(back[d], data[d])


def test_rows_may_come_in_any_order(tmp_path):
    text = signals_csv({"P1": np.arange(77.0)})
    head, *rows = text.strip().split("\n")
    (tmp_path / "s.csv").write_text("\n".join([head] + rows[::-1]) + "\n")
    np.testing.assert_array_equal(load_signals(tmp_path / "s.csv")["P1"], np.arange(77.0))


def _rows(tmp_path, body, header="driver,obstacle,signal"):
    full = {i: f"P1,{i},1.0" for i in range(1, 78)}
    lines = [header] + [full[i] for i in range(1, 78)] + body
    path = tmp_path / "s.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_empty_file(tmp_path):
    (tmp_path / "s.csv").write_text("")
    with pytest.raises(SignalParseError):
        load_signals(tmp_path / "s.csv")


def test_header_only(tmp_path):
    (tmp_path / "s.csv").write_text("driver,obstacle,signal\n")
    with pytest.raises(SignalParseError):
        load_signals(tmp_path / "s.csv")


def test_obstacle_out_of_range(tmp_path):
    path = _rows(tmp_path, ["P2,78,1.0"])
    with pytest.raises(SignalParseError, match=r"row 79: obstacle id 78"):
        load_signals(path)


@pytest.mark.parametrize("row, message", [
    ("P1,5,2.0", "duplicate"),
    ("Q1,5,2.0", "driver"),
    ("P1,x,2.0", "obstacle"),
    ("P2,5,-1", "non-negative"),
    ("P2,5,nan", "non-negative"),
    ("P2,5,abc", "signal"),
    ("P2,5", "3 fields"),
])
def test_malformed_rows(tmp_path, row, message):
    with pytest.raises(SignalParseError, match=message) as info:
        load_signals(_rows(tmp_path, [row]))
    assert info.value.row == 79


def test_missing_obstacles(tmp_path):
    path = _rows(tmp_path, ["P2,1,1.0"])
    with pytest.raises(SignalParseError, match="P2 missing"):
        load_signals(path)


def test_wrong_header(tmp_path):
    with pytest.raises(SignalParseError, match="row 1"):
        load_signals(_rows(tmp_path, [], header="who,what,value"))


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(1, 40).map(lambda i: f"P{i}"),
                       st.lists(st.floats(0, 1e6, allow_nan=False), min_size=77, max_size=77),
                       min_size=1, max_size=4))
def test_signal_round_trip(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_signals(path, data)
    back = load_signals(path)
    assert list(back) == list(data)
    for d, vals in data.items():
        assert back[d].tolist() == vals


# --------------------------------------------------------------------------
# Synthetic data


def test_noiseless_signals_proportional(grid):
    spec = SyntheticSpec(T=5, k=1.3, A=0.9, B=2.2)
    data = generate_synthetic(grid, spec)
    truth = [evaluate_scene(s, PodarParams(5, 1.3, 0.9, 2.2)).final_podar for s in grid]
    np.testing.assert_array_equal(data.clean_podar, truth)
    np.testing.assert_allclose(data.signals * data.divisor, truth, rtol=1e-15)
    assert data.signals.max() == 1.0
    assert data.k_effective == pytest.approx(1.3 / max(truth))


def test_no_spatial_attenuation_flattens_columns(grid):
    # With the speed-magnitude branch only, lateral offset cannot matter.
    data = generate_synthetic(grid, SyntheticSpec(T=7, k=1.0, A=0.5, B=0.0), alpha=0.0)
    for x in np.unique(grid.positions[:, 0]):
        column = data.signals[grid.positions[:, 0] == x]
        np.testing.assert_allclose(column, column[0], rtol=1e-12)


def test_no_spatial_attenuation_nearly_flat_with_projection(grid):
    # The projected term still sees the approach angle, about 1% at most.
    data = generate_synthetic(grid, SyntheticSpec(T=7, k=1.0, A=0.5, B=0.0))
    for x in np.unique(grid.positions[:, 0]):
        column = data.signals[grid.positions[:, 0] == x]
        assert column.max() == column[grid.config.lateral.index(0.0)]
        np.testing.assert_allclose(column, column.max(), rtol=0.011)


def test_strong_temporal_attenuation_singles_out_nearest(grid):
    data = generate_synthetic(grid, SyntheticSpec(T=7, k=1.0, A=8.0, B=4.0))
    nearest = grid.index_of("O72")
    assert data.signals[nearest] == 1.0
    others = np.delete(data.signals, nearest)
    assert others.max() < 0.5
    farther_main = [i for i in grid.main_sequence if i != nearest]
    assert data.signals[farther_main].max() < 1e-3


def test_noise_is_seeded(grid):
    a = generate_synthetic(grid, SyntheticSpec(T=4, k=1, A=1, B=2, sigma=0.02, seed=3))
    b = generate_synthetic(grid, SyntheticSpec(T=4, k=1, A=1, B=2, sigma=0.02, seed=3))
    c = generate_synthetic(grid, SyntheticSpec(T=4, k=1, A=1, B=2, sigma=0.02, seed=4))
    np.testing.assert_array_equal(a.signals, b.signals)
    assert not np.array_equal(a.signals, c.signals)
    assert a.signals.min() >= 0.0 and a.signals.max() == 1.0


def test_zero_risk_spec_rejected(grid):
    with pytest.raises(NormalizationError):
        generate_synthetic(grid, SyntheticSpec(T=3, k=0.0, A=1, B=1))


@pytest.mark.parametrize("kwargs", [dict(sigma=-0.1), dict(sigma=math.inf), dict(A=-1.0),
                                    dict(T=0.0)])
def test_synthetic_spec_validation(kwargs):
    base = dict(T=4, k=1, A=1, B=2)
    base.update(kwargs)
    with pytest.raises(InvalidInputError):
        SyntheticSpec(**base)


def test_noiseless_recovery_over_parameter_span(grid):
    rng = np.random.default_rng(42)
    for _ in range(4):
        T = int(rng.integers(3, 8))
        spec = SyntheticSpec(T, rng.uniform(0.5, 2), rng.uniform(0.3, 1.5), rng.uniform(0.8, 4))
        data = generate_synthetic(grid, spec)
        fit = calibrate(data.signals, grid, T, CalibrationConfig())
        assert fit.k == pytest.approx(data.k_effective, rel=0.02)
        assert fit.A == pytest.approx(spec.A, rel=0.02)
        assert fit.B == pytest.approx(spec.B, rel=0.02)
