import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exactla.bench import config
from exactla.bench.config import MethodTable, parse_config, read_config, write_config
from exactla.bench.plot import (
    OutputKind,
    PlotData,
    PlotStyle,
    dumps_csv,
    gnuplot_script,
    loads_csv,
    plot_emit,
    read_csv,
)
from exactla.bench.regression import RegressionBaseline, Status, regression_check
from exactla.bench.timing import time_op
from exactla.bench.tuning import (
    LOG2_7,
    DegenerateFitError,
    TuningError,
    fit_curve,
    select_method,
    tune_threshold,
)
from exactla import PrimeField
from exactla.matmul import Method, MulHelper, mul

GRID = [2**i for i in range(3, 13)]


def meta(**kw):
    base = {"op": "mul", "field": "zp:65537", "machine": "box", "timestamp": "2024-01-01T00:00:00"}
    base.update(kw)
    return base


# timing

def test_time_op_counts():
    calls = []
    stats = time_op(lambda: calls.append(1), repetitions=5, warmup=2)
    assert len(stats.samples) == 5 and len(calls) == 7
    one = time_op(lambda: None, repetitions=1, warmup=0)
    assert one.min == one.median == one.samples[0]
    with pytest.raises(ValueError):
        time_op(lambda: None, repetitions=0)


def test_time_op_known_duration():
    stats = time_op(lambda: time.sleep(0.01), repetitions=3, warmup=0)
    assert stats.min >= 0.0095
    assert stats.median < 0.5  # generous: only guards against gross clock errors


# plot / CSV

def test_single_point_csv():
    data = PlotData()
    data.add("base", 4, [0.001])
    assert dumps_csv(data) == 'series,n,sample_idx,seconds\n"base",4,0,0.001\n'


def test_metadata_order_and_round_trip(tmp_path):
    data = PlotData(metadata={"zeta": "1", "timestamp": "t", "op": "mul", "machine": "m", "field": "f"})
    data.add("a", 8, [0.5, 0.25])
    data.add("a", 16, [1e-9])
    text = dumps_csv(data)
    assert text.splitlines()[:5] == ["# op=mul", "# field=f", "# machine=m", "# timestamp=t", "# zeta=1"]
    plot_emit(data, PlotStyle(), tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text() == text
    assert read_csv(tmp_path / "d.csv") == data


def test_plot_data_invariants():
    data = PlotData()
    data.add("a", 8, [1.0])
    with pytest.raises(ValueError):
        data.add("a", 8, [1.0])
    with pytest.raises(ValueError):
        data.add("b", 8, [])
    with pytest.raises(ValueError):
        data.add("bad\nname", 8, [1.0])
    with pytest.raises(ValueError):
        loads_csv("series,n,sample_idx,seconds\n\"a\",4,1,0.1\n")
    with pytest.raises(ValueError):
        loads_csv("nonsense\n")


def test_gnuplot_script_names_each_series_once(tmp_path):
    data = PlotData(metadata=meta())
    for name in ("base", "auto", "winograd"):
        data.add(name, 8, [0.1])
    written = plot_emit(data, PlotStyle(OutputKind.GNUPLOT, logx=True), tmp_path / "x.csv")
    script = (tmp_path / "x.gp").read_text()
    assert written == [str(tmp_path / "x.csv"), str(tmp_path / "x.gp")]
    for name in ("base", "auto", "winograd"):
        assert script.count(f'title "{name}"') == 1
    assert '"x.csv"' in script and "set logscale x" in script
    assert gnuplot_script(data, PlotStyle("gnuplot"), "x.csv") == gnuplot_script(data, PlotStyle("gnuplot"), "x.csv")


def test_plot_emit_unwritable_path(tmp_path):
    data = PlotData()
    data.add("a", 1, [1.0])
    with pytest.raises(OSError):
        plot_emit(data, PlotStyle(), tmp_path / "missing" / "x.csv")


@settings(max_examples=60)
@given(st.dictionaries(
    st.text(st.characters(blacklist_characters="\n\r\x00"), min_size=1, max_size=8),
    st.lists(st.lists(st.floats(min_value=0, max_value=1e6, allow_nan=False), min_size=1, max_size=4),
             min_size=1, max_size=4),
    min_size=1, max_size=3,
))
def test_csv_round_trip_property(series):
    data = PlotData(metadata=meta())
    for name, points in series.items():
        for i, samples in enumerate(points):
            data.add(name, 2**i, samples)
    text = dumps_csv(data)
    back = loads_csv(text)
    assert back == data and dumps_csv(back) == text


# regression

def _timings(medians, machine="box"):
    data = PlotData(metadata=meta(machine=machine))
    for n, t in medians.items():
        data.add("base", n, [t])
    return data


def test_regression_examples():
    base = RegressionBaseline(_timings({64: 1.0}))
    r = regression_check(_timings({64: 1.5}), base, 0.2)
    assert r.status is Status.FAIL and r.entries[0].ratio == pytest.approx(1.5)
    assert regression_check(_timings({64: 1.1}), base, 0.2).status is Status.PASS
    r = regression_check(_timings({64: 1.0}, machine="other"), base, 0.2)
    assert r.status is Status.INDETERMINATE and not r.comparable


def test_regression_requires_common_keys():
    base = RegressionBaseline(_timings({64: 1.0}))
    with pytest.raises(ValueError):
        regression_check(_timings({128: 1.0}), base)
    other_op = PlotData(metadata=meta(op="spmv"))
    other_op.add("base", 64, [1.0])
    with pytest.raises(ValueError):
        regression_check(other_op, base)


def test_regression_uses_medians(tmp_path):
    (tmp_path / "b.csv").write_text(dumps_csv(_timings({64: 1.0})))
    base = RegressionBaseline.load(tmp_path / "b.csv", rel_tol=0.1)
    cur = PlotData(metadata=meta())
    cur.add("base", 64, [9.0, 1.05, 1.0])
    assert regression_check(cur, base).status is Status.PASS


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0, 5), st.floats(0, 1))
def test_regression_is_monotone(b, c, bump, tol):
    base = RegressionBaseline(_timings({64: b}))
    before = regression_check(_timings({64: c}), base, tol).status
    after = regression_check(_timings({64: c + bump}), base, tol).status
    assert not (before is Status.FAIL and after is Status.PASS)


# tuning

def f_base(n):
    return 2.0 * n**3


def g_rec(n):
    return 1000.0 * n**2 + n**LOG2_7


def test_noiseless_crossover():
    r = tune_threshold([(n, [f_base(n)]) for n in GRID], [(n, [g_rec(n)]) for n in GRID])
    assert 580 < r.crossover < 592
    assert r.threshold == 512
    assert max(abs(v) for v in r.residuals["base"]) < 1e-9
    assert r.method_table.boundaries() == [1024]


def test_no_crossing_and_ties():
    base = [(n, [f_base(n)]) for n in GRID]
    assert tune_threshold(base, [(n, [2 * f_base(n)]) for n in GRID]).threshold == GRID[-1]
    assert tune_threshold(base, [(n, [0.5 * f_base(n)]) for n in GRID]).threshold == GRID[0]
    assert tune_threshold(base, base).threshold == GRID[0]


def test_tuning_errors():
    short = [(n, [1.0]) for n in GRID[:3]]
    with pytest.raises(TuningError):
        tune_threshold(short, short)
    with pytest.raises(TuningError):
        tune_threshold([(n, [1.0]) for n in GRID], [(n, [1.0]) for n in GRID[1:]])
    with pytest.raises(DegenerateFitError, match="recursive"):
        tune_threshold([(n, [f_base(n)]) for n in GRID], [(n, [0.0]) for n in GRID])
    with pytest.raises(DegenerateFitError, match="base"):
        fit_curve([0, 0, 0, 0], [1, 1, 1, 1], (3.0, 2.0), "base")


@pytest.mark.parametrize("seed", range(5))
def test_noise_and_outlier_robustness(seed):
    rng = np.random.default_rng(seed)
    base = [f_base(n) * rng.uniform(0.9, 1.1) for n in GRID]
    rec = [g_rec(n) * rng.uniform(0.9, 1.1) for n in GRID]
    base[int(rng.integers(len(GRID)))] *= 10
    r = tune_threshold(list(zip(GRID, base)), list(zip(GRID, rec)))
    assert abs(GRID.index(r.threshold) - GRID.index(512)) <= 2


def test_tuning_is_deterministic():
    rng = np.random.default_rng(9)
    base = [(n, list(f_base(n) * rng.uniform(0.8, 1.2, size=3))) for n in GRID]
    rec = [(n, list(g_rec(n) * rng.uniform(0.8, 1.2, size=3))) for n in GRID]
    a, b = tune_threshold(base, rec), tune_threshold(base, rec)
    assert a.threshold == b.threshold and a.crossover == b.crossover


def _synthetic_runner(costs):
    def run(candidate, sizes, classes):
        data = PlotData(metadata=meta())
        for cls in classes:
            for n in sizes:
                data.add(cls, n, [costs[candidate](n)])
        return data
    return run


def test_select_method_single_candidate():
    sel = select_method("mul", ["base"], [8, 16, 32], _synthetic_runner({"base": float}))
    table = sel.tables["dense"]
    assert all(table.lookup(n) == "base" for n in range(1, 100))


def test_select_method_boundary_near_100():
    grid = [16, 32, 64, 96, 128, 256]
    costs = {"A": lambda n: 100.0 * n, "B": lambda n: n * n}
    sel = select_method("mul", ["A", "B"], grid, _synthetic_runner(costs))
    table = sel.tables["dense"]
    assert table.boundaries() == [128]
    assert table.lookup(10) == "B" and table.lookup(1000) == "A"
    assert table.lookup(80) == "B" and table.lookup(120) == "A"
    assert sel.config_values() == {"mul.methods.dense": table.dumps()}


def test_select_method_excludes_failures():
    def runner(candidate, sizes, classes):
        if candidate == "broken":
            raise RuntimeError("no such kernel")
        return _synthetic_runner({"ok": float})(candidate, sizes, classes)

    with pytest.warns(RuntimeWarning, match="broken"):
        sel = select_method("mul", ["broken", "ok"], [4, 8], runner)
    assert "broken" in sel.excluded and sel.tables["dense"].winners == ["ok", "ok"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(TuningError):
            select_method("mul", ["broken"], [4, 8], runner)
    with pytest.raises(TuningError):
        select_method("mul", [], [4], runner)


def test_forced_method_ignores_table():
    config.set_tuned_config({"mul.methods.dense": "2:winograd,64:winograd"})
    F = PrimeField(101)
    A = np.ones((32, 32), dtype=np.int64)
    H = MulHelper(Method.BASE)
    mul(F, A, A, H)
    assert H.counters.winograd_steps == 0 and H.counters.base_cases == 1


# config

def test_config_file_round_trip(tmp_path, monkeypatch):
    path = tmp_path / "xla.conf"
    write_config({"mul.threshold": 96, "spmv.hyb_min_pm1_fraction": 0.25}, path)
    assert path.read_text() == "mul.threshold = 96\nspmv.hyb_min_pm1_fraction = 0.25\n"
    write_config({"mul.threshold": 128}, path)
    assert read_config(path) == {"mul.threshold": "128", "spmv.hyb_min_pm1_fraction": "0.25"}
    monkeypatch.setenv(config.CONFIG_ENV, str(path))
    config.set_tuned_config(None)
    assert config.tuned_config()["mul.threshold"] == "128"
    assert read_config(tmp_path / "absent") == {}
    with pytest.raises(ValueError, match="line 2"):
        parse_config("# ok\nbogus line\n")


def test_method_table_lookup_and_text():
    t = MethodTable([8, 32, 128], ["base", "base", "winograd"])
    assert [t.lookup(n) for n in (1, 8, 20, 21, 80, 81, 5000)] == \
        ["base", "base", "base", "base", "base", "winograd", "winograd"]
    assert MethodTable.loads(t.dumps()) == t
    with pytest.raises(LookupError):
        MethodTable().lookup(4)
