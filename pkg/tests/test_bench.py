import random
import time
from fractions import Fraction as Fr

import pytest

from discsched import bench
from discsched.bench import (
    BenchConfig,
    SizeCell,
    TimingCell,
    bench_sizes,
    bench_timing,
    emit_report,
    env_timeout,
    gen_random_kripke,
    report_tables,
    run_isolated,
)


def _sleeper(conn, seconds):
    time.sleep(seconds)
    conn.send("done")


class TestGenerator:
    def test_follows_the_documented_draws(self):
        rng = random.Random(42)
        degrees, targets = [], []
        for _ in range(6):
            d = rng.randint(1, 3)
            degrees.append(d)
            targets.append({f"s{rng.randrange(6)}" for _ in range(d)})
        labels = [{p for p in ("p1", "p2") if rng.random() < 0.5} for _ in range(6)]
        K = gen_random_kripke(6, 3, 42)
        assert K.states == tuple(f"s{i}" for i in range(6))
        for i in range(6):
            assert set(K.edges[f"s{i}"]) == targets[i]
            assert K.labels[f"s{i}"] == frozenset(labels[i])

    def test_deterministic(self):
        a, b = gen_random_kripke(30, 3, 5), gen_random_kripke(30, 3, 5)
        assert a.edges == b.edges and a.labels == b.labels
        assert gen_random_kripke(30, 3, 6).edges != a.edges

    @pytest.mark.parametrize("n, deg", [(1, 1), (10, 1), (50, 4)])
    def test_left_total_and_degree_bounded(self, n, deg):
        K = gen_random_kripke(n, deg, 0)
        assert K.n_states == n
        assert all(1 <= len(K.edges[s]) <= deg for s in K.states)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gen_random_kripke(0, 2, 0)


class TestConfig:
    def test_timeout_env(self, monkeypatch):
        monkeypatch.delenv(bench.TIMEOUT_ENV, raising=False)
        assert env_timeout() == bench.DEFAULT_TIMEOUT
        monkeypatch.setenv(bench.TIMEOUT_ENV, "7.5")
        assert env_timeout() == 7.5
        monkeypatch.setenv(bench.TIMEOUT_ENV, "-1")
        with pytest.raises(ValueError):
            env_timeout()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"formulas": (), "eps": (Fr(1, 2),)},
            {"formulas": ("p",), "eps": (Fr(2),)},
            {"formulas": ("p",), "eps": (Fr(1, 2),), "instances": 0},
            {"formulas": ("p",), "eps": (Fr(1, 2),), "sizes": (0,)},
            {"formulas": ("p",), "eps": (Fr(1, 2),), "timeout": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            BenchConfig(**kwargs)


class TestIsolation:
    def test_result_comes_back(self):
        assert run_isolated(_sleeper, (0,), 30) == "done"

    def test_timeout_gives_none(self):
        assert run_isolated(_sleeper, (30,), 0.5) is None

    def test_size_cells(self):
        cfg = BenchConfig(("F{1/2} p1",), (Fr(1, 10), Fr(1, 50)), timeout=60)
        cells = bench_sizes(cfg)
        assert [(c.alternating, c.nondeterministic) for c in cells] == [(5, 10), (7, 14)]
        assert all(c.status == "ok" and c.seconds >= 0 for c in cells)

    def test_timeout_cell(self):
        cfg = BenchConfig(("F{1/2} p1",), (Fr(1, 10),), timeout=0.001)
        assert bench_sizes(cfg)[0].status == "timeout"

    def test_timing_cells(self):
        cfg = BenchConfig(("F{1/2} p1",), (Fr(1, 10),), sizes=(5,), degrees=(2,), instances=2, timeout=60)
        (cell,) = bench_timing(cfg)
        assert cell.status == "ok" and len(cell.values) == 2
        assert cell.mean_seconds >= 0 and cell.mean_mb > 0


class TestReports:
    def test_empty(self):
        csv_text, md = emit_report([])
        assert csv_text == "formula\n"
        assert md == "| formula |\n|---|\n"

    def test_one_formula_two_margins(self, tmp_path):
        cells = [
            SizeCell("F{1/2} p1", Fr(1, 10), 5, 10, 0.1),
            SizeCell("F{1/2} p1", Fr(1, 50), None, None, None, "timeout"),
        ]
        prefix = str(tmp_path / "out")
        csv_text, md = emit_report(cells, prefix)
        assert csv_text.splitlines() == [
            "formula,|A| eps=1/10,|A^na| eps=1/10,|A| eps=1/50,|A^na| eps=1/50",
            "F{1/2} p1,5,10,timeout,timeout",
        ]
        assert md.splitlines()[2] == "| F{1/2} p1 | 5 | 10 | timeout | timeout |"
        assert "\\|A\\| eps=1/10" in md.splitlines()[0]
        assert open(prefix + ".csv").read() == csv_text
        assert open(prefix + ".md").read() == md

    def test_timing_table(self):
        cell = TimingCell("p", Fr(1, 10), 100, 3, 1, 0.5, 12.0)
        header, rows = report_tables([cell])
        assert header == ["formula", "eps", "time(s) n=100 deg=3", "space(MB) n=100 deg=3"]
        assert rows == [["p", "1/10", "0.5000", "12.0"]]

    def test_mixed_results_rejected(self):
        with pytest.raises(TypeError):
            report_tables([SizeCell("p", Fr(1, 2), 1, 1, 0.0), TimingCell("p", Fr(1, 2), 1, 1, 1, 0.0, 0.0)])
