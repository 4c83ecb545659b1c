import csv
import json
import math

import pytest

from steinpp.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestBoundCommand:
    def test_exponential_total(self, capsys):
        code, out = run(["bound", "--law", "exponential", "--n", "100"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["total"] == pytest.approx((math.log(100) + 1) / 100)
        assert payload["schema"] == 1

    def test_csv_rows_carry_refs(self, capsys):
        code, out = run(["bound", "--law", "cauchy", "--n", "50",
                         "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert rows[-1]["term"] == "total"
        assert all(r["ref"] for r in rows[:-1])

    def test_arch_gate_pass_at_fifty(self, capsys):
        code, out = run(["bound", "--arch", "4", "--theta", "1.5", "--n", "50",
                         "--s", "sqrtlog"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert set(payload["terms"]) == {"count_poisson", "intensity_swap"}

    def test_arch_gate_violation_exit_code(self, capsys):
        code = main(["bound", "--arch", "4", "--theta", "1.5", "--n", "5",
                     "--s", "sqrtlog"])
        assert code == 4

    def test_mogeo_ledger(self, capsys):
        code, out = run(["bound", "--mogeo", "--gamma", "1", "--delta", "1",
                         "--p11", "0.01", "--n", "100", "--u", "-1"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert "stage1_lattice_dtv" in payload["terms"]
        assert payload["meta"]["corollary_total"] >= payload["total"]

    def test_stage_validity_exit_code(self, capsys):
        code = main(["bound", "--law", "normal", "--stage", "b", "--n", "10"])
        assert code == 4

    def test_config_error_exit_code(self, capsys):
        code = main(["bound", "--n", "100"])
        assert code == 3

    def test_reruns_byte_identical(self, capsys):
        argv = ["bound", "--law", "geometric", "--q", "0.5", "--n", "200",
                "--stage", "c", "--format", "csv"]
        _, first = run(argv, capsys)
        _, second = run(argv, capsys)
        assert first == second


class TestTableCommand:
    def test_arch_constants_match_published(self, capsys):
        code, out = run(["table", "--which", "arch-constants",
                         "--theta", "1.5", "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        expected_k = {"4": 16.2, "6": 186.0, "12": 28.4, "14": 24.3,
                      "15": 9.0, "21": 10.8}
        expected_r0 = {"4": "0.250", "6": "0.851", "12": "0.133",
                       "14": "0.158", "15": "0.578", "21": "0.738"}
        for row in rows:
            assert abs(float(row["K"]) - expected_k[row["family"]]) <= 0.5
            assert row["r0"] == expected_r0[row["family"]]
            assert float(row["K_abs_diff"]) <= 0.5

    def test_tail_dependence_closed_forms(self, capsys):
        code, out = run(["table", "--which", "tail-dependence"], capsys)
        assert code == 0
        rows = {r["copula"]: r for r in csv.DictReader(out.splitlines())}
        assert rows["countermonotonic"]["lambda_lower"] == "undefined"
        assert float(rows["gumbel(theta=2)"]["lambda_upper"]) == pytest.approx(
            2 - math.sqrt(2))
        assert float(rows["clayton(theta=2)"]["lambda_lower"]) == pytest.approx(
            2 ** -0.5)
        assert float(rows["marshall-olkin(0.35,0.75)"]["lambda_upper"]) == 0.35


class TestSimulateCommand:
    def test_copula_sample_rows(self, capsys):
        code, out = run(["simulate", "--kind", "copula", "--copula", "gumbel",
                         "--theta", "2", "--count", "40", "--seed", "3"], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 40
        assert all(0 <= float(r["u"]) <= 1 for r in rows)

    def test_seed_required(self, capsys, monkeypatch):
        monkeypatch.delenv("STEINPP_SEED", raising=False)
        code = main(["simulate", "--kind", "copula", "--copula", "gumbel",
                     "--count", "5"])
        assert code == 3

    def test_env_seed_flag_wins(self, capsys, monkeypatch):
        monkeypatch.setenv("STEINPP_SEED", "1")
        _, with_env = run(["simulate", "--kind", "mo-exp", "--count", "5"], capsys)
        _, with_flag = run(["simulate", "--kind", "mo-exp", "--count", "5",
                            "--seed", "1"], capsys)
        assert with_env == with_flag

    def test_mppe_count_scale(self, capsys):
        # u* = -log log n gives about log n exceedances
        n = 1000
        u = -math.log(math.log(n))
        code, out = run(["simulate", "--kind", "mppe", "--law", "exponential",
                         "--n", str(n), "--u", str(u), "--seed", "5"], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert 2 <= len(rows) <= 4 * math.log(n)

    def test_immdeath_count_histogram(self, capsys):
        code, out = run(["simulate", "--kind", "immdeath-counts", "--lam", "2",
                         "--horizon", "12", "--reps", "20000", "--seed", "5"],
                        capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        props = {int(r["count"]): float(r["proportion"]) for r in rows}
        assert abs(sum(props.values()) - 1.0) < 1e-12
        # at the long horizon the law is close to Poisson(2)
        assert abs(props[0] - math.exp(-2.0)) < 0.01
        assert abs(props[2] - 2.0 * math.exp(-2.0)) < 0.01

    def test_immdeath_event_format(self, capsys):
        code, out = run(["simulate", "--kind", "immdeath", "--lam", "2.0",
                         "--horizon", "4.0", "--seed", "8"], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert rows and set(rows[0]) == {"time", "event", "x"}
        assert all(r["event"] in ("birth", "death") for r in rows)

    def test_simulation_determinism(self, capsys):
        argv = ["simulate", "--kind", "mo-geo", "--gamma", "1", "--delta", "1",
                "--p11", "0.05", "--count", "50", "--seed", "11"]
        _, a = run(argv, capsys)
        _, b = run(argv, capsys)
        assert a == b

    def test_plot_writes_png(self, tmp_path, capsys):
        out = tmp_path / "sample.csv"
        code = main(["simulate", "--kind", "copula", "--copula", "mo",
                     "--count", "200", "--seed", "2", "--out", str(out),
                     "--plot"])
        assert code == 0
        assert out.exists()
        png = tmp_path / "sample.png"
        assert png.exists() and png.stat().st_size > 500


class TestVerifyCommand:
    def test_binpoi_passes(self, capsys):
        code, out = run(["verify", "--target", "binpoi"], capsys)
        assert code == 0
        assert "FAIL" not in out and "PASS" in out

    def test_immdeath_small(self, capsys):
        code, out = run(["verify", "--target", "immdeath", "--lam", "2.0",
                         "--reps", "20000", "--seed", "4"], capsys)
        assert code == 0
        assert out.count("PASS") == 4
