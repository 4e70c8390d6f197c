import csv
import json
import math
from pathlib import Path

import pytest

import ribound

DATA = Path(__file__).resolve().parents[2] / "data"


def load_example16():
    with open(DATA / "example16.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    w = [int(r["w"]) for r in rows]
    y = [float(r["y"]) for r in rows]
    tau = [float(r["tau_bound"]) for r in rows]
    return w, y, tau


def test_version():
    assert ribound.__version__ == "0.1.0"


def test_exact_counts():
    w, y, tau = load_example16()
    assert ribound.p_value(w, y)["count"] == 522
    assert ribound.p_value(w, y, null=-1.0)["count"] == 27
    res = ribound.p_value(w, y, null=tau)
    assert (res["count"], res["total"]) == (349, 12870)
    assert res["exact"]


def test_imputation_variants():
    w, y, tau = load_example16()
    assert ribound.p_value(w, y, null=tau, variant="control-baseline")["count"] == 451
    assert ribound.p_value(w, y, null=tau, variant="treated-baseline")["count"] == 327


def test_monte_carlo_is_reproducible():
    w, y, _ = load_example16()
    a = ribound.p_value(w, y, mode="mc", draws=2000, seed=5, threads=1)
    b = ribound.p_value(w, y, mode="mc", draws=2000, seed=5, threads=2)
    assert a == b
    assert a["total"] == 2000 and not a["exact"]


def test_bounded_and_ci():
    w, y, _ = load_example16()
    res = ribound.test_bounded(w, y, null=0.0, alpha=0.05)
    assert res["rejected"]
    with pytest.raises(ribound.RiboundError, match="NonEIStatistic"):
        ribound.test_bounded(w, y, statistic="welch-t")
    ci = ribound.confidence_bound(w, y, statistic="stephenson:3", alpha=0.1)
    assert math.isfinite(ci["bound"]) and math.isinf(ci["outer"])
    assert ci["bisection"]


def test_paired_blocks():
    w = [1, 0] * 4
    y = [62, 41, 18, 27, 55, 49, 33, 35]
    blocks = [f"b{i // 2}" for i in range(8)]
    res = ribound.test_simultaneous(w, y, statistic="rank-sum", blocks=blocks)
    assert res["p_up"]["total"] == 16
    assert res["p_iu"] == max(res["p_up"]["p"], res["p_down"]["p"])


def test_statistic_value():
    assert ribound.statistic_value("diff-means", [1, 1, 0, 0], [3.0, 5.0, 1.0, 1.0]) == 3.0


def test_cli_roundtrip():
    code, out, err = ribound.run_cli(["test", "--input", str(DATA / "example16.csv"), "--null", "0"])
    assert code == 0, err
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["command"] == "test"
    code, _, err = ribound.run_cli(["test", "--input", str(DATA / "missing.csv")])
    assert code == 3
    assert "FileNotFound" in err
