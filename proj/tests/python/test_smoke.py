import json
import os

import numpy as np
import pytest

import fairdef


def test_projection_examples():
    np.testing.assert_allclose(fairdef.project_simplex([1.2, -0.2, 0.0]), [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(fairdef.project_simplex([0.5, 0.5, 0.5]), [1 / 3] * 3, atol=1e-15)
    with pytest.raises(fairdef.FairdefError):
        fairdef.project_simplex([])


def test_comparator_weights():
    w = fairdef.fednolowe_weights([0.16, 0.16, 0.16, 0.36, 0.16])
    assert abs(w.sum() - 1) < 1e-12
    assert np.all(np.abs(w - [0.21, 0.21, 0.21, 0.16, 0.21]) <= 0.02)
    np.testing.assert_allclose(fairdef.fedasl_weights([0.3, 0.3, 0.3]), [1 / 3] * 3)


def test_metrics_on_hand_fixture():
    x = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [-1.0, 1.0]])
    s = np.array([1, 1, 0, 0])
    y = np.array([1, 1, 1, 1])
    theta = np.array([1.0, 0.0, 0.0])
    assert fairdef.spd(x, s, y, theta) == 0.5
    assert fairdef.eod(x, s, y, theta) == 0.5


def test_defense_on_synthetic_rows():
    x, s, y = fairdef.parse_dataset(fairdef.synthetic_csv("law_school", 2000, 5), "law_school")
    assert x.shape[0] == 2000 and np.all(x[:, -1] == 1.0)
    chunks = np.array_split(np.arange(2000), 4)
    proxies = [(x[c], s[c], y[c]) for c in chunks]
    roots = [(x[c[:40]], s[c[:40]], y[c[:40]]) for c in chunks]
    out = fairdef.run_defense(proxies, roots, nu=0.0, t_max=20)
    assert out["iterations"] == 20
    assert abs(out["weights"].sum() - 1) < 1e-12
    assert out["theta"].shape == (x.shape[1] + 1,)


def test_run_config_writes_report(tmp_path):
    data = tmp_path / "law.csv"
    data.write_text(fairdef.synthetic_csv("law_school", 3000, 9))
    ini = (
        "[dataset]\nnames = law_school\npath_law_school = law.csv\nmetrics_law_school = sp\n"
        "[scenario]\nunreliable_fracs = 0.4\nseeds = 0\nroot_frac = 0.02\n"
        "[penalty]\nt_max = 10\n"
        "[comparators]\nmethods = baseline,ours\n"
    )
    records = fairdef.run_config(ini, str(tmp_path), str(tmp_path / "out"))
    assert len(records) == 2
    parsed = [json.loads(r) for r in records]
    assert {p["method"] for p in parsed} == {"baseline", "ours"}
    assert all(p["ok"] for p in parsed)
    assert os.path.exists(tmp_path / "out" / "tables" / "summary.csv")
