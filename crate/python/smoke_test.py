"""Smoke test for the `fistrans` extension module.

Build first with `cargo build -p fistrans-py`, then run this script. The
library is looked up in target/debug unless FISTRANS_LIB points elsewhere.
"""

import importlib.machinery
import importlib.util
import math
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    default = ROOT / "target" / "debug" / "libfistrans_py.so"
    path = pathlib.Path(os.environ.get("FISTRANS_LIB", default))
    loader = importlib.machinery.ExtensionFileLoader("fistrans", str(path))
    spec = importlib.util.spec_from_file_location("fistrans", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    fistrans = load()

    assert fistrans.total([46.0, 21.0, 12.0, 21.0]) == 100.0
    assert fistrans.delta([1.0, 2.0, 3.0, 4.0], [1.0, 1.0, 1.0, 1.0]) == [0.0, 1.0, 2.0, 3.0]

    value, grad = fistrans.phi([0.0, 0.0, 0.0, 2.0], [1.0] * 4, [0.4] * 4)
    assert close(value, 2.0 + 0.4 / 3 * 8) and close(grad[3], 2.0 + 0.4 * 4)
    value, _ = fistrans.phi_asymmetric([-1.0, 0, 0, 0], [1.0] * 4, [4.0] * 4, [0.0] * 4)
    assert close(value, 2.0)
    try:
        fistrans.phi([-1.0, 0, 0, 0], [1.0] * 4, [-1.0] * 4)
    except fistrans.FistransError:
        pass
    else:
        raise AssertionError("negative curvature accepted")

    assert fistrans.rigidity_to_params(0.8) == (3.5, 1.5)
    rows = fistrans.scenario_table()
    assert [(r[0], r[1]) for r in rows] == [
        ("A", 3), ("B", 5), ("C", None), ("D", 3), ("E", None), ("F", None),
    ]
    assert all(abs(r[2] - c) <= 0.01 for r, c in zip(rows, [24.81, 1.11, -37.78, 22.67, -36.0, -132.0]))
    s = fistrans.savings(0.10, 3, 0.8, 0.05)
    assert s["breakeven"] == 3 and close(s["cumulative"][-1], 24.814814814814815, 1e-9)

    scenario = fistrans.Scenario.default()
    assert scenario.horizon == 50 and scenario.baseline == [46.0, 21.0, 12.0, 21.0]
    assert fistrans.Scenario.from_toml(scenario.to_toml()) == scenario
    report = scenario.solve()
    assert report.converged and report.max_euler_residual <= 1e-6
    assert len(report.trajectory) == 51 and len(report.effective) == 51
    frac = fistrans.gradualism_metric(report)
    assert 0.0 < frac < 1.0
    assert report.csv().startswith("t,T,W,I,F,total,phi,G_eff")

    jshape = fistrans.Scenario.from_toml((ROOT / "scenarios" / "jshape.toml").read_text())
    run = jshape.solve()
    verdict = fistrans.jshape_classify(run.effective)
    assert verdict["is_j_shaped"] and 1 <= verdict["peak_index"] <= 3
    assert run.effective[10] < run.effective[0]

    root = (-1 + math.sqrt(13)) / 6
    one = fistrans.Scenario.from_toml(
        "horizon = 1\n"
        "[transfers]\nbaseline = 0.0\ntarget = 1.0\ngamma = 0.0\neta = 3.0\n"
        "[wages]\nbaseline = 5.0\ntarget = 5.0\n"
        "[investment]\nbaseline = 5.0\ntarget = 5.0\n"
        "[operating]\nbaseline = 5.0\ntarget = 5.0\n"
    )
    assert close(one.solve(terminal_weight=0.0).trajectory[1][0], root, 1e-8)

    try:
        fistrans.Scenario.from_toml("discount = 1.2\n")
    except fistrans.FistransError as e:
        assert "discount factor out of range" in str(e)
    else:
        raise AssertionError("bad discount accepted")

    print(f"fistrans smoke test ok (gap closed in year 1: {frac:.3f})")


if __name__ == "__main__":
    sys.exit(main())
