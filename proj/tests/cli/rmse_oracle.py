"""Recompute ARI and RMSE of a select run from its output files alone."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline
from sklearn.metrics import adjusted_rand_score


def run(*args):
    subprocess.run([str(a) for a in args], check=True, stdout=subprocess.DEVNULL)


def main(binary, workdir):
    work = Path(workdir)
    run(binary, "simulate", "--scenario", "custom", "--group-sizes", "10,10,10", "--m", "12",
        "--sigma", "0.3", "--seed", "5", "--out", work)
    run(binary, "select", "--data", work / "data.csv", "--out", work / "res", "--P-grid", "2",
        "--tau-grid", "0.002,0.01,0.05", "--jobs", "1")
    run(binary, "evaluate", "--result", work / "res" / "result.json", "--truth", work / "truth.json",
        "--out", work / "summary.csv")

    result = json.loads((work / "res" / "result.json").read_text())
    truth = json.loads((work / "truth.json").read_text())

    basis = result["basis"]
    knots = np.array(basis["knots"])
    degree = basis["degree"]
    transform = np.array(basis["transform"])
    times = np.array(truth["times"])
    q = len(knots) - degree - 1
    raw = np.column_stack([BSpline(knots, np.eye(q)[j], degree)(times) for j in range(q)])
    curves = raw @ transform @ np.array(result["group_beta"]).T  # times x K

    ids = sorted(truth["partition"])
    total = 0.0
    for cid in ids:
        fitted = curves[:, result["partition"][cid] - 1]
        expected = np.array(truth["group_means"][truth["partition"][cid] - 1])
        total += np.sum((fitted - expected) ** 2)
    rmse = np.sqrt(total / len(ids))
    ari = adjusted_rand_score([truth["partition"][c] for c in ids], [result["partition"][c] for c in ids])

    rows = [line for line in (work / "summary.csv").read_text().splitlines() if not line.startswith("#")]
    header = rows[0].split(",")
    summary = dict(zip(header, rows[1].split(",")))

    checks = {
        "rmse vs result": abs(rmse - result["evaluation"]["RMSE"]) <= 1e-9 * max(1.0, rmse),
        "rmse vs summary": abs(rmse - float(summary["RMSE_mean"])) <= 1e-9 * max(1.0, rmse),
        "ari vs result": abs(ari - result["evaluation"]["ARI"]) <= 1e-12,
        "ari vs summary": abs(ari - float(summary["ARI_mean"])) <= 1e-12,
    }
    for name, ok in checks.items():
        print(f"{name}: {'ok' if ok else 'MISMATCH'}")
    print(f"rmse={rmse!r} reported={result['evaluation']['RMSE']!r} ari={ari!r}")
    return 0 if all(checks.values()) else 1


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        sys.exit(main(sys.argv[1], tmp))
