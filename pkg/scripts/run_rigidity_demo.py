"""Run the rigidity audit on the two built-in families and print verdicts.

The expanding sphere family passes every stage.  The eccentric family with
axes (e^t, e^2t) comes out of a point but is not a flow solution; the audit
fails its sphericity stage and cites the flow-law residual as the reason.

Usage: python scripts/run_rigidity_demo.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hyperflow import families
from hyperflow.rigidity import rigidity_audit
from hyperflow.speeds import mean_curvature


def show(label, traj, F):
    report = rigidity_audit(
        traj, F, y_inf=[0.0, 0.0], directions=16, c_schedule=(0.4, 0.2, 0.1, 0.05)
    )
    print(f"== {label}: {'PASS' if report.overall else 'FAIL'}")
    print(f"   {report.narrative}")
    taus = [row["tau"] for row in report.tau_table if row["tau"] != "never_touches"]
    print(f"   first-touch times span [{min(taus):.3f}, {max(taus):.3f}]")
    print()


def main():
    F = mean_curvature(1)
    times = -6.0 + 0.01 * np.arange(601)

    sphere = families.exponential_sphere_family(-6.0, 0.0, 0.01, n=1, resolution=256)
    show("expanding sphere family r = e^t", sphere, F)

    eccentric = families.ellipsoid_family(times, rates=(1.0, 2.0), n=1, resolution=256)
    show("eccentric family, axes (e^t, e^2t)", eccentric, F)


if __name__ == "__main__":
    main()
