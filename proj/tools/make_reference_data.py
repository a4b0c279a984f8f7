"""Regenerates the synthetic files under data/.

cfd_reference_samples.csv: the platform efficiency surrogate
eta(V0) = 0.73 - 0.2 * V0**-0.45 at V0 = 1..25 m/s plus Gaussian noise with
standard deviation 2.33e-3 (numpy default_rng seed 20240611), rounded to
6 decimals. These stand in for CFD samples that are not available.

propeller_default/: the blade and polar tables of the default test
propeller (3 blades, hub 0.3 m, tip 3 m, linear chord and twist, thin-airfoil
lift with quadratic drag). Test fixture only.
"""
import json
import math
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def cfd_samples():
    rng = np.random.default_rng(20240611)
    v0 = np.arange(1, 26, dtype=float)
    eta = 0.73 - 0.2 * v0 ** -0.45 + rng.normal(0.0, 2.33e-3, v0.size)
    lines = ["v0_mps,eta_p"] + [f"{v:g},{e:.6f}" for v, e in zip(v0, eta)]
    (DATA / "cfd_reference_samples.csv").write_text("\r\n".join(lines) + "\r\n")


def propeller():
    out = DATA / "propeller_default"
    out.mkdir(parents=True, exist_ok=True)
    rows = ["r_m,chord_m,pitch_deg"]
    for i in range(28):
        t = i / 27
        rows.append(f"{0.3 + t * 2.7:.10g},{0.35 + t * (0.12 - 0.35):.10g},{35 + t * (12 - 35):.10g}")
    (out / "blade.csv").write_text("\r\n".join(rows) + "\r\n")
    rows = ["alpha_deg,cl,cd"]
    for i in range(-90, 91):
        deg = 0.5 * i
        a = math.radians(deg)
        rows.append(f"{deg:g},{2 * math.pi * math.sin(a) * math.cos(a):.12g},{0.008 + 0.01 * a * a:.12g}")
    (out / "polar.csv").write_text("\r\n".join(rows) + "\r\n")
    (out / "propeller.json").write_text(json.dumps({"n_blades": 3}, indent=2) + "\n")


if __name__ == "__main__":
    cfd_samples()
    propeller()
