import csv

import numpy as np
import pytest


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def artifact_dir(tmp_path):
    """One synthetic artifact of every kind the toolkit CLI writes."""
    s = np.linspace(0.003, 0.027, 5)
    write_csv(tmp_path / "sdi_curve.csv", ("s", "I_s", "G_s", "residual"),
              [(si, -1e-4 * si / 0.03, 0.98 * si, 1e-12) for si in s])

    terms = 0.5 ** np.arange(30)
    write_csv(tmp_path / "orbit.csv", ("n", "s_n"),
              list(enumerate(0.02 * terms)))

    delta = np.geomspace(1e-6, 1e-2, 25)
    write_csv(tmp_path / "dimension.csv", ("delta", "measure"),
              [(d, 3.0 * d**0.5) for d in delta])

    t = np.linspace(0.0, 6.0, 200)
    write_csv(tmp_path / "trajectory.csv", ("t", "x", "y"),
              [(ti, np.cos(ti), np.sin(ti) - 0.2) for ti in t])
    write_csv(tmp_path / "crossings.csv", ("t", "x", "y", "s"),
              [(1.0, 0.0, -0.02, 0.02), (4.1, 0.0, -0.018, 0.022)])

    write_csv(
        tmp_path / "sweep.csv",
        ("lamt", "count", "s_star", "multiplier", "classification"),
        [
            (2.6e-4, 1, "", "", ""),
            (2.9e-4, 0, "", "", ""),
            (2.75e-4, 1, "", "", ""),
            (2.7657e-4, "", 0.02375, 0.9467, "hyperbolicAttracting"),
        ],
    )
    return tmp_path
