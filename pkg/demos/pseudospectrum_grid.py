"""Write sigma_min(Q_s) for a non-normal operator over a slice half plane as CSV.

Usage: python demos/pseudospectrum_grid.py [out.csv]
"""

import sys

import numpy as np

from cliffspec.clifford_module import CliffordOperator, operator_norm
from cliffspec.s_spectrum import resolvent_grid, s_spectrum


def main(path: str = "pseudospectrum.csv") -> None:
    rng = np.random.default_rng(3)
    t = CliffordOperator.random(2, 2, rng)
    t = t.scale(1.0 / operator_norm(t))
    rows = resolvent_grid(t, (-1.1, 1.1), (0.0, 1.1), 60)
    np.savetxt(path, rows, delimiter=",", header="u,v,sigma_min,resolvent_norm", comments="")
    best = rows[np.argsort(rows[:, 2])[:5]]
    print(f"wrote {len(rows)} rows to {path}")
    print("spectrum:", [(round(p.u, 4), round(p.v, 4)) for p in s_spectrum(t).points])
    print("smallest grid values:", [(round(float(u), 3), round(float(v), 3), f"{s:.1e}") for u, v, s, _ in best])


if __name__ == "__main__":
    main(*sys.argv[1:2])
