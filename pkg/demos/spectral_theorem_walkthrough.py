"""Walk a random normal operator through decomposition, spectral theorem and calculus.

Usage: python demos/spectral_theorem_walkthrough.py [n] [m] [seed]
"""

import sys

import numpy as np

from cliffspec.bounded_transform import bounded_transform, inverse_transform, unbounded_path_spectral_theorem
from cliffspec.clifford_module import diff_norm, operator_norm
from cliffspec.decompositions import additive_decomposition, check_decomposition
from cliffspec.functional_calculus import (
    borel_calculus,
    calculus_laws,
    random_normal_operator,
    spectral_mapping,
    spectral_theorem_normal,
)
from cliffspec.s_spectrum import s_spectrum


def main(n: int = 2, m: int = 2, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    t = random_normal_operator(n, m, rng)
    print(f"T: n={n}, m={m}, real size {t.size}, ||T|| = {operator_norm(t):.6f}")

    spec = s_spectrum(t)
    print("S-spectrum in the upper half plane:")
    for p, mult in zip(spec.points, spec.multiplicities):
        print(f"  ({p.u:+.6f}, {p.v:.6f})  multiplicity {mult}")

    dec = additive_decomposition(t, rng=rng)
    checks = check_decomposition(dec, t)
    print(f"T = A + J B: residual {checks['residual']:.2e}, J imaginary {checks['J_imaginary']}")

    e, j = spectral_theorem_normal(t, rng=rng)
    recon = diff_norm(t, borel_calculus(e, j, lambda z: z).operator)
    print(f"spectral measure: {len(e)} atoms, reconstruction error {recon:.2e}")

    laws = calculus_laws(e, j, np.exp, lambda z: z * z - 1.0, rng=rng)
    print("calculus law residuals: " + ", ".join(f"{k} {v:.1e}" for k, v in laws.items()))

    res = spectral_mapping(e, j, lambda z: z ** 3 - 2 * z)
    print(f"spectral mapping for z^3 - 2z: direct and folded agree = {res.agree}")

    pair = bounded_transform(t)
    back = inverse_transform(pair.Z, rng=rng)
    print(f"bounded transform: ||Z|| = {operator_norm(pair.Z):.6f}, round trip error {diff_norm(back, t):.2e}")
    report = {}
    unbounded_path_spectral_theorem(t, rng=rng, report=report)
    print(f"pushforward path: points match {report['points_match']}, projection gap {report['projection_gap']:.2e}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:4]))
