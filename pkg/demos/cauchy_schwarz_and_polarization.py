"""Clifford-valued Cauchy-Schwarz and the polarization constant, generator by generator.

For n <= 2 the algebra has a multiplicative norm and |<x, y>| <= ||x|| ||y||.
From n = 3 on, 1 + e_123 squares to 2(1 + e_123), so the ratio reaches sqrt(2).
The polarization identity fits a constant for n <= 3 and no constant for n = 4.
"""

import numpy as np

from cliffspec.clifford_core import CliffordNumber, clifford_abs, sa_dimension
from cliffspec.clifford_module import CliffordVector, inner_product, module_norm, polarization_constant


def sampled_ratio(n: int, samples: int, rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(samples):
        x, y = CliffordVector.random(n, 1, rng), CliffordVector.random(n, 1, rng)
        worst = max(worst, clifford_abs(inner_product(x, y)) / (module_norm(x) * module_norm(y)))
    return worst


def main() -> None:
    rng = np.random.default_rng(0)
    print("n  sampled max |<x,y>|/(|x||y|)")
    for n in range(6):
        print(f"{n}  {sampled_ratio(n, 2000, rng):.4f}")

    a = CliffordNumber(3, [1.0, 0, 0, 0, 0, 0, 0, 1.0])
    x = CliffordVector(3, 1, a.coeffs.reshape(-1, 1))
    print(f"x = 1 + e123: |<x,x>| = {clifford_abs(inner_product(x, x)):.6f}, ||x||^2 = {module_norm(x) ** 2:.6f}")

    print("\nn  fitted c  4*dim S(R_n)  residual")
    for n in range(5):
        c, res = polarization_constant(n, m=2, rng=np.random.default_rng(n))
        print(f"{n}  {c:8.4f}  {4 * sa_dimension(n):12d}  {res:.2e}")


if __name__ == "__main__":
    main()
