"""How big do the exact numbers get?

Each modified column updates the matrix with an outer product of a vector
derived from the matrix itself, so numerator and denominator sizes roughly
double per column.  This script prints the largest entry size after every
step, then shows what floating point does on a larger instance.

    python3 demos/bit_growth.py
"""
import numpy as np

from unirigid import (FLOAT, NumericalBreakdown, compute_stress_matrix, gale_matrix, pre_stress,
                      purify, random_framework)


def bits(S):
    return max(max(x.numerator.bit_length(), x.denominator.bit_length()) for x in S.flat)


F = random_framework(2, 16, seed=11)
print(f"exact run, d={F.d}, n={F.n}")


def report(step, S):
    print(f"  position {step.position:2d} {'skip' if step.skipped else 'modify':6s} max entry bits {bits(S)}")


purify(pre_stress(gale_matrix(F)).S, F, on_step=report)

G = random_framework(3, 200, seed=1)
try:
    compute_stress_matrix(G, backend=FLOAT)
except NumericalBreakdown as exc:
    print(f"\nfloat, unit scaling, n={G.n}: {exc}")
res = compute_stress_matrix(G, backend=FLOAT, scaling="balanced", verify=False)
print(f"float, balanced scaling, n={G.n}: max |S| = {np.max(np.abs(res.stress.S)):.3e}")
from unirigid import verify_stress  # noqa: E402
print("verification failures:", verify_stress(res.stress.S, G).failures())
