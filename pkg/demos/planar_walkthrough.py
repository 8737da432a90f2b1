"""Certify a 7-point planar framework step by step.

Builds the Gale matrix, forms the pre-stress, purifies the columns that
touch non-edges, verifies the result, and finally exports the realization
SDP together with a complementary primal/dual pair.

    python3 demos/planar_walkthrough.py
"""
from fractions import Fraction
from pathlib import Path

import numpy as np

from unirigid import (check_certificate, compute_stress_matrix, export_realization_sdp,
                      extended_position_matrix, gale_matrix, pre_stress, read_framework_file,
                      write_sdpa)

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def show(name, M):
    M = np.atleast_2d(M)
    print(f"{name} ({M.shape[0]}x{M.shape[1]})")
    for row in M:
        print("  " + " ".join(f"{float(x):9.4f}" for x in row))


F = read_framework_file(DATA / "ex2.json")
print(f"{F.n} points in R^{F.d}, {len(F.edges)} edges, order {F.order}\n")

L = gale_matrix(F).L
show("Gale matrix", L)
show("pre-stress L L^T", pre_stress(L).S)

res = compute_stress_matrix(F)
print("\npurification trace:", res.trace.summary())
show("stress matrix", res.stress.S)
print("\nverification:", "pass" if res.report.passed else res.report.failures())
print("exact (1,1) entry:", Fraction(res.stress.S[0, 0]))

# Tree example: the pre-stress already is the answer.
T = read_framework_file(DATA / "ex1.json")
print("\ntree framework trace:", compute_stress_matrix(T).trace.summary())

problem = export_realization_sdp(T)
print(f"\nSDP with {problem.m} constraints; first lines of the SDPA file:")
print("\n".join(write_sdpa(problem).splitlines()[:8]))
A = extended_position_matrix(T)
cert = check_certificate(A.T @ A, pre_stress(gale_matrix(T)).S, problem)
print(f"Y.S = {cert.inner_product}, ranks {cert.rank_primal} + {cert.rank_dual}")
