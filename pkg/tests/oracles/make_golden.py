"""Regenerate golden.json from independent reference computations.

Nothing here imports the package under test: values come from mpmath
quadrature, exact rational arithmetic and explicit loops.
Run: python3 tests/oracles/make_golden.py
"""

import json
import os
from fractions import Fraction
from itertools import combinations

import mpmath

mpmath.mp.dps = 30


def f2(x, y):
    return mpmath.e ** (-abs(x - y) / 2) / mpmath.mpf("0.8522")


def f2_distance(xi, xj):
    g = lambda v: (f2(xi, v) - f2(xj, v)) ** 2
    # split at the kinks |x - v| = 0
    pts = sorted({0, xi, xj, 1})
    return mpmath.quad(g, pts)


def algorithm1_two_block():
    """n = 5, m = 2, blocks {1,2,3} and {4,5}, within-block edges only."""
    n = 5
    block = [0, 0, 0, 1, 1]
    A = [[int(i != j and block[i] == block[j]) for j in range(n)] for i in range(n)]
    s1 = s2 = A  # both halves hold the same single layer
    edges = sum(A[i][j] for i in range(n) for j in range(i + 1, n))
    rho = Fraction(2 * edges, 2 * n * (n - 1) // 2 * 2) * 1  # two identical layers
    rho = Fraction(edges, n * (n - 1) // 2)

    def r(i, j):
        ks = [k for k in range(n) if k not in (i, j)]
        return Fraction(sum(s1[i][k] * s2[k][j] for k in ks), len(ks))

    def d(i, j):
        v = r(i, i) + r(j, j) - r(i, j) - r(j, i)
        return max(v, Fraction(0)) / rho**2

    return rho, d(0, 1), d(0, 3)


def spearman_textbook(a, b):
    n = len(a)
    ra = [sorted(a).index(v) + 1 for v in a]
    rb = [sorted(b).index(v) + 1 for v in b]
    d2 = sum((x - y) ** 2 for x, y in zip(ra, rb))
    return Fraction(1) - Fraction(6 * d2, n * (n * n - 1))


def path_length_p3():
    # 1-2-3: distances 1, 1, 2
    return Fraction(1 + 1 + 2, 3)


def within_row_three_points():
    pts = [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)]
    D = [[(a - b) ** 2 for b in pts] for a in pts]
    out = []
    for i in range(3):
        others = sorted((D[i][j], j) for j in range(3) if j != i)
        for (v0, j0), (v1, j1) in zip(others, others[1:]):
            if v1 > v0:
                out.append([i, j0, i, j1])
    return out


def monotone_only_three():
    """All orderings of {0.1, 0.2, 0.7} satisfying the within-row constraints."""
    from itertools import permutations

    x = [Fraction(1, 10), Fraction(2, 10), Fraction(7, 10)]
    D = [[(a - b) ** 2 for b in x] for a in x]
    cons = []
    for i in range(3):
        others = sorted((D[i][j], j) for j in range(3) if j != i)
        for (v0, j0), (v1, j1) in zip(others, others[1:]):
            if v1 > v0:
                cons.append((i, j0, i, j1))
    ok = []
    # candidate configurations: ranks placed on an arbitrary strictly increasing grid
    grids = [(0, 1, 2), (0, 1, 5), (0, 4, 5), (0, 1, 3)]
    for perm in permutations(range(3)):
        for g in grids:
            pos = [g[perm[k]] for k in range(3)]
            if all(abs(pos[i] - pos[j]) < abs(pos[p] - pos[q]) for i, j, p, q in cons):
                ok.append(list(perm))
                break
    return ok


def nbs_six_node():
    """Exact two-block matrix, blocks of 3: d^2 is 0 within and positive across."""
    n = 6
    block = [0, 0, 0, 1, 1, 1]
    P = [[Fraction(7, 10) if block[i] == block[j] else Fraction(3, 10) for j in range(n)]
         for i in range(n)]
    within = max(
        abs(sum((P[i][l] - P[j][l]) * P[k][l] for l in range(n))) / n
        for i, j in combinations(range(3), 2) for k in range(n) if k not in (i, j)
    )
    across = min(
        max(abs(sum((P[i][l] - P[j][l]) * P[k][l] for l in range(n))) / n
            for k in range(n) if k not in (i, j))
        for i in range(3) for j in range(3, 6)
    )
    return within, across


def main():
    rho, d12, d14 = algorithm1_two_block()
    within, across = nbs_six_node()
    golden = {
        "f2_beta0_true_distance_0_1": float(f2_distance(mpmath.mpf(0), mpmath.mpf(1))),
        "f2_beta0_true_distance_0.2_0.7": float(f2_distance(mpmath.mpf("0.2"), mpmath.mpf("0.7"))),
        "f2_diag_value": float(1 / mpmath.mpf("0.8522")),
        "f1_true_distance_0.1_0.9": float(Fraction(16, 3) * Fraction(64, 100)),
        "alg1_two_block_rho": float(rho),
        "alg1_two_block_D12": float(d12),
        "alg1_two_block_D14": float(d14),
        "alg1_two_block_D12_exact": [d12.numerator, d12.denominator],
        "alg1_two_block_D14_exact": [d14.numerator, d14.denominator],
        "spearman_1234_1324": float(spearman_textbook([1, 2, 3, 4], [1, 3, 2, 4])),
        "path3_avg_path_length": float(path_length_p3()),
        "within_row_three_points": within_row_three_points(),
        "monotone_orders_0.1_0.2_0.7": monotone_only_three(),
        "nbs_six_node_within_max": float(within),
        "nbs_six_node_across_min": float(across),
        "regime_threshold_n1000_rho0.002": float(mpmath.mpf(1000 * 0.002**2) ** -0.5),
        "er_triangles_116_0.3": float(Fraction(116 * 115 * 114, 6) * Fraction(27, 1000)),
        "cross_section_variance_sigma0.28": float(Fraction(28, 100) ** 2),
    }
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden.json")
    with open(path, "w") as fh:
        json.dump(golden, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
