"""Independent reference computations shared by several test modules."""

import numpy as np
from scipy.linalg import expm


def exact_linear_flow(L0, Ls, a, a_s, neighbors, horizon):
    """Exact solution of dL_i/dt = a_i (M_i - L_i) + a_is (L_s - L_i) for a fixed trend.

    Isolated members feel only the trend term.
    """
    n, k = L0.shape
    A = np.zeros((n, n))
    for i, nb in enumerate(neighbors):
        ai = a[i] if nb else 0.0
        A[i, i] -= ai + a_s[i]
        for j in nb:
            A[i, j] += ai / len(nb)
    out = np.empty_like(L0)
    for col in range(k):
        G = np.zeros((n + 1, n + 1))
        G[:n, :n] = A
        G[:n, n] = a_s * Ls[col]
        z0 = np.append(L0[:, col], 1.0)
        out[:, col] = (expm(G * horizon) @ z0)[:n]
    return out


def triangle_grid(n=201):
    """Points of an n-by-n grid on [0, 1]^2 that lie in the feasible triangle."""
    g = np.linspace(0.0, 1.0, n)
    X, S = np.meshgrid(g, g, indexing="ij")
    keep = X + S <= 1.0 + 1e-15
    return X[keep], S[keep]


def grid_chi2(y, u, v, xs, ss):
    """Chi-square at every grid point, from the residuals themselves."""
    y, u, v = (np.asarray(a, dtype=float) for a in (y, u, v))
    r = y[:, None] - np.outer(u, xs) - np.outer(v, ss)
    return np.einsum("ij,ij->j", r, r)


def brute_pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / (va * vb) ** 0.5
