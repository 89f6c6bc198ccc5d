"""Deterministic Nelder-Mead simplex minimization.

Small, dependency-free and fully deterministic: ties are broken by stable
sorting, so identical inputs always walk the identical path.  Convergence is
declared when the simplex diameter (max distance of any vertex from the best
one) falls below ``diam_tol``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SimplexResult", "nelder_mead"]

_REFLECT = 1.0
_EXPAND = 2.0
_CONTRACT = 0.5
_SHRINK = 0.5


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int


def nelder_mead(f, x0, step=0.25, max_iter=600, diam_tol=1e-9) -> SimplexResult:
    """Minimize ``f`` from ``x0`` with an initial simplex of edge ``step``.

    ``step`` may be a scalar or a per-coordinate array.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if n == 0:
        return SimplexResult(x0, float(f(x0)), True, 0, 1)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    pts = np.repeat(x0[None, :], n + 1, axis=0)
    for i in range(n):
        pts[i + 1, i] += step[i]
    fv = np.array([float(f(p)) for p in pts])
    evals = n + 1

    order = np.argsort(fv, kind="stable")
    pts, fv = pts[order], fv[order]

    it = 0
    converged = False
    while it < max_iter:
        it += 1
        diam = float(np.max(np.abs(pts[1:] - pts[0])))
        if diam < diam_tol:
            converged = True
            break
        centroid = pts[:-1].mean(axis=0)
        xr = centroid + _REFLECT * (centroid - pts[-1])
        fr = float(f(xr))
        evals += 1
        if fr < fv[0]:
            xe = centroid + _EXPAND * (centroid - pts[-1])
            fe = float(f(xe))
            evals += 1
            if fe < fr:
                pts[-1], fv[-1] = xe, fe
            else:
                pts[-1], fv[-1] = xr, fr
        elif fr < fv[-2]:
            pts[-1], fv[-1] = xr, fr
        else:
            xc = centroid + _CONTRACT * (pts[-1] - centroid)
            fc = float(f(xc))
            evals += 1
            if fc < fv[-1]:
                pts[-1], fv[-1] = xc, fc
            else:
                pts[1:] = pts[0] + _SHRINK * (pts[1:] - pts[0])
                fv[1:] = [float(f(p)) for p in pts[1:]]
                evals += n
        order = np.argsort(fv, kind="stable")
        pts, fv = pts[order], fv[order]

    return SimplexResult(pts[0].copy(), float(fv[0]), converged, it, evals)
