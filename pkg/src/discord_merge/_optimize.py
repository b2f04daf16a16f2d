"""Deterministic grid + zoom + simplex maximization over measurement parameters.

Shared by the classical-correlation maximizer and the merge-markup minimizer.
Callers supply two views of the same objective: a vectorized one evaluated on
angle arrays (used for the coarse grid and zoom rounds) and a scalar one
(used by the Nelder-Mead polish).  Everything is deterministic: the grid is
fixed, ties are broken lexicographically in canonicalized parameters, and any
randomness comes from an explicit seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class OptimizerRun:
    """Best parameters/value plus diagnostics from one maximization."""

    params: tuple
    value: float
    trace: tuple  # ((params...), objective) per candidate, best last
    converged: bool


def canonical_angles(theta: float, phi: float) -> tuple:
    """Fold (theta, phi) into a unique representative of the measurement.

    The antipodal direction swaps the two outcomes, which is the same binary
    measurement, so the canonical range is the upper half sphere; phi is
    meaningless at the pole and folded to [0, pi) on the equator.
    """
    theta = float(theta) % (2 * np.pi)
    if theta > np.pi:
        theta = 2 * np.pi - theta
        phi = phi + np.pi
    phi = float(phi) % (2 * np.pi)
    if theta > np.pi / 2 + 1e-12:
        theta = np.pi - theta
        phi = (phi + np.pi) % (2 * np.pi)
    if theta <= 1e-12:
        return (0.0, 0.0)
    if abs(theta - np.pi / 2) <= 1e-12 and phi >= np.pi:
        phi -= np.pi
    return (theta, phi)


def _pick_starts(thetas, phis, values, k, tol):
    """Indices of the k best grid cells, ties broken by smallest (theta, phi)."""
    order = np.lexsort((phis, thetas, -values))
    picked = []
    seen = set()
    for idx in order:
        key = canonical_angles(thetas[idx], phis[idx])
        key = (round(key[0], 9), round(key[1], 9))
        if key in seen:
            continue
        seen.add(key)
        picked.append(idx)
        if len(picked) >= k:
            break
    return picked


def maximize_qubit_angles(batch_objective, scalar_objective, cfg) -> OptimizerRun:
    """Maximize an objective over qubit projective measurements (theta, phi).

    batch_objective(thetas, phis) -> values evaluates the objective on angle
    arrays; scalar_objective(theta, phi) -> value is its pointwise twin.
    """
    thetas = np.linspace(0.0, np.pi, cfg.grid_theta)
    phis = np.linspace(0.0, 2 * np.pi, cfg.grid_phi, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt, pp = tt.ravel(), pp.ravel()
    values = batch_objective(tt, pp)

    starts = _pick_starts(tt, pp, values, cfg.multistarts, cfg.tol_obj)
    window = (np.pi / max(cfg.grid_theta - 1, 1), 2 * np.pi / cfg.grid_phi)

    candidates = []
    for idx in starts:
        t0, p0 = float(tt[idx]), float(pp[idx])
        wt, wp = window
        # Zoom rounds: re-grid a shrinking 5x5 patch around the running best.
        for _ in range(cfg.refinements):
            lt = np.linspace(t0 - wt, t0 + wt, 5)
            lp = np.linspace(p0 - wp, p0 + wp, 5)
            gt, gp = np.meshgrid(lt, lp, indexing="ij")
            gt, gp = gt.ravel(), gp.ravel()
            lv = batch_objective(gt, gp)
            j = int(np.lexsort((gp, gt, -lv))[0])
            t0, p0 = float(gt[j]), float(gp[j])
            wt, wp = wt / 3.0, wp / 3.0

        res = minimize(
            lambda x: -scalar_objective(x[0], x[1]),
            np.array([t0, p0]),
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iter,
                "maxfev": 4 * cfg.max_iter,
                "xatol": 1e-7,
                "fatol": min(cfg.tol_obj * 1e-2, 1e-9),
                "initial_simplex": np.array(
                    [[t0, p0], [t0 + window[0] / 2, p0], [t0, p0 + window[1] / 2]]
                ),
            },
        )
        params = canonical_angles(res.x[0], res.x[1])
        candidates.append((params, float(-res.fun), bool(res.success)))

    return _reduce(candidates, cfg.tol_obj)


def maximize_unitary_params(scalar_objective, n_params, cfg, extra_starts=()) -> OptimizerRun:
    """Multistart Nelder-Mead over a flat angle vector (d_B > 2 and POVM paths).

    Starts are the zero vector, any caller-supplied vectors, and seeded
    uniform draws in [0, 2*pi) up to ``cfg.multistarts`` total.
    """
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed)))
    starts = [np.zeros(n_params)]
    starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    while len(starts) < cfg.multistarts:
        starts.append(rng.uniform(0.0, 2 * np.pi, n_params))

    candidates = []
    for x0 in starts[: max(cfg.multistarts, len(starts))]:
        res = minimize(
            lambda x: -scalar_objective(x),
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iter * max(1, n_params // 2),
                "xatol": 1e-6,
                "fatol": min(cfg.tol_obj * 1e-2, 1e-9),
            },
        )
        params = tuple(float(v) % (2 * np.pi) for v in res.x)
        candidates.append((params, float(-res.fun), bool(res.success)))
    return _reduce(candidates, cfg.tol_obj)


def _reduce(candidates, tol) -> OptimizerRun:
    """Merge multistart results: max objective, lexicographic tie-break.

    The reported value is the chosen candidate's own objective so that the
    returned parameters and value always correspond; it sits within ``tol``
    of the best value seen.
    """
    best_value = max(v for _, v, _ in candidates)
    tied = [c for c in candidates if c[1] >= best_value - tol]
    tied.sort(key=lambda c: c[0])
    params, value, converged = tied[0]
    trace = tuple((p, v) for p, v, _ in candidates)
    return OptimizerRun(params, value, trace, converged)
