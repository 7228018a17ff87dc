"""Repartition keys: who receives the locally produced energy, period by period.

A key ``G`` is a ``T x N`` array of kWh. It is feasible for generation ``g``
and loads ``L`` when ``0 <= G <= L`` elementwise and every row sums to
``min(g_t, sum_n L_tn)``: all of the generation is handed out during a
deficit, and all of the load is covered during a surplus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    period: int
    member: Optional[int]
    kind: str  # "negative", "above-load" or "row-sum"
    amount: float

    def __str__(self) -> str:
        if self.kind == "row-sum":
            return f"period {self.period}: allocated sum off by {self.amount:.3g} kWh"
        return f"period {self.period}, member {self.member}: {self.kind} by {self.amount:.3g} kWh"


def _as_inputs(g, L):
    g = np.asarray(g, dtype=float)
    L = np.asarray(L, dtype=float)
    if L.ndim != 2:
        raise ValueError(f"load must be a T x N matrix, got shape {L.shape}")
    if g.shape != (L.shape[0],):
        raise ValueError(f"generation has shape {g.shape}, expected ({L.shape[0]},)")
    return g, L


def allocatable(g, L) -> np.ndarray:
    """Per-period energy a feasible key must hand out, ``min(g, L @ 1)``."""
    g, L = _as_inputs(g, L)
    return np.minimum(g, L.sum(axis=1))


def surplus(g, L) -> np.ndarray:
    """Generation left over once the whole community load is covered."""
    g, L = _as_inputs(g, L)
    return np.maximum(0.0, g - L.sum(axis=1))


def is_feasible_key(G, g, L, tol: float = FEASIBILITY_TOL) -> tuple[bool, list[Violation]]:
    g, L = _as_inputs(g, L)
    G = np.asarray(G, dtype=float)
    if G.shape != L.shape:
        raise ValueError(f"key has shape {G.shape}, load has shape {L.shape}")

    violations: list[Violation] = []
    for t, n in np.argwhere(~(G >= -tol)):
        violations.append(Violation(int(t), int(n), "negative", float(-G[t, n])))
    for t, n in np.argwhere(~(G <= L + tol)):
        violations.append(Violation(int(t), int(n), "above-load", float(G[t, n] - L[t, n])))
    gap = G.sum(axis=1) - allocatable(g, L)
    for t in np.flatnonzero(~(np.abs(gap) <= tol)):
        violations.append(Violation(int(t), None, "row-sum", float(gap[t])))
    violations.sort(key=lambda v: (v.period, -1 if v.member is None else v.member))
    return not violations, violations


def default_pro_rata_key(g, L) -> np.ndarray:
    """Default rule: share each period's generation in proportion to load."""
    g, L = _as_inputs(g, L)
    total = L.sum(axis=1)
    target = np.minimum(g, total)
    G = np.zeros_like(L)
    share = total > 0
    G[share] = L[share] * (target[share] / total[share])[:, None]
    # surplus periods hand out the load itself, bit for bit
    covered = g >= total
    G[covered] = L[covered]
    return G


def priority_key(g, L, order: Sequence[int]) -> np.ndarray:
    """Serve members in ``order`` (0-based column indices), each up to its load."""
    g, L = _as_inputs(g, L)
    order = [int(i) for i in order]
    if sorted(order) != list(range(L.shape[1])):
        raise ValueError(f"order {order} is not a permutation of 0..{L.shape[1] - 1}")
    G = np.zeros_like(L)
    remaining = allocatable(g, L)
    for n in order:
        take = np.minimum(remaining, L[:, n])
        G[:, n] = take
        remaining = np.maximum(remaining - take, 0.0)
    return G


def _fixed_ratio_row(target: float, load: np.ndarray, w: np.ndarray) -> np.ndarray:
    x = np.zeros_like(load)
    active = (w > 0) & (load > 0)
    remaining = target
    # each pass either finishes or clamps at least one member, so at most N passes
    while remaining > 0 and active.any():
        alloc = remaining * w[active] / w[active].sum()
        idx = np.flatnonzero(active)
        over = alloc >= load[idx]
        if not over.any():
            x[idx] = alloc
            remaining = 0.0
            break
        clamped = idx[over]
        x[clamped] = load[clamped]
        remaining -= load[clamped].sum()
        active[clamped] = False
    if remaining > 0:
        # weighted members are all at their load; zero-weight members take
        # the rest in proportion to their load
        rest = (load > 0) & ~(w > 0)
        if rest.any():
            x[rest] = remaining * load[rest] / load[rest].sum()
    return x


def fixed_ratio_key(g, L, weights: Sequence[float]) -> np.ndarray:
    """Share generation by fixed weights, clamping at load and re-spreading the excess."""
    g, L = _as_inputs(g, L)
    w = np.asarray(weights, dtype=float)
    if w.shape != (L.shape[1],):
        raise ValueError(f"expected {L.shape[1]} weights, got {w.size}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if not w.sum() > 0:
        raise ValueError("weights must not all be zero")
    target = allocatable(g, L)
    G = np.zeros_like(L)
    for t in range(L.shape[0]):
        G[t] = _fixed_ratio_row(target[t], L[t], w)
    return G


def _project_rows(V: np.ndarray, U: np.ndarray, m: np.ndarray) -> np.ndarray:
    # x = clip(v - theta, 0, u) with theta chosen so that sum(x) = m;
    # h(theta) = sum(x) is piecewise linear and nonincreasing with kinks at v and v - u
    bps = np.sort(np.concatenate([V, V - U], axis=1), axis=1)
    h = np.clip(V[:, None, :] - bps[:, :, None], 0.0, U[:, None, :]).sum(axis=2)
    k = (h >= m[:, None]).sum(axis=1) - 1
    k = np.clip(k, 0, bps.shape[1] - 2)
    rows = np.arange(V.shape[0])
    b0, b1 = bps[rows, k], bps[rows, k + 1]
    h0, h1 = h[rows, k], h[rows, k + 1]
    drop = h0 - h1
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(drop > 0, (h0 - m) / drop, 0.0)
    theta = b0 + np.clip(frac, 0.0, 1.0) * (b1 - b0)
    X = np.clip(V - theta[:, None], 0.0, U)
    # single-point feasible sets are returned exactly
    X[m <= 0] = 0.0
    full = m >= U.sum(axis=1)
    X[full] = U[full]
    return X


def project_key(G_proposed, g, L) -> np.ndarray:
    """Nearest feasible key, row by row, in the Euclidean sense.

    Rows that already satisfy the feasibility test are returned untouched,
    which makes the projection idempotent.
    """
    g, L = _as_inputs(g, L)
    V = np.asarray(G_proposed, dtype=float)
    if V.shape != L.shape:
        raise ValueError(f"key has shape {V.shape}, load has shape {L.shape}")
    out = V.copy()
    target = allocatable(g, L)
    tol = FEASIBILITY_TOL
    ok = (
        np.all(V >= 0, axis=1)
        & np.all(V <= L, axis=1)
        & (np.abs(V.sum(axis=1) - target) <= tol)
    )
    todo = ~ok
    if todo.any() and L.shape[1] > 0:
        out[todo] = _project_rows(V[todo], L[todo], target[todo])
    return out


def residual_load(L, G, tol: float = FEASIBILITY_TOL) -> np.ndarray:
    """Energy each member still draws from its supplier, ``L - G``."""
    L = np.asarray(L, dtype=float)
    G = np.asarray(G, dtype=float)
    if G.shape != L.shape:
        raise ValueError(f"key has shape {G.shape}, load has shape {L.shape}")
    if np.any(G < -tol) or np.any(G > L + tol):
        raise ValueError("key is infeasible: allocations must lie between 0 and the member load")
    return np.maximum(L - G, 0.0)
