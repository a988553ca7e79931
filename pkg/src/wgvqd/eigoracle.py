"""Dense symmetric eigensolver used as the classical reference.

Cyclic Jacobi with a round-robin (tournament) pair ordering: every round
rotates ``n/2`` disjoint index pairs at once, so a sweep is ``n - 1``
vectorised rounds instead of ``n(n-1)/2`` scalar rotations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 2 ** 12
DEGENERACY_RTOL = 1e-6


class JacobiConvergenceError(RuntimeError):
    def __init__(self, residual, sweeps):
        super().__init__(
            f"Jacobi did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {residual:.3e})")
        self.residual = residual
        self.sweeps = sweeps


@dataclass
class EigenDecomposition:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns
    sweeps: int = 0

    def __len__(self):
        return len(self.values)

    def spectral_norm(self):
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def eigenspace(self, index, rtol=DEGENERACY_RTOL):
        """Columns spanning the eigenspace that contains eigenvalue ``index``."""
        return self.vectors[:, self.eigenspace_indices(index, rtol)]

    def eigenspace_indices(self, index, rtol=DEGENERACY_RTOL):
        tol = rtol * max(self.spectral_norm(), np.finfo(float).tiny)
        lam = self.values[index]
        return np.flatnonzero(np.abs(self.values - lam) < tol)

    def distinct_levels(self, rtol=DEGENERACY_RTOL):
        """Index lists of the distinct eigenvalue groups, ascending."""
        levels = []
        seen = set()
        for i in range(len(self.values)):
            if i in seen:
                continue
            group = [int(j) for j in self.eigenspace_indices(i, rtol)]
            seen.update(group)
            levels.append(group)
        return levels


def _round_robin(n):
    """Rounds of disjoint pairs covering every (p, q) once; n must be even."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        rounds.append((np.array(players[: n // 2]), np.array(players[n // 2:][::-1])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _layout_step(n):
    """Slices taking one round's paired layout ``[p..., q...]`` to the next.

    With the circle ordering the move is always the same five runs, so the
    re-layout is a handful of contiguous copies rather than a fancy gather.
    """
    h = n // 2
    g = [0, h] + list(range(1, h - 1)) + list(range(h + 1, n)) + [h - 1]
    runs = []
    start = 0
    for i in range(1, n + 1):
        if i == n or g[i] != g[i - 1] + 1:
            runs.append(slice(g[start], g[i - 1] + 1))
            start = i
    return runs


def _relayout(a, runs, axis):
    if axis == 0:
        return np.concatenate([a[r] for r in runs], axis=0)
    return np.concatenate([a[:, r] for r in runs], axis=1)


def eigensolve_symmetric(m, tol=1e-12, max_sweeps=100):
    """Full eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
    tol : float
        Stop once the off-diagonal Frobenius norm drops below
        ``tol * ||m||_F``.
    max_sweeps : int

    Returns
    -------
    EigenDecomposition
        Ascending eigenvalues and orthonormal eigenvector columns.

    Raises
    ------
    ValueError
        If ``m`` is not square, too large, or not symmetric to 1e-12.
    JacobiConvergenceError
        If the sweep cap is hit first.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dense eigensolve capped at dimension {MAX_DIM}")
    asym = np.max(np.abs(a - a.T)) if n else 0.0
    if asym > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    a = 0.5 * (a + a.T)
    if n == 1:
        return EigenDecomposition(a[0].copy(), np.ones((1, 1)), 0)

    # pad to even size with a decoupled zero row/column
    padded = n % 2
    if padded:
        a = np.pad(a, ((0, 1), (0, 1)))
    size = a.shape[0]
    half = size // 2
    target = tol * np.linalg.norm(a)
    # ``a`` and the eigenvector rows ``vt`` are kept in the current round's
    # layout, where pair k sits at positions (k, half + k).
    p0, q0 = _round_robin(size)[0]
    layout = np.concatenate([p0, q0])
    a = a[layout][:, layout]
    vt = np.eye(size)[layout]
    runs = _layout_step(size)
    step = np.concatenate([np.arange(size)[r] for r in runs])
    pairs = (np.arange(half), half + np.arange(half))

    def off_norm(x):
        return np.linalg.norm(x - np.diag(np.diag(x)))

    sweeps = 0
    residual = off_norm(a)
    while residual >= target and residual > 0.0:
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(residual, sweeps)
        for _ in range(size - 1):
            apq = a[pairs]
            if np.any(apq != 0.0):
                _rotate_pairs(a, vt, apq, half)
            a = _relayout(_relayout(a, runs, 0), runs, 1)
            vt = _relayout(vt, runs, 0)
            layout = layout[step]
        sweeps += 1
        residual = off_norm(a)

    position = np.empty(size, dtype=int)
    position[layout] = np.arange(size)
    values = np.diag(a)[position]
    v = vt[position].T
    if padded:
        # drop the column belonging to the padding coordinate
        pad_col = int(np.argmax(np.abs(v[-1, :])))
        keep = np.arange(size) != pad_col
        values = values[keep]
        v = v[:n, keep]
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], v[:, order], sweeps)


def _rotate_pairs(a, vt, apq, half):
    """One round of simultaneous rotations on pairs (k, half + k), in place."""
    d = np.diag(a)
    app, aqq = d[:half], d[half:]
    active = apq != 0.0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        tau = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
        # |tau| -> inf gives t -> 0, the correct limit
        t = np.where(active, np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
    t = np.where(active & (tau == 0.0), 1.0, t)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # A <- J^T A J with J[p,p] = J[q,q] = c, J[p,q] = s, J[q,p] = -s
    cc, ss = c[:, None], s[:, None]
    for m in (a, vt):
        top = m[:half].copy()
        bot = m[half:]
        m[:half] *= cc
        m[:half] -= ss * bot
        bot *= cc
        bot += ss * top
    left = a[:, :half].copy()
    right = a[:, half:]
    a[:, :half] *= c
    a[:, :half] -= right * s
    right *= c
    right += left * s
    k = np.arange(half)
    a[k, half + k] = 0.0
    a[half + k, k] = 0.0


def fidelity(state, vector):
    """``|<vector|state>|^2``; ``vector`` may also be a matrix of orthonormal
    columns, in which case the projected norm onto their span is returned."""
    state = np.asarray(state)
    vector = np.asarray(vector)
    if vector.shape[0] != state.shape[-1]:
        raise ValueError("dimension mismatch")
    if vector.ndim == 1:
        return float(abs(np.vdot(vector, state)) ** 2)
    proj = vector.conj().T @ state
    return float(np.real(np.vdot(proj, proj)))


def eigenspace_fidelity(state, eig, index, rtol=DEGENERACY_RTOL):
    """Fidelity of ``state`` with the whole eigenspace of eigenvalue ``index``."""
    return fidelity(state, eig.eigenspace(index, rtol))
