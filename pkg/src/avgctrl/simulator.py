"""
Steering the ensemble average on a quadrature discretization.

The continuum ``sigma in [-1, 1]`` with the uniform probability is replaced
by ``N`` Gauss-Legendre nodes.  A minimum-energy piecewise-linear input is
synthesized from the averaged impulse response

    g(s) = sum_k w_k expm(A_k s) b_k,

and checked by integrating every node with classical RK4.  Results certify
the discretized ensemble only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

__all__ = [
    "DISCLAIMER",
    "SingularGramian",
    "DiscretizedEnsemble",
    "discretize",
    "ControlSignal",
    "impulse_response",
    "averaged_gramian",
    "free_average",
    "synthesize_control",
    "SimulationResult",
    "simulate",
    "verify_target",
    "write_trajectory_csv",
]

DISCLAIMER = ("results hold for the quadrature-discretized ensemble, an approximation "
              "of the continuum average")
COND_LIMIT = 1e12


class SingularGramian(np.linalg.LinAlgError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class DiscretizedEnsemble:
    nodes: np.ndarray
    weights: np.ndarray
    A: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def size(self) -> int:
        return len(self.nodes)


def discretize(ensemble, N: int) -> DiscretizedEnsemble:
    """Gauss-Legendre rule with ``N`` nodes, weights rescaled to sum to 1.

    ``ensemble`` is anything with an ``evaluate(sigma) -> (A, b)`` method,
    e.g. a symbolic certificate or a polynomial sample.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x, w = np.polynomial.legendre.leggauss(N)
    A, b = ensemble.evaluate(x)
    return DiscretizedEnsemble(x, w / 2.0, A, b)


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise-linear input through ``(t[m], u[m])``."""

    t: np.ndarray
    u: np.ndarray
    gramian_condition: float = float("nan")
    factor_condition: float = float("nan")

    def __call__(self, s):
        return np.interp(s, self.t, self.u)

    @property
    def T(self) -> float:
        return float(self.t[-1])


def impulse_response(de: DiscretizedEnsemble, T: float, M: int) -> np.ndarray:
    """``g(s_m)`` for ``s_m = m T / M``, shape ``(M + 1, n)``."""
    step = sla.expm(de.A * (T / M))
    v = de.b.copy()
    out = np.empty((M + 1, de.n))
    for m in range(M + 1):
        out[m] = de.weights @ v
        v = np.einsum("kij,kj->ki", step, v)
    return out


def _simpson_weights(T: float, M: int) -> np.ndarray:
    if M % 2:
        raise ValueError("Simpson's rule needs an even number of panels")
    wt = np.ones(M + 1)
    wt[1:-1:2] = 4.0
    wt[2:-1:2] = 2.0
    return wt * (T / M) / 3.0


def averaged_gramian(de: DiscretizedEnsemble, T: float, M: int = 200) -> np.ndarray:
    """``W(T) = int_0^T g(s) g(s)^T ds`` by composite Simpson."""
    if M < 200:
        raise ValueError("use at least 200 Simpson panels")
    G = impulse_response(de, T, M)
    return (G * _simpson_weights(T, M)[:, None]).T @ G


def free_average(de: DiscretizedEnsemble, x0, T: float) -> np.ndarray:
    """Uncontrolled average at time ``T`` from the initial profile ``x0``."""
    X0 = _profile(de, x0)
    prop = sla.expm(de.A * T)
    return de.weights @ np.einsum("kij,kj->ki", prop, X0)


def _profile(de, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        return np.broadcast_to(x0, (de.size, de.n)).copy()
    if x0.shape != (de.size, de.n):
        raise ValueError(f"initial profile must have shape ({de.n},) or ({de.size}, {de.n})")
    return x0


def _terminal_map(de: DiscretizedEnsemble, T: float, M: int) -> np.ndarray:
    """Exact linear map from grid values of a piecewise-linear input to the
    terminal average, shape ``(n, M + 1)``.

    Over one panel of width ``h`` the input contributes
    ``G0 u_m + G1 u_{m+1}`` with ``G0 + G1 = int_0^h expm(A s) b ds`` and
    ``G1 = int_0^h expm(A (h - s)) b s/h ds``, read off one block
    exponential.
    """
    n, N, h = de.n, de.size, T / M
    aug = np.zeros((N, n + 2, n + 2))
    aug[:, :n, :n] = de.A * h
    aug[:, :n, n] = de.b * h
    aug[:, n, n + 1] = 1.0
    E = sla.expm(aug)
    step = E[:, :n, :n]
    full = E[:, :n, n]
    ramp = E[:, :n, n + 1]
    g0, g1 = full - ramp, ramp

    H = np.zeros((n, M + 1))
    # P = step^(M-1-m), swept from the last panel backwards
    P = np.broadcast_to(np.eye(n), (N, n, n)).copy()
    for m in range(M - 1, -1, -1):
        H[:, m] += de.weights @ np.einsum("kij,kj->ki", P, g0)
        H[:, m + 1] += de.weights @ np.einsum("kij,kj->ki", P, g1)
        P = P @ step
    return H


def synthesize_control(de: DiscretizedEnsemble, x0, target, T: float, M: int = 1000,
                       cond_limit: float = COND_LIMIT) -> ControlSignal:
    """Minimum-energy piecewise-linear input driving the average to ``target``.

    The input minimizes ``int u^2`` among piecewise-linear signals on ``M``
    panels that hit the target exactly on the discretized ensemble; as the
    grid is refined it approaches ``g(T - t)^T W^{-1} (x* - xfree(T))``.
    The constraint is solved through a QR factorization instead of by
    inverting ``W``, so only the square root of ``cond(W)`` enters the
    error.

    Raises
    ------
    SingularGramian
        If the triangular factor (whose Gram matrix is the discrete
        Gramian) has condition number above ``cond_limit``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    M = max(int(M), 200)
    M += M % 2
    target = np.asarray(target, dtype=float)
    if target.shape != (de.n,):
        raise ValueError(f"target must have {de.n} entries")
    delta = target - free_average(de, x0, T)

    W = averaged_gramian(de, T, M)
    eig = np.linalg.eigvalsh((W + W.T) / 2)
    w_cond = float(eig[-1] / eig[0]) if eig[0] > 0 else float("inf")

    H = _terminal_map(de, T, M)
    h = T / M
    mass = np.zeros((M + 1, M + 1))
    idx = np.arange(M + 1)
    mass[idx, idx] = 4.0
    mass[0, 0] = mass[M, M] = 2.0
    mass[idx[:-1], idx[1:]] = 1.0
    mass[idx[1:], idx[:-1]] = 1.0
    mass *= h / 6.0
    Lm = np.linalg.cholesky(mass)
    K = sla.solve_triangular(Lm, H.T, lower=True)
    Q, R = np.linalg.qr(K)
    sv = np.linalg.svd(R, compute_uv=False)
    f_cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if not f_cond <= cond_limit:
        raise SingularGramian(
            f"averaged Gramian is numerically singular (factor condition {f_cond:.3e})", f_cond)
    v = Q @ sla.solve_triangular(R, delta, trans="T")
    u = sla.solve_triangular(Lm, v, lower=True, trans="T")
    return ControlSignal(np.linspace(0.0, T, M + 1), u, w_cond, f_cond)


@dataclass(frozen=True)
class SimulationResult:
    t: np.ndarray
    x: np.ndarray = field(repr=False)
    xbar: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    target: Optional[np.ndarray] = None

    @property
    def terminal(self) -> np.ndarray:
        return self.xbar[-1]

    @property
    def terminal_error(self) -> float:
        if self.target is None:
            return float("nan")
        return float(np.linalg.norm(self.terminal - self.target))


def simulate(de: DiscretizedEnsemble, u: ControlSignal, x0, T: Optional[float] = None,
             target=None, max_step: Optional[float] = None) -> SimulationResult:
    """Integrate every node with fixed-step RK4.

    Steps subdivide the control grid evenly, with step at most
    ``max_step`` (default ``T / 4000``, never above ``T / 1000``).
    Trajectories are stored on the control grid.
    """
    T = u.T if T is None else float(T)
    if not np.isclose(T, u.T):
        raise ValueError("control horizon does not match T")
    limit = min(T / 4000.0 if max_step is None else max_step, T / 1000.0)
    X = _profile(de, x0).copy()
    A, b = de.A, de.b

    def rhs(x, uu):
        return np.einsum("kij,kj->ki", A, x) + b * uu

    grid = u.t
    xs = np.empty((len(grid), de.size, de.n))
    xs[0] = X
    for m in range(len(grid) - 1):
        t0, t1 = grid[m], grid[m + 1]
        k = max(1, int(np.ceil((t1 - t0) / limit - 1e-9)))
        h = (t1 - t0) / k
        for s in range(k):
            ta = t0 + s * h
            ua, um, ub = u(ta), u(ta + h / 2), u(ta + h)
            k1 = rhs(X, ua)
            k2 = rhs(X + h / 2 * k1, um)
            k3 = rhs(X + h / 2 * k2, um)
            k4 = rhs(X + h * k3, ub)
            X = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[m + 1] = X
    xbar = np.einsum("k,mki->mi", de.weights, xs)
    tgt = None if target is None else np.asarray(target, dtype=float)
    return SimulationResult(grid.copy(), xs, xbar, u.u.copy(), tgt)


def verify_target(result: SimulationResult, target, tol: float = 1e-6) -> tuple:
    """Compare the terminal average to ``target`` in the Euclidean norm."""
    target = np.asarray(target, dtype=float)
    err = float(np.linalg.norm(result.terminal - target))
    ok = err <= tol
    return ok, {
        "ok": ok,
        "terminal_error": err,
        "tolerance": tol,
        "terminal_average": result.terminal.tolist(),
        "target": target.tolist(),
        "disclaimer": DISCLAIMER,
    }


def write_trajectory_csv(result: SimulationResult, path) -> None:
    """Columns ``t, xbar_1..xbar_n, u``."""
    n = result.xbar.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"xbar_{i}" for i in range(1, n + 1)] + ["u"])
        for t, xb, uu in zip(result.t, result.xbar, result.u):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in xb] + [repr(float(uu))])
