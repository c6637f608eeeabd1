"""The convex vector relaxation of the bilinear problem, solved by
alternating closed-form block maximization, plus brute-force lower bounds
on the true p->q norm for test instances."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError, NumericalError
from .krivine import NormPair


@dataclass(frozen=True)
class ProblemInstance:
    A: np.ndarray
    pair: NormPair

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64, copy=True)
        if A.ndim != 2 or A.size == 0:
            raise DomainError("matrix must be 2-d and nonempty")
        if not np.all(np.isfinite(A)):
            raise DomainError("matrix entries must be finite")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def shape(self):
        return self.A.shape


@dataclass
class RelaxationSolution:
    U: np.ndarray
    V: np.ndarray
    value: float
    converged: bool
    iterations: int
    objective_trace: np.ndarray = field(repr=False, default=None)


def lp_norm(x: np.ndarray, r: float) -> float:
    x = np.abs(np.asarray(x, dtype=np.float64))
    if math.isinf(r):
        return float(np.max(x)) if x.size else 0.0
    return float(np.sum(x ** r) ** (1.0 / r))


def _rows_normalized(W):
    norms = np.linalg.norm(W, axis=1)
    out = np.zeros_like(W)
    nz = norms > 0
    out[nz] = W[nz] / norms[nz, None]
    return out, norms


def _block_update(W: np.ndarray, r_constraint: float, r_value: float):
    """Maximize sum_i <x^i, w^i> over sum_i ||x^i||^r_constraint <= 1.

    The optimum aligns x^i with w^i and distributes lengths by Holder
    duality; the achieved objective is the r_value-norm of the row norms
    (1/r_constraint + 1/r_value = 1).  For r_constraint = inf every row
    saturates length 1.
    """
    Wn, norms = _rows_normalized(W)
    if math.isinf(r_constraint):
        return Wn, float(np.sum(norms))
    total = np.sum(norms ** r_value)
    if total == 0.0:
        return np.zeros_like(W), 0.0
    lam = norms ** (r_value - 1.0) / total ** (1.0 / r_constraint)
    return lam[:, None] * Wn, float(total ** (1.0 / r_value))


def solve_cp(inst: ProblemInstance, d: Optional[int] = None, restarts: int = 16,
             max_iters: int = 10_000, tol: float = 1e-10, seed: int = 0) -> RelaxationSolution:
    """Alternating maximization of <A, U V^T> under the row-norm power
    constraints sum ||u^i||^{q*} <= 1 and sum ||v^j||^p <= 1.

    Each block update is the exact Holder-dual optimum, so the objective is
    nondecreasing along iterations; the best run over deterministic seeded
    restarts is returned.  d defaults to m + n.
    """
    A = inst.A
    m, n = A.shape
    p, qs = inst.pair.p, inst.pair.q_star
    q = inst.pair.q
    ps = inst.pair.p_star
    if d is None:
        d = m + n
    if np.all(A == 0.0):
        return RelaxationSolution(U=np.zeros((m, d)), V=np.zeros((n, d)), value=0.0,
                                  converged=True, iterations=0,
                                  objective_trace=np.zeros(1))
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        V = rng.standard_normal((n, d))
        # scale V feasible for the p-constraint
        if math.isinf(p):
            V, _ = _rows_normalized(V)
        else:
            V /= np.sum(np.linalg.norm(V, axis=1) ** p) ** (1.0 / p)
        trace = []
        obj_prev = -math.inf
        converged = False
        U = np.zeros((m, d))
        for it in range(max_iters):
            U, obj_u = _block_update(A @ V, qs, q)
            V, obj = _block_update(A.T @ U, p, ps)
            if not (math.isfinite(obj_u) and math.isfinite(obj)):
                raise NumericalError("non-finite objective in alternating solver",
                                     dump={"U": U, "V": V, "iteration": it})
            if obj < obj_prev - 1e-9 * max(1.0, abs(obj)):
                raise NumericalError("objective decreased across a block update",
                                     dump={"U": U, "V": V, "iteration": it})
            trace.append(obj)
            if obj - obj_prev < tol * max(1.0, abs(obj)):
                converged = True
                break
            obj_prev = obj
        value = float(np.sum(A * (U @ V.T)))
        sol = RelaxationSolution(U=U, V=V, value=value, converged=converged,
                                 iterations=len(trace),
                                 objective_trace=np.asarray(trace))
        if best is None or sol.value > best.value:
            best = sol
    return best


def holder_ascent(A: np.ndarray, pair: NormPair, x0: np.ndarray,
                  max_iters: int = 500, tol: float = 1e-14) -> tuple:
    """Nonlinear power iteration x <- psi_{p*}(A^T psi_q(A x)) on the unit
    p-sphere; each half-step is a block optimum so ||Ax||_q ascends."""
    from .rounding import holder_dual

    p, q, ps = pair.p, pair.q, pair.p_star
    x = x0 / max(lp_norm(x0, p), 1e-300)
    val_prev = -math.inf
    for _ in range(max_iters):
        y = holder_dual(A @ x, q)
        z = A.T @ y
        if math.isinf(p):
            x = np.sign(z)
            x[x == 0.0] = 1.0
        else:
            x = holder_dual(z, ps)
            x /= max(lp_norm(x, p), 1e-300)
        val = lp_norm(A @ x, q)
        if val - val_prev < tol * max(1.0, val):
            break
        val_prev = val
    return x, lp_norm(A @ x, q)


def _enumerate_sign_norm(A: np.ndarray, q: float) -> float:
    """Exact max of ||A x||_q over the sign cube; valid p = inf answer."""
    n = A.shape[1]
    # fix x[0] = +1; the objective is sign-symmetric
    count = 1 << (n - 1)
    best = 0.0
    chunk = 1 << 14
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.uint64)
        bits = ((idx[:, None] >> np.arange(n - 1, dtype=np.uint64)) & 1).astype(np.float64)
        X = np.hstack([np.ones((idx.size, 1)), 1.0 - 2.0 * bits])
        vals = np.sum(np.abs(X @ A.T) ** q, axis=1) ** (1.0 / q)
        best = max(best, float(np.max(vals)))
    return best


def _sample_p_sphere(rng, n: int, p: float, count: int) -> np.ndarray:
    """Rows on the l_p unit sphere via the normalized generalized normal."""
    if math.isinf(p):
        X = rng.uniform(-1.0, 1.0, size=(count, n))
        return X / np.max(np.abs(X), axis=1, keepdims=True)
    signs = rng.choice([-1.0, 1.0], size=(count, n))
    mags = rng.gamma(1.0 / p, 1.0, size=(count, n)) ** (1.0 / p)
    X = signs * mags
    norms = np.sum(np.abs(X) ** p, axis=1) ** (1.0 / p)
    return X / norms[:, None]


def brute_force_norm(inst: ProblemInstance, restarts: int = 64, seed: int = 0,
                     mode: str = "auto", samples: int = 1_000_000) -> float:
    """Lower bound on the true p->q norm.

    p = inf with small n is enumerated exactly over the sign cube.  Grid
    mode samples the l_p sphere (up to ``samples`` points) and refines the
    leaders by Holder ascent; multistart mode runs seeded ascents only.
    """
    A, pair = inst.A, inst.pair
    n = A.shape[1]
    if mode == "auto":
        if math.isinf(pair.p) and n <= 20:
            mode = "enumerate"
        elif n <= 6:
            mode = "grid"
        else:
            mode = "multistart"
    if mode == "enumerate":
        if not math.isinf(pair.p):
            raise DomainError("sign enumeration is exact only for p = inf")
        return _enumerate_sign_norm(A, pair.q)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xB0,)))
    best = 0.0
    starts = []
    if mode == "grid":
        if n > 6:
            raise DomainError("grid mode supported for n <= 6")
        X = _sample_p_sphere(rng, n, pair.p, samples)
        vals = np.sum(np.abs(X @ A.T) ** pair.q, axis=1)
        best = float(np.max(vals) ** (1.0 / pair.q))
        leaders = np.argsort(vals)[-10:]
        starts = [X[i] for i in leaders]
    elif mode != "multistart":
        raise DomainError(f"unknown mode {mode!r}")
    starts += [rng.standard_normal(n) for _ in range(restarts)]
    starts += [np.sign(rng.standard_normal(n)) for _ in range(4)]
    for x0 in starts:
        _, val = holder_ascent(A, pair, x0)
        best = max(best, val)
    return best


def load_matrix(path) -> np.ndarray:
    """Read a matrix from CSV rows of decimals or the JSON object format
    {"rows": m, "cols": n, "data": [...row-major...]}."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        try:
            m, n = int(obj["rows"]), int(obj["cols"])
            data = np.asarray(obj["data"], dtype=np.float64)
        except (KeyError, TypeError) as exc:
            raise DomainError(f"bad JSON matrix in {path}: {exc}") from exc
        if data.size != m * n:
            raise DomainError(f"JSON matrix in {path}: {data.size} entries for {m}x{n}")
        return data.reshape(m, n)
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append([float(tok) for tok in line.split(",")])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise DomainError(f"ragged or empty CSV matrix in {path}")
    return np.asarray(rows, dtype=np.float64)
