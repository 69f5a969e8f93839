"""Dense semidefinite programming by operator splitting.

Solves problems of the form

    minimize    c' z
    subject to  M(z) = C + sum_i z_i A_i  is positive semidefinite,
                A z = b,

with symmetric matrices held in packed (scaled upper triangle) form so the
cone projection and the affine algebra share one representation.  The solver
alternates a projection onto the affine constraint set (factorized once per
program and reused across iterations) with a projection onto the PSD cone,
plus scaled dual updates and over-relaxation.  The penalty parameter is
rebalanced from the residuals; thanks to a Schur-complement formulation the
rebalancing never triggers a refactorization.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

__all__ = [
    "ConeProgram",
    "SolverSettings",
    "Solution",
    "SolverError",
    "psd_project",
    "solve",
    "program_to_json",
    "program_from_json",
]


class SolverError(RuntimeError):
    """Numerical failure inside the solver (eigendecomposition, factorization)."""


# Entry of the PSD map: (variable index or None for the constant block,
# row, col, value); only the upper triangle (row <= col) may be specified and
# the symmetric mirror is implied.
PsdEntry = tuple[int | None, int, int, float]


@dataclass(frozen=True)
class ConeProgram:
    """Linear objective over z with an affine PSD constraint and equalities."""

    dim_z: int
    psd_dim: int
    objective: np.ndarray = field(repr=False)
    psd_entries: tuple[PsdEntry, ...] = field(repr=False)
    eq_matrix: np.ndarray | None = field(repr=False, default=None)
    eq_rhs: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        if c.size != self.dim_z:
            raise ValueError(f"objective has {c.size} entries, expected {self.dim_z}")
        object.__setattr__(self, "objective", c)
        for idx, i, j, _v in self.psd_entries:
            if idx is not None and not 0 <= idx < self.dim_z:
                raise ValueError(f"psd entry references variable {idx} out of range")
            if not (0 <= i <= j < self.psd_dim):
                raise ValueError(f"psd entry ({i},{j}) must satisfy 0 <= i <= j < psd_dim")
        if (self.eq_matrix is None) != (self.eq_rhs is None):
            raise ValueError("equality matrix and rhs must be given together")
        if self.eq_matrix is not None:
            A = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
            b = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
            if A.shape != (b.size, self.dim_z):
                raise ValueError(f"equality matrix shape {A.shape} does not match")
            object.__setattr__(self, "eq_matrix", A)
            object.__setattr__(self, "eq_rhs", b)

    @property
    def n_eq(self) -> int:
        return 0 if self.eq_rhs is None else self.eq_rhs.size

    def constant_matrix(self) -> np.ndarray:
        C = np.zeros((self.psd_dim, self.psd_dim))
        for idx, i, j, v in self.psd_entries:
            if idx is None:
                C[i, j] += v
                if i != j:
                    C[j, i] += v
        return C

    def coefficient_matrix(self, index: int) -> np.ndarray:
        M = np.zeros((self.psd_dim, self.psd_dim))
        for idx, i, j, v in self.psd_entries:
            if idx == index:
                M[i, j] += v
                if i != j:
                    M[j, i] += v
        return M

    def assemble(self, z: np.ndarray) -> np.ndarray:
        """The symmetric matrix M(z)."""
        z = np.asarray(z, dtype=float)
        M = np.zeros((self.psd_dim, self.psd_dim))
        for idx, i, j, v in self.psd_entries:
            val = v if idx is None else v * z[idx]
            M[i, j] += val
            if i != j:
                M[j, i] += val
        return M


@dataclass(frozen=True)
class SolverSettings:
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    max_iter: int = 200_000
    rho: float = 1.0
    over_relax: float = 1.6
    adaptive_rho: bool = True
    check_every: int = 20
    verbose: bool = False

    def __post_init__(self):
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if not 1.0 <= self.over_relax < 2.0:
            raise ValueError("over-relaxation factor must lie in [1, 2)")


@dataclass
class Solution:
    status: str  # "optimal" | "max_iter" | "infeasible_suspected"
    z: np.ndarray
    objective_value: float
    residuals: dict
    iterations: int
    solve_seconds: float
    warm_data: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def psd_project(S: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: clamp negative eigenvalues to zero."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(S).max()))
    if float(np.abs(S - S.T).max()) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    try:
        w, V = np.linalg.eigh(0.5 * (S + S.T))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigendecomposition failed on {S.shape[0]}x{S.shape[0]} matrix") from exc
    w = np.clip(w, 0.0, None)
    return (V * w) @ V.T


class _Packing:
    """Scaled upper-triangle vectorization preserving the trace inner product."""

    def __init__(self, n: int):
        self.n = n
        self.rows, self.cols = np.triu_indices(n)
        self.weights = np.where(self.rows == self.cols, 1.0, np.sqrt(2.0))
        self.size = self.rows.size
        pos = np.zeros((n, n), dtype=int)
        pos[self.rows, self.cols] = np.arange(self.size)
        self.position = pos

    def pack(self, M: np.ndarray) -> np.ndarray:
        return M[self.rows, self.cols] * self.weights

    def unpack(self, v: np.ndarray) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        vals = v / self.weights
        M[self.rows, self.cols] = vals
        M[self.cols, self.rows] = vals
        return M

    def project_psd(self, v: np.ndarray) -> np.ndarray:
        M = self.unpack(v)
        try:
            w, V = np.linalg.eigh(M)
        except np.linalg.LinAlgError as exc:
            raise SolverError("eigendecomposition failed in cone projection") from exc
        if w[-1] <= 0.0:
            return np.zeros_like(v)
        pos = w > 0.0
        Mp = (V[:, pos] * w[pos]) @ V[:, pos].T
        return self.pack(Mp)


class _Workspace:
    """Factorizations shared across iterations (and across warm-started solves)."""

    def __init__(self, program: ConeProgram):
        self.program = program
        self.packing = _Packing(program.psd_dim)
        p = self.packing
        rows, cols, vals = [], [], []
        h = np.zeros(p.size)
        for idx, i, j, v in program.psd_entries:
            r = p.position[i, j]
            w = v * (1.0 if i == j else np.sqrt(2.0))
            if idx is None:
                h[r] += w
            else:
                rows.append(r)
                cols.append(idx)
                vals.append(w)
        self.h = h
        self.P = sp.csr_matrix(
            (vals, (rows, cols)), shape=(p.size, program.dim_z)
        )
        self.PT = self.P.T.tocsr()
        gram = (self.PT @ self.P).toarray()
        # Tiny Tikhonov term if the coefficient matrices are not independent;
        # negligible against the stopping tolerances.
        try:
            self.chol = sla.cho_factor(gram, check_finite=False)
            self.regularized = False
        except np.linalg.LinAlgError:
            jitter = 1e-10 * max(1.0, gram.diagonal().max())
            self.chol = sla.cho_factor(
                gram + jitter * np.eye(program.dim_z), check_finite=False
            )
            self.regularized = True
        if program.n_eq:
            A = program.eq_matrix
            self.W = sla.cho_solve(self.chol, A.T, check_finite=False)
            S = A @ self.W
            try:
                self.schur = sla.cho_factor(S, check_finite=False)
                self.schur_pinv = None
            except np.linalg.LinAlgError:
                self.schur = None
                self.schur_pinv = np.linalg.pinv(S)
        else:
            self.W = None

    def solve_affine(self, rhs1: np.ndarray, rho: float) -> np.ndarray:
        """Minimize the quadratic model subject to the equalities."""
        t1 = sla.cho_solve(self.chol, rhs1, check_finite=False)
        prog = self.program
        if not prog.n_eq:
            return t1
        g = prog.eq_matrix @ t1 - prog.eq_rhs
        if self.schur is not None:
            nu = rho * sla.cho_solve(self.schur, g, check_finite=False)
        else:
            nu = rho * (self.schur_pinv @ g)
        return t1 - self.W @ (nu / rho)


def solve(
    program: ConeProgram,
    settings: SolverSettings = SolverSettings(),
    warm_start: tuple | None = None,
) -> Solution:
    """Run the splitting iteration until the residual criteria are met.

    Returns status "optimal" only when primal, dual, and equality residuals
    pass the tolerance test and an independent eigenvalue check confirms
    M(z) is PSD up to 10x the tolerance.
    """
    t_start = time.perf_counter()
    ws = _Workspace(program)
    pk = ws.packing
    nz, pp = program.dim_z, pk.size
    c = program.objective
    h = ws.h
    rho = settings.rho

    if warm_start is not None:
        z, s, u = (np.array(v, dtype=float) for v in warm_start[:3])
        if len(warm_start) > 3:
            rho = float(warm_start[3])
    else:
        z = np.zeros(nz)
        s = pk.project_psd(h + ws.P @ z)
        u = np.zeros(pp)

    sqrt_p = np.sqrt(pp)
    sqrt_n = np.sqrt(nz)
    b_norm = 0.0 if program.eq_rhs is None else float(np.linalg.norm(program.eq_rhs))
    status = "max_iter"
    iterations = settings.max_iter
    r_prim = r_dual = np.inf
    eq_res = 0.0
    alpha = settings.over_relax
    stall_best = np.inf
    stall_mark = 0

    for it in range(1, settings.max_iter + 1):
        rhs1 = ws.PT @ (s - u - h) - c / rho
        z = ws.solve_affine(rhs1, rho)
        pz = ws.P @ z + h
        pz_relaxed = alpha * pz + (1.0 - alpha) * s
        s_prev = s
        s = pk.project_psd(pz_relaxed + u)
        u = u + pz_relaxed - s

        if it % settings.check_every and it != settings.max_iter:
            continue

        r_prim = float(np.linalg.norm(pz - s))
        r_dual = float(rho * np.linalg.norm(ws.PT @ (s - s_prev)))
        eps_pri = sqrt_p * settings.eps_abs + settings.eps_rel * max(
            float(np.linalg.norm(pz)), float(np.linalg.norm(s))
        )
        eps_dual = sqrt_n * settings.eps_abs + settings.eps_rel * float(
            rho * np.linalg.norm(ws.PT @ u)
        )
        if settings.verbose and it % (settings.check_every * 50) == 0:
            print(f"  iter {it}: r_prim={r_prim:.2e} r_dual={r_dual:.2e} rho={rho:.2e}")
        if r_prim <= eps_pri and r_dual <= eps_dual:
            status = "optimal"
            iterations = it
            break

        # Divergence heuristic: primal residual stops improving while the
        # dual variable blows up.
        if r_prim < stall_best * 0.9:
            stall_best = r_prim
            stall_mark = it
        elif it - stall_mark > 20_000 and rho * float(np.linalg.norm(u)) > 1e9 * (
            1.0 + float(np.linalg.norm(h)) + b_norm
        ):
            status = "infeasible_suspected"
            iterations = it
            break

        if settings.adaptive_rho and it % 100 == 0 and it <= 50_000:
            scale_p = r_prim / max(eps_pri, 1e-300)
            scale_d = r_dual / max(eps_dual, 1e-300)
            if scale_p > 10.0 * scale_d and rho < 1e6:
                rho *= 2.0
                u /= 2.0
            elif scale_d > 10.0 * scale_p and rho > 1e-6:
                rho /= 2.0
                u *= 2.0

    M = program.assemble(z)
    min_eig = float(np.linalg.eigvalsh(M).min())
    if program.n_eq:
        eq_res = float(np.linalg.norm(program.eq_matrix @ z - program.eq_rhs))
    obj = float(c @ z)
    # Duality gap against the splitting dual variable U = -rho u.
    dual_obj = -float(h @ (-rho * u)) - (
        0.0
        if program.eq_rhs is None
        else float(np.dot(program.eq_rhs, _eq_dual(ws, c, u, rho)))
    )
    gap = abs(obj - dual_obj) / (1.0 + abs(obj) + abs(dual_obj))

    feas_tol = 10.0 * max(settings.eps_abs, settings.eps_rel * (1.0 + float(np.abs(M).max())))
    if status == "optimal":
        if min_eig < -feas_tol or eq_res > feas_tol * (1.0 + b_norm):
            status = "max_iter"

    return Solution(
        status=status,
        z=z,
        objective_value=obj,
        residuals={
            "primal": r_prim,
            "dual": r_dual,
            "gap": gap,
            "equality": eq_res,
            "psd_min_eig": min_eig,
        },
        iterations=iterations,
        solve_seconds=time.perf_counter() - t_start,
        warm_data=(z.copy(), s.copy(), u.copy(), rho),
    )


def _eq_dual(ws: _Workspace, c: np.ndarray, u: np.ndarray, rho: float) -> np.ndarray:
    """Recover the equality multiplier from the final iterate."""
    prog = ws.program
    if not prog.n_eq:
        return np.zeros(0)
    # c + P'U + A' nu = 0 with U = rho u  =>  least-squares nu.
    rhs = -(c + ws.PT @ (rho * u))
    nu, *_ = np.linalg.lstsq(prog.eq_matrix.T, rhs, rcond=None)
    return nu


def program_to_json(program: ConeProgram) -> str:
    """Self-describing dump for offline cross-checking."""
    doc = {
        "dim_z": program.dim_z,
        "psd_dim": program.psd_dim,
        "objective": program.objective.tolist(),
        "psd_entries": [
            [idx, i, j, v] for idx, i, j, v in program.psd_entries
        ],
        "eq_matrix": None if program.eq_matrix is None else program.eq_matrix.tolist(),
        "eq_rhs": None if program.eq_rhs is None else program.eq_rhs.tolist(),
        "description": "min objective.z subject to sum_i z_i A_i + C psd, eq_matrix z = eq_rhs; "
        "psd_entries rows are [variable_index_or_null, row, col, value] giving the "
        "upper triangle of A_i (C for null).",
    }
    return json.dumps(doc)


def program_from_json(text: str) -> ConeProgram:
    doc = json.loads(text)
    return ConeProgram(
        dim_z=doc["dim_z"],
        psd_dim=doc["psd_dim"],
        objective=np.array(doc["objective"], dtype=float),
        psd_entries=tuple(
            (idx if idx is None else int(idx), int(i), int(j), float(v))
            for idx, i, j, v in doc["psd_entries"]
        ),
        eq_matrix=None if doc["eq_matrix"] is None else np.array(doc["eq_matrix"]),
        eq_rhs=None if doc["eq_rhs"] is None else np.array(doc["eq_rhs"]),
    )
