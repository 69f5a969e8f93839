"""Theta norms of tensors and their minimization under affine measurements.

The level-k norm of X is the optimal value of

    min t   subject to   M(y) psd,  y_0 = t,  y_linear = X,

where M is the combinatorial moment matrix of the determinantal ideal and the
linear coordinates of y are pinned to the tensor entries.  Recovery swaps the
pinning for measurement equalities: the linear block becomes decision
variables Z constrained by Phi vec(Z) = b.

Variable layout of the cone programs built here: z[0] is t (the constant
coordinate), followed by one variable per basis monomial of degree >= 2, and,
in recovery mode, one variable per tensor entry.
"""

from __future__ import annotations

import numpy as np

from .ideals import (
    IdealSpec,
    MomentStructure,
    TensorFormat,
    moment_structure,
    moment_structure_order3_fast,
)
from .sdp import ConeProgram, SolverSettings, Solution, SolverError, solve
from .tensors import DenseTensor, Dims, svd_nuclear

__all__ = [
    "structure_for",
    "build_norm_program",
    "build_recovery_program",
    "theta_norm",
    "theta_minimize",
    "nuclear_norm_sdp",
]


def structure_for(spec: IdealSpec, k: int) -> MomentStructure:
    """Moment structure for a spec, preferring the order-3 closed form.

    For order-3 tensors at level 1 the closed-form assembly is used for every
    supported format: TT and HOSVD share the full ideal (the equality the
    test suite certifies computationally), so one structure serves all three.
    """
    if spec.format is TensorFormat.CUSTOM:
        raise ValueError("theta norms are defined for FULL, TT, and HOSVD formats")
    if spec.dims.order == 3 and k == 1:
        return moment_structure_order3_fast(spec.dims)
    return moment_structure(spec, k)


def _variable_maps(structure: MomentStructure, recovery: bool):
    """Map basis coordinates to cone-program variables.

    Returns (n_vars, var_of_coord) where var_of_coord[l] is the z-index of
    coordinate l, or None when the coordinate is pinned to a tensor entry
    (norm mode only).
    """
    basis = structure.basis
    n = structure.n_linear
    n_y = basis.size - 1 - n
    var_of_coord: list[int | None] = []
    for l, mono in enumerate(basis.monomials):
        if mono.degree == 0:
            var_of_coord.append(0)
        elif mono.degree == 1:
            var_of_coord.append(1 + n_y + mono.exps[0][0] if recovery else None)
        else:
            var_of_coord.append(1 + (l - 1 - n))
    n_vars = 1 + n_y + (n if recovery else 0)
    return n_vars, var_of_coord


def build_norm_program(structure: MomentStructure, X: DenseTensor) -> ConeProgram:
    """SDP whose optimum is the theta norm of X."""
    if X.dims != structure.spec.dims:
        raise ValueError(f"tensor dims {X.dims} do not match structure dims {structure.spec.dims}")
    n_vars, var_of_coord = _variable_maps(structure, recovery=False)
    entries = []
    for (i, j), form in structure.entries.items():
        for l, c in form:
            var = var_of_coord[l]
            if var is None:
                val = float(c) * float(X.values[structure.basis.monomials[l].exps[0][0]])
                if val:
                    entries.append((None, i, j, val))
            else:
                entries.append((var, i, j, float(c)))
    objective = np.zeros(n_vars)
    objective[0] = 1.0
    return ConeProgram(
        dim_z=n_vars,
        psd_dim=structure.psd_dim,
        objective=objective,
        psd_entries=tuple(entries),
    )


def build_recovery_program(
    structure: MomentStructure, phi: np.ndarray, b: np.ndarray
) -> ConeProgram:
    """SDP for theta-norm minimization subject to Phi vec(Z) = b."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    n = structure.n_linear
    if phi.shape[1] != n:
        raise ValueError(f"measurement map has {phi.shape[1]} columns, expected {n}")
    if phi.shape[0] != b.size:
        raise ValueError("measurement count does not match right-hand side")
    if not np.all(np.isfinite(phi)):
        raise ValueError("measurement map has non-finite entries")
    n_vars, var_of_coord = _variable_maps(structure, recovery=True)
    entries = []
    for (i, j), form in structure.entries.items():
        for l, c in form:
            entries.append((var_of_coord[l], i, j, float(c)))
    objective = np.zeros(n_vars)
    objective[0] = 1.0
    n_y = n_vars - 1 - n
    A = np.zeros((b.size, n_vars))
    A[:, 1 + n_y :] = phi
    return ConeProgram(
        dim_z=n_vars,
        psd_dim=structure.psd_dim,
        objective=objective,
        psd_entries=tuple(entries),
        eq_matrix=A,
        eq_rhs=b,
    )


def theta_norm(
    X: DenseTensor,
    spec: IdealSpec | None = None,
    k: int = 1,
    settings: SolverSettings = SolverSettings(),
) -> float:
    """Level-k theta norm of a tensor, by solving the moment SDP."""
    if spec is None:
        spec = IdealSpec(X.dims)
    structure = structure_for(spec, k)
    sol = solve(build_norm_program(structure, X), settings)
    if not sol.optimal:
        raise SolverError(
            f"theta norm SDP did not converge: status={sol.status}, "
            f"residuals={sol.residuals}"
        )
    return sol.objective_value


def theta_minimize(
    phi: np.ndarray,
    b: np.ndarray,
    spec: IdealSpec,
    k: int = 1,
    settings: SolverSettings = SolverSettings(),
    warm_start: tuple | None = None,
    return_solution: bool = False,
):
    """Minimize the theta norm over tensors satisfying Phi vec(Z) = b.

    Returns (Z, t) with Z read from the linear block of the minimizer; with
    ``return_solution=True`` the full solver output is appended.  A max-iter
    iterate is returned as-is (callers judge it by reconstruction error); a
    suspected-infeasible status raises.
    """
    structure = structure_for(spec, k)
    program = build_recovery_program(structure, phi, b)
    sol = solve(program, settings, warm_start=warm_start)
    if sol.status == "infeasible_suspected":
        raise SolverError(f"recovery SDP looks infeasible: residuals={sol.residuals}")
    n = structure.n_linear
    Z = DenseTensor(spec.dims, sol.z[-n:])
    if return_solution:
        return Z, sol.objective_value, sol
    return Z, sol.objective_value


def nuclear_norm_sdp(X: np.ndarray, settings: SolverSettings = SolverSettings()) -> float:
    """Matrix nuclear norm via the standard block SDP.

        min (tr W + tr Z) / 2   s.t.   [[W, X], [X', Z]] psd

    Cross-validates the moment-matrix route; agrees with the singular value
    sum to solver accuracy.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    m, n = X.shape
    entries = []
    c = []
    k = 0
    for i in range(m):
        for j in range(i, m):
            entries.append((k, i, j, 1.0))
            c.append(1.0 if i == j else 0.0)
            k += 1
    for i in range(n):
        for j in range(i, n):
            entries.append((k, m + i, m + j, 1.0))
            c.append(1.0 if i == j else 0.0)
            k += 1
    for i in range(m):
        for j in range(n):
            if X[i, j]:
                entries.append((None, i, m + j, float(X[i, j])))
    program = ConeProgram(
        dim_z=k,
        psd_dim=m + n,
        objective=0.5 * np.array(c),
        psd_entries=tuple(entries),
    )
    sol = solve(program, settings)
    if not sol.optimal:
        raise SolverError(f"nuclear norm SDP did not converge: {sol.residuals}")
    return sol.objective_value
