"""Principal eigenpair of the heterogeneous elliptic operator.

Solves  -div(a grad phi) - mu phi = lambda1 phi  with the domain's
boundary conditions, normalized to ||phi||_inf = 1 with phi > 0.  The
smallest eigenvalue carries the persistence information: lambda1 < 0
means the unharvested population survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDomain, NonPositiveEigenvector, NotConverged
from .grid import ScalarField
from .operators import SparseOperator, solve_shifted


@dataclass(frozen=True)
class PrincipalPair:
    """Principal eigenvalue, sup-normalized positive eigenfunction and its
    minimum value (the quantity entering the harvesting thresholds)."""

    lambda1: float
    phi: ScalarField
    phi_min: float
    residual: float


def principal_eigenpair(
    op: SparseOperator,
    mu: ScalarField,
    tol=1e-10,
    max_iter=2000,
    cg_tol=1e-12,
    residual_tol=None,
    x0=None,
) -> PrincipalPair:
    """Smallest eigenpair of (op - diag(mu)) by shifted inverse power iteration.

    The shift sigma = min(-mu) - 1 makes (op - diag(mu) - sigma I)
    positive definite with smallest eigenvalue >= 1, so every inverse
    step is a well-conditioned CG solve.  Iterates start from the
    all-ones vector (strictly positive, never orthogonal to the
    principal mode) and are renormalized to sup-norm 1 at every step.

    Stops when the Rayleigh-quotient increment falls below ``tol`` and
    the eigen-residual ||A phi - lambda phi||_2 / ||phi||_2 is below
    ``residual_tol`` (default 1e-8 * (1 + |lambda|)).  ``x0`` warm-starts
    the iteration, which pays off when tracking eigenvalues along a
    continuation branch.
    """
    if mu.domain != op.domain:
        raise InvalidDomain("mu and operator domains differ")
    mu_v = mu.values
    sigma = float((-mu_v).min()) - 1.0
    weights = -mu_v - sigma  # op + diag(weights) = A - sigma I

    def rayleigh_and_residual(vec):
        a_vec = op.matrix @ vec - mu_v * vec
        vv = float(vec @ vec)
        lam = float(vec @ a_vec) / vv
        res = float(np.linalg.norm(a_vec - lam * vec)) / np.sqrt(vv)
        return lam, res

    x = np.ones(op.n) if x0 is None else np.array(x0, dtype=float)
    x /= np.abs(x).max()
    lam, res = rayleigh_and_residual(x)
    warm = None
    for _ in range(max_iter):
        res_tol = residual_tol if residual_tol is not None else 1e-8 * (1.0 + abs(lam))
        y = solve_shifted(op, 1.0, weights, x, cg_tol, x0=warm)
        peak = float(np.abs(y).max())
        if peak == 0.0:
            raise NotConverged("inverse iteration produced the zero vector")
        if y[int(np.argmax(np.abs(y)))] < 0:
            y = -y
        x = y / peak
        lam_new, res = rayleigh_and_residual(x)
        increment = abs(lam_new - lam)
        lam = lam_new
        warm = x / max(lam - sigma, 1.0)
        if increment <= tol * (1.0 + abs(lam)) and res <= res_tol:
            break
    else:
        raise NotConverged(
            f"inverse iteration: increment/residual not below tolerance "
            f"after {max_iter} steps (residual {res:.3e})"
        )

    phi_vals = x / x.max() if x.max() > 0 else x
    if phi_vals.min() <= 0.0:
        raise NonPositiveEigenvector(
            "principal eigenvector is not strictly positive"
        )
    phi = ScalarField(op.domain, phi_vals)
    return PrincipalPair(
        lambda1=lam, phi=phi, phi_min=float(phi_vals.min()), residual=res
    )
