"""Discrete divergence-form diffusion operator and shifted linear solves.

The assembled matrix represents -div(a grad .) with a second-order
finite-volume stencil: one conductance per grid face, equal to the
arithmetic mean of the adjacent node values of a divided by the squared
spacing.  Periodic cells wrap; bounded Neumann boxes simply omit the
boundary faces (zero flux), which makes every row sum exactly zero and
keeps the matrix symmetric with the M-matrix sign pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InvalidDomain, NotConverged
from .grid import DomainKind, DomainSpec, ScalarField


@dataclass(frozen=True)
class SparseOperator:
    """CSR operator for -div(a grad .) on its domain."""

    domain: DomainSpec
    matrix: sp.csr_matrix

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def row_offsets(self):
        return self.matrix.indptr

    @property
    def col_indices(self):
        return self.matrix.indices

    @property
    def entries(self):
        return self.matrix.data

    @property
    def diagonal(self):
        return self.matrix.diagonal()


def assemble(domain: DomainSpec, a: ScalarField) -> SparseOperator:
    """Assemble the discrete operator -div(a grad .).

    Face diffusivity is the arithmetic mean of the two adjacent node
    values of ``a``; each face between nodes i and j on axis d adds
    +g to both diagonal entries and -g to both off-diagonal entries,
    with g = a_face / h_d^2.
    """
    if a.domain != domain:
        raise InvalidDomain("diffusion field lives on a different domain")
    shape = domain.shape
    n_total = domain.node_count
    idx = np.arange(n_total).reshape(shape)
    av = a.grid_view()

    rows, cols, vals = [], [], []
    for d in range(domain.dim):
        h2 = domain.spacing[d] ** 2
        if domain.kind is DomainKind.SP_PERIODIC:
            i = idx.reshape(-1)
            j = np.roll(idx, -1, axis=d).reshape(-1)
            g = (0.5 * (av + np.roll(av, -1, axis=d)) / h2).reshape(-1)
        else:
            n_d = shape[d]
            lo = np.take(idx, np.arange(n_d - 1), axis=d).reshape(-1)
            hi = np.take(idx, np.arange(1, n_d), axis=d).reshape(-1)
            a_lo = np.take(av, np.arange(n_d - 1), axis=d).reshape(-1)
            a_hi = np.take(av, np.arange(1, n_d), axis=d).reshape(-1)
            i, j = lo, hi
            g = 0.5 * (a_lo + a_hi) / h2
        rows.extend([i, j, i, j])
        cols.extend([i, j, j, i])
        vals.extend([g, g, -g, -g])

    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_total, n_total),
    ).tocsr()
    return SparseOperator(domain=domain, matrix=matrix)


def apply(op: SparseOperator, field: ScalarField) -> ScalarField:
    """Matrix-vector product op @ field."""
    if field.domain != op.domain:
        raise DimensionMismatch("field and operator domains differ")
    return ScalarField(op.domain, op.matrix @ field.values)


def solve_shifted(op, shift, mass_weights, rhs, tol, max_iter=None, x0=None):
    """Solve (op + shift * diag(mass_weights)) y = rhs by preconditioned CG.

    The system must be positive definite; Jacobi (diagonal)
    preconditioning is used.  The returned solution is guaranteed to
    satisfy ||A y - rhs||_2 <= tol * ||rhs||_2 (the true residual is
    re-checked before returning).

    Raises NotConverged when the iteration hits ``max_iter`` without
    meeting the tolerance or when a nonpositive curvature p'Ap shows the
    shifted matrix is not positive definite.  ``mass_weights`` may be
    None (identity weights).  ``rhs`` and the result are ScalarFields
    when a ScalarField is passed, otherwise plain arrays.
    """
    as_field = isinstance(rhs, ScalarField)
    b = rhs.values if as_field else np.asarray(rhs, dtype=float)
    if b.size != op.n:
        raise DimensionMismatch("rhs size does not match operator")
    w = np.ones(op.n) if mass_weights is None else np.asarray(mass_weights, dtype=float)
    if isinstance(mass_weights, ScalarField):
        w = mass_weights.values
    if w.size != op.n:
        raise DimensionMismatch("mass_weights size does not match operator")
    shift_w = shift * w
    A = op.matrix

    def matvec(v):
        return A @ v + shift_w * v

    y = _pcg(matvec, op.diagonal + shift_w, b, tol, max_iter, x0)
    return ScalarField(op.domain, y) if as_field else y


def _pcg(matvec, diag, b, tol, max_iter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients with a true-residual check."""
    n = b.size
    if max_iter is None:
        max_iter = max(1000, 4 * n)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n)
    d = np.where(np.abs(diag) > 1e-300, diag, 1.0)
    if np.any(d <= 0.0):
        raise NotConverged("shifted matrix has a nonpositive diagonal (not PD)")
    inv_d = 1.0 / d

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(x)
    z = inv_d * r
    p = z.copy()
    rz = float(r @ z)
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * b_norm:
            break
        Ap = matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotConverged("nonpositive curvature in CG: matrix is not PD")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        z = inv_d * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    true_res = float(np.linalg.norm(b - matvec(x)))
    if true_res > tol * b_norm:
        raise NotConverged(
            f"CG residual {true_res / b_norm:.3e} above tolerance {tol:.3e} "
            f"after {max_iter} iterations"
        )
    return x
