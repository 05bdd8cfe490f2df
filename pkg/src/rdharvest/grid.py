"""Structured grids, coefficient fields and the fragmented-landscape generator.

Two domain kinds are supported: a space-periodic unit cell (one period of
a periodic medium, no duplicated endpoint nodes) and a bounded rectangle
with no-flux boundaries (endpoint nodes included).  Fields are flat
row-major arrays over the nodes; everything is immutable after
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidDomain, NonFiniteValue


class DomainKind(Enum):
    SP_PERIODIC = "sp-periodic"
    BOUNDED_NEUMANN = "bounded"


@dataclass(frozen=True)
class DomainSpec:
    """A validated rectangular grid (one period cell or a Neumann box)."""

    kind: DomainKind
    dim: int
    lengths: tuple
    resolution: tuple

    @property
    def spacing(self):
        """Per-axis grid spacing h_i."""
        if self.kind is DomainKind.SP_PERIODIC:
            return tuple(L / n for L, n in zip(self.lengths, self.resolution))
        return tuple(L / (n - 1) for L, n in zip(self.lengths, self.resolution))

    @property
    def node_count(self):
        return int(np.prod(self.resolution))

    @property
    def shape(self):
        return tuple(self.resolution)

    def axis_coords(self, axis):
        """Node coordinates along one axis (periodic cells omit the endpoint)."""
        n = self.resolution[axis]
        h = self.spacing[axis]
        return np.arange(n) * h

    def meshgrid(self):
        """Coordinate arrays shaped like the field, 'ij' indexing."""
        axes = [self.axis_coords(d) for d in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def node_coords(self, index):
        """Coordinates of the node with the given flat (row-major) index."""
        multi = np.unravel_index(index, self.shape)
        return tuple(self.axis_coords(d)[m] for d, m in enumerate(multi))

    def nearest_index(self, point):
        """Flat index of the node closest to a physical point."""
        multi = []
        for d in range(self.dim):
            n = self.resolution[d]
            h = self.spacing[d]
            i = int(round(point[d] / h))
            if self.kind is DomainKind.SP_PERIODIC:
                i %= n
            else:
                i = min(max(i, 0), n - 1)
            multi.append(i)
        return int(np.ravel_multi_index(tuple(multi), self.shape))


def build_domain(kind, dim, lengths, resolution) -> DomainSpec:
    """Validate parameters and build a DomainSpec.

    Raises InvalidDomain when dim is not 1 or 2, a length is not positive,
    or a resolution entry is below 4.
    """
    if isinstance(kind, str):
        try:
            kind = DomainKind(kind)
        except ValueError:
            raise InvalidDomain(f"unknown domain kind {kind!r}") from None
    if dim not in (1, 2):
        raise InvalidDomain(f"dim must be 1 or 2, got {dim}")
    lengths = tuple(float(L) for L in lengths)
    resolution = tuple(int(n) for n in resolution)
    if len(lengths) != dim or len(resolution) != dim:
        raise InvalidDomain(
            f"lengths and resolution must have {dim} entries, "
            f"got {len(lengths)} and {len(resolution)}"
        )
    if any(L <= 0 for L in lengths):
        raise InvalidDomain(f"lengths must be positive, got {lengths}")
    if any(n < 4 for n in resolution):
        raise InvalidDomain(f"resolution must be >= 4 per axis, got {resolution}")
    return DomainSpec(kind=kind, dim=dim, lengths=lengths, resolution=resolution)


@dataclass(frozen=True)
class ScalarField:
    """Grid-sampled real-valued function (flat row-major node values)."""

    domain: DomainSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size != self.domain.node_count:
            raise DimensionMismatch(
                f"field has {vals.size} values, domain has "
                f"{self.domain.node_count} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("field contains NaN or infinite values")
        vals = vals.reshape(-1).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.domain, values)

    def grid_view(self):
        """Values reshaped to the domain shape (read-only view)."""
        return self.values.reshape(self.domain.shape)


class FieldStats(NamedTuple):
    min: float
    max: float
    sup_norm: float
    l2_norm: float


def constant_field(domain, value) -> ScalarField:
    return ScalarField(domain, np.full(domain.node_count, float(value)))


def sample(domain, spec: Callable) -> ScalarField:
    """Evaluate a pointwise specification at every node.

    ``spec`` receives one coordinate array per axis (numpy-broadcastable)
    and must return real values; a scalar result is broadcast.  Sampling
    is deterministic: the same spec yields bit-identical fields.
    """
    mesh = domain.meshgrid()
    out = spec(*mesh)
    out = np.broadcast_to(np.asarray(out, dtype=float), domain.shape)
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue("pointwise specification produced NaN or infinity")
    return ScalarField(domain, out.reshape(-1))


@dataclass(frozen=True)
class LandscapeSpec:
    """Equally-spaced-disk growth landscape: k^2 disks per unit cell."""

    k: int
    mu_plus: float = 10.0
    mu_minus: float = -1.0
    target_fraction: float = 0.5

    def __post_init__(self):
        if self.k < 1:
            raise InvalidDomain(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.target_fraction < 1.0:
            raise InvalidDomain(
                f"target_fraction must lie in (0,1), got {self.target_fraction}"
            )
        if 2.0 * self.disk_radius >= 1.0 / self.k:
            raise InvalidDomain(
                "disks overlap: target_fraction too large for disjoint disks"
            )

    @property
    def disk_radius(self):
        return math.sqrt(self.target_fraction / (self.k**2 * math.pi))


def make_landscape(domain, landscape: LandscapeSpec) -> ScalarField:
    """Two-valued growth field: mu_plus inside the disks, mu_minus outside.

    Disks of radius sqrt(target_fraction / (k^2 pi)) are centered at
    ((i+1/2)/k, (j+1/2)/k).  Membership is decided at node centers.
    """
    if domain.dim != 2:
        raise InvalidDomain("landscape fields require a 2-D domain")
    if any(abs(L - 1.0) > 1e-12 for L in domain.lengths):
        raise InvalidDomain("landscape fields require a unit cell (lengths [1,1])")
    x, y = domain.meshgrid()
    # Fold every node into its 1/k-subcell; each subcell holds one disk.
    fx = np.mod(x * landscape.k, 1.0) - 0.5
    fy = np.mod(y * landscape.k, 1.0) - 0.5
    r_scaled = landscape.disk_radius * landscape.k
    inside = fx**2 + fy**2 <= r_scaled**2
    mu = np.where(inside, landscape.mu_plus, landscape.mu_minus)
    return ScalarField(domain, mu.reshape(-1))


def field_stats(field: ScalarField) -> FieldStats:
    """Exact reductions over node values; the L2 norm uses the uniform
    quadrature weight prod(h_i)."""
    v = field.values
    weight = float(np.prod(field.domain.spacing))
    return FieldStats(
        min=float(v.min()),
        max=float(v.max()),
        sup_norm=float(np.abs(v).max()),
        l2_norm=float(math.sqrt(weight * float(np.dot(v, v)))),
    )


@dataclass(frozen=True)
class CoefficientSet:
    """Diffusion, growth, saturation and harvesting-profile fields with
    cached extrema (nu_lo/nu_hi and h_lo/h_hi feed the threshold formulas)."""

    a: ScalarField
    mu: ScalarField
    nu: ScalarField
    h: ScalarField
    nu_lo: float = field(init=False)
    nu_hi: float = field(init=False)
    h_lo: float = field(init=False)
    h_hi: float = field(init=False)

    def __post_init__(self):
        dom = self.a.domain
        for name in ("mu", "nu", "h"):
            if getattr(self, name).domain != dom:
                raise InvalidDomain(f"coefficient {name} lives on a different domain")
        object.__setattr__(self, "nu_lo", float(self.nu.values.min()))
        object.__setattr__(self, "nu_hi", float(self.nu.values.max()))
        object.__setattr__(self, "h_lo", float(self.h.values.min()))
        object.__setattr__(self, "h_hi", float(self.h.values.max()))

    @property
    def domain(self):
        return self.a.domain


def make_coefficients(a, mu, nu, h, ellipticity_floor=1e-8) -> CoefficientSet:
    """Bundle coefficient fields, enforcing the standing assumptions:
    a >= ellipticity_floor, nu > 0 and h > 0 everywhere."""
    if float(a.values.min()) < ellipticity_floor:
        raise InvalidDomain(
            f"diffusion coefficient dips below the ellipticity floor "
            f"{ellipticity_floor}"
        )
    if float(nu.values.min()) <= 0.0:
        raise InvalidDomain("saturation coefficient must be positive")
    if float(h.values.min()) <= 0.0:
        raise InvalidDomain("harvesting profile must be positive")
    return CoefficientSet(a=a, mu=mu, nu=nu, h=h)


# --- field import/export ----------------------------------------------------

_KIND_TOKEN = {
    DomainKind.SP_PERIODIC: "sp-periodic",
    DomainKind.BOUNDED_NEUMANN: "bounded",
}


def field_to_csv(field: ScalarField, path):
    """Write `x,value` (1-D) or `x,y,value` (2-D) rows, 12 significant digits."""
    mesh = field.domain.meshgrid()
    cols = [m.reshape(-1) for m in mesh] + [field.values]
    header = ("x,value" if field.domain.dim == 1 else "x,y,value") + "\n"
    with open(path, "w") as f:
        f.write(header)
        for row in zip(*cols):
            f.write(",".join(f"{v:.12g}" for v in row) + "\n")


def field_to_pgm(field: ScalarField, path):
    """Write an ASCII PGM (P2) raster, values affinely scaled to 0..65535.

    The affine map is recorded in a comment line so values can be
    recovered: value = offset + scale * pixel.
    """
    v = field.grid_view()
    if field.domain.dim == 1:
        v = v.reshape(1, -1)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    scale = span / 65535.0 if span > 0 else 0.0
    pixels = np.zeros_like(v, dtype=int) if span == 0 else np.rint(
        (v - lo) / span * 65535.0
    ).astype(int)
    height, width = v.shape
    with open(path, "w") as f:
        f.write("P2\n")
        f.write(f"# affine value = {lo:.12g} + {scale:.12g} * pixel\n")
        f.write(f"{width} {height}\n65535\n")
        for row in pixels:
            f.write(" ".join(str(p) for p in row) + "\n")


def save_field(field: ScalarField, path):
    """Write the CLI field-file format: a header line
    `domain <kind> <dim> <lengths> <resolution>` then one value per line."""
    dom = field.domain
    lengths = ",".join(f"{L:.12g}" for L in dom.lengths)
    res = ",".join(str(n) for n in dom.resolution)
    with open(path, "w") as f:
        f.write(f"domain {_KIND_TOKEN[dom.kind]} {dom.dim} {lengths} {res}\n")
        for v in field.values:
            f.write(f"{v:.17g}\n")


def load_field(path) -> ScalarField:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 5 or header[0] != "domain":
            raise InvalidDomain(f"malformed field-file header in {path}")
        _, kind, dim, lengths, res = header
        domain = build_domain(
            kind,
            int(dim),
            [float(t) for t in lengths.split(",")],
            [int(t) for t in res.split(",")],
        )
        values = np.array([float(line) for line in f if line.strip()])
    return ScalarField(domain, values)
