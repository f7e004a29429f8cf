"""Radial grids, fields, weighted quadrature, and the radial Laplacian.

Cell-centered finite volumes on [0, r_max] in dimension N.  Per-cell
volume and singular-measure weights are integrated exactly (closed form
in r^{N+s}), which keeps the quadrature of |x|^sigma dx accurate down to
the first cell.  The Laplacian of f^m is the conservative two-point-flux
divergence with zero flux at the origin (symmetry) and at r_max.
"""

import math

import numpy as np

from .errors import OutOfRangeError, WeightNotIntegrableError


def unit_ball_volume(dim):
    """|B(0,1)| in dimension N."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


class RadialGrid:
    """Cell-centered radial grid with exact geometric weights.

    edges[0] = 0 < edges[1] < ... < edges[n] = r_max.  The default
    construction is uniform; `grading` > 1 concentrates cells near the
    origin (edges = r_max (i/n)^grading), where the singular potential
    and the profile-gradient singularity concentrate the error.
    """

    def __init__(self, dim, edges):
        dim = int(dim)
        if dim < 1:
            raise OutOfRangeError("dim", f"must be >= 1, got {dim}")
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise OutOfRangeError("edges", "need at least two edge radii")
        if edges[0] != 0.0:
            raise OutOfRangeError("edges", "first cell must touch the origin")
        if np.any(np.diff(edges) <= 0.0):
            raise OutOfRangeError("edges", "edge radii must be strictly increasing")
        self.dim = dim
        self.edges = edges
        self.n_cells = edges.size - 1
        self.r_max = float(edges[-1])
        self.centers = 0.5 * (edges[:-1] + edges[1:])
        self.omega_n = unit_ball_volume(dim)
        # exact cell volumes: omega_N (r_{i+1}^N - r_i^N)
        self.volumes = self.omega_n * np.diff(edges ** dim)
        # sphere areas N omega_N r^{N-1} at interior faces (edges[1:-1])
        self.face_areas = dim * self.omega_n * edges[1:-1] ** (dim - 1)
        # distance between neighboring cell centers, one per interior face
        self.center_gaps = np.diff(self.centers)
        self.dr_min = float(np.min(np.diff(edges)))
        self._weight_cache = {}

    @classmethod
    def uniform(cls, dim, r_max, n_cells):
        return cls(dim, np.linspace(0.0, float(r_max), int(n_cells) + 1))

    @classmethod
    def graded(cls, dim, r_max, n_cells, grading=2.0):
        if grading < 1.0:
            raise OutOfRangeError("grading", f"must be >= 1, got {grading}")
        i = np.linspace(0.0, 1.0, int(n_cells) + 1)
        return cls(dim, float(r_max) * i ** float(grading))

    def spec(self):
        """Reconstructible description (uniform/graded grids only)."""
        i = np.linspace(0.0, 1.0, self.n_cells + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.log(self.edges[1:-1] / self.r_max) / np.log(i[1:-1])
        grading = float(g[0]) if g.size and np.allclose(g, g[0], rtol=1e-10) else None
        return {
            "dim": self.dim,
            "r_max": self.r_max,
            "n_cells": self.n_cells,
            "grading": grading if grading is not None else 1.0,
        }

    def singular_weights(self, s):
        """Exact per-cell integrals of N omega_N r^{N-1+s} dr.

        Finite for s > -N; raises WeightNotIntegrableError otherwise.
        s = 0 recovers the cell volumes.
        """
        s = float(s)
        if s <= -self.dim:
            raise WeightNotIntegrableError(f"weight exponent s={s} <= -N={-self.dim}")
        key = s
        w = self._weight_cache.get(key)
        if w is None:
            q = self.dim + s
            w = self.dim * self.omega_n * np.diff(self.edges ** q) / q
            self._weight_cache[key] = w
        return w

    def same_layout(self, other):
        return (
            self.dim == other.dim
            and self.n_cells == other.n_cells
            and np.array_equal(self.edges, other.edges)
        )


class RadialField:
    """Non-negative cell-centered samples of a radial function."""

    def __init__(self, grid, values, _check=True):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_cells,):
            raise OutOfRangeError(
                "values", f"expected shape ({grid.n_cells},), got {values.shape}"
            )
        if _check and np.any(values < 0.0):
            raise OutOfRangeError("values", "field values must be non-negative")
        self.grid = grid
        self.values = values

    def copy(self):
        return RadialField(self.grid, self.values.copy(), _check=False)

    def norm_inf(self):
        return float(np.max(self.values)) if self.values.size else 0.0

    def norm_lq(self, q):
        """L^q norm against the exact volume measure (q > 0)."""
        if q <= 0.0:
            raise OutOfRangeError("q", f"must be > 0, got {q}")
        return float(np.sum(self.values**q * self.grid.volumes)) ** (1.0 / q)

    def mass(self):
        return float(np.sum(self.values * self.grid.volumes))

    def support_radius(self, rel_tol=1e-12):
        """Outer edge of the last cell exceeding rel_tol * max."""
        vmax = self.norm_inf()
        if vmax == 0.0:
            return 0.0
        idx = np.nonzero(self.values > rel_tol * vmax)[0]
        if idx.size == 0:
            return 0.0
        return float(self.grid.edges[idx[-1] + 1])


def weighted_integral(field, power, weight_exponent):
    """Integral of f^q |x|^s dx with exact per-cell weights.

    `power` q > 0; `weight_exponent` s > -N.  The field is piecewise
    constant per cell, the radial weight is integrated in closed form,
    so the singular measure near the origin is never undersampled.
    """
    q = float(power)
    if q <= 0.0:
        raise OutOfRangeError("power", f"must be > 0, got {q}")
    w = field.grid.singular_weights(weight_exponent)
    return float(np.sum(field.values**q * w))


def _power(values, m):
    if m == 2.0:
        return values * values
    if m == 1.0:
        return values
    return values**m


def laplacian_of_power(field, m):
    """Conservative finite-volume divergence of grad(f^m).

    Two-point flux across each interior face with the exact sphere area;
    zero flux at the origin and at r_max.  Total mass of the output
    telescopes to zero exactly.
    """
    out = laplacian_of_power_values(field.values[None, :], field.grid, float(m))[0]
    return RadialField(field.grid, out, _check=False)


def laplacian_of_power_values(values, grid, m):
    """Array core of laplacian_of_power; values has shape (batch, n)."""
    g = _power(values, m)
    flux = (g[:, 1:] - g[:, :-1]) / grid.center_gaps
    fa = grid.face_areas * flux
    out = np.zeros_like(values)
    out[:, :-1] += fa
    out[:, 1:] -= fa
    out /= grid.volumes
    return out


def gaussian_bump(grid, amplitude, radius):
    """A exp(-(r/R)^2); effectively compact at several R."""
    r = grid.centers
    return RadialField(grid, float(amplitude) * np.exp(-((r / float(radius)) ** 2)))


def indicator_bump(grid, amplitude, radius):
    """A on [0, R), zero outside."""
    r = grid.centers
    return RadialField(grid, np.where(r < float(radius), float(amplitude), 0.0))


def poly_bump(grid, amplitude, radius, k=2):
    """A (1 - (r/R)^2)_+^k, compactly supported and C^{k-1}."""
    r = grid.centers
    z = np.maximum(1.0 - (r / float(radius)) ** 2, 0.0)
    return RadialField(grid, float(amplitude) * z ** float(k))


def barenblatt_values(r, t, m, dim, c=1.0):
    """Source-type self-similar solution of the pure diffusion equation.

    B(t, r) = t^{-N lam} (c - kap r^2 t^{-2 lam})_+^{1/(m-1)},
    lam = 1 / (N(m-1)+2), kap = lam (m-1) / (2m).
    """
    m = float(m)
    lam = 1.0 / (dim * (m - 1.0) + 2.0)
    kap = lam * (m - 1.0) / (2.0 * m)
    z = np.maximum(c - kap * np.asarray(r, dtype=float) ** 2 * t ** (-2.0 * lam), 0.0)
    return t ** (-dim * lam) * z ** (1.0 / (m - 1.0))


def barenblatt_field(grid, m, t, c=1.0):
    return RadialField(grid, barenblatt_values(grid.centers, t, m, grid.dim, c), _check=False)


def barenblatt_sup(t, m, dim, c=1.0):
    """max_x B(t, x) = t^{-N lam} c^{1/(m-1)}."""
    lam = 1.0 / (dim * (m - 1.0) + 2.0)
    return t ** (-dim * lam) * c ** (1.0 / (m - 1.0))


def barenblatt_support_radius(t, m, dim, c=1.0):
    lam = 1.0 / (dim * (m - 1.0) + 2.0)
    kap = lam * (m - 1.0) / (2.0 * m)
    return math.sqrt(c / kap) * t**lam


def save_field(path, field, t=None, config_hash=None):
    """One header line (grid spec) + CSV rows (r_center, value)."""
    spec = field.grid.spec()
    parts = [
        "# radial-field",
        f"dim={spec['dim']}",
        f"n_cells={spec['n_cells']}",
        f"r_max={spec['r_max']!r}",
        f"grading={spec['grading']!r}",
    ]
    if t is not None:
        parts.append(f"t={float(t)!r}")
    if config_hash is not None:
        parts.append(f"config_hash={config_hash}")
    with open(path, "w") as fh:
        fh.write(" ".join(parts) + "\n")
        fh.write("r_center,value\n")
        for r, v in zip(field.grid.centers, field.values):
            fh.write(f"{r!r},{v!r}\n")


def load_field(path):
    """Inverse of save_field; returns (field, header dict)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# radial-field"):
            raise OutOfRangeError("path", f"{path} is not a radial field file")
        meta = {}
        for tok in header.split()[2:]:
            k, _, v = tok.partition("=")
            meta[k] = v
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    dim = int(meta["dim"])
    n = int(meta["n_cells"])
    r_max = float(meta["r_max"])
    grading = float(meta.get("grading", 1.0))
    if grading == 1.0:
        grid = RadialGrid.uniform(dim, r_max, n)
    else:
        grid = RadialGrid.graded(dim, r_max, n, grading)
    if not np.allclose(grid.centers, data[:, 0], rtol=1e-12, atol=1e-15):
        raise OutOfRangeError("path", f"{path}: cell centers do not match the header grid spec")
    return RadialField(grid, data[:, 1]), meta
