"""q-lattice sampled functions and Jackson quadrature.

Grid points along each axis are +-q0^(a*k) for k in [-K, K]; every scaling
used by the derivative actions is a power of q0^a, so lattice operations
never interpolate.  Values are held in numpy arrays indexed by
(sign, k+K) per axis; sign index 0 is the positive branch.
"""

from __future__ import annotations

import csv
import math
from fractions import Fraction

import numpy as np

from .coeff import QScalar, qnum, eval_numeric
from .series import Series, degree
from .spaces import SpaceDescriptor, jackson_d
from .errors import (ArityMismatch, GridIncompatible, NonConvergent,
                     DenominatorVanishes)


# ---------------------------------------------------------------------------
# Symbolic pieces


def jackson_antiderivative(f: Series, i: int, a) -> Series:
    """Left inverse of jackson_d: x^m -> x^(m+e_i) / [[m_i + 1]]_{q^a}."""
    if not 1 <= i <= f.n:
        raise ArityMismatch(f"no coordinate {i} in arity-{f.n} series")
    a = Fraction(a)
    out = {}
    for m, c in f.terms.items():
        m2 = tuple(v + 1 if j == i - 1 else v for j, v in enumerate(m))
        out[m2] = c / qnum(m[i - 1] + 1, a)
    return Series(f.n, f.cap + 1, out)


def eval_series(f: Series, point, q0: float) -> complex:
    """Evaluate the truncated series at a numeric point."""
    if len(point) != f.n:
        raise ArityMismatch("point arity does not match the series")
    total = 0j
    for m, c in f.terms.items():
        v = complex(eval_numeric(c, q0))
        for x, e in zip(point, m):
            if e:
                v *= complex(x) ** e
        total += v
    return total


# ---------------------------------------------------------------------------
# Grids and sampled functions


class LatticeGrid:
    """Product grid of +-q0^(a*k), k in [-K, K], in each of n dimensions."""

    __slots__ = ("q0", "a", "K", "n", "_radii")

    def __init__(self, q0: float, a, K: int, n: int = 1):
        if not q0 > 1:
            raise GridIncompatible("grid requires q0 > 1")
        if K < 1:
            raise GridIncompatible("grid requires K >= 1")
        self.q0 = float(q0)
        self.a = Fraction(a)
        self.K = int(K)
        self.n = int(n)
        ks = np.arange(-self.K, self.K + 1, dtype=float)
        self._radii = self.q0 ** (float(self.a) * ks)

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def radii(self) -> np.ndarray:
        """Magnitudes q0^(a*k) indexed by k+K."""
        return self._radii

    def axis_values(self) -> np.ndarray:
        """Signed coordinates, shape (2, size); row 0 positive."""
        return np.stack([self._radii, -self._radii])

    def shift_steps(self, r) -> int:
        """Number of k-steps realizing a scaling by q^r; must be exact."""
        ratio = Fraction(r) / self.a
        if ratio.denominator != 1:
            raise GridIncompatible(f"scaling q^{r} does not preserve base {self.a}")
        return int(ratio)

    def same_layout(self, other: "LatticeGrid") -> bool:
        return (self.q0 == other.q0 and self.a == other.a
                and self.K == other.K and self.n == other.n)


class LatticeFn:
    """Complex values sampled on every point of a LatticeGrid.

    `margins` records, per axis, how many inner/outer k-slots hold
    edge-extrapolated rather than exact data (they accumulate under
    grid-preserving argument scalings).  Interior comparisons and
    convergence indicators skip those slots.
    """

    __slots__ = ("grid", "values", "damped", "margins")

    def __init__(self, grid: LatticeGrid, values: np.ndarray, damped: bool = False,
                 margins=None):
        shape = (2, grid.size) * grid.n
        values = np.asarray(values, dtype=complex).reshape(shape)
        if not np.all(np.isfinite(values)):
            raise GridIncompatible("lattice function must hold finite values")
        self.grid = grid
        self.values = values
        self.damped = damped
        self.margins = tuple(margins) if margins else ((0, 0),) * grid.n

    @staticmethod
    def from_callable(grid: LatticeGrid, fn, damped: bool = False) -> "LatticeFn":
        axes = grid.axis_values()           # (2, size)
        if grid.n == 1:
            vals = np.vectorize(lambda x: complex(fn(x)))(axes)
        else:
            mesh = np.meshgrid(*([axes.ravel()] * grid.n), indexing="ij")
            flat = np.vectorize(lambda *xs: complex(fn(*xs)))(*mesh)
            vals = flat.reshape((2, grid.size) * grid.n)
        return LatticeFn(grid, vals, damped)

    @staticmethod
    def from_series(grid: LatticeGrid, f: Series, q0: float = None,
                    damped: bool = False) -> "LatticeFn":
        if f.n != grid.n:
            raise ArityMismatch("series arity does not match the grid")
        q0 = grid.q0 if q0 is None else q0
        axes = grid.axis_values().ravel()
        coords = np.meshgrid(*([axes] * grid.n), indexing="ij")
        vals = np.zeros_like(coords[0], dtype=complex)
        for m, c in f.terms.items():
            term = complex(eval_numeric(c, q0)) * np.ones_like(vals)
            for x, e in zip(coords, m):
                if e:
                    term = term * x ** e
            vals += term
        return LatticeFn(grid, vals.reshape((2, grid.size) * grid.n), damped)

    # -- algebra ----------------------------------------------------------

    @staticmethod
    def _merge_margins(a, b):
        return tuple((max(x[0], y[0]), max(x[1], y[1])) for x, y in zip(a, b))

    def map_values(self, fn) -> "LatticeFn":
        return LatticeFn(self.grid, fn(self.values), self.damped, self.margins)

    def add(self, other: "LatticeFn") -> "LatticeFn":
        if not self.grid.same_layout(other.grid):
            raise GridIncompatible("grids differ")
        return LatticeFn(self.grid, self.values + other.values,
                         self.damped and other.damped,
                         self._merge_margins(self.margins, other.margins))

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        if not self.grid.same_layout(other.grid):
            raise GridIncompatible("grids differ")
        return LatticeFn(self.grid, self.values - other.values,
                         self.damped and other.damped,
                         self._merge_margins(self.margins, other.margins))

    def scale(self, c: complex) -> "LatticeFn":
        return LatticeFn(self.grid, self.values * c, self.damped, self.margins)

    def pointwise_mul(self, other: "LatticeFn") -> "LatticeFn":
        if not self.grid.same_layout(other.grid):
            raise GridIncompatible("grids differ")
        return LatticeFn(self.grid, self.values * other.values,
                         self.damped or other.damped,
                         self._merge_margins(self.margins, other.margins))

    def scale_axis(self, i: int, r) -> "LatticeFn":
        """g(x) with x^i replaced by q^r x^i; grid-preserving index shift.

        Slots shifted in from beyond the stored range take the nearest
        edge value: at the inner end that is a constant continuation
        toward the origin, at the outer end it is near zero for damped
        data.  The affected slots are recorded in `margins`.
        """
        steps = self.grid.shift_steps(r)
        if steps == 0:
            return self
        axis = 2 * (i - 1) + 1
        size = self.grid.size
        # index 0 is k = -K (innermost); g[k] = f[k + steps]
        out = np.zeros_like(self.values)
        src = [slice(None)] * self.values.ndim
        dst = [slice(None)] * self.values.ndim
        fill = [slice(None)] * self.values.ndim
        edge = [slice(None)] * self.values.ndim
        if steps > 0:
            dst[axis] = slice(0, size - steps)
            src[axis] = slice(steps, size)
            fill[axis] = slice(size - steps, size)
            edge[axis] = slice(size - 1, size)
        else:
            dst[axis] = slice(-steps, size)
            src[axis] = slice(0, size + steps)
            fill[axis] = slice(0, -steps)
            edge[axis] = slice(0, 1)
        out[tuple(dst)] = self.values[tuple(src)]
        out[tuple(fill)] = self.values[tuple(edge)]
        lo, hi = self.margins[i - 1]
        if steps > 0:
            lo, hi = max(0, lo - steps), hi + steps
        else:
            lo, hi = lo - steps, max(0, hi + steps)
        margins = list(self.margins)
        margins[i - 1] = (min(lo, size), min(hi, size))
        return LatticeFn(self.grid, out, self.damped, margins)

    def negate_axis(self, i: int) -> "LatticeFn":
        """g(x) with x^i replaced by -x^i (sign-branch swap)."""
        axis = 2 * (i - 1)
        return LatticeFn(self.grid, np.flip(self.values, axis=axis),
                         self.damped, self.margins)

    def interior_slices(self, pad: int = 0):
        """Index tuple selecting slots with exact (non-extrapolated) data."""
        sl = []
        for lo, hi in self.margins:
            sl.append(slice(None))
            sl.append(slice(lo + pad, self.grid.size - hi - pad or None))
        return tuple(sl)

    def interior_max(self, pad: int = 0) -> float:
        view = self.values[self.interior_slices(pad)]
        return float(np.max(np.abs(view))) if view.size else 0.0

    def value_at_origin_limit(self) -> complex:
        """Value at the innermost positive point of every axis."""
        idx = []
        for _ in range(self.grid.n):
            idx.extend([0, 0])
        return complex(self.values[tuple(idx)])


def lattice_jackson_d(f: LatticeFn, i: int, a) -> LatticeFn:
    """Jackson derivative on the lattice: (f(x) - f(q^a x)) / ((1-q^a) x)."""
    grid = f.grid
    if not 1 <= i <= grid.n:
        raise ArityMismatch(f"no coordinate {i} on this grid")
    shifted = f.scale_axis(i, a)
    denom = 1.0 - grid.q0 ** float(Fraction(a))
    axes = grid.axis_values()               # (2, size)
    shape = [1] * f.values.ndim
    shape[2 * (i - 1)] = 2
    shape[2 * (i - 1) + 1] = grid.size
    x = axes.reshape(shape)
    return LatticeFn(grid, (f.values - shifted.values) / (denom * x),
                     f.damped, shifted.margins)


def lattice_partial_act(space: SpaceDescriptor, flavor: str, i: int,
                        f: LatticeFn) -> LatticeFn:
    """Numeric realization of partial_act for flavors with stored rules."""
    rule = space.numeric_reps.get((flavor, i))
    if rule is None:
        from .errors import FlavorUnavailable
        raise FlavorUnavailable(f"no closed lattice rule for flavor {flavor}")
    g = f
    if rule.negate:
        for j in range(space.n):
            g = g.negate_axis(j + 1)
    for j, r in enumerate(rule.scalings):
        if r:
            g = g.scale_axis(j + 1, Fraction(r))
    g = lattice_jackson_d(g, rule.d_coord, Fraction(rule.d_base))
    pref = complex(eval_numeric(rule.prefactor, f.grid.q0))
    return g.scale(pref)


# ---------------------------------------------------------------------------
# Jackson quadrature


def jackson_integral_line(f: LatticeFn, a=None, tol: float = 1e-8):
    """Full-line Jackson integral of a 1D lattice function.

    Returns (value, tail_estimate); the tail estimate is the relative
    magnitude of the outermost-decade partial sum.  Raises NonConvergent
    when it exceeds `tol`.
    """
    grid = f.grid
    if grid.n != 1:
        raise ArityMismatch("line integral needs a 1D grid")
    a = grid.a if a is None else Fraction(a)
    if a != grid.a:
        raise GridIncompatible("integral base must match the grid base")
    w = grid.radii()                         # q0^(a k)
    contrib = w * (f.values[0] + f.values[1])
    scale = grid.q0 ** float(a) - 1.0        # -(1 - q^a)
    # the geometric tail below the innermost point sums to r_in/(q^a - 1),
    # so the missing core contributes r_in * f(0+-) on each sign branch
    total = scale * np.sum(contrib) + w[0] * (f.values[0, 0] + f.values[1, 0])
    tail_len = max(1, grid.size // 10)
    tail = scale * np.sum(contrib[-tail_len:])
    denom = max(abs(total), 1e-300)
    est = abs(tail) / denom
    if est > tol:
        raise NonConvergent(
            f"outer-decade tail {est:.3e} exceeds tolerance {tol:.3e}")
    return complex(total), float(est)


def _nested_jackson_sum(f: LatticeFn, tol: float):
    """Iterated line sums over all axes; returns (value, max tail estimate)."""
    grid = f.grid
    vals = f.values
    scale = grid.q0 ** float(grid.a) - 1.0
    w = grid.radii()
    worst = 0.0
    for _ in range(grid.n):
        # sum over the leading (sign, k) axis pair
        contrib = w.reshape((-1,) + (1,) * (vals.ndim - 2)) * (vals[0] + vals[1])
        # core correction: geometric tail below the innermost point
        total = (scale * np.sum(contrib, axis=0)
                 + w[0] * (vals[0, 0] + vals[1, 0]))
        tail_len = max(1, grid.size // 10)
        tail = scale * np.sum(contrib[-tail_len:], axis=0)
        denom = max(np.max(np.abs(total)), 1e-300)
        worst = max(worst, float(np.max(np.abs(tail)) / denom))
        vals = total
    value = complex(vals)
    if worst > tol:
        raise NonConvergent(
            f"outer-decade tail {worst:.3e} exceeds tolerance {tol:.3e}")
    return value, worst


def integral_full_manin(space: SpaceDescriptor, f: LatticeFn,
                        tol: float = 1e-8):
    """Full-plane integral: prefactor times nested base-1/2 Jackson sums."""
    grid = f.grid
    if grid.n != space.n:
        raise ArityMismatch("grid dimension does not match the space")
    if grid.a != space.integral_base:
        raise GridIncompatible(
            f"full-space integral needs grid base {space.integral_base}")
    value, worst = _nested_jackson_sum(f, tol)
    pref = complex(eval_numeric(space.integral_prefactor, grid.q0))
    return pref * value, worst


# ---------------------------------------------------------------------------
# q-Taylor translation


def qtaylor_translate(space: SpaceDescriptor, f: LatticeFn, offset,
                      order: int, tol: float = None):
    """Numeric translation by the coproduct series, truncated at `order`.

    Returns (translated LatticeFn, magnitude of the last retained order).
    Raises NonConvergent when the per-order magnitudes grow across the
    last three orders.
    """
    grid = f.grid
    if len(offset) != grid.n:
        raise ArityMismatch("offset arity does not match the grid")
    if space.n != grid.n:
        raise ArityMismatch("space arity does not match the grid")
    from .coeff import qfact
    if space.n == 1:
        base = Fraction(1)
    else:
        base = Fraction(-2)
    acc = np.zeros_like(f.values)
    margins = f.margins
    mags = []
    for total in range(order + 1):
        layer = np.zeros_like(f.values)
        layer_margins = f.margins
        for k1 in range(total + 1):
            if space.n == 1:
                if k1 != total:
                    continue
                ks = (k1,)
            else:
                ks = (k1, total - k1)
            g = f
            if space.n == 2:
                for _ in range(ks[1]):
                    g = lattice_jackson_d(g, 2, base)
                for _ in range(ks[0]):
                    g = lattice_jackson_d(g, 1, base)
                if ks[1]:
                    g = g.scale_axis(1, Fraction(-ks[1]))
                norm = eval_numeric(qfact(ks[0], base) * qfact(ks[1], base), grid.q0)
            else:
                for _ in range(ks[0]):
                    g = lattice_jackson_d(g, 1, base)
                norm = eval_numeric(qfact(ks[0], base), grid.q0)
            coef = 1.0 + 0j
            for y, e in zip(offset, ks):
                if e:
                    coef *= complex(y) ** e
            layer = layer + g.values * (coef / complex(norm))
            layer_margins = LatticeFn._merge_margins(layer_margins, g.margins)
        acc = acc + layer
        margins = LatticeFn._merge_margins(margins, layer_margins)
        mags.append(LatticeFn(grid, layer, f.damped, layer_margins).interior_max())
    floor = (tol if tol is not None else 1e-8) * max(f.interior_max(), 1e-300)
    if order >= 2 and mags[-1] > mags[-2] > mags[-3] and mags[-1] > floor:
        raise NonConvergent(
            "translation series magnitudes grew over the last three orders: "
            + ", ".join(f"{m:.3e}" for m in mags[-3:]))
    return (LatticeFn(grid, acc, f.damped, margins),
            mags[-1] if mags else 0.0)


# ---------------------------------------------------------------------------
# CSV import/export


def write_csv(path, f: LatticeFn) -> None:
    """Columns: k per axis, sign per axis (+1/-1), real, imag."""
    grid = f.grid
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        header = [f"k{i+1}" for i in range(grid.n)]
        header += [f"s{i+1}" for i in range(grid.n)]
        header += ["real", "imag"]
        wr.writerow(header)
        it = np.ndindex(*f.values.shape)
        for idx in it:
            ks = [idx[2 * i + 1] - grid.K for i in range(grid.n)]
            ss = [1 - 2 * idx[2 * i] for i in range(grid.n)]
            v = f.values[idx]
            wr.writerow(ks + ss + [repr(float(v.real)), repr(float(v.imag))])


def read_csv(path, q0: float, a, K: int, n: int,
             damped: bool = False) -> LatticeFn:
    grid = LatticeGrid(q0, a, K, n)
    vals = np.zeros((2, grid.size) * n, dtype=complex)
    seen = 0
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if len(header) != 2 * n + 2:
            raise GridIncompatible("CSV column count does not match arity")
        for row in rd:
            ks = [int(v) for v in row[:n]]
            ss = [int(v) for v in row[n:2 * n]]
            idx = []
            for s, k in zip(ss, ks):
                if abs(k) > K or s not in (1, -1):
                    raise GridIncompatible("CSV row outside the grid")
                idx.extend([(1 - s) // 2, k + K])
            vals[tuple(idx)] = complex(float(row[2 * n]), float(row[2 * n + 1]))
            seen += 1
    if seen != vals.size:
        raise GridIncompatible(
            f"CSV holds {seen} points, grid needs {vals.size}")
    return LatticeFn(grid, vals, damped)
