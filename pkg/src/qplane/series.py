"""Sparse truncated multivariate power series over QScalar.

A Series holds terms keyed by multi-index up to a fixed truncation degree
(the cap).  All identities in this package hold order by order, so the cap
is simply the verification budget; operations on mixed caps truncate to the
minimum.  TensorSeries is the bi-graded variant used for coproducts,
braided products, and exponentials.
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import QScalar, q_power
from .errors import ArityMismatch

MultiIndex = tuple  # fixed-length tuple of non-negative ints


def degree(m: MultiIndex) -> int:
    return sum(m)


def unit_index(n: int, i: int) -> MultiIndex:
    """Multi-index e_i (1-based coordinate i) of length n."""
    return tuple(1 if j == i - 1 else 0 for j in range(n))


class Series:
    """Truncated formal power series; immutable."""

    __slots__ = ("n", "cap", "terms")

    def __init__(self, n: int, cap: int, terms=None):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "cap", cap)
        clean = {}
        if terms:
            for m, c in terms.items():
                if len(m) != n:
                    raise ArityMismatch(f"index {m} has wrong length")
                if degree(m) <= cap and not c.is_zero():
                    clean[m] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("Series is immutable")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def constant(n: int, cap: int, c: QScalar) -> "Series":
        return Series(n, cap, {(0,) * n: c})

    @staticmethod
    def monomial(n: int, cap: int, m: MultiIndex, c=None) -> "Series":
        from .coeff import ONE
        return Series(n, cap, {tuple(m): ONE if c is None else c})

    @staticmethod
    def coordinate(n: int, cap: int, i: int) -> "Series":
        return Series.monomial(n, cap, unit_index(n, i))

    # -- basic queries ----------------------------------------------------

    def coeff(self, m: MultiIndex) -> QScalar:
        from .coeff import ZERO
        return self.terms.get(tuple(m), ZERO)

    def eval_at_zero(self) -> QScalar:
        return self.coeff((0,) * self.n)

    def is_zero(self) -> bool:
        return not self.terms

    def max_degree(self) -> int:
        return max((degree(m) for m in self.terms), default=0)

    # -- linear structure -------------------------------------------------

    def add(self, other: "Series") -> "Series":
        if self.n != other.n:
            raise ArityMismatch("adding series of different arity")
        cap = min(self.cap, other.cap)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, None) + c if m in out else c
        return Series(self.n, cap, out)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scalar_mul(QScalar.from_int(-1)))

    def scalar_mul(self, c: QScalar) -> "Series":
        return Series(self.n, self.cap, {m: v * c for m, v in self.terms.items()})

    def map_coeffs(self, fn) -> "Series":
        return Series(self.n, self.cap, {m: fn(c) for m, c in self.terms.items()})

    # -- multiplicative structure -----------------------------------------

    def mul(self, other: "Series") -> "Series":
        """Ordinary commutative product, truncated at the smaller cap."""
        if self.n != other.n:
            raise ArityMismatch("multiplying series of different arity")
        cap = min(self.cap, other.cap)
        out = {}
        for m1, c1 in self.terms.items():
            d1 = degree(m1)
            for m2, c2 in other.terms.items():
                if d1 + degree(m2) > cap:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                if m in out:
                    out[m] = out[m] + c1 * c2
                else:
                    out[m] = c1 * c2
        return Series(self.n, cap, out)

    def __mul__(self, other):
        return self.mul(other)

    def tensor(self, other: "Series") -> "TensorSeries":
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[(m1, m2)] = c1 * c2
        return TensorSeries(self.n, other.n, self.cap, other.cap, out)

    # -- diagonal operators -----------------------------------------------

    def scale_arg(self, i: int, r) -> "Series":
        """Substitute x^i -> q^r x^i: multiply coefficient of m by q^(r*m_i)."""
        r = Fraction(r)
        out = {}
        for m, c in self.terms.items():
            out[m] = c * q_power(r * m[i - 1]) if m[i - 1] else c
        return Series(self.n, self.cap, out)

    def diag_weight(self, C, c_vec=None) -> "Series":
        """Multiply coefficient at m by q^(sum C_ij m_i m_j + sum c_i m_i)."""
        out = {}
        for m, v in self.terms.items():
            e = Fraction(0)
            for i in range(self.n):
                if m[i] == 0:
                    continue
                if c_vec is not None:
                    e += Fraction(c_vec[i]) * m[i]
                for j in range(self.n):
                    if C is not None and m[j]:
                        e += Fraction(C[i][j]) * m[i] * m[j]
            out[m] = v * q_power(e) if e else v
        return Series(self.n, self.cap, out)

    def substitute_sign(self, signs) -> "Series":
        """Substitute x^i -> signs[i] * x^i for signs in {+1, -1}."""
        out = {}
        for m, v in self.terms.items():
            s = 1
            for i in range(self.n):
                if signs[i] < 0 and m[i] % 2:
                    s = -s
            out[m] = v if s > 0 else v * QScalar.from_int(-1)
        return Series(self.n, self.cap, out)

    def truncate(self, cap: int) -> "Series":
        return Series(self.n, cap, self.terms)

    # -- text form ---------------------------------------------------------

    def render(self, names=None) -> str:
        """Deterministic text form, terms in graded-lexicographic order."""
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i+1}" for i in range(self.n)]
        parts = []
        for m in sorted(self.terms, key=lambda m: (degree(m), m)):
            c = self.terms[m]
            mono = "*".join(
                f"{names[i]}^{m[i]}" if m[i] > 1 else names[i]
                for i in range(self.n) if m[i]
            )
            cs = str(c)
            if mono:
                if cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append(f"-{mono}")
                elif "+" in cs[1:] or "-" in cs[1:] or "/" in cs:
                    parts.append(f"({cs})*{mono}")
                else:
                    parts.append(f"{cs}*{mono}")
            else:
                parts.append(cs if ("/" not in cs and "+" not in cs[1:]) else f"({cs})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Series({self.render()})"

    def __eq__(self, other):
        return (isinstance(other, Series) and self.n == other.n
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))


class TensorSeries:
    """Bi-graded series over two coordinate groups; immutable."""

    __slots__ = ("n1", "n2", "cap1", "cap2", "terms")

    def __init__(self, n1, n2, cap1, cap2, terms=None):
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)
        object.__setattr__(self, "cap1", cap1)
        object.__setattr__(self, "cap2", cap2)
        clean = {}
        if terms:
            for (m1, m2), c in terms.items():
                if len(m1) != n1 or len(m2) != n2:
                    raise ArityMismatch("tensor index arity mismatch")
                if degree(m1) <= cap1 and degree(m2) <= cap2 and not c.is_zero():
                    clean[(m1, m2)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("TensorSeries is immutable")

    def coeff(self, m1, m2) -> QScalar:
        from .coeff import ZERO
        return self.terms.get((tuple(m1), tuple(m2)), ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def add(self, other: "TensorSeries") -> "TensorSeries":
        if (self.n1, self.n2) != (other.n1, other.n2):
            raise ArityMismatch("adding tensor series of different arity")
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return TensorSeries(self.n1, self.n2,
                            min(self.cap1, other.cap1),
                            min(self.cap2, other.cap2), out)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scalar_mul(QScalar.from_int(-1)))

    def scalar_mul(self, c: QScalar) -> "TensorSeries":
        return TensorSeries(self.n1, self.n2, self.cap1, self.cap2,
                            {k: v * c for k, v in self.terms.items()})

    def mul(self, other: "TensorSeries") -> "TensorSeries":
        """Slotwise commutative product."""
        out = {}
        cap1 = min(self.cap1, other.cap1)
        cap2 = min(self.cap2, other.cap2)
        for (a1, a2), c1 in self.terms.items():
            for (b1, b2), c2 in other.terms.items():
                if degree(a1) + degree(b1) > cap1:
                    continue
                if degree(a2) + degree(b2) > cap2:
                    continue
                k = (tuple(x + y for x, y in zip(a1, b1)),
                     tuple(x + y for x, y in zip(a2, b2)))
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        return TensorSeries(self.n1, self.n2, cap1, cap2, out)

    def bilinear_weight(self, W) -> "TensorSeries":
        """Multiply coefficient at (a, b) by q^(sum W_ij a_i b_j)."""
        out = {}
        for (a, b), v in self.terms.items():
            e = Fraction(0)
            for i in range(self.n1):
                if a[i]:
                    for j in range(self.n2):
                        if b[j]:
                            e += Fraction(W[i][j]) * a[i] * b[j]
            out[(a, b)] = v * q_power(e) if e else v
        return TensorSeries(self.n1, self.n2, self.cap1, self.cap2, out)

    def map_left(self, fn) -> "TensorSeries":
        """Apply a Series -> Series linear map to the left slot."""
        out = TensorSeries(self.n1, self.n2, self.cap1, self.cap2, {})
        for (a, b), v in self.terms.items():
            s = fn(Series.monomial(self.n1, self.cap1, a, v))
            add = {(m, b): c for m, c in s.terms.items()}
            out = out.add(TensorSeries(self.n1, self.n2, self.cap1, self.cap2, add))
        return out

    def map_right(self, fn) -> "TensorSeries":
        """Apply a Series -> Series linear map to the right slot."""
        out = TensorSeries(self.n1, self.n2, self.cap1, self.cap2, {})
        for (a, b), v in self.terms.items():
            s = fn(Series.monomial(self.n2, self.cap2, b, v))
            add = {(a, m): c for m, c in s.terms.items()}
            out = out.add(TensorSeries(self.n1, self.n2, self.cap1, self.cap2, add))
        return out

    def left_at_zero(self) -> Series:
        """Set the left coordinate group to zero."""
        z = (0,) * self.n1
        return Series(self.n2, self.cap2,
                      {b: v for (a, b), v in self.terms.items() if a == z})

    def right_at_zero(self) -> Series:
        z = (0,) * self.n2
        return Series(self.n1, self.cap1,
                      {a: v for (a, b), v in self.terms.items() if b == z})

    def transpose(self) -> "TensorSeries":
        return TensorSeries(self.n2, self.n1, self.cap2, self.cap1,
                            {(b, a): v for (a, b), v in self.terms.items()})

    def render(self, left_names=None, right_names=None) -> str:
        if not self.terms:
            return "0"
        if left_names is None:
            left_names = [f"x{i+1}" for i in range(self.n1)]
        if right_names is None:
            right_names = [f"y{i+1}" for i in range(self.n2)]
        parts = []
        for (a, b) in sorted(self.terms,
                             key=lambda k: (degree(k[0]) + degree(k[1]), k)):
            v = self.terms[(a, b)]
            left = Series.monomial(self.n1, self.cap1, a, v).render(left_names)
            right = Series.monomial(self.n2, self.cap2, b).render(right_names)
            parts.append(f"({left}) (x) ({right})")
        return " + ".join(parts)

    def __repr__(self):
        return f"TensorSeries({self.render()})"

    def __eq__(self, other):
        return (isinstance(other, TensorSeries)
                and (self.n1, self.n2) == (other.n1, other.n2)
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.n1, self.n2, frozenset(self.terms.items())))
