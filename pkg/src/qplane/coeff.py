"""Exact coefficient field for q-deformed computations.

Scalars are rational functions in s = q^(1/2) with Gaussian-integer
coefficients upstairs and plain integer coefficients downstairs.  Keeping
everything polynomial in s (rather than q) matters because the structure
constants of the plane contain half-integer powers of q.

Internal polynomial representation: dict mapping s-exponent (int, may be
negative in numerators) -> coefficient.  Numerator coefficients are (re, im)
integer pairs; denominator coefficients are plain ints.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd
import cmath

from .errors import DenominatorVanishes

# ---------------------------------------------------------------------------
# Gaussian-integer Laurent polynomials (dict exponent -> (re, im))

_ZERO = (0, 0)


def _gadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gneg(a):
    return (-a[0], -a[1])


def _gconj(a):
    return (a[0], -a[1])


def _padd(p, r):
    out = dict(p)
    for e, c in r.items():
        c2 = _gadd(out.get(e, _ZERO), c)
        if c2 == _ZERO:
            out.pop(e, None)
        else:
            out[e] = c2
    return out


def _pneg(p):
    return {e: _gneg(c) for e, c in p.items()}


def _pmul(p, r):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in r.items():
            e = e1 + e2
            c = _gadd(out.get(e, _ZERO), _gmul(c1, c2))
            if c == _ZERO:
                out.pop(e, None)
            else:
                out[e] = c
    return out


def _pconj(p):
    return {e: _gconj(c) for e, c in p.items()}


def _pshift(p, k):
    return {e + k: c for e, c in p.items()}


def _pscale(p, g):
    # multiply by a single Gaussian integer
    if g == _ZERO:
        return {}
    return {e: _gmul(c, g) for e, c in p.items()}


def _is_real(p):
    return all(c[1] == 0 for c in p.values())


# ---------------------------------------------------------------------------
# Integer (real-coefficient) polynomial helpers used for reduction.  These
# work on dict exponent -> int with all exponents >= 0.


def _rp_from(p):
    return {e: c[0] for e, c in p.items() if c[0] != 0}


def _rp_degree(p):
    return max(p) if p else -1


def _rp_lead(p):
    return p[max(p)]


def _rp_content(p):
    g = 0
    for c in p.values():
        g = _int_gcd(g, abs(c))
    return g


def _rp_primitive(p):
    g = _rp_content(p)
    if g in (0, 1):
        return dict(p)
    return {e: c // g for e, c in p.items()}


def _rp_mul(p, r):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in r.items():
            e = e1 + e2
            c = out.get(e, 0) + c1 * c2
            if c == 0:
                out.pop(e, None)
            else:
                out[e] = c
    return out


def _rp_scale(p, k):
    if k == 0:
        return {}
    return {e: c * k for e, c in p.items()}


def _rp_sub(p, r):
    out = dict(p)
    for e, c in r.items():
        c2 = out.get(e, 0) - c
        if c2 == 0:
            out.pop(e, None)
        else:
            out[e] = c2
    return out


def _rp_pseudo_rem(p, r):
    # pseudo-remainder of p by r (r nonzero), over Z[s]
    dr = _rp_degree(r)
    lr = _rp_lead(r)
    p = dict(p)
    while p and _rp_degree(p) >= dr:
        dp = _rp_degree(p)
        lp = _rp_lead(p)
        p = _rp_sub(_rp_scale(p, lr), _rp_mul({dp - dr: lp}, r))
    return p


def _rp_gcd(p, r):
    # gcd over Z[s] of polynomials with exponents >= 0; result primitive
    # with positive leading coefficient, times the gcd of the contents.
    if not p:
        return dict(r)
    if not r:
        return dict(p)
    cp, cr = _rp_content(p), _rp_content(r)
    a, b = _rp_primitive(p), _rp_primitive(r)
    while b:
        rem = _rp_pseudo_rem(a, b)
        a, b = b, _rp_primitive(rem)
    if _rp_lead(a) < 0:
        a = _rp_scale(a, -1)
    c = _int_gcd(cp, cr)
    return _rp_scale(a, c) if c != 1 else a


def _rp_divexact(p, d):
    # exact division of p by d over Z[s]; assumes divisibility
    out = {}
    p = dict(p)
    dd = _rp_degree(d)
    ld = _rp_lead(d)
    while p:
        dp = _rp_degree(p)
        lp = _rp_lead(p)
        q = lp // ld
        out[dp - dd] = q
        p = _rp_sub(p, _rp_mul({dp - dd: q}, d))
    return out


# ---------------------------------------------------------------------------


class QScalar:
    """Element of the field of rational functions in s = q^(1/2).

    Instances are immutable and always held in canonical form: the
    denominator is i-free with no negative s-exponents, content 1 and a
    positive leading coefficient, and shares no polynomial factor with the
    numerator.  Equality of canonical forms is field equality.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = {0: (1, 0)}
        if _canonical:
            object.__setattr__(self, "num", num)
            object.__setattr__(self, "den", den)
        else:
            n, d = _canonicalize(num, den)
            object.__setattr__(self, "num", n)
            object.__setattr__(self, "den", d)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("QScalar is immutable")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_int(k: int) -> "QScalar":
        return QScalar({0: (k, 0)} if k else {})

    @staticmethod
    def from_fraction(f) -> "QScalar":
        f = Fraction(f)
        return QScalar({0: (f.numerator, 0)} if f.numerator else {},
                       {0: (f.denominator, 0)})

    @staticmethod
    def from_gaussian(re: int, im: int) -> "QScalar":
        c = (re, im)
        return QScalar({0: c} if c != _ZERO else {})

    @staticmethod
    def s_power(k: int) -> "QScalar":
        return QScalar({k: (1, 0)})

    @staticmethod
    def q_power(r) -> "QScalar":
        """q**r for rational r with 2r integral."""
        r = Fraction(r)
        e = 2 * r
        if e.denominator != 1:
            raise ValueError("q exponent must be a multiple of 1/2")
        return QScalar.s_power(int(e))

    @staticmethod
    def i_unit() -> "QScalar":
        return QScalar({0: (0, 1)})

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == {0: (1, 0)} and self.den == {0: (1, 0)}

    # -- field operations -------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        num = _padd(_pmul(self.num, _real_to_g(other.den)),
                    _pmul(other.num, _real_to_g(self.den)))
        den = _pmul(_real_to_g(self.den), _real_to_g(other.den))
        return QScalar(num, den)

    __radd__ = __add__

    def __neg__(self):
        return QScalar(_pneg(self.num), _real_to_g(self.den), _canonical=False)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        return QScalar(_pmul(self.num, other.num),
                       _pmul(_real_to_g(self.den), _real_to_g(other.den)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero QScalar")
        conj = _pconj(other.num)
        num = _pmul(self.num, _pmul(_real_to_g(other.den), conj))
        den = _pmul(_real_to_g(self.den), _pmul(other.num, conj))
        return QScalar(num, den)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return (QScalar.from_int(1) / self) ** (-k)
        out = QScalar.from_int(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "QScalar":
        """Complex conjugation: fixes s, negates i."""
        return QScalar(_pconj(self.num), _real_to_g(self.den),
                       _canonical=True)

    # -- comparison / hashing ---------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, QScalar):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            h = hash((frozenset(self.num.items()),
                      frozenset(self.den.items())))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self):
        return f"QScalar({render(self)!r})"

    def __str__(self):
        return render(self)


def _real_to_g(p):
    # denominators are stored like numerators ((re, im) pairs with im == 0)
    return p


def _coerce(x) -> QScalar:
    if isinstance(x, QScalar):
        return x
    if isinstance(x, int):
        return QScalar.from_int(x)
    if isinstance(x, Fraction):
        return QScalar.from_fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to QScalar")


def _canonicalize(num, den):
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not _is_real(den):
        conj = _pconj(den)
        num = _pmul(num, conj)
        den = _pmul(den, conj)
    if not num:
        return {}, {0: (1, 0)}
    # move the denominator's s-power into the numerator
    shift = min(den)
    if shift != 0:
        num = _pshift(num, -shift)
        den = _pshift(den, -shift)
    # strip integer content
    g = 0
    for c in num.values():
        g = _int_gcd(_int_gcd(g, abs(c[0])), abs(c[1]))
    for c in den.values():
        g = _int_gcd(g, abs(c[0]))
    if g > 1:
        num = {e: (c[0] // g, c[1] // g) for e, c in num.items()}
        den = {e: (c[0] // g, 0) for e, c in den.items()}
    # strip the polynomial gcd of (Re num, Im num, den)
    dpoly = {e: c[0] for e, c in den.items()}
    if dpoly != {0: 1}:
        nshift = min(num)
        re = {e - nshift: c[0] for e, c in num.items() if c[0] != 0}
        im = {e - nshift: c[1] for e, c in num.items() if c[1] != 0}
        g = _rp_gcd(_rp_gcd(re, im), dpoly)
        if g and (len(g) > 1 or g.get(0) not in (1, None)):
            re = _rp_divexact(re, g) if re else {}
            im = _rp_divexact(im, g) if im else {}
            dpoly = _rp_divexact(dpoly, g)
            num = {}
            for e in set(re) | set(im):
                num[e + nshift] = (re.get(e, 0), im.get(e, 0))
            den = {e: (c, 0) for e, c in dpoly.items()}
    # positive leading denominator coefficient
    if den[max(den)][0] < 0:
        num = _pneg(num)
        den = {e: (-c[0], 0) for e, c in den.items()}
    return num, den


# ---------------------------------------------------------------------------
# q-combinatorics

ZERO = QScalar.from_int(0)
ONE = QScalar.from_int(1)
I = QScalar.i_unit()


def q_power(r) -> QScalar:
    return QScalar.q_power(r)


def lam() -> QScalar:
    """q - 1/q, the standard deformation parameter combination."""
    return q_power(1) - q_power(-1)


def qnum(n: int, a) -> QScalar:
    """Symmetric q-number: sum of q^(a*k) for k = 0 .. n-1."""
    if n < 0:
        raise ValueError("qnum needs n >= 0")
    a = Fraction(a)
    out = ZERO
    for k in range(n):
        out = out + q_power(a * k)
    return out


def qfact(n: int, a) -> QScalar:
    """Product qnum(1, a) * ... * qnum(n, a); empty product is 1."""
    if n < 0:
        raise ValueError("qfact needs n >= 0")
    out = ONE
    for k in range(2, n + 1):
        out = out * qnum(k, a)
    return out


def eval_numeric(x: QScalar, q0: float) -> complex:
    """Evaluate at a numeric q = q0 > 0; a field homomorphism up to rounding."""
    if q0 <= 0:
        raise ValueError("q0 must be positive")
    s0 = q0 ** 0.5
    nv = complex(0.0)
    scale = 0.0
    for e, c in x.num.items():
        nv += complex(c[0], c[1]) * s0 ** e
    dv = complex(0.0)
    for e, c in x.den.items():
        t = c[0] * s0 ** e
        dv += t
        scale = max(scale, abs(t))
    if dv == 0 or (scale > 0 and abs(dv) < 1e-14 * scale):
        raise DenominatorVanishes(f"denominator vanishes at q0={q0}")
    return nv / dv


# ---------------------------------------------------------------------------
# rendering and parsing: reduced fractions of polynomials in q^(1/2)


def _render_qpow(e: int) -> str:
    # e counts powers of s = q^(1/2)
    if e == 0:
        return ""
    if e % 2 == 0:
        k = e // 2
        return "q" if k == 1 else f"q^{k}"
    return f"q^({e}/2)"


def _render_coeff(c, bare: bool) -> str:
    re, im = c
    if im == 0:
        if re == 1:
            return "1" if bare else ""
        if re == -1:
            return "-1" if bare else "-"
        return str(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{im}i"
    sign = "+" if im > 0 else "-"
    imag = "i" if abs(im) == 1 else f"{abs(im)}i"
    return f"({re}{sign}{imag})"


def _render_poly(p) -> str:
    parts = []
    for e in sorted(p):
        c = p[e]
        qp = _render_qpow(e)
        cs = _render_coeff(c, bare=(qp == ""))
        term = cs + qp if (cs not in ("", "-") or qp == "") else cs + qp
        if cs in ("", "-") and qp:
            term = cs + qp
        parts.append(term)
    out = parts[0]
    for t in parts[1:]:
        out += ("+" + t) if not t.startswith("-") else t
    return out


def render(x: QScalar) -> str:
    """Canonical text form, e.g. "(1+q^2)/q"."""
    if x.is_zero():
        return "0"
    num, den = x.num, x.den
    shift = min(num)
    if shift < 0:
        num = _pshift(num, -shift)
        den = _pshift(den, -shift)
    ns = _render_poly(num)
    if den == {0: (1, 0)}:
        return ns
    ds = _render_poly(den)
    if len(num) > 1:
        ns = f"({ns})"
    if len(den) > 1:
        ds = f"({ds})"
    return f"{ns}/{ds}"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise SyntaxError(f"{msg} at position {self.pos} in {self.text!r}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> QScalar:
        c = self.peek()
        neg = False
        if c in "+-":
            neg = c == "-"
            self.pos += 1
        out = self.term()
        if neg:
            out = -out
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                out = out + self.term()
            elif c == "-":
                self.pos += 1
                out = out - self.term()
            else:
                return out

    def term(self) -> QScalar:
        out = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                out = out * self.factor()
            elif c == "/":
                self.pos += 1
                out = out / self.factor()
            elif c and (c.isdigit() or c in "qsi("):
                out = out * self.factor()  # juxtaposition
            else:
                return out

    def factor(self) -> QScalar:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            exp = self.exponent()
            if exp.denominator == 1:
                return base ** int(exp)
            # fractional exponents are only meaningful on plain q
            if base == q_power(1):
                return QScalar.q_power(exp)
            self.error("fractional power of a non-q base")
        return base

    def exponent(self) -> Fraction:
        c = self.peek()
        if c == "(":
            self.pos += 1
            f = self.signed_int()
            if self.peek() == "/":
                self.pos += 1
                g = self.signed_int()
                f = Fraction(f, g)
            else:
                f = Fraction(f)
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return f
        return Fraction(self.signed_int())

    def signed_int(self) -> int:
        c = self.peek()
        sign = 1
        if c in "+-":
            sign = -1 if c == "-" else 1
            self.pos += 1
            self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return sign * int(self.text[start:self.pos])

    def atom(self) -> QScalar:
        c = self.peek()
        if c == "(":
            self.pos += 1
            out = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return out
        if c == "q":
            self.pos += 1
            return q_power(1)
        if c == "s":
            self.pos += 1
            return QScalar.s_power(1)
        if c == "i":
            self.pos += 1
            return I
        if c.isdigit():
            n = self.signed_int()
            if self.peek() == "i":
                self.pos += 1
                return QScalar.from_gaussian(0, n)
            return QScalar.from_int(n)
        self.error("unexpected character")


def parse(text: str) -> QScalar:
    """Parse the textual scalar grammar produced by render()."""
    p = _Parser(text)
    out = p.expr()
    if p.peek() != "":
        p.error("trailing input")
    return out
