"""Concrete quantum-space instances and their structure maps.

The primary instance is the two-generator plane with X1*X2 = q*X2*X1.  Its
star product, derivative actions, braided products, and conjugation are all
driven by descriptor data so that further spaces can be registered later;
the one-dimensional "line" instance exercises the same pipeline with
commutative numerics.

Derivative flavors
------------------
Four action flavors are supported: "left" and "right" together with their
conjugate ("bar") partners.  Only the plain left action has a closed form
in the descriptor; the conjugate-left action is the calculus whose
crossing matrix is the inverse of the plain one (its closed form is also
stored in the descriptor), and the two right actions are generated
through conjugation:

    f <| d^i   :=  conj(bar(d)^i |>bar conj(f))
    f <|bar d^i := conj(bar(d)^i |> conj(f))

with bar(d)^i = -eps_ij d^j mirroring the coordinate conjugation.  The
identification of the conjugate-action derivative basis with the plain one
(no extra normalization constant) is validated empirically by the adjoint
checks in the sesquilinear-form module.
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import QScalar, ONE, ZERO, lam, q_power, qnum, qfact
from .series import Series, TensorSeries, unit_index, degree
from .errors import ArityMismatch, FlavorUnavailable

# flavor labels for partial_act
LEFT = "left"            # d |> f
LEFT_BAR = "left_bar"    # d |>bar f  (conjugate representation)
RIGHT = "right"          # f <| d
RIGHT_BAR = "right_bar"  # f <|bar d


class DerivRule:
    """Closed-form rule: prefactor * (Jackson derivative) * argument scaling.

    Applies, in order: scale coordinate `scale_coord` by q^scale_pow (when
    set), then the Jackson derivative over `d_coord` at base q^d_base,
    then the scalar prefactor.  The two commute for every rule used here
    because the scaled coordinate differs from the differentiated one.
    """

    __slots__ = ("prefactor", "d_coord", "d_base", "scalings", "negate")

    def __init__(self, prefactor: QScalar, d_coord: int, d_base, scalings,
                 negate: bool = False):
        self.prefactor = prefactor
        self.d_coord = d_coord
        self.d_base = Fraction(d_base)
        self.scalings = tuple(Fraction(s) for s in scalings)
        self.negate = negate        # substitute x -> -x (all coordinates) first

    def apply(self, f: Series) -> Series:
        out = f
        if self.negate:
            out = out.substitute_sign((-1,) * f.n)
        for i, r in enumerate(self.scalings, start=1):
            if r:
                out = out.scale_arg(i, r)
        out = jackson_d(out, self.d_coord, self.d_base)
        return out.scalar_mul(self.prefactor)


class SpaceDescriptor:
    """All structure constants of one quantum space."""

    __slots__ = ("name", "n", "star_matrix", "deriv_reps", "conj_matrix",
                 "kappa", "integral_prefactor", "integral_base",
                 "braid_mirror", "eps_lower", "numeric_reps")

    def __init__(self, name, n, star_matrix, deriv_reps, conj_matrix,
                 kappa, integral_prefactor, integral_base, eps_lower=None,
                 numeric_reps=None):
        self.name = name
        self.n = n
        self.star_matrix = star_matrix          # kernel exponent matrix K: q^(sum K_ij a_i b_j)
        self.deriv_reps = deriv_reps            # {(flavor, i): DerivRule} for closed forms
        self.conj_matrix = conj_matrix          # coordinate conjugation: x^i -> sum_j M_ij x^j
        self.kappa = kappa
        self.integral_prefactor = integral_prefactor
        self.integral_base = Fraction(integral_base)
        self.eps_lower = eps_lower              # lowered metric (for derivative mirroring)
        # closed Jackson-rule forms for the lattice realization; the right
        # actions are kept out of deriv_reps so the symbolic path still goes
        # through conjugation, giving an independent route to test against
        self.numeric_reps = dict(deriv_reps)
        if numeric_reps:
            self.numeric_reps.update(numeric_reps)


# ---------------------------------------------------------------------------
# Jackson derivative (symbolic)


def jackson_d(f: Series, i: int, a) -> Series:
    """Symbolic Jackson derivative: x^m -> [[m_i]]_{q^a} x^(m - e_i)."""
    a = Fraction(a)
    out = {}
    for m, c in f.terms.items():
        k = m[i - 1]
        if k == 0:
            continue
        m2 = tuple(v - 1 if j == i - 1 else v for j, v in enumerate(m))
        c2 = c * qnum(k, a)
        out[m2] = out[m2] + c2 if m2 in out else c2
    return Series(f.n, f.cap, out)


# ---------------------------------------------------------------------------
# Star product and the normal-ordering oracle


def star(space: SpaceDescriptor, f: Series, g: Series,
         mirror: bool = False) -> Series:
    """Deformed product via the diagonal monomial kernel.

    `mirror=True` gives the q -> 1/q mirrored product, which is the
    multiplication belonging to the barred (conjugate) structures.
    """
    if f.n != space.n or g.n != space.n:
        raise ArityMismatch("star operands do not match the space arity")
    K = space.star_matrix
    if mirror:
        K = [[-e for e in row] for row in K]
    cap = min(f.cap, g.cap)
    out = {}
    for a, ca in f.terms.items():
        da = degree(a)
        for b, cb in g.terms.items():
            if da + degree(b) > cap:
                continue
            e = Fraction(0)
            for i in range(space.n):
                if a[i]:
                    for j in range(space.n):
                        if b[j] and K[i][j]:
                            e += Fraction(K[i][j]) * a[i] * b[j]
            c = ca * cb
            if e:
                c = c * q_power(e)
            m = tuple(x + y for x, y in zip(a, b))
            out[m] = out[m] + c if m in out else c
    return Series(space.n, cap, out)


def star_operator(space: SpaceDescriptor, f: Series, g: Series) -> Series:
    """Second route for the same product: tensor, apply the bilinear number-
    operator weight, then merge the second coordinate group into the first.
    """
    t = f.tensor(g).bilinear_weight(space.star_matrix)
    cap = min(f.cap, g.cap)
    out = {}
    for (a, b), c in t.terms.items():
        if degree(a) + degree(b) > cap:
            continue
        m = tuple(x + y for x, y in zip(a, b))
        out[m] = out[m] + c if m in out else c
    return Series(space.n, cap, out)


class NCWord:
    """Linear combination of words in the noncommuting generators."""

    __slots__ = ("n", "parts")

    def __init__(self, n: int, parts=None):
        self.n = n
        # parts: dict word-tuple -> QScalar
        self.parts = {w: c for w, c in (parts or {}).items() if not c.is_zero()}

    @staticmethod
    def from_exponents(n: int, m, c=None) -> "NCWord":
        """Normally ordered word X1^m1 X2^m2 ... with an optional prefactor."""
        w = tuple(i + 1 for i in range(n) for _ in range(m[i]))
        return NCWord(n, {w: ONE if c is None else c})

    def concat(self, other: "NCWord") -> "NCWord":
        out = {}
        for w1, c1 in self.parts.items():
            for w2, c2 in other.parts.items():
                w = w1 + w2
                c = c1 * c2
                out[w] = out[w] + c if w in out else c
        return NCWord(self.n, out)

    def add(self, other: "NCWord") -> "NCWord":
        out = dict(self.parts)
        for w, c in other.parts.items():
            out[w] = out[w] + c if w in out else c
        return NCWord(self.n, out)


def word_of(f: Series) -> NCWord:
    """Lift a commutative series to its normally ordered word."""
    out = NCWord(f.n)
    for m, c in f.terms.items():
        out = out.add(NCWord.from_exponents(f.n, m, c))
    return out


def normal_order(space: SpaceDescriptor, w: NCWord, cap: int = None) -> Series:
    """Rewrite X2 X1 -> (1/q) X1 X2 until sorted; return the commutative image.

    Leftmost-innermost rewriting; each step strictly decreases the number
    of inversions, so termination is immediate.  This is the independent
    oracle for the star product.
    """
    if space.name != "manin":
        raise FlavorUnavailable("normal ordering oracle is for the plane")
    if cap is None:
        cap = max((len(word) for word in w.parts), default=0)
    qinv = q_power(-1)
    terms = {}
    for word, coeff in w.parts.items():
        word = list(word)
        c = coeff
        # bubble: count and resolve (2,1) inversions one adjacent swap at a time
        changed = True
        while changed:
            changed = False
            for k in range(len(word) - 1):
                if word[k] == 2 and word[k + 1] == 1:
                    word[k], word[k + 1] = word[k + 1], word[k]
                    c = c * qinv
                    changed = True
                    break
        m = tuple(word.count(i + 1) for i in range(space.n))
        terms[m] = terms[m] + c if m in terms else c
    return Series(space.n, cap, terms)


# ---------------------------------------------------------------------------
# Partial-derivative actions


def _conjugate_coeffwise(f: Series) -> Series:
    return f.map_coeffs(lambda c: c.conjugate())


def conjugate(space: SpaceDescriptor, f: Series) -> Series:
    """Antilinear conjugation: conjugate coefficients, map generators by the
    conjugation matrix, and reverse the product order (re-expressed in the
    normally ordered basis)."""
    out = Series(space.n, f.cap, {})
    zero = (0,) * space.n
    for m, c in f.terms.items():
        term = Series(space.n, f.cap, {zero: c.conjugate()})
        # conjugation is antimultiplicative: reverse the generator order.
        # For a monomial x^(m1, m2, ...) the reversed word is the generators
        # in descending coordinate order, each mapped through conj_matrix.
        for i in reversed(range(space.n)):
            img = Series(space.n, f.cap, {
                unit_index(space.n, j + 1): space.conj_matrix[i][j]
                for j in range(space.n)
                if not space.conj_matrix[i][j].is_zero()
            })
            for _ in range(m[i]):
                term = star(space, term, img)
        out = out.add(term)
    return out


def partial_act(space: SpaceDescriptor, flavor: str, i: int, f: Series) -> Series:
    """Action of the i-th partial derivative on f in the requested flavor."""
    if not 1 <= i <= space.n:
        raise ArityMismatch(f"no coordinate {i} on {space.name}")
    rule = space.deriv_reps.get((flavor, i))
    if rule is not None:
        return rule.apply(f)
    if space.eps_lower is None:
        raise FlavorUnavailable(f"flavor {flavor} not available on {space.name}")
    # generated flavors: right actions through conjugation
    if flavor == RIGHT_BAR:
        base, opp = LEFT, None
    elif flavor == RIGHT:
        base, opp = LEFT_BAR, None
    else:
        raise FlavorUnavailable(f"flavor {flavor} not available on {space.name}")
    # f <|(bar) d^i = conj( bar(d)^i |>(bar) conj(f) ),  bar(d)^i = -eps_ij d^j
    g = conjugate(space, f)
    acc = Series(space.n, f.cap, {})
    for j in range(space.n):
        coef = space.eps_lower[i - 1][j]
        if coef.is_zero():
            continue
        acc = acc.add(partial_act(space, base, j + 1, g).scalar_mul(-coef))
    return conjugate(space, acc)


def partial_word_act(space: SpaceDescriptor, flavor: str, word, f: Series) -> Series:
    """Apply a word of derivative labels; the rightmost label acts first."""
    out = f
    for i in reversed(word):
        out = partial_act(space, flavor, i, out)
    return out


# ---------------------------------------------------------------------------
# Derivative-coordinate crossing
#
# The homogeneous part of the Leibniz rule, d^i X^j = (action term)
# + c^{ij}_{kl} X^k d^l, doubles as the braiding of a derivative factor
# past a coordinate factor of a different copy of the space.  Rather than
# hard-coding the R-matrix we extract c from the closed-form actions on
# products of generators; this keeps the two consistent by construction.

_CROSSING_CACHE = {}


def leibniz_crossing(space: SpaceDescriptor, flavor: str):
    """Crossing coefficients {(i, j, k, l): QScalar} for the flavor's
    derivatives, solved from d^i |> (x^j * g) on generator pairs."""
    key = (space.name, flavor)
    if key in _CROSSING_CACHE:
        return _CROSSING_CACHE[key]
    cap = 4
    gens = [Series.monomial(space.n, cap, unit_index(space.n, j))
            for j in range(1, space.n + 1)]
    act = {}
    for l in range(1, space.n + 1):
        for j in range(1, space.n + 1):
            act[(l, j)] = partial_act(space, flavor, l, gens[j - 1]).eval_at_zero()
    c = {}
    for i in range(1, space.n + 1):
        for j in range(1, space.n + 1):
            for gidx in range(1, space.n + 1):
                g = gens[gidx - 1]
                lhs = partial_act(space, flavor, i, star(space, gens[j - 1], g))
                delta = lhs - g.scalar_mul(act[(i, j)])
                for l in range(1, space.n + 1):
                    al = act[(l, gidx)]
                    if al.is_zero():
                        continue
                    for k in range(1, space.n + 1):
                        coeff = delta.coeff(unit_index(space.n, k)) / al
                        if not coeff.is_zero():
                            c[(i, j, k, l)] = coeff
    _CROSSING_CACHE[key] = c
    return c


def _cross_one(space, c, i, xword):
    if not xword:
        return [(ONE, (), i)]
    out = []
    j = xword[0]
    rest = xword[1:]
    for k in range(1, space.n + 1):
        for l in range(1, space.n + 1):
            cc = c.get((i, j, k, l))
            if cc is None:
                continue
            for (c2, w2, l2) in _cross_one(space, c, l, rest):
                out.append((cc * c2, (k,) + w2, l2))
    return out


def cross_partial_word(space: SpaceDescriptor, flavor: str, dword, xword):
    """Braid a derivative word (tuple of coordinate labels, leftmost first)
    past a coordinate word.  Returns [(coeff, xword', dword')]; word lengths
    are preserved and no action terms appear (distinct-copy crossing)."""
    c = leibniz_crossing(space, flavor)
    states = [(ONE, tuple(xword), ())]
    for i in reversed(tuple(dword)):
        new = []
        for (co, xw, dw) in states:
            for (c1, xw2, l) in _cross_one(space, c, i, xw):
                new.append((co * c1, xw2, (l,) + dw))
        states = new
    acc = {}
    for co, xw, dw in states:
        key = (xw, dw)
        acc[key] = acc.get(key, ZERO) + co
    return [(v, k[0], k[1]) for k, v in acc.items() if not v.is_zero()]


# ---------------------------------------------------------------------------
# Braided products


def braided_odot(space: SpaceDescriptor, f: Series, g: Series,
                 mirror: bool = False) -> TensorSeries:
    """Braided product f (.) g of elements of two copies of the space.

    Returns sum g'' (x) f'' as a TensorSeries whose left group carries g's
    coordinates and whose right group carries f's.  `mirror=False` gives
    the kernel shared by the L and R-bar labels; `mirror=True` gives the
    q -> 1/q mirrored kernel shared by L-bar and R.
    """
    if f.n != space.n or g.n != space.n:
        raise ArityMismatch("braided product operands do not match the space")
    if space.name == "line":
        # commutative pipeline-validation instance: trivial braiding
        return g.tensor(f)
    if space.name != "manin":
        raise FlavorUnavailable("no braiding data for " + space.name)
    sgn = -1 if mirror else 1
    base = Fraction(-2 * sgn)          # Jackson base q^(-2), mirrored to q^2
    lam_term = lam() * QScalar.from_int(-sgn)   # -(q - 1/q), mirrored to +
    W = [[Fraction(-2 * sgn), Fraction(-sgn)],
         [Fraction(-2 * sgn), Fraction(-2 * sgn)]]
    # W[yi][xj]: exponents of the number-operator weight between g'' and f''
    out = TensorSeries(space.n, space.n, g.cap, f.cap, {})
    i = 0
    while True:
        gf = g
        ff = f
        for _ in range(i):
            gf = jackson_d(gf, 1, base)
            ff = jackson_d(ff, 2, base)
        if gf.is_zero() or ff.is_zero():
            break
        gf = gf.scale_arg(1, Fraction(-i * sgn)).scale_arg(2, Fraction(-2 * i * sgn))
        ff = ff.scale_arg(1, Fraction(-2 * i * sgn)).scale_arg(2, Fraction(-i * sgn))
        piece = gf.tensor(ff).bilinear_weight(W)
        pre = q_power(Fraction(sgn * i * i)) * (lam_term ** i) / qfact(i, base)
        mono = Series.monomial(space.n, g.cap, (0, i)).tensor(
            Series.monomial(space.n, f.cap, (i, 0)))
        piece = mono.mul(piece).scalar_mul(pre)
        out = out.add(piece)
        i += 1
    return out


def braided_odot_L(space: SpaceDescriptor, f: Series, g: Series) -> TensorSeries:
    return braided_odot(space, f, g, mirror=False)


def braided_odot_Lbar(space: SpaceDescriptor, f: Series, g: Series) -> TensorSeries:
    return braided_odot(space, f, g, mirror=True)


# ---------------------------------------------------------------------------
# Descriptor registry


def _manin() -> SpaceDescriptor:
    half = Fraction(1, 2)
    reps = {
        # d^1 |> f = -q^(-1/2) D_{q^2}^2 f(q x1, x2)
        (LEFT, 1): DerivRule(-q_power(-half), 2, 2, (1, 0)),
        # d^2 |> f =  q^(1/2)  D_{q^2}^1 f(x1, q^2 x2)
        (LEFT, 2): DerivRule(q_power(half), 1, 2, (0, 2)),
        # conjugate representation; the prefactors carry the conjugate
        # metric, whose entries are fixed by consistency of the derivative
        # relation with the inverse crossing (see leibniz_crossing)
        (LEFT_BAR, 1): DerivRule(-q_power(half), 2, -2, (-1, 0)),
        (LEFT_BAR, 2): DerivRule(q_power(Fraction(3, 2)), 1, -2, (0, 0)),
    }
    # closed forms of the conjugation-generated right actions; every
    # scaling is an integer power of q^(1/2), so they stay lattice-exact
    numeric_reps = {
        # f <| d^1 =  q^(3/2)  D_{q^-2}^2 f(-x1, -x2)
        (RIGHT, 1): DerivRule(q_power(Fraction(3, 2)), 2, -2, (0, 0), True),
        # f <| d^2 = -q^(1/2)  D_{q^-2}^1 f(-x1, -q^-1 x2)
        (RIGHT, 2): DerivRule(-q_power(half), 1, -2, (0, -1), True),
        # f <|bar d^1 =  q^(1/2)  D_{q^2}^2 f(-q^2 x1, -x2)
        (RIGHT_BAR, 1): DerivRule(q_power(half), 2, 2, (2, 0), True),
        # f <|bar d^2 = -q^(-1/2) D_{q^2}^1 f(-x1, -q x2)
        (RIGHT_BAR, 2): DerivRule(-q_power(-half), 1, 2, (0, 1), True),
    }
    # eps^{12} = q^(-1/2), eps^{21} = -q^(1/2); eps_lower is its inverse
    eps_lower = [[ZERO, -q_power(-half)], [q_power(half), ZERO]]
    # conjugation: conj(x^i) = -eps_lower[i][j] x^j
    conj = [[-eps_lower[i][j] for j in range(2)] for i in range(2)]
    return SpaceDescriptor(
        name="manin",
        n=2,
        star_matrix=[[Fraction(0), Fraction(0)], [Fraction(-1), Fraction(0)]],
        deriv_reps=reps,
        conj_matrix=conj,
        kappa=q_power(3),
        integral_prefactor=-q_power(1) / QScalar.from_int(16),
        integral_base=half,
        eps_lower=eps_lower,
        numeric_reps=numeric_reps,
    )


def _line() -> SpaceDescriptor:
    reps = {
        (LEFT, 1): DerivRule(ONE, 1, 1, (0,)),
        (LEFT_BAR, 1): DerivRule(ONE, 1, -1, (0,)),
    }
    return SpaceDescriptor(
        name="line",
        n=1,
        star_matrix=[[Fraction(0)]],
        deriv_reps=reps,
        conj_matrix=[[ONE]],
        kappa=ONE,
        integral_prefactor=ONE,
        integral_base=Fraction(1),
        eps_lower=[[ONE]],
    )


_REGISTRY = {}


def get_space(name: str) -> SpaceDescriptor:
    if name not in _REGISTRY:
        if name == "manin":
            _REGISTRY[name] = _manin()
        elif name == "line":
            _REGISTRY[name] = _line()
        else:
            raise KeyError(f"unknown space {name!r}")
    return _REGISTRY[name]
