import time
from fractions import Fraction
from qplane.coeff import ONE, ZERO, q_power, qfact, QScalar
from qplane.series import Series, TensorSeries, degree
from qplane.spaces import get_space, partial_act, star, LEFT, LEFT_BAR
from qplane import hopf

sp = get_space("manin")
CAP = 6

def mono(m, c=None):
    return Series.monomial(2, CAP, m, c)

# 1. translate_L(x1 x2): expect x1x2(x)1 + x1(x)y2 + q^-1 x2(x)y1 + 1(x)y1y2
t = hopf.translate(sp, mono((1, 1)), "L")
expect = {
    ((1, 1), (0, 0)): ONE,
    ((1, 0), (0, 1)): ONE,
    ((0, 1), (1, 0)): q_power(-1),
    ((0, 0), (1, 1)): ONE,
}
ok = dict(t.terms) == expect
print("translate_L(x1x2):", ok)
if not ok:
    print(t.render())

# 2. antipode spot values
print("S(x1) = -x1:", hopf.antipode(sp, mono((1, 0)), "L") == mono((1, 0), -ONE))
print("S(x2) = -x2:", hopf.antipode(sp, mono((0, 1)), "L") == mono((0, 1), -ONE))
print("S(x1x2) = q^-2 x1x2:",
      hopf.antipode(sp, mono((1, 1)), "L") == mono((1, 1), q_power(-2)))

# 3. Hopf axioms on all monomials to degree 5, both flavors
for flavor in ("L", "Lbar"):
    allok = True
    for d in range(6):
        for m1 in range(d + 1):
            f = mono((m1, d - m1))
            c1, c2 = hopf.counit_defects(sp, f, flavor)
            if not (c1.is_zero() and c2.is_zero()):
                allok = False; print("counit fail", flavor, (m1, d - m1))
            if hopf.coassoc_defect(sp, f, flavor):
                allok = False; print("coassoc fail", flavor, (m1, d - m1))
            if not hopf.antipode_defect(sp, f, flavor).is_zero():
                allok = False; print("antipode axiom fail", flavor, (m1, d - m1))
    print(f"hopf axioms [{flavor}]:", allok)

# 4. pairing tables
def check_pairing(flavor, base):
    allok = True
    for d1 in range(5):
        for n1 in range(d1 + 1):
            n = (n1, d1 - n1)
            for d2 in range(5):
                for m1 in range(d2 + 1):
                    m = (m1, d2 - m1)
                    v = hopf.pairing_eval(sp, mono(n), mono(m), flavor)
                    if n == m:
                        want = qfact(n[0], base) * qfact(n[1], base)
                    else:
                        want = ZERO
                    if v != want:
                        allok = False
                        print("pair fail", flavor, n, m, v.render(), "want", want.render())
    print(f"pairing table [{flavor}]:", allok)

check_pairing("L", Fraction(2))
check_pairing("Lbar", Fraction(-2))

# 5. exponentials: eigen + addition
for flavor in ("Rbar,L", "R,Lbar"):
    t0 = time.time()
    expo = hopf.build_exponential(sp, flavor, CAP)
    for i in (1, 2):
        d = hopf.check_eigen(sp, expo, i)
        print(f"eigen [{flavor}] i={i}:", d.is_zero(),
              "" if d.is_zero() else list(d.terms.items())[:3])
    ad = hopf.check_addition(sp, expo)
    print(f"addition [{flavor}]:", ad.is_zero(),
          f"({time.time()-t0:.1f}s)")
    if not ad.is_zero():
        items = sorted(ad.terms.items(),
                       key=lambda kv: (degree(kv[0][0]) + degree(kv[0][1]), kv[0]))
        for k, v in items[:6]:
            print("   ", k, str(v))

# 6. explicit exponential coefficient check: basis coeff at (2,0) is 1/(1+q^2)
# for the (Rbar,L) flavor (norms [[2]]_{q^2}! = 1+q^2)
expo = hopf.build_exponential(sp, "Rbar,L", CAP)
print("coeff (2,0):", expo.basis_coeff((2, 0)).render())
print("coeff (1,1):", expo.basis_coeff((1, 1)).render())
eh = hopf.build_exponential(sp, "R,Lbar", CAP)
print("hat coeff (2,0):", eh.basis_coeff((2, 0)).render())
