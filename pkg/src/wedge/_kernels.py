"""Compiled scalar kernels shared by every public entry point.

All public functions (scalar, batch, Monte Carlo) funnel through these
kernels so that a row evaluated alone is bit-identical to the same row
evaluated inside a parallel batch.

Term grouping is deliberate.  Under the symmetries of the wedge
probability only the signs of ``c`` and ``d`` flip, which swaps the
A/B and C/D exponents; summing them as ``(eA + eB) - (eC + eD)`` keeps
the result invariant bit-for-bit.  Do not regroup.

The theta-dual series is summed in double-double (pairs ``hi, lo``) and
rounded once at the end; in plain double its cancellation costs several
ulps and breaks the scaling identity.  The double-double helpers live in
this file because numba's on-disk cache does not see edits to other
modules.
"""
import math

import numpy as np
from numba import njit


PI = math.pi
PI2 = math.pi * math.pi
LOG_2_OVER_PI_32 = 1.5 * math.log(2.0 / math.pi)

# formula codes, mirrored by core.Formula
DOOB = 0
THETA = 1
TRIVIAL_ZERO = 2
TRIVIAL_ONE = 3

# short-circuit cutoff for the 0/1 endpoints
TRIVIAL_EPS = 1e-16


# -- double-double arithmetic ----------------------------------------------
# A value is an unevaluated pair (hi, lo) with |lo| <= ulp(hi) / 2, about
# 106 bits for the arithmetic; dd_exp and dd_sincos stop near 1e-20
# relative, far more than the theta-dual series needs.  Every operation is
# odd in its arguments and products are commutative bit-for-bit, which
# keeps the wedge symmetries exact.  The error-free transforms need strict
# IEEE evaluation: never compile these with fastmath.


PI_HI, PI_LO = 3.141592653589793, 1.2246467991473532e-16
PI2_HI, PI2_LO = 9.869604401089358, 6.265295508739711e-16
LN2_HI, LN2_LO = 0.6931471805599453, 2.3190468138462996e-17

_SPLITTER = 134217729.0  # 2**27 + 1
_EXP_HALVINGS = 4
_SINCOS_HALVINGS = 3

# 1 / j! for j = 0..23 as (hi, lo) pairs
INV_FACT_HI = np.array([
    1.0, 1.0, 0.5,
    0.16666666666666666, 0.041666666666666664, 0.008333333333333333,
    0.001388888888888889, 0.0001984126984126984, 2.48015873015873e-05,
    2.7557319223985893e-06, 2.755731922398589e-07, 2.505210838544172e-08,
    2.08767569878681e-09, 1.6059043836821613e-10, 1.1470745597729725e-11,
    7.647163731819816e-13, 4.779477332387385e-14, 2.8114572543455206e-15,
    1.5619206968586225e-16, 8.22063524662433e-18, 4.110317623312165e-19,
    1.9572941063391263e-20, 8.896791392450574e-22, 3.868170170630684e-23,
])
INV_FACT_LO = np.array([
    0.0, 0.0, 0.0,
    9.25185853854297e-18, 2.3129646346357427e-18, 1.1564823173178714e-19,
    -5.300543954373577e-20, 1.7209558293420705e-22, 2.1511947866775882e-23,
    -1.858393274046472e-22, 2.3767714622250297e-23, -1.448814070935912e-24,
    -1.20734505911326e-25, 1.2585294588752098e-26, 2.0655512752830745e-28,
    7.03872877733453e-30, 4.399205485834081e-31, 1.6508842730861433e-31,
    1.1910679660273754e-32, 2.2141894119604265e-34, 1.4412973378659527e-36,
    -1.3643503830087908e-36, -7.911402614872376e-38, -8.843177655482344e-40,
])


@njit(cache=True, nogil=True)
def dd_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True)
def dd_quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, nogil=True)
def dd_split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def dd_two_prod(a, b):
    p = a * b
    ah, al = dd_split(a)
    bh, bl = dd_split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, nogil=True)
def dd_add(ah, al, bh, bl):
    s, e = dd_two_sum(ah, bh)
    t, f = dd_two_sum(al, bl)
    e += t
    s, e = dd_quick_two_sum(s, e)
    e += f
    return dd_quick_two_sum(s, e)


@njit(cache=True, nogil=True)
def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


@njit(cache=True, nogil=True)
def dd_mul(ah, al, bh, bl):
    p, e = dd_two_prod(ah, bh)
    e += ah * bl + al * bh
    return dd_quick_two_sum(p, e)


@njit(cache=True, nogil=True)
def dd_mul_d(ah, al, b):
    p, e = dd_two_prod(ah, b)
    e += al * b
    return dd_quick_two_sum(p, e)


@njit(cache=True, nogil=True)
def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul_d(bh, bl, q1)
    rh, rl = dd_sub(ah, al, ph, pl)
    q2 = rh / bh
    ph, pl = dd_mul_d(bh, bl, q2)
    rh, rl = dd_sub(rh, rl, ph, pl)
    q3 = rh / bh
    q1, q2 = dd_quick_two_sum(q1, q2)
    return dd_add(q1, q2, q3, 0.0)


@njit(cache=True, nogil=True)
def dd_sqrt(ah, al):
    s = math.sqrt(ah)
    ph, pl = dd_two_prod(s, s)
    rh, rl = dd_sub(ah, al, ph, pl)
    return dd_quick_two_sum(s, rh / (2.0 * s))


@njit(cache=True, nogil=True)
def dd_exp(ah, al):
    """e**a to about 1e-21 relative.

    Reduction by ln 2 and 16, Taylor series whose terms beyond the cubic
    are small enough for plain double arithmetic, then four squarings.
    """
    k = math.floor(ah / LN2_HI + 0.5)
    ph, pl = dd_two_prod(LN2_HI, k)
    pl += LN2_LO * k
    rh, rl = dd_sub(ah, al, ph, pl)
    scale = 1.0 / (1 << _EXP_HALVINGS)
    rh *= scale
    rl *= scale
    # |r| < 0.022: r^4/4! .. r^11/11! in double
    tail = INV_FACT_HI[11]
    for j in range(10, 3, -1):
        tail = tail * rh + INV_FACT_HI[j]
    r2 = rh * rh
    tail *= r2 * r2
    sh, sl = INV_FACT_HI[3], INV_FACT_LO[3]
    sh, sl = dd_mul(sh, sl, rh, rl)
    sh, sl = dd_add(sh, sl, 0.5, 0.0)
    sh, sl = dd_mul(sh, sl, rh, rl)
    sh, sl = dd_add(sh, sl, 1.0, 0.0)
    sh, sl = dd_mul(sh, sl, rh, rl)
    sh, sl = dd_add(sh, sl, tail, 0.0)
    # expm1(2r) = expm1(r) * (2 + expm1(r))
    for _ in range(_EXP_HALVINGS):
        uh, ul = dd_add(sh, sl, 2.0, 0.0)
        sh, sl = dd_mul(sh, sl, uh, ul)
    sh, sl = dd_add(sh, sl, 1.0, 0.0)
    return math.ldexp(sh, int(k)), math.ldexp(sl, int(k))


@njit(cache=True, nogil=True)
def dd_sincos(ah, al):
    """(sin a, cos a) for |a| <= pi / 2, to about 1e-21.

    Taylor series at y = a / 8, whose terms past y^4 are small enough for
    plain double arithmetic, then three angle doublings.
    """
    scale = 1.0 / (1 << _SINCOS_HALVINGS)
    yh, yl = ah * scale, al * scale
    zh, zl = dd_mul(yh, yl, yh, yl)
    # tails: y^5/5! - y^7/7! + ... and -y^6/6! + y^8/8! - ... up to y^16
    st = -INV_FACT_HI[15]
    ct = INV_FACT_HI[16]
    for k in range(6, 1, -1):
        sign = 1.0 if k % 2 == 0 else -1.0
        st = st * zh + sign * INV_FACT_HI[2 * k + 1]
        ct = ct * zh + sign * INV_FACT_HI[2 * k + 2]
    z2 = zh * zh
    st *= yh * z2
    ct *= -(z2 * zh)
    # sin y = y (1 - z/6) + tail, cos y = 1 - z/2 + z^2/24 + tail
    sh, sl = dd_mul(zh, zl, -INV_FACT_HI[3], -INV_FACT_LO[3])
    sh, sl = dd_add(sh, sl, 1.0, 0.0)
    sh, sl = dd_mul(sh, sl, yh, yl)
    sh, sl = dd_add(sh, sl, st, 0.0)
    ch, cl = dd_mul(zh, zl, INV_FACT_HI[4], INV_FACT_LO[4])
    ch, cl = dd_add(ch, cl, -0.5, 0.0)
    ch, cl = dd_mul(ch, cl, zh, zl)
    ch, cl = dd_add(ch, cl, 1.0, 0.0)
    ch, cl = dd_add(ch, cl, ct, 0.0)
    for _ in range(_SINCOS_HALVINGS):
        # sin 2y = 2 sin y cos y, cos 2y = 1 - 2 sin^2 y
        th, tl = dd_mul(sh, sl, ch, cl)
        uh, ul = dd_mul(sh, sl, sh, sl)
        ch, cl = dd_sub(1.0, 0.0, 2.0 * uh, 2.0 * ul)
        sh, sl = 2.0 * th, 2.0 * tl
    return sh, sl, ch, cl


# -- wedge series -----------------------------------------------------------


@njit(cache=True, nogil=True)
def derive(a1, b1, a2, b2):
    a_plus = (a1 + a2) / 2.0
    a_minus = (a1 - a2) / 2.0
    b_plus = (b1 + b2) / 2.0
    b_minus = (b1 - b2) / 2.0
    c = (a1 * b1 - a2 * b2) / 2.0
    d = (a1 * b2 - a2 * b1) / 2.0
    return a_plus, a_minus, b_plus, b_minus, c, d


@njit(cache=True, nogil=True)
def products(a1, b1, a2, b2):
    return a1 * b1, a2 * b2, a1 * b2, a2 * b1


@njit(cache=True, nogil=True)
def doob_exponents(n, p11, p22, p12, p21):
    """A_n, B_n, C_n, D_n from the cross products p_ij = a_i * b_j.

    Every coefficient is non-negative, so nothing cancels; the equivalent
    form in a+, b+, c, d subtracts quantities of size a1 b1 to produce a2 b2
    and loses up to ~1e-14 when the two products differ widely.
    """
    nn = n * n
    mm = (n - 1.0) * (n - 1.0)
    nm = n * (n - 1.0)
    np1 = n * (n + 1.0)
    s = p11 + p22
    cross = p21 + p12
    a_n = (nn * p22 + mm * p11) + nm * cross
    b_n = (mm * p22 + nn * p11) + nm * cross
    c_n = nn * s + (nm * p21 + np1 * p12)
    d_n = nn * s + (np1 * p21 + nm * p12)
    return a_n, b_n, c_n, d_n


@njit(cache=True, nogil=True)
def doob_first(p11, p22, p12, p21):
    """The four n = 1 exponentials, shared by the 0/1 test and the series."""
    a_1, b_1, c_1, d_1 = doob_exponents(1.0, p11, p22, p12, p21)
    return math.exp(-2.0 * a_1), math.exp(-2.0 * b_1), math.exp(-2.0 * c_1), math.exp(-2.0 * d_1)


@njit(cache=True, nogil=True)
def doob_rest(s, p11, p22, p12, p21, n_terms):
    """Add Doob terms 2..n_terms to the running sum s."""
    for n in range(2, n_terms + 1):
        a_n, b_n, c_n, d_n = doob_exponents(float(n), p11, p22, p12, p21)
        s += (math.exp(-2.0 * a_n) + math.exp(-2.0 * b_n)) - (
            math.exp(-2.0 * c_n) + math.exp(-2.0 * d_n)
        )
    return s


@njit(cache=True, nogil=True)
def doob_sum(p11, p22, p12, p21, n_terms):
    """Sum of the first ``n_terms`` Doob terms; K1 = 1 - doob_sum."""
    if n_terms < 1:
        return 0.0
    e_a, e_b, e_c, e_d = doob_first(p11, p22, p12, p21)
    return doob_rest((e_a + e_b) - (e_c + e_d), p11, p22, p12, p21, n_terms)


@njit(cache=True, nogil=True)
def _chebyshev(kh, kl, xh, xl, x0h, x0l):
    """k x - x0 in double-double."""
    ph, pl = dd_mul(kh, kl, xh, xl)
    return dd_sub(ph, pl, x0h, x0l)


@njit(cache=True, nogil=True)
def theta_partials(a1, b1, a2, b2, n_terms, out):
    """Theta-dual partial sums K_{2,0..n_terms} into ``out``, in double-double.

    With alpha = pi a- / (2 a+) and beta = pi b- / (2 b+) the terms are

        2 sqrt(pi / (2x)) e^{d^2 / (2x) - q m^2} * sin(m alpha) sin(m beta)   (m even)
                                                  * cos(m alpha) cos(m beta)   (m odd)

    with q = pi^2 / (8x); this is the cos(m w d) -/+ cos(m w c) form after
    product-to-sum.  The terms reach e^{2x} while the sum can be small, so
    in double precision the rounding of each term (~1e-15 absolute) would
    show in the result; the double-double evaluation removes it.
    """
    aph, apl = dd_two_sum(a1, a2)
    amh, aml = dd_two_sum(a1, -a2)
    bph, bpl = dd_two_sum(b1, b2)
    bmh, bml = dd_two_sum(b1, -b2)
    # x = a+ b+ = (a1 + a2)(b1 + b2) / 4; alpha = pi (a1 - a2) / (2 (a1 + a2))
    xh, xl = dd_mul(aph, apl, bph, bpl)
    xh, xl = 0.25 * xh, 0.25 * xl
    th, tl = dd_div(amh, aml, 2.0 * aph, 2.0 * apl)
    alh, all_ = dd_mul(PI_HI, PI_LO, th, tl)
    th, tl = dd_div(bmh, bml, 2.0 * bph, 2.0 * bpl)
    beh, bel = dd_mul(PI_HI, PI_LO, th, tl)
    # d = (a1 b2 - a2 b1) / 2, exponent d^2 / (2x) - q
    ph, pl = dd_two_prod(a1, b2)
    rh, rl = dd_two_prod(a2, b1)
    dh, dl = dd_sub(ph, pl, rh, rl)
    dh, dl = 0.5 * dh, 0.5 * dl
    ddh, ddl = dd_mul(dh, dl, dh, dl)
    ddh, ddl = dd_div(ddh, ddl, 2.0 * xh, 2.0 * xl)
    qh, ql = dd_div(PI2_HI, PI2_LO, 8.0 * xh, 8.0 * xl)
    preh, prel = dd_div(PI_HI, PI_LO, 2.0 * xh, 2.0 * xl)
    preh, prel = dd_sqrt(preh, prel)
    preh, prel = 2.0 * preh, 2.0 * prel

    # e^{dd - q m^2} by the ratios e^{-q (2m + 1)}
    eh, el = dd_sub(ddh, ddl, qh, ql)
    eh, el = dd_exp(eh, el)
    gh, gl = dd_exp(-qh, -ql)
    g2h, g2l = dd_mul(gh, gl, gh, gl)
    rth, rtl = dd_mul(g2h, g2l, gh, gl)
    s1a, s1al, c1a, c1al = dd_sincos(alh, all_)
    s1b, s1bl, c1b, c1bl = dd_sincos(beh, bel)
    # sin and cos of m alpha, m beta by X_{m+1} = 2 cos(t) X_m - X_{m-1}
    k2ah, k2al = 2.0 * c1a, 2.0 * c1al
    k2bh, k2bl = 2.0 * c1b, 2.0 * c1bl
    sa0, sa0l, ca0, ca0l = 0.0, 0.0, 1.0, 0.0
    sa, sal, ca, cal = s1a, s1al, c1a, c1al
    sb0, sb0l, cb0, cb0l = 0.0, 0.0, 1.0, 0.0
    sb, sbl, cb, cbl = s1b, s1bl, c1b, c1bl

    sh, sl = 0.0, 0.0
    out[0] = 0.0
    for m in range(1, 2 * n_terms + 1):
        if m % 2 == 1:
            uh, ul = dd_mul(ca, cal, cb, cbl)
        else:
            uh, ul = dd_mul(sa, sal, sb, sbl)
        uh, ul = dd_mul(eh, el, uh, ul)
        sh, sl = dd_add(sh, sl, uh, ul)
        if m % 2 == 0:
            vh, vl = dd_mul(preh, prel, sh, sl)
            out[m // 2] = vh + vl
        eh, el = dd_mul(eh, el, rth, rtl)
        rth, rtl = dd_mul(rth, rtl, g2h, g2l)
        sa0, sa0l, sa, sal = sa, sal, *_chebyshev(k2ah, k2al, sa, sal, sa0, sa0l)
        ca0, ca0l, ca, cal = ca, cal, *_chebyshev(k2ah, k2al, ca, cal, ca0, ca0l)
        sb0, sb0l, sb, sbl = sb, sbl, *_chebyshev(k2bh, k2bl, sb, sbl, sb0, sb0l)
        cb0, cb0l, cb, cbl = cb, cbl, *_chebyshev(k2bh, k2bl, cb, cbl, cb0, cb0l)


@njit(cache=True, nogil=True)
def theta_value(a1, b1, a2, b2, n_terms):
    """K_{2,n_terms}."""
    out = np.empty(n_terms + 1)
    theta_partials(a1, b1, a2, b2, n_terms, out)
    return out[n_terms]


@njit(cache=True, nogil=True)
def log_bound_r1(x, n_terms):
    m = n_terms - 1.0
    return -math.log(4.0 * x * m) - 8.0 * x * m * m


@njit(cache=True, nogil=True)
def log_bound_r2(x, n_terms):
    return (
        LOG_2_OVER_PI_32
        + 0.5 * math.log(x)
        - math.log(n_terms)
        + 2.0 * x
        - PI2 * n_terms * n_terms / (2.0 * x)
    )


@njit(cache=True, nogil=True)
def one_bound_exps(e_a, e_b, e_c, e_d):
    """Upper bound on 1 - k from the n = 1 Doob exponentials.

    4 e^{-2 min(A1, B1)} + 2 (e^{-2 C1} + e^{-2 D1}).  Valid whenever it is
    small: the tail over n >= 2 is dominated by the n = 1 term as soon as
    8 a+ b+ > log 2, which any value below 1e-16 implies.
    """
    return 4.0 * max(e_a, e_b) + 2.0 * (e_c + e_d)


@njit(cache=True, nogil=True)
def one_bound(p11, p22, p12, p21):
    e_a, e_b, e_c, e_d = doob_first(p11, p22, p12, p21)
    return one_bound_exps(e_a, e_b, e_c, e_d)


@njit(cache=True, nogil=True)
def zero_bound(x):
    """Upper bound on k: sqrt(2 pi / x) e^{2x} sum_{m>=1} e^{-pi^2 m^2 / (8x)}.

    The sum is bounded by e^{-q} / (1 - e^{-3q}) since m^2 - 1 >= 3(m - 1).
    """
    q = PI2 / (8.0 * x)
    return math.exp(
        0.5 * math.log(2.0 * PI / x) + 2.0 * x - q - math.log1p(-math.exp(-3.0 * q))
    )


@njit(cache=True, nogil=True)
def wedge_one(a1, b1, a2, b2, n_terms, tau):
    """Threshold-selected evaluation. Returns (raw value, code, terms, bound).

    The raw value is not clamped; callers clip to [0, 1].
    """
    if not (a1 > 0.0 and b1 > 0.0 and a2 > 0.0 and b2 > 0.0):
        return 0.0, TRIVIAL_ZERO, 0, 0.0
    a_plus, a_minus, b_plus, b_minus, c, d = derive(a1, b1, a2, b2)
    p11, p22, p12, p21 = products(a1, b1, a2, b2)
    x = a_plus * b_plus
    e_a, e_b, e_c, e_d = doob_first(p11, p22, p12, p21)
    if one_bound_exps(e_a, e_b, e_c, e_d) < TRIVIAL_EPS:
        return 1.0, TRIVIAL_ONE, 0, 0.0
    # zero_bound exceeds 1 for x >= 0.85 and every tau_N is above that
    if x < tau and zero_bound(x) < TRIVIAL_EPS:
        return 0.0, TRIVIAL_ZERO, 0, 0.0
    if x >= tau:
        s = doob_rest((e_a + e_b) - (e_c + e_d), p11, p22, p12, p21, n_terms)
        value = 1.0 - s
        return value, DOOB, n_terms, math.exp(log_bound_r1(x, n_terms))
    value = theta_value(a1, b1, a2, b2, n_terms)
    return value, THETA, n_terms, math.exp(log_bound_r2(x, n_terms))


@njit(cache=True, nogil=True)
def wedge_many(a1, b1, a2, b2, n_terms, tau, value, code, terms, bound, start, stop):
    for i in range(start, stop):
        v, f, t, r = wedge_one(a1[i], b1[i], a2[i], b2[i], n_terms, tau)
        value[i] = v
        code[i] = f
        terms[i] = t
        bound[i] = r


# -- special cases ---------------------------------------------------------
# The Doob branch of each mirrors wedge_one with coincident products merged
# (eA + eA -> 2 eA), keeping the operation order, so it agrees with the
# general kernel exactly while doing less work.  The theta branch calls the
# general double-double routine.


@njit(cache=True, nogil=True)
def ks_one(a, n_terms, tau):
    if not a > 0.0:
        return 0.0
    p = a * a
    x = a * a
    if one_bound(p, p, p, p) < TRIVIAL_EPS:
        return 1.0
    if zero_bound(x) < TRIVIAL_EPS:
        return 0.0
    s = 0.0
    if x >= tau:
        for n in range(1, n_terms + 1):
            a_n, b_n, c_n, d_n = doob_exponents(float(n), p, p, p, p)
            s += 2.0 * math.exp(-2.0 * a_n) - 2.0 * math.exp(-2.0 * c_n)
        return 1.0 - s
    return theta_value(a, a, a, a, n_terms)


@njit(cache=True, nogil=True)
def equal_slopes_one(a, b1, b2, n_terms, tau):
    if not (a > 0.0 and b1 > 0.0 and b2 > 0.0):
        return 0.0
    p1 = a * b1
    p2 = a * b2
    x = a * ((b1 + b2) / 2.0)
    if one_bound(p1, p2, p2, p1) < TRIVIAL_EPS:
        return 1.0
    if zero_bound(x) < TRIVIAL_EPS:
        return 0.0
    s = 0.0
    if x >= tau:
        for n in range(1, n_terms + 1):
            a_n, b_n, c_n, d_n = doob_exponents(float(n), p1, p2, p2, p1)
            s += (math.exp(-2.0 * a_n) + math.exp(-2.0 * b_n)) - (
                math.exp(-2.0 * c_n) + math.exp(-2.0 * d_n)
            )
        return 1.0 - s
    return theta_value(a, b1, a, b2, n_terms)


@njit(cache=True, nogil=True)
def equal_all_one(a1, a2, n_terms, tau):
    if not (a1 > 0.0 and a2 > 0.0):
        return 0.0
    p11 = a1 * a1
    p22 = a2 * a2
    p12 = a1 * a2
    a_plus = (a1 + a2) / 2.0
    x = a_plus * a_plus
    if one_bound(p11, p22, p12, p12) < TRIVIAL_EPS:
        return 1.0
    if zero_bound(x) < TRIVIAL_EPS:
        return 0.0
    s = 0.0
    if x >= tau:
        for n in range(1, n_terms + 1):
            a_n, b_n, c_n, d_n = doob_exponents(float(n), p11, p22, p12, p12)
            s += (math.exp(-2.0 * a_n) + math.exp(-2.0 * b_n)) - 2.0 * math.exp(-2.0 * c_n)
        return 1.0 - s
    return theta_value(a1, a1, a2, a2, n_terms)


# -- convergence counting --------------------------------------------------


@njit(cache=True, nogil=True)
def first_converged(a1, b1, a2, b2, eps, max_terms):
    """Terms to convergence of both series against their own max_terms sums.

    Returns (n_doob, n_theta, trivial, log x, log bound_r1, log bound_r2)
    where the two log bounds are evaluated at max_terms and certify the
    reference truncation.
    """
    a_plus, a_minus, b_plus, b_minus, c, d = derive(a1, b1, a2, b2)
    p11, p22, p12, p21 = products(a1, b1, a2, b2)
    x = a_plus * b_plus
    trivial = one_bound(p11, p22, p12, p21) < TRIVIAL_EPS or zero_bound(x) < TRIVIAL_EPS

    k1 = np.empty(max_terms + 1)
    k2 = np.empty(max_terms + 1)
    k1[0] = 1.0
    s1 = 0.0
    # same operation order as doob_sum so the prefixes match it
    for n in range(1, max_terms + 1):
        a_n, b_n, c_n, d_n = doob_exponents(float(n), p11, p22, p12, p21)
        s1 += (math.exp(-2.0 * a_n) + math.exp(-2.0 * b_n)) - (
            math.exp(-2.0 * c_n) + math.exp(-2.0 * d_n)
        )
        k1[n] = 1.0 - s1
    theta_partials(a1, b1, a2, b2, max_terms, k2)

    n_doob = max_terms
    for n in range(max_terms + 1):
        if abs(k1[max_terms] - k1[n]) < eps:
            n_doob = n
            break
    n_theta = max_terms
    for n in range(max_terms + 1):
        if abs(k2[max_terms] - k2[n]) < eps:
            n_theta = n
            break
    return (
        n_doob,
        n_theta,
        trivial,
        math.log(x),
        log_bound_r1(x, max_terms),
        log_bound_r2(x, max_terms),
    )


@njit(cache=True, nogil=True)
def study_many(p, eps, max_terms, n_doob, n_theta, trivial, log_x, cert1, cert2, start, stop):
    log_eps = math.log(eps)
    for i in range(start, stop):
        nd, nt, tr, lx, lr1, lr2 = first_converged(p[i, 0], p[i, 1], p[i, 2], p[i, 3], eps, max_terms)
        n_doob[i] = nd
        n_theta[i] = nt
        trivial[i] = tr
        log_x[i] = lx
        cert1[i] = lr1 < log_eps
        cert2[i] = lr2 < log_eps


# -- piecewise-linear bridge decomposition ---------------------------------


@njit(cache=True, nogil=True)
def bridge_factor(sqrt_dt, g1s, g1e, g2s, g2e, n_terms, tau):
    if not (g1s > 0.0 and g1e > 0.0 and g2s > 0.0 and g2e > 0.0):
        return 0.0
    v, f, t, r = wedge_one(g1e / sqrt_dt, g1s / sqrt_dt, g2e / sqrt_dt, g2s / sqrt_dt, n_terms, tau)
    return min(max(v, 0.0), 1.0)


@njit(cache=True, nogil=True)
def path_products(z, sqrt_dt, lower, upper, n_terms, tau, out):
    """Per-path product of bridge factors given standard normal increments z."""
    n_paths, m = z.shape
    for p in range(n_paths):
        w_prev = 0.0
        prod = 1.0
        for i in range(m):
            w = w_prev + sqrt_dt[i] * z[p, i]
            # open band at knots
            if not (lower[i + 1] < w < upper[i + 1]):
                prod = 0.0
                break
            prod *= bridge_factor(
                sqrt_dt[i],
                w_prev - lower[i],
                w - lower[i + 1],
                upper[i] - w_prev,
                upper[i + 1] - w,
                n_terms,
                tau,
            )
            if prod == 0.0:
                break
            w_prev = w
        out[p] = prod
