"""Truncated power series: Artin-Hasse, Robba and Pulita exponentials.

Everything with denominators (exp, the Artin-Hasse series) is computed
over exact rationals and only then reduced mod p^N; reductions are refused
when a coefficient is not p-integral.  The Lubin-Tate vector w (ghost
components F^n(T)) lives over Z/p^(N+h)[[T]] truncated at a chosen degree,
and specializes at pi_m to the Witt vector varpi_m.

Series evaluation inside the closed unit disk is certified from observed
coefficient valuations: the last third of the computed window must already
sit above the target precision, and the fitted valuation slope must put
degree 2D above twice the target.  That is an empirical certificate (the
radius-of-convergence statement it stands in for is not re-proved here);
character values downstream are additionally cross-checked by exhaustive
homomorphism tests.
"""

from __future__ import annotations

import functools
from fractions import Fraction

from .errors import (
    NonIntegralResult,
    NotDivisible,
    PrecisionNotReached,
    TailNotCertified,
)
from .rings import RingElem, ring_of
from .upoly import GhostSolveInput, ghost_invert
from .wittvec import WittVec, delta, versch, witt_add, witt_map, witt_mul, witt_neg, zero_vec


def series_length(p, degree):
    """Smallest L with p^L > degree (AH factors beyond L are invisible)."""
    length = 0
    while p**length <= degree:
        length += 1
    return max(length, 1)


# -- exact exponentials -----------------------------------------------------------


def exp_fractions(f, degree):
    """exp of a rational series with f(0) = 0, to the given degree."""
    assert not f or f[0] == 0
    g = [Fraction(1)] + [Fraction(0)] * degree
    fp = [k * (f[k] if k < len(f) else 0) for k in range(degree + 1)]
    for k in range(1, degree + 1):
        acc = Fraction(0)
        for j in range(1, k + 1):
            if j < len(fp) and fp[j]:
                acc += fp[j] * g[k - j]
        g[k] = acc / k
    return g


@functools.lru_cache(maxsize=None)
def artin_hasse_fractions(p, degree):
    """AH(x) = exp(sum x^(p^n)/p^n) as exact rationals."""
    f = [Fraction(0)] * (degree + 1)
    n = 0
    while p**n <= degree:
        f[p**n] = Fraction(1, p**n)
        n += 1
    return tuple(exp_fractions(f, degree))


def reduce_fraction(c, p, pn):
    if c.denominator % p == 0:
        raise NonIntegralResult(f"coefficient {c} is not {p}-integral")
    return c.numerator * pow(c.denominator, -1, pn) % pn


@functools.lru_cache(maxsize=None)
def artin_hasse_ints(p, degree, nprec):
    pn = p**nprec
    return tuple(reduce_fraction(c, p, pn) for c in artin_hasse_fractions(p, degree))


class Series1:
    """Univariate truncated series with RingElem coefficients."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = list(coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @classmethod
    def one(cls, ring, degree):
        return cls(ring, [ring.one()] + [ring.zero()] * degree)

    def __eq__(self, other):
        return (
            isinstance(other, Series1)
            and self.ring is other.ring
            and self.degree == other.degree
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __mul__(self, other):
        degree = min(self.degree, other.degree)
        ring = self.ring
        # sound ultrametric floor: any skipped-at-precision term could hide
        # an error at its own precision, so every output is clamped to it
        floor = min(
            c.prec for c in self.coeffs[: degree + 1] + other.coeffs[: degree + 1]
        )
        out = [ring.zero() for _ in range(degree + 1)]
        for i, a in enumerate(self.coeffs[: degree + 1]):
            if not any(a.co):
                continue
            for j in range(degree + 1 - i):
                b = other.coeffs[j]
                if any(b.co):
                    out[i + j] = out[i + j] + a * b
        return Series1(ring, [RingElem(ring, c.co, floor) for c in out])

    def compose_scale(self, alpha):
        """x -> alpha x."""
        out = []
        acc = self.ring.one()
        for k, c in enumerate(self.coeffs):
            out.append(c * acc if k else c)
            acc = acc * alpha
        return Series1(self.ring, out)

    def compose_xpow(self, step):
        """x -> x^step (tail truncated at the same degree bound)."""
        out = [self.ring.zero() for _ in range(self.degree + 1)]
        for k, c in enumerate(self.coeffs):
            if k * step > self.degree:
                break
            out[k * step] = c
        return Series1(self.ring, out)

    def truncate(self, degree):
        assert degree <= self.degree
        return Series1(self.ring, self.coeffs[: degree + 1])

    def eval_full(self, z):
        """Plain Horner sum of all stored terms (no tail certificate)."""
        acc = self.ring.zero()
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def min_valuations(self):
        return [
            (c.valuation() if c.valuation() is not None else self.ring.cap)
            for c in self.coeffs
        ]

    def to_json_obj(self):
        return {
            "ring": repr(self.ring),
            "var": "x",
            "D": self.degree,
            "coeffs": [c.to_json_obj() for c in self.coeffs],
        }


def artin_hasse_series(ring, degree):
    """AH(x) over a coefficient ring, constant and linear terms 1."""
    ah = artin_hasse_ints(ring.p, degree, ring.nprec)
    return Series1(ring, [ring.from_int(c) for c in ah])


def exp_ring_series(ring, c, degree):
    """exp(c x) over the ring; every c^k/k! must be integral (v(c) high
    enough), enforced by the exact divisions."""
    coeffs = [ring.one()]
    for k in range(1, degree + 1):
        term = coeffs[-1] * c
        v = 0
        kk = k
        while kk % ring.p == 0:
            kk //= ring.p
            v += 1
        if v:
            term = term.exact_div_p(v)
        coeffs.append(term.scale_int(pow(kk, -1, ring.pn)))
    return Series1(ring, coeffs)


def exp_zero_constant(ring, int_coeffs, degree):
    """exp of sum c_k x^k (integer c_k, c_0 = 0) over Z/p^N, via rationals."""
    f = [Fraction(c) for c in int_coeffs]
    g = exp_fractions(f, degree)
    return Series1(
        ring, [ring.from_int(reduce_fraction(c, ring.p, ring.pn)) for c in g]
    )


# -- the Lubin-Tate vector w and its specializations varpi_m ------------------------


class ZpTSeries:
    """Element of Z/p^nprec [[T]] / T^(degree+1), a ghost-invertible ring."""

    __slots__ = ("ring", "co", "prec")

    def __init__(self, ring, co, prec=None):
        self.ring = ring
        self.co = tuple(co)
        self.prec = ring.nprec if prec is None else min(prec, ring.nprec)

    def __add__(self, other):
        pn = self.ring.pn
        return ZpTSeries(
            self.ring,
            [(a + b) % pn for a, b in zip(self.co, other.co)],
            min(self.prec, other.prec),
        )

    def __sub__(self, other):
        pn = self.ring.pn
        return ZpTSeries(
            self.ring,
            [(a - b) % pn for a, b in zip(self.co, other.co)],
            min(self.prec, other.prec),
        )

    def __neg__(self):
        pn = self.ring.pn
        return ZpTSeries(self.ring, [-a % pn for a in self.co], self.prec)

    def __mul__(self, other):
        pn = self.ring.pn
        n = len(self.co)
        out = [0] * n
        for i, a in enumerate(self.co):
            if a:
                for j in range(n - i):
                    b = other.co[j]
                    if b:
                        out[i + j] += a * b
        return ZpTSeries(self.ring, [c % pn for c in out], min(self.prec, other.prec))

    def __pow__(self, k):
        acc = self.ring.one()
        acc = ZpTSeries(self.ring, acc.co, self.prec)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def scale_int(self, c):
        pn = self.ring.pn
        return ZpTSeries(self.ring, [a * c % pn for a in self.co], self.prec)

    def from_int_like(self, c):
        return self.ring.from_int(c)

    def exact_div_p(self, k=1):
        pk = self.ring.p**k
        if any(c % pk for c in self.co):
            raise NotDivisible(f"series not divisible by p^{k}")
        return ZpTSeries(self.ring, [c // pk for c in self.co], self.prec - k)

    def is_zero(self):
        mod = self.ring.p**self.prec if self.prec < self.ring.nprec else self.ring.pn
        return all(c % mod == 0 for c in self.co)

    def __eq__(self, other):
        diff = self - other
        return diff.is_zero()

    def __repr__(self):
        return f"ZpT({list(self.co[:6])}..., prec={self.prec})"


class ZpTSeriesRing:
    def __init__(self, p, nprec, degree):
        self.p = p
        self.nprec = nprec
        self.pn = p**nprec
        self.degree = degree

    def zero(self):
        return ZpTSeries(self, (0,) * (self.degree + 1))

    def one(self):
        return self.from_int(1)

    def from_int(self, c):
        co = [0] * (self.degree + 1)
        co[0] = c % self.pn
        return ZpTSeries(self, co)

    def gen(self):
        co = [0] * (self.degree + 1)
        co[1] = 1
        return ZpTSeries(self, co)

    def from_int_poly(self, coeffs):
        co = [0] * (self.degree + 1)
        for k, c in enumerate(coeffs[: self.degree + 1]):
            co[k] = c % self.pn
        return ZpTSeries(self, co)

    def generators(self):
        return [self.one(), self.gen()]

    def compose(self, g, f):
        """g(f(T)) truncated; f must have zero constant term."""
        assert f.co[0] == 0
        acc = self.zero()
        for c in reversed(g.co):
            acc = acc * f
            acc = acc + self.from_int(c)
        return ZpTSeries(self, acc.co, min(g.prec, f.prec))


def lt_iterate(lt, n, degree, nprec):
    """F^n(T) mod (p^nprec, T^(degree+1)); F^0 = T."""
    ring = ZpTSeriesRing(lt.p, nprec, degree)
    f = ring.from_int_poly(lt.f_coeffs())
    acc = ring.gen()
    for _ in range(n):
        acc = ring.compose(f, acc)
    return acc


@functools.lru_cache(maxsize=None)
def witt_w(lt, length, degree, nprec, headroom):
    """The vector w with fant_n(w) = F^n(T), components in T Z_p[[T]]."""
    ring = ZpTSeriesRing(lt.p, nprec + headroom, degree)
    f = ring.from_int_poly(lt.f_coeffs())
    seq = []
    acc = ring.gen()
    for _ in range(length):
        seq.append(acc)
        acc = ring.compose(f, acc)
    comps = ghost_invert(
        GhostSolveInput(ring, seq, lambda g: ring.compose(g, f), headroom)
    )
    for c in comps:
        assert c.co[0] == 0, "w component has a constant term"
    return tuple(comps)


def varpi(ring, m, length, degree_t=None):
    """varpi_m inside ``ring`` (level >= m): w specialized at pi_m."""
    assert ring.m >= m >= 0
    if degree_t is None:
        degree_t = max(6 * ring.e, 4 * ring.e + 2, 24)
    key = (m, length, degree_t)
    cache = getattr(ring, "_varpi_cache", None)
    if cache is None:
        cache = {}
        ring._varpi_cache = cache
    got = cache.get(key)
    if got is not None:
        return got
    comps_t = witt_w(ring.lt, length, degree_t, ring.nprec, length)
    point = ring.pi_level(m)
    vpi = point.valuation()
    prec = min((degree_t + 1) * vpi, ring.cap)
    comps = []
    for w_n in comps_t:
        val = ring.eval_int_poly(list(w_n.co), point)
        comps.append(RingElem(ring, val.co, prec))
    got = WittVec(ring, comps)
    cache[key] = got
    return got


# -- the Artin-Hasse morphism E and the Pulita exponentials --------------------------


def artin_hasse_E(a, degree):
    """E(a) = prod AH(a_i x^(p^i)) mod x^(degree+1)."""
    ring = a.ring
    p = ring.p
    floor = ring.cap
    acc = [ring.one()] + [ring.zero()] * degree
    for i, comp in enumerate(a.comps):
        step = p**i
        if step > degree:
            break
        floor = min(floor, comp.prec)
        if not any(comp.co):
            continue
        ah = artin_hasse_ints(p, degree // step, ring.nprec)
        new = [ring.zero() for _ in range(degree + 1)]
        apow = ring.one()
        for k in range(degree // step + 1):
            if k:
                apow = apow * comp
            c = apow.scale_int(ah[k]) if k else ring.from_int(ah[0])
            if not any(c.co):
                continue
            base = k * step
            for d in range(degree + 1 - base):
                if any(acc[d].co):
                    new[d + base] = new[d + base] + acc[d] * c
        acc = new
    return Series1(ring, [RingElem(ring, c.co, floor) for c in acc])


def pad_vector(a, length):
    if len(a) >= length:
        return a.truncate(length)
    return WittVec(a.ring, list(a.comps) + [a.ring.zero()] * (length - len(a)))


def phi_vector(a, k=1):
    return witt_map(lambda c: c.phi(k), a)


def robba(ring, m, degree):
    """The Robba exponential e_{m,pi} = E(varpi_m)."""
    length = max(series_length(ring.p, degree), m + 2)
    return artin_hasse_E(varpi(ring, m, length), degree)


def pulita_theta(ring, m, a, degree):
    """theta_m(a) = E(varpi_m a - V(varpi_m a^phi))."""
    length = max(series_length(ring.p, degree), m + 2)
    a = pad_vector(a, length)
    w_m = varpi(ring, m, length)
    prod = witt_mul(w_m, a)
    shifted = versch(witt_mul(w_m, phi_vector(a)), 1)
    return artin_hasse_E(witt_add(prod, witt_neg(shifted)), degree)


def pulita_theta_ms(ring, m, s, a, degree, form="single"):
    """theta_{m,s}(a): E(varpi_m a - V^s(varpi_m a^(phi^s))) or the product
    prod_{i<s} theta_m(a^(phi^i)) o x^(p^i)."""
    assert s >= 1
    length = max(series_length(ring.p, degree), m + 2)
    a = pad_vector(a, length)
    if form == "product":
        acc = Series1.one(ring, degree)
        for i in range(s):
            factor = pulita_theta(ring, m, phi_vector(a, i), degree)
            acc = acc * factor.compose_xpow(ring.p**i)
        return acc
    if form != "single":
        raise ValueError("form must be 'single' or 'product'")
    w_m = varpi(ring, m, length)
    prod = witt_mul(w_m, a)
    shifted = versch(witt_mul(w_m, phi_vector(a, s)), s)
    return artin_hasse_E(witt_add(prod, witt_neg(shifted)), degree)


# -- Witt-coefficient series and the Delta lift of F ---------------------------------


def delta_vector(ring, c, length):
    """Delta(c) mapped into ``ring`` (c an integer)."""
    plain = ring_of(ring.p, nprec=ring.nprec + length + 1)
    vec = delta(plain.from_int(c), length)
    return witt_map(lambda t: ring.from_int(t.co[0]), vec, ring)


def f_delta_coeffs(ring, length):
    """Coefficients of F^Delta(T) in W(ring), from the stored F."""
    return [delta_vector(ring, c, length) for c in ring.lt.f_coeffs()]


def g_delta_coeffs(ring, length):
    return [delta_vector(ring, c, length) for c in ring.lt.g_coeffs] or [
        zero_vec(ring, length)
    ]


def witt_series_eval(coeff_vecs, x, target_prec=None, exact=True):
    """sum_j b_j x^j in the Witt ring, summing until terms vanish.

    With exact=True the coefficient list is a polynomial and is consumed
    entirely.  Otherwise the sum stops once x^j has all component
    valuations >= target_prec, and PrecisionNotReached is raised if the
    list is exhausted first.
    """
    ring = x.ring
    length = len(x)
    vmin = min(
        (c.valuation() if c.valuation() is not None else ring.cap for c in x.comps),
        default=ring.cap,
    )
    acc = zero_vec(ring, length)
    xpow = None
    for j, b in enumerate(coeff_vecs):
        if not exact and target_prec is not None and j * vmin >= target_prec:
            return acc
        if j == 0:
            term = pad_vector(b, length)
        else:
            xpow = x if xpow is None else witt_mul(xpow, x)
            term = witt_mul(pad_vector(b, length), xpow)
        acc = witt_add(acc, term)
    if not exact and target_prec is not None and len(coeff_vecs) * vmin < target_prec:
        raise PrecisionNotReached(
            f"series exhausted at term {len(coeff_vecs)} before reaching {target_prec}"
        )
    return acc


# -- bivariate truncated series (total-degree bound) -----------------------------------


class TruncSeries2:
    """sum b_{i,j} x0^i x1^j for i + j <= degree, coefficients RingElem."""

    __slots__ = ("ring", "degree", "rows")

    def __init__(self, ring, degree, rows=None):
        self.ring = ring
        self.degree = degree
        if rows is None:
            rows = [
                [ring.zero() for _ in range(degree + 1 - i)] for i in range(degree + 1)
            ]
        self.rows = rows

    @classmethod
    def constant(cls, ring, degree, value):
        out = cls(ring, degree)
        out.rows[0][0] = value
        return out

    @classmethod
    def outer(cls, a, b, degree):
        """A(x0) * B(x1) from univariate factors."""
        assert a.ring is b.ring
        out = cls(a.ring, degree)
        for i in range(min(a.degree, degree) + 1):
            ca = a.coeffs[i]
            if not any(ca.co):
                continue
            row = out.rows[i]
            for j in range(min(b.degree, degree - i) + 1):
                cb = b.coeffs[j]
                if any(cb.co):
                    row[j] = ca * cb
        return out

    def coefficient(self, i, j):
        if i < 0 or j < 0 or i + j > self.degree:
            return self.ring.zero()
        return self.rows[i][j]

    def terms(self):
        for i in range(self.degree + 1):
            for j in range(self.degree + 1 - i):
                c = self.rows[i][j]
                if any(c.co):
                    yield i, j, c

    def min_prec(self):
        return min(c.prec for row in self.rows for c in row)

    def scale(self, value):
        out = TruncSeries2(self.ring, self.degree)
        for i, j, c in self.terms():
            out.rows[i][j] = c * value
        return out

    def shift_x0(self, k):
        """Multiply by x0^k (terms beyond the degree bound are dropped)."""
        out = TruncSeries2(self.ring, self.degree)
        for i, j, c in self.terms():
            if i + k + j <= self.degree:
                out.rows[i + k][j] = c
        return out

    def mul_sparse(self, sparse_terms):
        """Multiply by sum c x0^a x1^b given as [(a, b, c), ...]."""
        ring = self.ring
        floor = self.min_prec()
        out = TruncSeries2(ring, self.degree)
        for a, b, c in sparse_terms:
            floor = min(floor, c.prec)
            if not any(c.co):
                continue
            for i in range(self.degree + 1 - a):
                row = self.rows[i]
                orow = out.rows[i + a]
                jmax = self.degree - (i + a) - b
                for j in range(min(len(row) - 1, jmax) + 1):
                    v = row[j]
                    if any(v.co):
                        orow[j + b] = orow[j + b] + v * c
        for i in range(out.degree + 1):
            orow = out.rows[i]
            for j in range(len(orow)):
                orow[j] = RingElem(ring, orow[j].co, min(orow[j].prec, floor))
        return out

    def __mul__(self, other):
        assert self.ring is other.ring
        ring = self.ring
        floor = min(self.min_prec(), other.min_prec())
        out = TruncSeries2(ring, min(self.degree, other.degree))
        for i, j, c in self.terms():
            if i + j > out.degree:
                continue
            for a in range(out.degree + 1 - i - j):
                row = other.rows[a] if a <= other.degree else []
                orow = out.rows[i + a]
                for b in range(min(len(row) - 1, out.degree - i - j - a) + 1):
                    v = row[b]
                    if any(v.co):
                        orow[j + b] = orow[j + b] + c * v
        for i in range(out.degree + 1):
            orow = out.rows[i]
            for j in range(len(orow)):
                orow[j] = RingElem(ring, orow[j].co, min(orow[j].prec, floor))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, TruncSeries2)
            and self.degree == other.degree
            and all(
                self.rows[i][j] == other.rows[i][j]
                for i in range(self.degree + 1)
                for j in range(self.degree + 1 - i)
            )
        )

    def eval_at(self, z0, z1):
        """Plain double-Horner evaluation of all stored terms."""
        acc = self.ring.zero()
        for i in range(self.degree, -1, -1):
            row_val = self.ring.zero()
            for c in reversed(self.rows[i]):
                row_val = row_val * z1 + c
            acc = acc * z0 + row_val
        return acc

    def to_json_obj(self):
        return {
            "D": self.degree,
            "coeffs": [
                {"i": i, "j": j, "c": c.to_json_obj()} for i, j, c in self.terms()
            ],
        }


# -- certified evaluation on the closed unit disk -------------------------------------


def certify_tail(valuations, target, cap):
    """Valuation-floor certificate; returns diagnostics dict or raises.

    Coefficient valuations of the exponentials here are saw-toothed: dips
    at p-power degrees, with dip floors rising linearly.  A raw window
    minimum or a raw least-squares slope both misread a window straddling
    a dip, so the certificate works on the suffix-minimum envelope
    env_k = min(v_j : j >= k) -- the actual floor of everything observed:

      (a) the envelope over the last sixth must have reached the target;
      (b) the least-squares fit of the envelope over the last half,
          evaluated at degree 2D, must clear the target with margin 1.

    The envelope is non-decreasing by construction, so (b) asks the
    observed floor trend to keep strictly above the target beyond the
    truncation.  Downstream, snapped character values are additionally
    validated by exhaustive homomorphism checks, which is the complete
    desk-scale criterion.
    """
    degree = len(valuations) - 1
    env = list(valuations)
    for k in range(degree - 1, -1, -1):
        env[k] = min(env[k], env[k + 1])
    floor_obs = env[min((5 * degree) // 6, degree)]
    if floor_obs < target:
        raise TailNotCertified(
            f"observed valuation floor {floor_obs} below target {target} "
            f"over the last sixth",
            {"floor": floor_obs, "target": target},
        )
    lo = degree // 2
    window = env[lo:]
    n = len(window)
    xs = range(lo, degree + 1)
    xbar = sum(xs) / n
    ybar = sum(window) / n
    num = sum((x - xbar) * (y - ybar) for x, y in zip(xs, window))
    den = sum((x - xbar) ** 2 for x in xs)
    slope = num / den if den else 0.0
    extrapolated = min(ybar + slope * (2 * degree - xbar), cap)
    if extrapolated < target + 1:
        raise TailNotCertified(
            f"extrapolated floor {extrapolated:.1f} at degree {2*degree} "
            f"below safety margin {target + 1}",
            {
                "slope": slope,
                "extrapolated": extrapolated,
                "required_degree_estimate": (
                    degree + (target + 1 - extrapolated) / slope if slope > 0 else None
                ),
            },
        )
    return {"floor": floor_obs, "slope": slope, "extrapolated": extrapolated}


def series_eval_unit(series, z, target_prec):
    """Certified value of the series at integral z, at target pi-precision."""
    vz = z.valuation()
    assert vz is None or vz >= 0, "evaluation point must be integral"
    vals = series.min_valuations()
    certify_tail(vals, target_prec, series.ring.cap)
    value = series.eval_full(z)
    return RingElem(series.ring, value.co, target_prec)
