"""Witt vectors of finite length over any coefficient ring.

Arithmetic uses the universal polynomials for length <= 5 (any ring,
including those of characteristic p).  For longer vectors, needed by the
series code, operations are transported through the ghost map: components
are lifted to a copy of the ring with guard digits, combined pointwise on
ghost coordinates, and recovered by exact division.  That shortcut is only
available on rings where p is not a zero divisor at working precision
(TowerRing instances); vectors over finite fields never need length > 5.
"""

from __future__ import annotations

from .errors import NotDivisible, NotGaloisStable, RingMismatch, TooShort
from .fields import Fq
from .rings import RingElem, TowerRing
from .upoly import MAX_LENGTH, eval_plan_at, structural_polys


class WittVec:
    """Finite Witt vector; components live in ``ring``."""

    __slots__ = ("ring", "comps")

    def __init__(self, ring, comps):
        self.ring = ring
        self.comps = tuple(comps)

    def __len__(self):
        return len(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __eq__(self, other):
        return (
            isinstance(other, WittVec)
            and self.ring is other.ring
            and len(self) == len(other)
            and all(a == b for a, b in zip(self.comps, other.comps))
        )

    def __hash__(self):
        raise TypeError("WittVec is unhashable")

    def __add__(self, other):
        return witt_add(self, other)

    def __sub__(self, other):
        return witt_add(self, witt_neg(other))

    def __neg__(self):
        return witt_neg(self)

    def __mul__(self, other):
        return witt_mul(self, other)

    def __pow__(self, n):
        assert n >= 1
        acc = self
        for _ in range(n - 1):
            acc = witt_mul(acc, self)
        return acc

    def __repr__(self):
        return f"W({', '.join(repr(c) for c in self.comps)})"

    def truncate(self, length):
        assert length <= len(self)
        return WittVec(self.ring, self.comps[:length])

    def is_zero(self):
        return all(_is_zero(c) for c in self.comps)

    def to_json_obj(self):
        return {
            "length": len(self),
            "components": [
                c.to_json_obj() if hasattr(c, "to_json_obj") else list(c.co)
                for c in self.comps
            ],
        }


class GhostSeq:
    """A finite slice of the product-ring side (ghost coordinates)."""

    __slots__ = ("ring", "entries")

    def __init__(self, ring, entries):
        self.ring = ring
        self.entries = tuple(entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        return (
            isinstance(other, GhostSeq)
            and len(self) == len(other)
            and all(a == b for a, b in zip(self.entries, other.entries))
        )

    def __add__(self, other):
        return GhostSeq(self.ring, [a + b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, other):
        return GhostSeq(self.ring, [a * b for a, b in zip(self.entries, other.entries)])

    def __repr__(self):
        return f"<{', '.join(repr(c) for c in self.entries)}>"


def _is_zero(c):
    if hasattr(c, "is_zero"):
        return c.is_zero()
    return not c


def _check_pair(a, b):
    if a.ring is not b.ring:
        raise RingMismatch("Witt vectors over different rings")
    return min(len(a), len(b))


def zero_vec(ring, length):
    return WittVec(ring, [ring.zero() for _ in range(length)])


def one_vec(ring, length):
    return WittVec(ring, [ring.one()] + [ring.zero() for _ in range(length - 1)])


def tau(ring, x, length):
    """The multiplicative section x -> (x, 0, ..., 0)."""
    return WittVec(ring, [x] + [ring.zero() for _ in range(length - 1)])


def versch(a, k=1):
    """Shift k zeros in front, keeping the declared length."""
    if k == 0:
        return a
    ring = a.ring
    zeros = [ring.zero() for _ in range(min(k, len(a)))]
    return WittVec(ring, (zeros + list(a.comps))[: len(a)])


def witt_map(fn, a, target_ring=None):
    """Apply a ring morphism componentwise."""
    ring = target_ring if target_ring is not None else a.ring
    return WittVec(ring, [fn(c) for c in a.comps])


def ghost_map(a):
    """Ghost coordinates fant_n(a_0..a_n) for n < len(a)."""
    return GhostSeq(a.ring, _ghost_entries(a.ring, a.comps, len(a)))


def _ghost_entries(ring, comps, length):
    p = ring.p
    out = []
    pows = []  # pows[i] = a_i^(p^(n-i)) entering step n
    for n in range(length):
        for i in range(n):
            pows[i] = pows[i] ** p
        pows.append(comps[n])
        acc = ring.zero()
        for i in range(n + 1):
            acc = acc + pows[i].scale_int(p**i)
        out.append(acc)
    return out


def ghost_shift(u):
    """f_A: drop the first ghost entry."""
    return GhostSeq(u.ring, u.entries[1:])


def ghost_vshift(u):
    """v_A: prepend 0 and multiply the rest by p."""
    p = u.ring.p
    return GhostSeq(u.ring, [u.ring.zero()] + [c.scale_int(p) for c in u.entries])


# -- arithmetic dispatch ---------------------------------------------------------


def _is_p_regular(ring):
    return isinstance(ring, TowerRing)


_family_cache = {}


def _family(kind, p, n):
    """The n-th structural polynomial, cast to its minimal frame and cached
    so its evaluation plan is reused across calls."""
    got = _family_cache.get((kind, p, n))
    if got is None:
        poly = structural_polys(kind, p, n + 1)[n]
        if kind in ("sum", "prod"):
            got = poly.cast(n + 1, n + 1)
        elif kind == "neg":
            got = poly.cast(n + 1, 0)
        else:
            got = poly.cast(n + 2, 0)
        _family_cache[(kind, p, n)] = got
    return got


def _universal_binary(kind, a, b, length):
    out = []
    for n in range(length):
        values = list(a.comps[: n + 1]) + list(b.comps[: n + 1])
        out.append(eval_plan_at(_family(kind, a.ring.p, n), values))
    return WittVec(a.ring, out)


def _transport_ghosts(ring, vec_comps_list, length):
    """Lift to a guarded copy of the ring and return (big_ring, ghost lists)."""
    big = ring.with_precision(ring.nprec + length)
    lifted = [
        [RingElem(big, c.co) for c in comps] for comps in vec_comps_list
    ]
    ghosts = [_ghost_entries(big, comps, min(length, len(comps))) for comps in lifted]
    return big, ghosts


def _invert_ghosts(big, entries):
    """Exact ghost inversion; divisibility is guaranteed by construction."""
    p = big.p
    comps = []
    pows = []
    for n, u in enumerate(entries):
        acc = u
        for i in range(n):
            pows[i] = pows[i] ** p
            acc = acc - pows[i].scale_int(p**i)
        a_n = acc if n == 0 else acc.exact_div_p(n)
        comps.append(a_n)
        pows.append(a_n)
    return comps


def _transport_binary(op, a, b, length):
    ring = a.ring
    big, (ga, gb) = _transport_ghosts(ring, [a.comps[:length], b.comps[:length]], length)
    combined = [op(x, y) for x, y in zip(ga, gb)]
    comps = _invert_ghosts(big, combined)
    prec = min(
        [c.prec for c in a.comps[:length]] + [c.prec for c in b.comps[:length]]
    )
    return WittVec(ring, [RingElem(ring, ring.reduce_from(c).co, prec) for c in comps])


def _binary(kind, op, a, b):
    length = _check_pair(a, b)
    if length == 0:
        return WittVec(a.ring, [])
    if length <= MAX_LENGTH:
        return _universal_binary(kind, a.truncate(length), b.truncate(length), length)
    if not _is_p_regular(a.ring):
        raise RingMismatch(
            f"Witt length {length} > {MAX_LENGTH} needs a p-regular coefficient ring"
        )
    return _transport_binary(op, a, b, length)


def witt_add(a, b):
    return _binary("sum", lambda x, y: x + y, a, b)


def witt_mul(a, b):
    return _binary("prod", lambda x, y: x * y, a, b)


def witt_neg(a):
    length = len(a)
    if length <= MAX_LENGTH:
        out = []
        for n in range(length):
            out.append(eval_plan_at(_family("neg", a.ring.p, n), list(a.comps[: n + 1])))
        return WittVec(a.ring, out)
    if not _is_p_regular(a.ring):
        raise RingMismatch("Witt negation at this length needs a p-regular ring")
    big, (ga,) = _transport_ghosts(a.ring, [a.comps], length)
    comps = _invert_ghosts(big, [-x for x in ga])
    prec = min(c.prec for c in a.comps)
    return WittVec(a.ring, [RingElem(a.ring, a.ring.reduce_from(c).co, prec) for c in comps])


def frob(a):
    """Witt Frobenius; shortens the vector by one component."""
    length = len(a)
    if length < 2:
        raise TooShort("frob needs length >= 2")
    if length <= MAX_LENGTH:
        out = []
        for n in range(length - 1):
            out.append(eval_plan_at(_family("frob", a.ring.p, n), list(a.comps[: n + 2])))
        return WittVec(a.ring, out)
    if not _is_p_regular(a.ring):
        raise RingMismatch("Witt Frobenius at this length needs a p-regular ring")
    big, (ga,) = _transport_ghosts(a.ring, [a.comps], length)
    comps = _invert_ghosts(big, ga[1:])
    prec = min(c.prec for c in a.comps)
    return WittVec(a.ring, [RingElem(a.ring, a.ring.reduce_from(c).co, prec) for c in comps])


def scalar_nat(a, n):
    """n * a in the Witt ring (n a natural number), by double-and-add."""
    assert n >= 0
    acc = zero_vec(a.ring, len(a))
    base = a
    while n:
        if n & 1:
            acc = witt_add(acc, base)
        base = witt_add(base, base)
        n >>= 1
    return acc


def witt_div_p(a):
    """The unique c with p*c = a, or NotDivisible.

    Solved through ghost coordinates with guard digits; p must not be a
    zero divisor in the coefficient ring.
    """
    ring = a.ring
    if not _is_p_regular(ring):
        raise RingMismatch("witt_div_p needs a p-regular coefficient ring")
    length = len(a)
    big, (ga,) = _transport_ghosts(ring, [a.comps], length)
    try:
        halved = [x.exact_div_p(1) for x in ga]
        comps = _invert_ghosts(big, halved)
    except NotDivisible:
        raise NotDivisible("vector is not in p*W(A) at working precision") from None
    prec = min(c.prec for c in a.comps) - ring.e
    return WittVec(ring, [RingElem(ring, ring.reduce_from(c).co, prec) for c in comps])


def delta(x, length):
    """The unique vector with constant ghost <x, x, ...> (x over Z/p^N).

    Component n loses n guard digits to the exact divisions.
    """
    from .upoly import GhostSolveInput, ghost_invert

    ring = x.ring
    assert isinstance(ring, TowerRing) and ring.m == -1 and ring.s == 1
    comps = ghost_invert(
        GhostSolveInput(ring, [x] * length, lambda t: t, headroom=length)
    )
    return WittVec(ring, comps)


def te_lift(y, target, length):
    """Componentwise Teichmueller lift, zero padded to ``length``."""
    assert length >= len(y)
    comps = [target.teichmuller(c) for c in y.comps]
    comps += [target.zero() for _ in range(length - len(y))]
    return WittVec(target, comps)


def witt_trace(y, s, r):
    """Trace W_l(F_{q^r}) -> W_l(F_q): sum of the r Frobenius-power twists."""
    field = y.ring
    if not isinstance(field, Fq) or field.s != s * r:
        raise RingMismatch("witt_trace expects a vector over F_{q^r}")
    from .fields import finite_field

    base = finite_field(field.p, s)
    q = base.q
    acc = None
    for i in range(r):
        twist = WittVec(field, [c ** (q**i) for c in y.comps])
        acc = twist if acc is None else witt_add(acc, twist)
    for c in acc.comps:
        if c**q != c:
            raise NotGaloisStable("trace output has a component not fixed by x -> x^q")
    _, unembed = base.embedding_into(field)
    return WittVec(base, [unembed(c) for c in acc.comps])


def series_development(a):
    """sum_n V^n(tau(a_n)); equals a (used as a test invariant)."""
    ring = a.ring
    acc = zero_vec(ring, len(a))
    for n, c in enumerate(a.comps):
        acc = witt_add(acc, versch(tau(ring, c, len(a)), n))
    return acc
