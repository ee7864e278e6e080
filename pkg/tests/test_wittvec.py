"""Witt vector ring laws and the Frobenius/shift relations."""

import random

import pytest

from wittlab.errors import NotDivisible, RingMismatch, TooShort
from wittlab.fields import finite_field
from wittlab.rings import LubinTateSeries, RingSpec, make_ring, ring_of
from wittlab.wittvec import (
    WittVec,
    delta,
    frob,
    ghost_map,
    ghost_shift,
    ghost_vshift,
    one_vec,
    scalar_nat,
    series_development,
    tau,
    te_lift,
    versch,
    witt_add,
    witt_div_p,
    witt_map,
    witt_mul,
    witt_neg,
    witt_trace,
    zero_vec,
)


def rand_vec(ring, rng, length):
    return WittVec(ring, [ring.random(rng) for _ in range(length)])


def rand_fq_vec(field, rng, length):
    return WittVec(field, [field.from_index(rng.randrange(field.q)) for _ in range(length)])


def test_f2_addition_example():
    f2 = finite_field(2, 1)
    a = WittVec(f2, [f2.one(), f2.zero()])
    s = witt_add(a, a)
    assert s.comps[0] == f2.zero() and s.comps[1] == f2.one()


def test_unit_and_zero_laws():
    rng = random.Random(1)
    ring = ring_of(3, nprec=8)
    for _ in range(5):
        a = rand_vec(ring, rng, 4)
        assert witt_add(a, zero_vec(ring, 4)) == a
        assert witt_mul(a, one_vec(ring, 4)) == a
        assert witt_add(a, witt_neg(a)).is_zero()


@pytest.mark.parametrize(
    "maker",
    [
        lambda: ("fq", finite_field(2, 2)),
        lambda: ("zp", ring_of(2, nprec=10)),
        lambda: ("zp", ring_of(3, nprec=8)),
    ],
)
def test_ring_axioms_random_triples(maker):
    kind, ring = maker()
    rng = random.Random(42)
    for trial in range(30):
        length = 1 + trial % 4
        if kind == "fq":
            a, b, c = (rand_fq_vec(ring, rng, length) for _ in range(3))
        else:
            a, b, c = (rand_vec(ring, rng, length) for _ in range(3))
        assert witt_add(a, b) == witt_add(b, a)
        assert witt_mul(a, b) == witt_mul(b, a)
        assert witt_add(witt_add(a, b), c) == witt_add(a, witt_add(b, c))
        assert witt_mul(witt_mul(a, b), c) == witt_mul(a, witt_mul(b, c))
        assert witt_mul(a, witt_add(b, c)) == witt_add(witt_mul(a, b), witt_mul(a, c))


def test_ghost_map_is_morphism():
    rng = random.Random(9)
    ring = ring_of(3, nprec=9)
    for _ in range(10):
        a, b = rand_vec(ring, rng, 4), rand_vec(ring, rng, 4)
        assert ghost_map(witt_add(a, b)) == ghost_map(a) + ghost_map(b)
        assert ghost_map(witt_mul(a, b)) == ghost_map(a) * ghost_map(b)


def test_ghost_of_tau_and_v():
    ring = ring_of(5, nprec=6)
    x = ring.from_int(3)
    g = ghost_map(tau(ring, x, 4))
    assert all(g[n] == x ** (5**n) for n in range(4))
    gv = ghost_map(versch(one_vec(ring, 4), 1))
    assert gv[0].is_zero()
    assert all(gv[n] == ring.from_int(5) for n in range(1, 4))
    assert ghost_map(zero_vec(ring, 3)) == GhostZero(ring, 3)


def GhostZero(ring, n):
    from wittlab.wittvec import GhostSeq

    return GhostSeq(ring, [ring.zero()] * n)


def test_ghost_shift_relations():
    from wittlab.wittvec import GhostSeq

    ring = ring_of(3, nprec=8)
    u = GhostSeq(ring, [ring.from_int(1), ring.from_int(2), ring.from_int(3)])
    assert ghost_shift(u) == GhostSeq(ring, [ring.from_int(2), ring.from_int(3)])
    v = ghost_vshift(GhostSeq(ring, [ring.from_int(1), ring.from_int(1)]))
    assert v == GhostSeq(ring, [ring.zero(), ring.from_int(3), ring.from_int(3)])
    rng = random.Random(2)
    for _ in range(5):
        a = rand_vec(ring, rng, 4)
        assert ghost_map(versch(a, 1)).entries[:4] == ghost_vshift(ghost_map(a)).entries[:4]
        assert ghost_map(frob(a)) == ghost_shift(ghost_map(a))


def test_frob_of_tau_and_char_p():
    ring = ring_of(3, nprec=8)
    x = ring.from_int(7)
    assert frob(tau(ring, x, 4)) == tau(ring, x**3, 3)
    f9 = finite_field(3, 2)
    rng = random.Random(4)
    for _ in range(5):
        a = rand_fq_vec(f9, rng, 4)
        assert frob(a) == WittVec(f9, [c**3 for c in a.comps[:3]])


def test_frob_v_relations():
    rng = random.Random(8)
    for ring in (ring_of(2, nprec=12), ring_of(3, nprec=9)):
        p = ring.p
        for _ in range(4):
            a, b = rand_vec(ring, rng, 4), rand_vec(ring, rng, 4)
            # Frob(V(a)) = p a   (compare at output length 3)
            assert frob(versch(a, 1)) == scalar_nat(a, p).truncate(3)
            # V(a) x V(b) = p V(a x b)
            lhs = witt_mul(versch(a, 1), versch(b, 1))
            rhs = scalar_nat(versch(witt_mul(a, b), 1), p)
            assert lhs == rhs
            # V(a x Frob(b)) = V(a) x b
            lhs = versch(witt_mul(a.truncate(3), frob(b)), 1)
            rhs = witt_mul(versch(a, 1), b)
            assert lhs == rhs.truncate(3)
            # V(Frob(a)) = V(1) x a
            lhs = versch(frob(a), 1)
            rhs = witt_mul(versch(one_vec(ring, 4), 1), a)
            assert lhs == rhs.truncate(3)


def test_frob_congruent_to_p_power_mod_pW():
    rng = random.Random(3)
    ring = ring_of(3, nprec=10)
    for _ in range(5):
        a = rand_vec(ring, rng, 4)
        diff = witt_add(frob(a), witt_neg(a**3))
        c = witt_div_p(diff)  # must exist: Frob(a) = a^p mod pW(A)
        assert scalar_nat(c, 3) == WittVec(
            ring, [x for x in diff.comps]
        )


def test_witt_div_p_rejects_units():
    ring = ring_of(3, nprec=8)
    with pytest.raises(NotDivisible):
        witt_div_p(one_vec(ring, 3))


def test_tau_multiplicative_and_scaling():
    ring = ring_of(2, nprec=10)
    rng = random.Random(5)
    for _ in range(8):
        x, y = ring.random(rng), ring.random(rng)
        assert witt_mul(tau(ring, x, 4), tau(ring, y, 4)) == tau(ring, x * y, 4)
        a = rand_vec(ring, rng, 4)
        got = witt_mul(tau(ring, x, 4), a)
        want = WittVec(ring, [(x ** (2**n)) * a[n] for n in range(4)])
        assert got == want


def test_series_development():
    rng = random.Random(6)
    for ring in (ring_of(2, nprec=10), ring_of(3, nprec=8)):
        for _ in range(5):
            a = rand_vec(ring, rng, 4)
            assert series_development(a) == a


def test_witt_map_functorial():
    # componentwise reduction W(Z/p^2) -> W(F_p) commutes with Frob and V
    zp = ring_of(2, nprec=6)
    f2 = finite_field(2, 1)
    red = lambda c: c.residue()
    rng = random.Random(7)
    for _ in range(6):
        a = rand_vec(zp, rng, 4)
        assert witt_map(red, frob(a), f2) == frob(witt_map(red, a, f2))
        assert witt_map(red, versch(a, 1), f2) == versch(witt_map(red, a, f2), 1)
        b = rand_vec(zp, rng, 4)
        assert witt_map(red, witt_add(a, b), f2) == witt_add(
            witt_map(red, a, f2), witt_map(red, b, f2)
        )
    # kernel: vectors with components in ker(rho) map to zero
    a = WittVec(zp, [zp.from_int(2), zp.from_int(4), zp.from_int(6), zp.from_int(2)])
    assert witt_map(red, a, f2).is_zero()


def test_ideal_product_valuations():
    # W(I) W(J) in W(IJ): component valuations add up
    lt = LubinTateSeries.cyclotomic(3)
    ring = make_ring(RingSpec(3, 1, 1, lt, 8))
    rng = random.Random(11)
    pi = ring.pi()
    for _ in range(5):
        a = WittVec(ring, [pi * ring.random(rng) for _ in range(3)])
        b = WittVec(ring, [pi * pi * ring.random(rng) for _ in range(3)])
        prod = witt_mul(a, b)
        for c in prod.comps:
            v = c.valuation()
            assert v is None or v >= 3


def test_truncation_is_morphism():
    ring = ring_of(3, nprec=8)
    rng = random.Random(13)
    for _ in range(6):
        a, b = rand_vec(ring, rng, 4), rand_vec(ring, rng, 4)
        assert witt_add(a, b).truncate(2) == witt_add(a.truncate(2), b.truncate(2))
        assert witt_mul(a, b).truncate(2) == witt_mul(a.truncate(2), b.truncate(2))
    # kernel of truncation: vectors supported above the cut
    v = versch(rand_vec(ring, rng, 4), 2)
    assert v.truncate(2).is_zero()


def test_delta_spec_examples():
    ring = ring_of(3, nprec=12)
    d1 = delta(ring.one(), 4)
    assert d1 == one_vec(ring, 4)
    d0 = delta(ring.zero(), 3)
    assert d0.is_zero()
    dp = delta(ring.from_int(3), 3)
    assert dp[0] == ring.from_int(3)
    assert dp[1] == ring.from_int(1 - 3**2)
    g = ghost_map(dp)
    assert all(e == ring.from_int(3) for e in g.entries)


def test_delta_p2():
    ring = ring_of(2, nprec=12)
    dp = delta(ring.from_int(2), 3)
    assert dp[0] == ring.from_int(2) and dp[1] == ring.from_int(-1)


def test_long_vectors_via_ghost_transport():
    # length 7 > universal cap: transported ops still satisfy ring laws
    ring = ring_of(2, nprec=10)
    rng = random.Random(17)
    a, b, c = (rand_vec(ring, rng, 7) for _ in range(3))
    assert witt_add(a, b) == witt_add(b, a)
    assert witt_mul(witt_mul(a, b), c) == witt_mul(a, witt_mul(b, c))
    assert witt_mul(a, witt_add(b, c)) == witt_add(witt_mul(a, b), witt_mul(a, c))
    # consistency with the universal path on truncations
    assert witt_mul(a, b).truncate(4) == witt_mul(a.truncate(4), b.truncate(4))
    f4 = finite_field(2, 2)
    long_fq = rand_fq_vec(f4, rng, 7)
    with pytest.raises(RingMismatch):
        witt_add(long_fq, long_fq)


def test_frob_too_short():
    ring = ring_of(2, nprec=6)
    with pytest.raises(TooShort):
        frob(one_vec(ring, 1))


def test_te_lift_and_reduction():
    f4 = finite_field(2, 2)
    ring = make_ring(RingSpec(2, 2, -1, None, 10))
    rng = random.Random(19)
    for _ in range(6):
        y = rand_fq_vec(f4, rng, 2)
        lifted = te_lift(y, ring, 4)
        assert witt_map(lambda c: c.residue(), lifted, f4).truncate(2) == y
        assert all(c.is_zero() for c in lifted.comps[2:])
    # Te(y+z) = Te(y) + Te(z) modulo W(pZp[mu]) + V^l W
    for _ in range(6):
        y, z = rand_fq_vec(f4, rng, 2), rand_fq_vec(f4, rng, 2)
        lhs = te_lift(witt_add(y, z), ring, 2)
        rhs = witt_add(te_lift(y, ring, 2), te_lift(z, ring, 2))
        diff = witt_add(lhs, witt_neg(rhs))
        for c in diff.comps:
            assert c.residue() == f4.zero()


def test_witt_trace_spec_examples():
    f2 = finite_field(2, 1)
    f4 = finite_field(2, 2)
    rng = random.Random(23)
    # r = 1: identity
    y = rand_fq_vec(f2, rng, 2)
    assert witt_trace(y, 1, 1) == y
    # y drawn from the base field, embedded: trace = r*y
    emb, _ = f2.embedding_into(f4)
    for _ in range(5):
        y = rand_fq_vec(f2, rng, 2)
        up = witt_map(emb, y, f4)
        assert witt_trace(up, 1, 2) == scalar_nat(y, 2)
    # first component of trace(tau(u)) is the field trace of u
    for u in f4.elements():
        tr = witt_trace(tau(f4, u, 2), 1, 2)
        expect = u + u**2
        assert emb(tr[0]) == expect


def test_witt_trace_wrong_field_raises():
    f4 = finite_field(2, 2)
    y = WittVec(f4, [f4.one(), f4.zero()])
    with pytest.raises(RingMismatch):
        witt_trace(y, 1, 3)  # s*r = 3 but the field has degree 2


def test_transport_agrees_with_universal_polynomials():
    # the ghost-transport shortcut and the universal-polynomial evaluation
    # are independent code paths; they must agree wherever both apply
    from wittlab.rings import LubinTateSeries, RingSpec, make_ring
    from wittlab.wittvec import _transport_binary, _universal_binary, witt_div_p

    rings = [
        (ring_of(2, nprec=14), (3, 4, 5)),
        (ring_of(3, nprec=10), (3, 4)),  # length 5 at p = 3 evaluates S_4: slow
        (make_ring(RingSpec(2, 2, 1, LubinTateSeries.cyclotomic(2), 12)), (4, 5)),
    ]
    rng = random.Random(4242)
    for ring, lengths in rings:
        for length in lengths:
            for _ in range(4):
                a, b = rand_vec(ring, rng, length), rand_vec(ring, rng, length)
                fast_add = _transport_binary(lambda x, y: x + y, a, b, length)
                slow_add = _universal_binary("sum", a, b, length)
                assert fast_add == slow_add, (ring, length, "add")
                fast_mul = _transport_binary(lambda x, y: x * y, a, b, length)
                slow_mul = _universal_binary("prod", a, b, length)
                assert fast_mul == slow_mul, (ring, length, "mul")
