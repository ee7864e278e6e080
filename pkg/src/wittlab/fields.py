"""Small finite fields F_q = F_p[y]/(h) with a deterministic modulus.

The modulus h is the lexicographically least monic irreducible of degree s
(coefficient tuples (c_0, ..., c_{s-1}) compared left to right), so that the
unramified lifts used elsewhere reduce consistently.  Fields here are desk
scale; everything is exhaustive-friendly.
"""

from __future__ import annotations

import functools
import itertools

from .errors import NotUnit


def _polmul_mod(a, b, modulus, p):
    """Product mod the monic polynomial with low coefficients ``modulus``."""
    s = len(modulus)
    prod = [0] * max(len(a) + len(b) - 1, s)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for i in range(len(prod) - 1, s - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(s):
                prod[i - s + j] = (prod[i - s + j] - c * modulus[j]) % p
    return tuple(prod[:s])


def _is_irreducible(coeffs, p):
    """Crude irreducibility test for a monic poly given by (c_0..c_{s-1})."""
    s = len(coeffs)
    if s == 1:
        return True
    modulus = list(coeffs) + [1]
    # x^(p^k) mod h by repeated Frobenius; h irreducible iff x^(p^s) = x
    # and gcd-degree conditions hold; at this scale, trial division is fine.
    for d in range(1, s // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            div = list(tail) + [1]
            if _poly_divides(div, modulus, p):
                return False
    return True


def _poly_divides(d, f, p):
    f = list(f)
    dd = len(d) - 1
    inv_lead = pow(d[-1], -1, p)
    for i in range(len(f) - 1, dd - 1, -1):
        c = f[i] * inv_lead % p
        if c:
            for j in range(dd + 1):
                f[i - dd + j] = (f[i - dd + j] - c * d[j]) % p
    return not any(f[:dd])


@functools.lru_cache(maxsize=None)
def min_poly_coeffs(p, s):
    """(c_0..c_{s-1}) of the lexicographically least monic irreducible."""
    if s == 1:
        return (0,)
    for tail in itertools.product(range(p), repeat=s):
        coeffs = tuple(tail)
        if coeffs[0] == 0:
            continue  # divisible by y
        if _is_irreducible(coeffs, p):
            return coeffs
    raise AssertionError("no irreducible polynomial found")


@functools.lru_cache(maxsize=None)
def finite_field(p, s):
    return Fq(p, s)


class FqElem:
    __slots__ = ("field", "co")

    def __init__(self, field, co):
        self.field = field
        self.co = co

    def __add__(self, other):
        p = self.field.p
        return FqElem(self.field, tuple((a + b) % p for a, b in zip(self.co, other.co)))

    def __sub__(self, other):
        p = self.field.p
        return FqElem(self.field, tuple((a - b) % p for a, b in zip(self.co, other.co)))

    def __neg__(self):
        p = self.field.p
        return FqElem(self.field, tuple(-a % p for a in self.co))

    def __mul__(self, other):
        return FqElem(
            self.field,
            _polmul_mod(self.co, other.co, self.field.modulus, self.field.p),
        )

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        acc = self.field.one()
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def __eq__(self, other):
        return isinstance(other, FqElem) and self.field is other.field and self.co == other.co

    def __hash__(self):
        return hash((id(self.field), self.co))

    def __bool__(self):
        return any(self.co)

    def __repr__(self):
        return f"Fq({self.field.p}^{self.field.s}):{list(self.co)}"

    def scale_int(self, c):
        p = self.field.p
        return FqElem(self.field, tuple(a * c % p for a in self.co))

    def from_int_like(self, c):
        return self.field.from_int(c)

    def inverse(self):
        if not self:
            raise NotUnit("zero is not invertible")
        return self ** (self.field.q - 2)

    def frobenius(self, k=1):
        """x -> x^(p^k)."""
        return self ** (self.field.p**k)

    def index(self):
        """Integer index sum c_j p^j; fixes the canonical enumeration order."""
        p = self.field.p
        return sum(c * p**j for j, c in enumerate(self.co))


class Fq:
    """The field with p^s elements."""

    def __init__(self, p, s):
        self.p = p
        self.s = s
        self.q = p**s
        self.modulus = min_poly_coeffs(p, s)  # (c_0..c_{s-1}), monic implied

    def zero(self):
        return FqElem(self, (0,) * self.s)

    def one(self):
        return FqElem(self, (1,) + (0,) * (self.s - 1))

    def gen(self):
        if self.s == 1:
            return self.one()
        return FqElem(self, (0, 1) + (0,) * (self.s - 2))

    def from_int(self, c):
        return FqElem(self, (c % self.p,) + (0,) * (self.s - 1))

    def from_coeffs(self, co):
        return FqElem(self, tuple(c % self.p for c in co))

    def from_index(self, idx):
        co = []
        for _ in range(self.s):
            co.append(idx % self.p)
            idx //= self.p
        return FqElem(self, tuple(co))

    def elements(self):
        """All elements in index order (deterministic)."""
        return [self.from_index(i) for i in range(self.q)]

    def units(self):
        return [x for x in self.elements() if x]

    def multiplicative_generator(self):
        for x in self.elements():
            if not x:
                continue
            order = 1
            acc = x
            while acc != self.one():
                acc = acc * x
                order += 1
            if order == self.q - 1:
                return x
        raise AssertionError("no generator found")

    def absolute_trace(self, x):
        """Tr_{F_q/F_p}(x) as an integer in [0, p)."""
        acc = x
        tot = x
        for _ in range(self.s - 1):
            acc = acc.frobenius()
            tot = tot + acc
        assert all(c == 0 for c in tot.co[1:])
        return tot.co[0]

    def embedding_into(self, big):
        """Embedding F_q -> F_{q^r} = ``big`` (big.s must be a multiple of s).

        Deterministic: the generator maps to the first root of our modulus
        in ``big``'s enumeration order.  Returns (map, inverse_map) where
        inverse_map raises KeyError off the image.
        """
        assert big.p == self.p and big.s % self.s == 0
        if big is self:
            ident = {x.co: x for x in self.elements()}
            return (lambda x: x), (lambda x: ident[x.co])
        root = None
        for cand in big.elements():
            acc = big.from_int(1)
            val = big.zero()
            for c in self.modulus:
                val = val + acc.scale_int(c)
                acc = acc * cand
            val = val + acc  # monic leading term
            if not val:
                root = cand
                break
        assert root is not None, "modulus has a root in any extension of degree s|rs"
        fwd = {}
        for x in self.elements():
            acc = big.from_int(1)
            img = big.zero()
            for c in x.co:
                img = img + acc.scale_int(c)
                acc = acc * root
            fwd[x.co] = img
        back = {img.co: self.from_coeffs(co) for co, img in fwd.items()}

        def embed(x):
            return fwd[x.co]

        def unembed(x):
            return back[x.co]

        return embed, unembed
