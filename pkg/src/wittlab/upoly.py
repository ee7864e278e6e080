"""Universal Witt polynomials over the integers.

The ghost polynomial fant_n(X_0..X_n) = sum p^i X_i^(p^(n-i)) and the
structural families S (sum), P (product), I (negation) and F (Frobenius)
are built here with exact integer arithmetic.  The families are obtained by
solving their defining ghost identities degree by degree: the candidate
numerator is assembled on the ghost side and divided by p^n, and the
division is certified exact (IntegralityFailure otherwise).

Polynomials are stored sparsely: a term is a packed integer key (16 bits
per indeterminate, X-block then Y-block) mapping to an integer coefficient.
"""

from __future__ import annotations

import time

from .errors import (
    CongruenceFailure,
    IntegralityFailure,
    MissingAssignment,
    NotDivisible,
    PrecisionExhausted,
    TimeBudgetExceeded,
)

_SHIFT = 16
_MASK = (1 << _SHIFT) - 1

_STRUCTURAL_KINDS = ("sum", "prod", "neg", "frob")

# Generation caps: beyond these the polynomials are astronomically large.
MAX_PRIME = 7
MAX_LENGTH = 5

# Fixed key layout: X_i lives in bit slot i, Y_i in bit slot _YBLOCK + i,
# so keys are stable no matter how many indeterminates a family uses.
_YBLOCK = MAX_LENGTH + 1


class _Deadline:
    """Cooperative wall-clock budget checked inside long multiplications."""

    __slots__ = ("limit",)

    def __init__(self, seconds):
        self.limit = None if seconds is None else time.monotonic() + seconds

    def check(self):
        if self.limit is not None and time.monotonic() > self.limit:
            raise TimeBudgetExceeded("polynomial construction ran over its time budget")


_NO_DEADLINE = _Deadline(None)


def _mul_terms(a, b, deadline=_NO_DEADLINE):
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    items_b = list(b.items())
    for ka, va in a.items():
        deadline.check()
        for kb, vb in items_b:
            k = ka + kb
            c = get(k, 0) + va * vb
            if c:
                out[k] = c
            elif k in out:
                del out[k]
    return out


def _pow_multinomial(items, n, deadline=_NO_DEADLINE):
    """n-th power of a polynomial with very few terms, by multinomials."""
    out = {}
    get = out.get
    last_key, last_coeff = items[-1]

    def rec(idx, rem, key_acc, coeff_acc):
        deadline.check()
        if idx == len(items) - 1:
            k = key_acc + rem * last_key
            c = coeff_acc * last_coeff**rem
            t = get(k, 0) + c
            if t:
                out[k] = t
            elif k in out:
                del out[k]
            return
        kterm, cterm = items[idx]
        binom = 1
        cpow = 1
        for a in range(rem + 1):
            if a:
                binom = binom * (rem - a + 1) // a
                cpow *= cterm
            rec(idx + 1, rem - a, key_acc + a * kterm, coeff_acc * binom * cpow)

    rec(0, n, 0, 1)
    return out


def _pow_terms(terms, n, deadline=_NO_DEADLINE):
    if n == 0:
        return {0: 1}
    if n == 1:
        return dict(terms)
    items = list(terms.items())
    if len(items) <= 4:
        return _pow_multinomial(items, n, deadline)
    acc = dict(terms)
    for _ in range(n - 1):
        acc = _mul_terms(acc, terms, deadline)
    return acc


class UniversalPoly:
    """Sparse polynomial in X_0..X_{nx-1}, Y_0..Y_{ny-1} over the integers."""

    __slots__ = ("prime", "nx", "ny", "terms", "_plan")

    def __init__(self, prime, nx, ny, terms=None):
        self.prime = prime
        self.nx = nx
        self.ny = ny
        self.terms = terms if terms is not None else {}
        self._plan = None

    # -- construction helpers -------------------------------------------------

    def _slot(self, v):
        return v if v < self.nx else _YBLOCK + (v - self.nx)

    @classmethod
    def monomial(cls, prime, nx, ny, exps, coeff=1):
        poly = cls(prime, nx, ny, {})
        key = 0
        for v, e in exps:
            key += e << (_SHIFT * poly._slot(v))
        poly.terms = {key: coeff} if coeff else {}
        return poly

    def _same_shape(self, terms):
        return UniversalPoly(self.prime, self.nx, self.ny, terms)

    def cast(self, nx, ny):
        """The same polynomial viewed in a (possibly smaller) variable frame.

        Valid because key slots are frame-independent; the caller must know
        the polynomial only involves the retained indeterminates.
        """
        return UniversalPoly(self.prime, nx, ny, self.terms)

    # -- ring operations -------------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        get = out.get
        for k, v in other.terms.items():
            c = get(k, 0) + v
            if c:
                out[k] = c
            elif k in out:
                del out[k]
        return self._same_shape(out)

    def __sub__(self, other):
        out = dict(self.terms)
        get = out.get
        for k, v in other.terms.items():
            c = get(k, 0) - v
            if c:
                out[k] = c
            elif k in out:
                del out[k]
        return self._same_shape(out)

    def __neg__(self):
        return self._same_shape({k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self._same_shape({})
            return self._same_shape({k: v * other for k, v in self.terms.items()})
        return self._same_shape(_mul_terms(self.terms, other.terms))

    __rmul__ = __mul__

    def __pow__(self, n):
        return self._same_shape(_pow_terms(self.terms, n))

    def __eq__(self, other):
        return (
            isinstance(other, UniversalPoly)
            and self.terms == other.terms
            and self.nx == other.nx
            and self.ny == other.ny
        )

    def __hash__(self):
        return hash((self.nx, self.ny, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def divide_exact(self, divisor):
        out = {}
        for k, v in self.terms.items():
            q, r = divmod(v, divisor)
            if r:
                raise IntegralityFailure(
                    f"coefficient {v} of {self._term_name(k)} is not divisible by {divisor}"
                )
            out[k] = q
        return self._same_shape(out)

    def map_exponents(self, fn):
        """Apply fn to every decoded exponent vector (e.g. x -> x^p)."""
        out = {}
        for k, v in self.terms.items():
            exps = fn(self._decode(k))
            key = 0
            for i, e in enumerate(exps):
                key += e << (_SHIFT * self._slot(i))
            out[key] = out.get(key, 0) + v
        return self._same_shape({k: v for k, v in out.items() if v})

    # -- inspection -------------------------------------------------------------

    def _decode(self, key):
        return tuple(
            (key >> (_SHIFT * self._slot(i))) & _MASK
            for i in range(self.nx + self.ny)
        )

    def var_names(self):
        return tuple(f"X{i}" for i in range(self.nx)) + tuple(f"Y{i}" for i in range(self.ny))

    def sorted_terms(self):
        """Terms in descending graded-lexicographic order."""
        decoded = [(self._decode(k), v) for k, v in self.terms.items()]
        decoded.sort(key=lambda t: (sum(t[0]), t[0]), reverse=True)
        return decoded

    def _term_name(self, key):
        exps = self._decode(key)
        names = self.var_names()
        parts = [f"{names[i]}^{e}" for i, e in enumerate(exps) if e]
        return " ".join(parts) if parts else "1"

    def coefficient(self, exps):
        key = 0
        for v, e in exps:
            key += e << (_SHIFT * self._slot(v))
        return self.terms.get(key, 0)

    def total_degree(self):
        return max((sum(self._decode(k)) for k in self.terms), default=0)

    def reduce_mod(self, modulus):
        return self._same_shape(
            {k: v % modulus for k, v in self.terms.items() if v % modulus}
        )

    def to_text(self):
        names = self.var_names()
        lines = []
        for exps, coeff in self.sorted_terms():
            factors = " ".join(f"{names[i]}^{e}" for i, e in enumerate(exps) if e)
            lines.append(f"{coeff} * {factors}" if factors else f"{coeff} *")
        return "\n".join(lines)

    def to_json_obj(self):
        names = self.var_names()
        rows = []
        for exps, coeff in self.sorted_terms():
            rows.append(
                {
                    "coeff": str(coeff),
                    "exps": {names[i]: e for i, e in enumerate(exps) if e},
                }
            )
        return rows

    def __repr__(self):
        n = len(self.terms)
        head = ", ".join(
            f"{c}*{self._term_name_from_exps(e)}" for e, c in self.sorted_terms()[:4]
        )
        tail = ", ..." if n > 4 else ""
        return f"UniversalPoly({head}{tail}; {n} terms)"

    def _term_name_from_exps(self, exps):
        names = self.var_names()
        parts = [f"{names[i]}^{e}" for i, e in enumerate(exps) if e]
        return "*".join(parts) if parts else "1"

    # -- evaluation ---------------------------------------------------------------

    def eval_plan(self):
        """Cached [(coeff, ((var_index, exponent), ...)), ...] for evaluation."""
        if self._plan is None:
            plan = []
            for k, v in self.terms.items():
                exps = self._decode(k)
                plan.append((v, tuple((i, e) for i, e in enumerate(exps) if e)))
            self._plan = plan
        return self._plan


def eval_poly(poly, assignment):
    """Evaluate a UniversalPoly at ring elements.

    ``assignment`` maps variable names ("X0", "Y1", ...) to elements of one
    coefficient ring.  Elements must support +, *, ** (int exponents) and
    ``scale`` by an integer; the result precision is the minimum of the
    inputs' by the ring's own semantics.
    """
    names = poly.var_names()
    values = []
    for name in names:
        if name not in assignment:
            raise MissingAssignment(f"no value for indeterminate {name}")
        values.append(assignment[name])
    if not values:
        raise MissingAssignment("polynomial has no indeterminates to evaluate")
    return eval_plan_at(poly, values)


def eval_plan_at(poly, values):
    """Evaluate with values listed in variable order (X-block then Y-block).

    Elements must support +, -, *, ``scale_int`` and ``from_int_like``.
    """
    zero = values[0] - values[0]
    acc = zero
    powcache = [dict() for _ in values]

    def power(i, e):
        cache = powcache[i]
        got = cache.get(e)
        if got is None:
            if e == 1:
                got = values[i]
            elif e % 2 == 0:
                h = power(i, e // 2)
                got = h * h
            else:
                got = power(i, e - 1) * values[i]
            cache[e] = got
        return got

    for coeff, factors in poly.eval_plan():
        term = None
        for i, e in factors:
            term = power(i, e) if term is None else term * power(i, e)
        if term is None:
            acc = acc + zero.from_int_like(coeff)
        else:
            acc = acc + term.scale_int(coeff)
    return acc


def ghost_poly(p, n):
    """fant_n(X_0..X_n) = X_0^(p^n) + p X_1^(p^(n-1)) + ... + p^n X_n."""
    if n < 0:
        raise ValueError("ghost polynomial index must be >= 0")
    terms = {}
    for i in range(n + 1):
        key = (p ** (n - i)) << (_SHIFT * i)
        terms[key] = p**i
    return UniversalPoly(p, n + 1, 0, terms)


def _ghost_in(p, n, nx, ny, block):
    """fant_n over the X block (block=0) or the Y block (block=1)."""
    offset = 0 if block == 0 else _YBLOCK
    terms = {}
    for i in range(n + 1):
        key = (p ** (n - i)) << (_SHIFT * (offset + i))
        terms[key] = p**i
    return UniversalPoly(p, nx, ny, terms)


_structural_cache = {}


def structural_polys(kind, p, length, deadline_seconds=None):
    """S_0..S_{l-1} (resp. P, I, F) solving the defining ghost identities.

    Construction is divide-and-certify: the ghost-side combination minus the
    lower contributions is divided by p^n and every division is checked
    exact.  Results are cached per (kind, p).
    """
    if kind not in _STRUCTURAL_KINDS:
        raise ValueError(f"unknown kind {kind!r}, expected one of {_STRUCTURAL_KINDS}")
    if length < 1:
        raise ValueError("length must be >= 1")
    if length > MAX_LENGTH or p > MAX_PRIME:
        raise ValueError(
            f"universal polynomial generation capped at length {MAX_LENGTH}, p <= {MAX_PRIME}"
        )
    deadline = _Deadline(deadline_seconds)
    cache_key = (kind, p)
    state = _structural_cache.get(cache_key)
    if state is None:
        state = {"polys": [], "powers": {}}
        _structural_cache[cache_key] = state
    polys = state["polys"]
    powers = state["powers"]

    nx = length + 1 if kind == "frob" else length
    ny = length if kind in ("sum", "prod") else 0

    def reshape(poly):
        return UniversalPoly(p, nx, ny, poly.terms)

    def target(n):
        if kind == "sum":
            return _ghost_in(p, n, nx, ny, 0) + _ghost_in(p, n, nx, ny, 1)
        if kind == "prod":
            a = _ghost_in(p, n, nx, ny, 0)
            b = _ghost_in(p, n, nx, ny, 1)
            return a._same_shape(_mul_terms(a.terms, b.terms, deadline))
        if kind == "neg":
            return -_ghost_in(p, n, nx, ny, 0)
        return _ghost_in(p, n + 1, nx, ny, 0)  # frob

    def phi_power(i, e):
        """phi_i ** e with memoization along the p-power ladder."""
        if e == 1:
            return reshape(polys[i])
        got = powers.get((i, e))
        if got is None:
            base = phi_power(i, e // p)
            got = base._same_shape(_pow_terms(base.terms, p, deadline))
            powers[(i, e)] = got
        return reshape(got)

    while len(polys) < length:
        n = len(polys)
        acc = target(n)
        for i in range(n):
            acc = acc - p**i * phi_power(i, p ** (n - i))
        polys.append(acc.divide_exact(p**n))

    return [reshape(q) for q in polys[:length]]


class GhostSolveInput:
    """Input bundle for ghost inversion.

    ``ring`` must have from_int and elements supporting -, *, **,
    exact_div_p and valuation; ``sigma`` is a ring endomorphism lifting
    Frobenius (sigma(a) = a^p mod p, checked on ring.generators());
    ``headroom`` is the number of guard p-digits available.
    """

    __slots__ = ("ring", "seq", "sigma", "headroom")

    def __init__(self, ring, seq, sigma, headroom):
        self.ring = ring
        self.seq = list(seq)
        self.sigma = sigma
        self.headroom = headroom


def _divisible_by_p(x, k):
    try:
        x.exact_div_p(k)
    except NotDivisible:
        return False
    return True


def ghost_invert(inp):
    """The unique (a_n) with fant_n(a_0..a_n) = u_n, by exact division.

    a_n = (u_n - sum_{i<n} p^i a_i^(p^(n-i))) / p^n.  The congruence
    sigma(u_{n-1}) = u_n mod p^n is checked first for each n; component a_n
    comes back with its precision reduced by the division.
    """
    ring, seq, sigma = inp.ring, inp.seq, inp.sigma
    length = len(seq)
    if inp.headroom < length - 1:
        raise PrecisionExhausted(
            f"need {length - 1} guard digits for length {length}, have {inp.headroom}"
        )
    p = ring.p
    for g in ring.generators():
        if not _divisible_by_p(sigma(g) - g**p, 1):
            raise CongruenceFailure("sigma(a) = a^p mod p fails on a ring generator")
    comps = []
    powers = []  # powers[i] = a_i^(p^(n-1-i)) entering step n
    for n, u in enumerate(seq):
        if n:
            diff = sigma(seq[n - 1]) - u
            if not _divisible_by_p(diff, n):
                raise CongruenceFailure(
                    f"sigma(u_{n-1}) != u_{n} mod p^{n} at working precision"
                )
        acc = u
        for i in range(n):
            powers[i] = powers[i] ** p
            acc = acc - powers[i].scale_int(p**i)
        try:
            a_n = acc if n == 0 else acc.exact_div_p(n)
        except NotDivisible as exc:  # pragma: no cover - guarded by congruences
            raise CongruenceFailure(str(exc)) from exc
        comps.append(a_n)
        powers.append(a_n)
    return comps


def ghost_identity_residual(kind, p, length, deadline_seconds=None):
    """fant_n(phi_0..phi_n) minus its defining target, for n = length-1.

    Zero iff the ghost identity holds exactly; exposed so the identity can
    be re-checked after construction.  Powers memoized by the construction
    are reused, so the recheck mostly re-spends the final summation.
    """
    polys = structural_polys(kind, p, length, deadline_seconds)
    deadline = _Deadline(deadline_seconds)
    powers = _structural_cache[(kind, p)]["powers"]
    n = length - 1
    nx, ny = polys[0].nx, polys[0].ny

    def power(i, e):
        if e == 1:
            return polys[i]
        got = powers.get((i, e))
        if got is None:
            base = power(i, e // p)
            got = base._same_shape(_pow_terms(base.terms, p, deadline))
            powers[(i, e)] = got
        return UniversalPoly(p, nx, ny, got.terms)

    lhs = UniversalPoly(p, nx, ny, {})
    for i in range(n + 1):
        lhs = lhs + p**i * power(i, p ** (n - i))
    if kind == "sum":
        rhs = _ghost_in(p, n, nx, ny, 0) + _ghost_in(p, n, nx, ny, 1)
    elif kind == "prod":
        a = _ghost_in(p, n, nx, ny, 0)
        rhs = a * _ghost_in(p, n, nx, ny, 1)
    elif kind == "neg":
        rhs = -_ghost_in(p, n, nx, ny, 0)
    else:
        rhs = _ghost_in(p, n + 1, nx, ny, 0)
    return lhs - rhs
