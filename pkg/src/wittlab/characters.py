"""Additive characters of W_l(F_q), splitting functions and W_2 characters.

psi_{l,s,t}(y) evaluates the cached series theta_{l-1-j,s}(1) at the points
t^(p^j) Teich(y_j) and snaps the product to the root-of-unity table of
mu_{p^l}.  Snapping is ultrametric: the value must be strictly closer to
one root than the minimal pairwise distance of the table, otherwise the
computation refuses (SnapAmbiguous) rather than guessing.

The mu_{p^l} table is grown by exhaustive digit lifting from the seeds
1 + c pi_{l-1} (all roots are = 1 mod pi), then polished by Newton; plain
Newton from the seeds alone can stall, since each seed sits at equal
distance from a whole coset of p^(l-1) roots.
"""

from __future__ import annotations

import functools
import itertools

from .errors import ReportedMismatch, SeedNotConverging, SnapAmbiguous
from .fields import finite_field
from .rings import LubinTateSeries, RingElem, RingSpec, make_ring, nondegenerate_trace
from .series import (
    TruncSeries2,
    certify_tail,
    pulita_theta_ms,
    series_length,
)
from .wittvec import WittVec, one_vec, witt_add, witt_mul, witt_trace, zero_vec


@functools.lru_cache(maxsize=None)
def theta_one_series(ring, m, s, degree):
    """theta_{m,s}(1) over ``ring`` (coefficients are level-universal)."""
    one = one_vec(ring, series_length(ring.p, degree))
    return pulita_theta_ms(ring, m, s, one, degree)


class RootOfUnityTable:
    """The p^l elements of mu_{p^l} inside a level-(l-1) ring."""

    def __init__(self, ring, ell, elements):
        self.ring = ring
        self.ell = ell
        self.order = ring.p**ell
        self.elements = elements
        self.max_pairwise_val = max(
            v
            for i, a in enumerate(elements)
            for j, b in enumerate(elements)
            if i != j
            for v in [(a - b).valuation()]
        )
        self.gen_index = self._find_generator()
        self.dlog = self._discrete_logs()

    def _find_generator(self):
        pl1 = self.order // self.ring.p
        for k, z in enumerate(self.elements):
            if not (z**pl1 - self.ring.one()).is_zero():
                return k
        raise SeedNotConverging("no element of exact order p^l in the table")

    def _discrete_logs(self):
        """index -> exponent k with element = g^k, matched at precision."""
        g = self.elements[self.gen_index]
        acc = self.ring.one()
        logs = {}
        for k in range(self.order):
            matches = [i for i, z in enumerate(self.elements) if z == acc]
            assert len(matches) == 1, "generator powers must match table uniquely"
            logs[matches[0]] = k
            acc = acc * g
        return logs

    def root(self, index):
        return self.elements[index]

    def log_of_index(self, index):
        """Exponent k with table[index] = g^k for the fixed generator g."""
        return self.dlog[index]

    def snap(self, value):
        """(index, distance valuation) of the unique nearest root."""
        if value.prec <= self.max_pairwise_val:
            raise SnapAmbiguous(
                f"value precision {value.prec} does not resolve roots "
                f"(pairwise valuation up to {self.max_pairwise_val})"
            )
        best = None
        best_v = -1
        for k, z in enumerate(self.elements):
            v = (value - z).valuation()
            if v is None:
                v = min(value.prec, z.prec)
            if v > best_v:
                best, best_v = k, v
        if best_v <= self.max_pairwise_val:
            raise SnapAmbiguous(
                f"closest root at valuation {best_v}, need > {self.max_pairwise_val}"
            )
        return best, best_v


def mu_ppow_table(ring, ell):
    """Build mu_{p^l} in a level-(l-1) ring by digit lifting plus Newton."""
    assert ring.m == ell - 1, "table must live at level l-1"
    p = ring.p
    order = p**ell
    f_exp = order
    pi = ring.pi()

    def f(z):
        return z**f_exp - ring.one()

    def vof(x):
        v = x.valuation()
        return ring.cap if v is None else v

    def profile(d):
        """Exact v(f) of a prefix agreeing with a root to depth d:
        d plus sum over nontrivial roots xi of min(d, v(1 - xi)), where
        p^r - p^(r-1) roots of exact order p^r sit at v(1-xi) = p^(l-r)."""
        acc = d
        for r in range(1, ell + 1):
            acc += (p**r - p ** (r - 1)) * min(d, p ** (ell - r))
        return acc

    depth = min(ring.cap - 2, p ** (ell - 1) + 3)
    layer = [ring.one()]
    pi_pow = pi
    for k in range(1, depth):
        nxt = []
        seen = set()
        for z in layer:
            for c in range(p):
                cand = z + pi_pow.scale_int(c) if c else z
                if vof(f(cand)) >= profile(k + 1) and cand.co not in seen:
                    seen.add(cand.co)
                    nxt.append(cand)
        layer = nxt
        pi_pow = pi_pow * pi
        if not layer:
            raise SeedNotConverging("digit lifting lost every candidate")
    # Newton polish on exact coordinates: z <- z - f(z)/(p^l z^(p^l - 1));
    # divisions are exact, so precision metadata is reset to full and the
    # root is certified at the end by f(z) = 0 exactly mod p^N.
    resolution = ring.cap - ell * ring.e  # a root mod p^N is pinned this far
    polished = []
    for z in layer:
        z = RingElem(ring, z.co)
        for _ in range(ring.cap.bit_length() + 3):
            fz = f(z)
            if not any(fz.co):
                break
            try:
                step = fz.exact_div_p(ell) * (z ** (f_exp - 1)).inverse()
            except Exception as exc:  # pragma: no cover - depth guards this
                raise SeedNotConverging(str(exc)) from exc
            z = RingElem(ring, (z - step).co)
        if any(f(z).co):
            raise SeedNotConverging("Newton polish did not reach a root")
        polished.append(z)
    # mod p^N the solutions fill balls of radius ``resolution``: cluster them
    roots = []
    for z in polished:
        for rep in roots:
            v = (rep - z).valuation()
            if v is None or v >= resolution:
                break
        else:
            roots.append(RingElem(ring, z.co, resolution))
    if len(roots) != order:
        raise SeedNotConverging(f"found {len(roots)} roots, expected {order}")
    # closure under multiplication, compared at the pinned precision
    for a in roots:
        for b in roots:
            prod = a * b
            if not any(prod == rep for rep in roots):
                raise SeedNotConverging("table is not closed under multiplication")
    roots.sort(key=lambda z: z.co)
    return RootOfUnityTable(ring, ell, roots)


class CharParams:
    """Configuration for psi_{l,s,t}: prime, unramified degree, length, t."""

    def __init__(
        self,
        p,
        s,
        ell,
        u_index=None,
        lt=None,
        nprec=None,
        degree=None,
        target_prec=None,
    ):
        self.p = p
        self.s = s
        self.ell = ell
        self.lt = lt if lt is not None else LubinTateSeries.cyclotomic(p)
        self.nprec = nprec if nprec is not None else 16
        self.degree = degree if degree is not None else (128 if p == 2 else 96)
        self.u_index = u_index
        self.target_prec = target_prec

    def describe(self):
        return {
            "p": self.p,
            "s": self.s,
            "ell": self.ell,
            "lt": self.lt.tag(),
            "N": self.nprec,
            "D": self.degree,
        }


class CharacterSystem:
    """Everything needed to evaluate psi_{l,s,t} and friends, lazily built."""

    def __init__(self, params):
        self.params = params
        p, s, ell = params.p, params.s, params.ell
        self.field = finite_field(p, s)
        self.ring = make_ring(RingSpec(p, s, ell - 1, params.lt, params.nprec))
        # snapping to mu_{p^l} needs to beat the pairwise valuation p^(l-1)
        self.target_prec = (
            params.target_prec
            if params.target_prec is not None
            else p ** (ell - 1) + 1
        )
        if params.u_index is None:
            self.u = next(
                x for x in self.field.elements() if self.field.absolute_trace(x)
            )
        else:
            self.u = self.field.from_index(params.u_index)
        self.t = self.ring.teichmuller(self.u)
        self.nondegenerate, self.trace_t = nondegenerate_trace(self.ring, self.t)
        self._theta = {}
        self._theta_cert = {}
        self._mu = None
        self._table = None

    # -- building blocks ---------------------------------------------------------

    def theta_series(self, j):
        """theta_{l-1-j, s}(1) over the system ring, tail-certified once."""
        got = self._theta.get(j)
        if got is None:
            got = theta_one_series(
                self.ring, self.params.ell - 1 - j, self.params.s, self.params.degree
            )
            self._theta_cert[j] = certify_tail(
                got.min_valuations(), self.target_prec, self.ring.cap
            )
            self._theta[j] = got
        return got

    @property
    def mu_table(self):
        if self._mu is None:
            self._mu = mu_ppow_table(self.ring, self.params.ell)
        return self._mu

    # -- the additive character -----------------------------------------------------

    def psi_raw(self, y):
        """Analytic value theta_{l-1,s}(Te(y))(t), by the factored formula."""
        ring = self.ring
        p = self.params.p
        acc = ring.one()
        tpj = self.t
        for j in range(self.params.ell):
            comp = y[j] if j < len(y) else self.field.zero()
            if comp:
                point = tpj * ring.teichmuller(comp)
                value = self.theta_series(j).eval_full(point)
                acc = acc * RingElem(ring, value.co, self.target_prec)
            tpj = tpj**p
        return acc

    def psi(self, y):
        """Root-of-unity index of psi(y) in the mu_{p^l} table."""
        index, _ = self.mu_table.snap(self.psi_raw(y))
        return index

    def psi_direct(self, y):
        """Definition path: theta_{l-1,s}(Te(y)) evaluated at t (slow)."""
        from .series import series_eval_unit
        from .wittvec import te_lift

        length = series_length(self.params.p, self.params.degree)
        lifted = te_lift(y, self.ring, length)
        series = pulita_theta_ms(
            self.ring, self.params.ell - 1, self.params.s, lifted, self.params.degree
        )
        return series_eval_unit(series, self.t, self.target_prec)

    def domain(self):
        """All of W_l(F_q), enumerated lexicographically on residues."""
        ell = self.params.ell
        for combo in itertools.product(range(self.field.q), repeat=ell):
            yield WittVec(self.field, [self.field.from_index(i) for i in combo])

    def character_table(self):
        if self._table is None:
            self._table = CharacterTable(self)
        return self._table

    # -- splitting function and the multiplicative character ---------------------------

    def omega(self, degree=None):
        """Omega_{l,s,t} as a truncated series (l = 1 or 2)."""
        degree = degree if degree is not None else self.params.degree
        ell = self.params.ell
        factors = []
        tpj = self.t
        for j in range(ell):
            factors.append(self.theta_series(j).truncate(degree).compose_scale(tpj))
            tpj = tpj ** self.params.p
        if ell == 1:
            return factors[0]
        if ell == 2:
            return TruncSeries2.outer(factors[0], factors[1], degree)
        raise NotImplementedError("omega is realized for l <= 2")

    def mu_p_subtable(self):
        """The order-p subgroup of the root table (for chi values)."""
        table = self.mu_table
        payload = [
            z for z in table.elements if (z ** self.params.p - self.ring.one()).is_zero()
        ]
        assert len(payload) == self.params.p
        return payload

    def chi_value(self, m, b, z):
        """chi_{m,b}(z) for z a unit of W_2(F_q): Teich part times psi_1 part."""
        from .errors import NotUnit

        assert self.params.ell == 2
        z0, z1 = z[0], z[1]
        if not z0:
            raise NotUnit("chi is defined on units: z_0 != 0")
        q = self.field.q
        teich_part = self.ring.teichmuller(z0) ** m
        if not b or not z1:
            return teich_part
        arg = b * z1 * z0 ** (self.params.p * (q - 2))
        point = self.t * self.ring.teichmuller(arg)
        raw = self.theta_series(1).eval_full(point)
        raw = RingElem(self.ring, raw.co, self.target_prec)
        snapped = _snap_to(self.mu_p_subtable(), raw, self.mu_table.max_pairwise_val)
        return teich_part * snapped

    def count_E_t_ell(self, t_scalar=None):
        """#roots of unity within |pi| of 1 + t pi_{l-1} (strictly closer)."""
        t = self.t if t_scalar is None else t_scalar
        pi = self.ring.pi()
        center = self.ring.one() + t * pi
        count = 0
        for z in self.mu_table.elements:
            v = (center - z).valuation()
            if v is None or v > 1:
                count += 1
        return count


def _snap_to(elements, value, max_pairwise):
    best, best_v = None, -1
    for z in elements:
        v = (value - z).valuation()
        if v is None:
            v = min(value.prec, z.prec)
        if v > best_v:
            best, best_v = z, v
    if best_v <= max_pairwise:
        raise SnapAmbiguous("cannot certify the nearest root")
    return best


class CharacterTable:
    """Exhaustive psi table over W_l(F_q) with verification metadata."""

    def __init__(self, system):
        self.system = system
        self.rows = []
        self.by_key = {}
        for y in system.domain():
            raw = system.psi_raw(y)
            index, dist = system.mu_table.snap(raw)
            key = tuple(c.co for c in y.comps)
            self.by_key[key] = index
            self.rows.append({"vector": key, "psi_index": index, "raw_distance": dist})

    def index_of(self, y):
        return self.by_key[tuple(c.co for c in y.comps)]

    def image_size(self):
        return len({r["psi_index"] for r in self.rows})

    def verify_homomorphism(self):
        """psi(y+z) = psi(y) psi(z) for every pair, via discrete logs."""
        sys = self.system
        table = sys.mu_table
        logs = [table.log_of_index(k) for k in range(table.order)]
        vecs = list(sys.domain())
        for y in vecs:
            for z in vecs:
                got = self.index_of(witt_add(y, z))
                want_log = (
                    logs[self.index_of(y)] + logs[self.index_of(z)]
                ) % table.order
                if logs[got] != want_log:
                    raise ReportedMismatch(
                        f"psi not multiplicative at {y!r}, {z!r}"
                    )
        return True

    def verify_image_is_full(self):
        if self.image_size() != self.system.mu_table.order:
            raise ReportedMismatch(
                f"image has {self.image_size()} elements, expected p^l"
            )
        return True

    def verify_separation(self):
        """For every a != 0 there is y with psi(a y) != 1."""
        sys = self.system
        one_index = self.index_of(
            WittVec(sys.field, [sys.field.zero()] * sys.params.ell)
        )
        vecs = list(sys.domain())
        for a in vecs:
            if a.is_zero():
                continue
            if not any(
                self.index_of(witt_mul(a, y)) != one_index for y in vecs
            ):
                raise ReportedMismatch(f"pairing degenerate at {a!r}")
        return True

    def to_json_obj(self):
        return {
            "domain": f"W_{self.system.params.ell}(F_{self.system.field.q})",
            "t_residue_index": self.system.u.index(),
            "nondegenerate": self.system.nondegenerate,
            "rows": self.rows,
        }

    def to_csv(self):
        lines = ["vector,psi_index,raw_distance"]
        for row in self.rows:
            vec = ";".join(str(list(co)) for co in row["vector"]).replace(" ", "")
            lines.append(f"{vec},{row['psi_index']},{row['raw_distance']}")
        return "\n".join(lines)


def check_splitting(params, r):
    """Exhaustive splitting-function checks over W_l(F_{q^r}).

    Verifies (1) the transitivity psi_{l,sr,t} = psi_{l,s,t} o Tr on every
    vector, and (2) the product formula psi(Tr(y)) = prod_i Omega(Teich^{q^i}).
    Returns a report dict; raises ReportedMismatch with the offending vector.
    """
    base = CharacterSystem(params)
    big_field = finite_field(params.p, params.s * r)
    embed, _ = base.field.embedding_into(big_field)
    big_params = CharParams(
        params.p,
        params.s * r,
        params.ell,
        u_index=embed(base.u).index(),  # the same t inside the bigger ring
        lt=params.lt,
        nprec=params.nprec,
        degree=params.degree,
    )
    big = CharacterSystem(big_params)

    ident = _match_root_tables(base.mu_table, big.mu_table)
    q = base.field.q
    p = params.p
    # Omega_{l,s,t} factors (base s!) over the big ring, certified once
    omega_factors = []
    for j in range(params.ell):
        series = theta_one_series(big.ring, params.ell - 1 - j, params.s, params.degree)
        certify_tail(series.min_valuations(), big.target_prec, big.ring.cap)
        omega_factors.append(series)
    checked = 0
    for y in big.domain():
        tr = witt_trace(y, params.s, r)
        lhs = big.psi(y)
        rhs = base.psi(tr)
        if ident[rhs] != lhs:
            raise ReportedMismatch(f"transitivity fails at {y!r}")
        # product formula: prod over i of Omega_{l,s,t} at Teich(y_j)^(q^i)
        prod = big.ring.one()
        for i in range(r):
            tpj = big.t
            for j in range(params.ell):
                comp = y[j] ** (q**i)
                if comp:
                    point = tpj * big.ring.teichmuller(comp)
                    val = omega_factors[j].eval_full(point)
                    prod = prod * RingElem(big.ring, val.co, big.target_prec)
                tpj = tpj**p
        got, _ = big.mu_table.snap(prod)
        if got != lhs:
            raise ReportedMismatch(f"product formula fails at {y!r}")
        checked += 1
    return {
        "pairs_checked": checked,
        "q": q,
        "r": r,
        "ell": params.ell,
        "transitivity": "ok",
        "product_formula": "ok",
    }


def _match_root_tables(small, big):
    """index map small -> big: lift the (y-free) pi-coordinates and snap."""
    s_small, s_big = small.ring.s, big.ring.s
    out = {}
    for k, z in enumerate(small.elements):
        e = len(z.co) // s_small
        co = [0] * (e * s_big)
        for i in range(e):
            row = z.co[i * s_small : (i + 1) * s_small]
            assert not any(row[1:]), "mu root is not y-free"
            co[i * s_big] = row[0]
        lifted = RingElem(big.ring, tuple(co), z.prec)
        out[k], _ = big.snap(lifted)
    return out


def omega_factorization_check(params, r, degree):
    """Omega_{l,sr,t} = prod_i Omega_{l,s,t}(x^(q^i)) as a series identity."""
    assert params.ell == 2
    base = CharacterSystem(params)
    q = base.field.q
    ring = base.ring
    # both sides over the base ring: theta_{m,sr}(1) has the same coefficients
    lhs_factors = []
    tpj = base.t
    for j in range(2):
        series = theta_one_series(ring, 1 - j, params.s * r, degree)
        lhs_factors.append(series.compose_scale(tpj))
        tpj = tpj ** params.p
    lhs = TruncSeries2.outer(lhs_factors[0], lhs_factors[1], degree)
    rhs = TruncSeries2.constant(ring, degree, ring.one())
    for i in range(r):
        fs = []
        tpj = base.t
        for j in range(2):
            fj = base.theta_series(j).truncate(degree).compose_scale(tpj)
            fs.append(fj.compose_xpow(q**i) if q**i <= degree else None)
            tpj = tpj ** params.p
        if fs[0] is None:
            continue
        rhs = rhs * TruncSeries2.outer(fs[0], fs[1], degree)
    if not lhs == rhs:
        raise ReportedMismatch("splitting-function factorization fails")
    return True
