"""Exact arithmetic in F_p and F_{p^h} for odd p and h <= 3.

Elements are plain ``int`` indices: the element with power-basis coordinates
``(c0, c1, ..., c_{h-1})`` is stored as ``c0 + c1*p + ... + c_{h-1}*p^(h-1)``.
The prime subfield is therefore ``range(p)`` and the natural integer order is
the canonical total order on elements (highest coordinate most significant).
The coefficient-array form is only used for serialization.

Scalar operations go through precomputed log/antilog tables. The ``v*``
methods are numpy-vectorized versions used by the linear algebra, encoding
and brute-force routines.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DuplicateNode,
    InconsistentSamples,
    InvalidCharacteristic,
    UnsupportedDegree,
)

MAX_DEGREE = 3
# full addition tables are built only below this field size
_ADD_TABLE_LIMIT = 729


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _has_root(coeffs: tuple[int, ...], p: int) -> bool:
    for t in range(p):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * t + c) % p
        if acc == 0:
            return True
    return False


def is_irreducible(coeffs: tuple[int, ...], p: int) -> bool:
    """Irreducibility over F_p of a monic polynomial of degree <= 3.

    A reducible polynomial of degree 2 or 3 always has a linear factor, so a
    root search is an exhaustive factor check at these degrees.
    """
    degree = len(coeffs) - 1
    if degree > MAX_DEGREE:
        raise UnsupportedDegree(f"irreducibility check only for degree <= {MAX_DEGREE}")
    if degree <= 1:
        return degree == 1
    return not _has_root(coeffs, p)


def canonical_modulus(p: int, h: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree h (constant term first)."""
    for low in itertools.product(range(p), repeat=h):
        coeffs = tuple(low) + (1,)
        if is_irreducible(coeffs, p):
            return coeffs
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class FieldCtx:
    """The finite field F_{p^h} with a fixed, canonical power basis."""

    def __init__(self, p: int, h: int, modulus: tuple[int, ...]):
        self.p = p
        self.h = h
        self.q = p**h
        self.modulus = tuple(modulus)
        self._weights = [p**i for i in range(h)]

        self.generator = self._find_generator()
        order = self.q - 1
        exp = [0] * (2 * order)
        log = [0] * self.q
        a = 1
        for e in range(order):
            exp[e] = a
            exp[e + order] = a
            log[a] = e
            a = self._mul_slow(a, self.generator)
        self._exp = exp
        self._log = log
        self._neg = [self.from_coeffs([(-c) % p for c in self.to_coeffs(a)]) for a in range(self.q)]

        if self.q <= _ADD_TABLE_LIMIT:
            table = [[self._add_digits(a, b) for b in range(self.q)] for a in range(self.q)]
            self._add_table = table
            self.add = lambda a, b: table[a][b]
        else:
            self.add = self._add_digits

        self._frob = [self.pow(a, p) for a in range(self.q)]
        self._trace = [self._trace_slow(a) for a in range(self.q)]
        self._norm = [self._norm_slow(a) for a in range(self.q)]
        self._as_root: list[int | None] | None = None
        self._pow_cache: dict[int, list[int]] = {}

        self._np_exp = np.array(exp[:order], dtype=np.int64)
        self._np_log = np.array(log, dtype=np.int64)
        self._np_weights = np.array(self._weights, dtype=np.int64)
        self._np_neg = np.array(self._neg, dtype=np.int64)
        self._np_inv = np.array([0] + [self.inv(a) for a in range(1, self.q)], dtype=np.int64)

    def __repr__(self) -> str:
        return f"FieldCtx(p={self.p}, h={self.h}, modulus={list(self.modulus)})"

    # -- representation -------------------------------------------------
    def to_coeffs(self, a: int) -> list[int]:
        return [(a // w) % self.p for w in self._weights]

    def from_coeffs(self, coeffs) -> int:
        coeffs = list(coeffs)
        if len(coeffs) != self.h or any(not 0 <= c < self.p for c in coeffs):
            raise ValueError(f"expected {self.h} residues mod {self.p}, got {coeffs}")
        return sum(c * w for c, w in zip(coeffs, self._weights))

    def element(self, value) -> int:
        """Accept an index or a coefficient array and return the index."""
        if isinstance(value, (list, tuple)):
            return self.from_coeffs(value)
        value = int(value)
        if not 0 <= value < self.q:
            raise ValueError(f"{value} is not an element index of F_{self.q}")
        return value

    def elements(self) -> range:
        return range(self.q)

    def nonzero(self) -> range:
        return range(1, self.q)

    def to_json(self) -> dict:
        return {"p": self.p, "h": self.h, "modulus": list(self.modulus)}

    # -- construction helpers --------------------------------------------
    def _add_digits(self, a: int, b: int) -> int:
        p = self.p
        out = 0
        for w in self._weights:
            out += (((a // w) + (b // w)) % p) * w
        return out

    def _mul_slow(self, a: int, b: int) -> int:
        p, h = self.p, self.h
        x, y = self.to_coeffs(a), self.to_coeffs(b)
        prod = [0] * (2 * h - 1)
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    prod[i + j] = (prod[i + j] + xi * yj) % p
        for d in range(2 * h - 2, h - 1, -1):
            c = prod[d]
            if c:
                for i in range(h):
                    prod[d - h + i] = (prod[d - h + i] - c * self.modulus[i]) % p
        return self.from_coeffs(prod[:h])

    def _find_generator(self) -> int:
        order = self.q - 1
        if order == 1:
            return 1
        for g in range(1, self.q):
            a, e = g, 1
            while a != 1:
                a = self._mul_slow(a, g)
                e += 1
            if e == order:
                return g
        raise AssertionError("multiplicative group is not cyclic")  # pragma: no cover

    def _trace_slow(self, a: int) -> int:
        acc, cur = 0, a
        for _ in range(self.h):
            acc = self._add_digits(acc, cur)
            cur = self._frob[cur]
        return acc

    def _norm_slow(self, a: int) -> int:
        acc, cur = 1, a
        for _ in range(self.h):
            acc = self.mul(acc, cur)
            cur = self._frob[cur]
        return acc

    # -- scalar arithmetic -------------------------------------------------
    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self._neg[b])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def pow_table(self, e: int) -> list[int]:
        """``[a**e for a in field]``, cached per exponent."""
        table = self._pow_cache.get(e)
        if table is None:
            table = [self.pow(a, e) for a in range(self.q)]
            self._pow_cache[e] = table
        return table

    def frobenius(self, a: int) -> int:
        return self._frob[a]

    def in_prime_field(self, a: int) -> bool:
        return a < self.p

    def from_int(self, n: int) -> int:
        """Image of an integer in the prime subfield."""
        return n % self.p

    # -- vectorized arithmetic -------------------------------------------
    def _digits(self, a: np.ndarray) -> np.ndarray:
        return (a[..., None] // self._np_weights) % self.p

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.h == 1:
            return (a + b) % self.p
        return ((self._digits(a) + self._digits(b)) % self.p) @ self._np_weights

    def vneg(self, a) -> np.ndarray:
        return self._np_neg[np.asarray(a, dtype=np.int64)]

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        logs = (self._np_log[a] + self._np_log[b]) % (self.q - 1)
        return np.where((a == 0) | (b == 0), 0, self._np_exp[logs])

    def vinv(self, a) -> np.ndarray:
        return self._np_inv[np.asarray(a, dtype=np.int64)]

    def vpow(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        out = self._np_exp[(self._np_log[a] * e) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    def vsum(self, a, axis: int = -1) -> np.ndarray:
        """Field sum along an axis (coordinate-wise sums reduced mod p)."""
        a = np.asarray(a, dtype=np.int64)
        if self.h == 1:
            return a.sum(axis=axis) % self.p
        axis = axis % a.ndim
        return (self._digits(a).sum(axis=axis) % self.p) @ self._np_weights


@lru_cache(maxsize=None)
def make_field(p: int, h: int) -> FieldCtx:
    """Build F_{p^h} with its canonical modulus.

    Contexts are cached, so repeated calls return the same shareable object.
    """
    if not isinstance(p, int) or p % 2 == 0 or not is_prime(p):
        raise InvalidCharacteristic(f"characteristic must be an odd prime, got {p}")
    if not isinstance(h, int) or not 1 <= h <= MAX_DEGREE:
        raise UnsupportedDegree(f"extension degree must be in 1..{MAX_DEGREE}, got {h}")
    return FieldCtx(p, h, canonical_modulus(p, h))


def trace(ctx: FieldCtx, a: int) -> int:
    """Absolute trace a + a^p + ... + a^(p^(h-1)); lands in the prime field."""
    return ctx._trace[a]


def norm(ctx: FieldCtx, a: int) -> int:
    """Absolute norm a * a^p * ... * a^(p^(h-1)); lands in the prime field."""
    return ctx._norm[a]


def _as_root_table(ctx: FieldCtx) -> list[int | None]:
    if ctx._as_root is None:
        table: list[int | None] = [None] * ctx.q
        for y in range(ctx.q):
            c = ctx.sub(ctx.frobenius(y), y)
            if table[c] is None:
                table[c] = y
        ctx._as_root = table
    return ctx._as_root


def artin_schreier_root(ctx: FieldCtx, c: int) -> int | None:
    """Smallest y with y^p - y = c, or None when Tr(c) != 0."""
    return _as_root_table(ctx)[c]


def artin_schreier_roots(ctx: FieldCtx, c: int) -> frozenset[int]:
    """All y in F_{p^h} with y^p - y = c.

    Solutions exist iff Tr(c) = 0, and then form a coset y0 + F_p.
    """
    y0 = artin_schreier_root(ctx, c)
    if y0 is None:
        return frozenset()
    return frozenset(ctx.add(y0, delta) for delta in range(ctx.p))


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial, coefficients ascending, no trailing zeros."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if i < len(self.coeffs) else 0

    def evaluate(self, ctx: FieldCtx, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = ctx.add(ctx.mul(acc, x), c)
        return acc


@lru_cache(maxsize=65536)
def _lagrange_basis(ctx: FieldCtx, nodes: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    # coefficient vectors of L_i(x) = prod_{j != i} (x - x_j) / (x_i - x_j)
    m = len(nodes)
    basis = []
    for i, xi in enumerate(nodes):
        poly = [1]
        denom = 1
        for j, xj in enumerate(nodes):
            if j == i:
                continue
            nxj = ctx.neg(xj)
            nxt = [0] * (len(poly) + 1)
            for d, c in enumerate(poly):
                nxt[d] = ctx.add(nxt[d], ctx.mul(c, nxj))
                nxt[d + 1] = ctx.add(nxt[d + 1], c)
            poly = nxt
            denom = ctx.mul(denom, ctx.sub(xi, xj))
        scale = ctx.inv(denom)
        basis.append(tuple(ctx.mul(c, scale) for c in poly) + (0,) * (m - len(poly)))
    return tuple(basis)


def interpolate_univariate(ctx: FieldCtx, samples, degree_bound: int) -> UniPoly:
    """Unique polynomial of degree <= degree_bound through the leading samples.

    The first ``degree_bound + 1`` samples determine the polynomial; any extra
    samples are checked against it.

    Raises:
        DuplicateNode: two samples share an abscissa.
        InconsistentSamples: an extra sample disagrees with the interpolant.
    """
    samples = list(samples)
    xs = [x for x, _ in samples]
    if len(set(xs)) != len(xs):
        raise DuplicateNode(f"repeated abscissa among {xs}")
    m = degree_bound + 1
    if degree_bound < 0 or len(samples) < m:
        raise ValueError(f"need {m} samples for degree bound {degree_bound}, got {len(samples)}")
    head = samples[:m]
    basis = _lagrange_basis(ctx, tuple(x for x, _ in head))
    coeffs = [0] * m
    for (_, yi), li in zip(head, basis):
        if yi == 0:
            continue
        for d in range(m):
            if li[d]:
                coeffs[d] = ctx.add(coeffs[d], ctx.mul(yi, li[d]))
    poly = UniPoly(tuple(coeffs))
    for x, y in samples[m:]:
        if poly.evaluate(ctx, x) != y:
            raise InconsistentSamples(f"sample ({x}, {y}) is off the degree-{degree_bound} interpolant")
    return poly
