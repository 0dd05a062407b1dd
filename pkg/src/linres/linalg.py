"""Exact linear algebra over prime fields F_p, p >= 5.

The central objects are affine polynomials (a linear form plus a constant
term, so the equation f = a is stored as the polynomial f - a) and affine
spans kept in reduced row echelon form over n+1 coordinates, variables
first and the constant last.  Span equality is therefore syntactic basis
equality.  Weight counts nonzero variable coefficients only, never the
constant.

Exhaustive operations (truncated spans, minimal-weight reduction, boolean
cube scans) enumerate the full space and are guarded by a configurable
budget (default 2**24 states, override with the LINRES_BUDGET environment
variable).

All values are immutable after construction and safe to share between
threads; every enumeration runs in a fixed lexicographic order so results
are deterministic.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BudgetExceeded

DEFAULT_BUDGET = 1 << 24

_ENUM_BATCH = 1 << 16


def effective_budget(budget: Optional[int] = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("LINRES_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


def check_budget(needed: int, budget: Optional[int], what: str = "") -> int:
    allowed = effective_budget(budget)
    if needed > allowed:
        raise BudgetExceeded(needed, allowed, what)
    return allowed


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Field:
    """The prime field F_p.  Rejects non-prime moduli and p < 5."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = int(p)
        if p < 5 or not is_prime(p):
            raise ValueError(f"field order must be a prime >= 5, got {p}")
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"Field({self.p})"

    def inv(self, a: int) -> int:
        a = int(a) % self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)

    def vector(self, entries: Sequence[int]) -> np.ndarray:
        """A length-n residue vector, reduced mod p and frozen."""
        v = np.asarray(entries, dtype=np.int64) % self.p
        if v.ndim != 1:
            raise ValueError("vector must be one-dimensional")
        return _frozen(v)

    def matrix(self, rows: Sequence[Sequence[int]]) -> np.ndarray:
        """A k x n residue matrix, reduced mod p and frozen."""
        m = np.asarray(rows, dtype=np.int64) % self.p
        if m.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        return _frozen(m)


def weight(v) -> int:
    """Number of nonzero variable coefficients.

    For an AffinePoly the constant term is ignored.
    """
    if isinstance(v, AffinePoly):
        return int(np.count_nonzero(v.coeffs))
    return int(np.count_nonzero(np.asarray(v)))


def rref(mat: np.ndarray, p: int) -> Tuple[np.ndarray, int]:
    """Unique reduced row echelon form over F_p and its rank."""
    r, rank, _ = rref_with_pivots(mat, p)
    return r, rank


def rref_with_pivots(mat: np.ndarray, p: int) -> Tuple[np.ndarray, int, List[int]]:
    m = np.array(mat, dtype=np.int64) % p
    nrows, ncols = m.shape
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if m[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
        m[r] = (m[r] * pow(int(m[r, c]), p - 2, p)) % p
        nz = np.nonzero(m[:, c])[0]
        for i in nz:
            if i != r:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, r, pivots


def rank(mat: np.ndarray, p: int) -> int:
    return rref_with_pivots(mat, p)[1]


class PartialAssignment:
    """A map from variable indices to {0, 1} inside an ambient dimension."""

    __slots__ = ("bindings", "n")

    def __init__(self, bindings: dict, n: int):
        n = int(n)
        clean = {}
        for j, v in bindings.items():
            j = int(j)
            v = int(v)
            if not 0 <= j < n:
                raise ValueError(f"index {j} outside ambient dimension {n}")
            if v not in (0, 1):
                raise ValueError(f"assignment value must be 0 or 1, got {v}")
            clean[j] = v
        object.__setattr__(self, "bindings", dict(sorted(clean.items())))
        object.__setattr__(self, "n", n)

    def __setattr__(self, name, value):
        raise AttributeError("PartialAssignment is immutable")

    @classmethod
    def from_vector(cls, values: Sequence[int], n: Optional[int] = None) -> "PartialAssignment":
        values = list(values)
        if n is None:
            n = len(values)
        return cls({j: values[j] for j in range(len(values))}, n)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(self.bindings)

    def items(self):
        return self.bindings.items()

    def __len__(self):
        return len(self.bindings)

    def __getitem__(self, j):
        return self.bindings[j]

    def __contains__(self, j):
        return j in self.bindings

    def __eq__(self, other):
        return (
            isinstance(other, PartialAssignment)
            and other.n == self.n
            and other.bindings == self.bindings
        )

    def __hash__(self):
        return hash((self.n, tuple(self.bindings.items())))

    def __repr__(self):
        inner = ", ".join(f"x{j}<-{v}" for j, v in self.bindings.items())
        return f"PartialAssignment({{{inner}}}, n={self.n})"


class AffinePoly:
    """A linear form plus a constant term over F_p.

    The equation f = a is represented as the polynomial f - a, i.e. with
    constant -a; the poly vanishes exactly where the equation holds.
    """

    __slots__ = ("coeffs", "const", "field")

    def __init__(self, field: Field, coeffs: Sequence[int], const: int = 0):
        c = np.asarray(coeffs, dtype=np.int64) % field.p
        object.__setattr__(self, "coeffs", _frozen(c))
        object.__setattr__(self, "const", int(const) % field.p)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("AffinePoly is immutable")

    @classmethod
    def from_equation(cls, field: Field, coeffs: Sequence[int], rhs: int) -> "AffinePoly":
        return cls(field, coeffs, -int(rhs))

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def rhs(self) -> int:
        """The b making this poly read as the equation (form) = b."""
        return (-self.const) % self.field.p

    def weight(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    def is_zero(self) -> bool:
        return self.const == 0 and not self.coeffs.any()

    def is_constant(self) -> bool:
        return not self.coeffs.any()

    def vec(self) -> np.ndarray:
        """The n+1 coordinate vector, constant last."""
        return np.concatenate([self.coeffs, [self.const]])

    @classmethod
    def from_vec(cls, field: Field, v: Sequence[int]) -> "AffinePoly":
        v = np.asarray(v, dtype=np.int64)
        return cls(field, v[:-1], int(v[-1]))

    def evaluate(self, x: Sequence[int]) -> int:
        return int((np.dot(self.coeffs, np.asarray(x, dtype=np.int64)) + self.const) % self.field.p)

    def restrict(self, rho: PartialAssignment) -> "AffinePoly":
        """Fold bound coordinates into the constant; ambient n is preserved."""
        if rho.n != self.n:
            raise ValueError("assignment ambient dimension mismatch")
        coeffs = np.array(self.coeffs)
        const = self.const
        for j, v in rho.items():
            const = (const + int(coeffs[j]) * v) % self.field.p
            coeffs[j] = 0
        return AffinePoly(self.field, coeffs, const)

    def __add__(self, other: "AffinePoly") -> "AffinePoly":
        return AffinePoly(self.field, self.coeffs + other.coeffs, self.const + other.const)

    def __sub__(self, other: "AffinePoly") -> "AffinePoly":
        return AffinePoly(self.field, self.coeffs - other.coeffs, self.const - other.const)

    def __neg__(self) -> "AffinePoly":
        return AffinePoly(self.field, -self.coeffs, -self.const)

    def scale(self, a: int) -> "AffinePoly":
        return AffinePoly(self.field, self.coeffs * int(a), self.const * int(a))

    def __eq__(self, other):
        return (
            isinstance(other, AffinePoly)
            and other.field == self.field
            and other.const == self.const
            and np.array_equal(other.coeffs, self.coeffs)
        )

    def __hash__(self):
        return hash((self.field.p, self.const, self.coeffs.tobytes()))

    def __repr__(self):
        terms = [f"{int(c)}*x{j}" for j, c in enumerate(self.coeffs) if c]
        if self.const or not terms:
            terms.append(str(self.const))
        return "AffinePoly(" + " + ".join(terms) + f" mod {self.field.p})"


def _coeff_batches(p: int, dim: int, batch: int = _ENUM_BATCH) -> Iterator[np.ndarray]:
    """All coefficient tuples in [0,p)^dim, lexicographic, in batches."""
    total = p ** dim
    radix = p ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    start = 0
    while start < total:
        stop = min(start + batch, total)
        idx = np.arange(start, stop, dtype=np.int64)
        yield (idx[:, None] // radix) % p
        start = stop


class AffineSpan:
    """A vector space of affine polynomials in canonical echelon form.

    The basis is the RREF of the generators over n+1 coordinates with the
    constant last, so two spans are equal iff their bases are identical.
    A span containing a nonzero constant poly (the equation 0 = c, c != 0)
    is representable; the `inconsistent` flag reports it.
    """

    __slots__ = ("field", "n", "basis", "_pivots")

    def __init__(self, field: Field, n: int, basis: Tuple[AffinePoly, ...], pivots: Tuple[int, ...]):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "basis", tuple(basis))
        object.__setattr__(self, "_pivots", tuple(pivots))

    def __setattr__(self, name, value):
        raise AttributeError("AffineSpan is immutable")

    @classmethod
    def span(cls, field: Field, n: int, polys: Iterable[AffinePoly]) -> "AffineSpan":
        polys = list(polys)
        for q in polys:
            if q.n != n:
                raise ValueError("generator ambient dimension mismatch")
        if not polys:
            return cls(field, n, (), ())
        rows = np.stack([q.vec() for q in polys])
        r, rk, piv = rref_with_pivots(rows, field.p)
        basis = tuple(AffinePoly.from_vec(field, r[i]) for i in range(rk))
        return cls(field, n, basis, tuple(piv))

    @classmethod
    def zero(cls, field: Field, n: int) -> "AffineSpan":
        return cls(field, n, (), ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def inconsistent(self) -> bool:
        """True iff the span contains 0 = c for some c != 0."""
        return bool(self._pivots) and self._pivots[-1] == self.n

    def basis_matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.n + 1), dtype=np.int64)
        return np.stack([b.vec() for b in self.basis])

    def contains(self, q: AffinePoly) -> bool:
        if q.n != self.n:
            raise ValueError("ambient dimension mismatch")
        v = q.vec() % self.field.p
        for row, piv in zip(self.basis, self._pivots):
            if v[piv]:
                v = (v - v[piv] * row.vec()) % self.field.p
        return not v.any()

    def contains_span(self, other: "AffineSpan") -> bool:
        return all(self.contains(b) for b in other.basis)

    def __add__(self, other: "AffineSpan") -> "AffineSpan":
        """Span of the union (the subspace-sum semantics of V + W)."""
        if other.field != self.field or other.n != self.n:
            raise ValueError("span ambient mismatch")
        return AffineSpan.span(self.field, self.n, list(self.basis) + list(other.basis))

    def with_polys(self, polys: Iterable[AffinePoly]) -> "AffineSpan":
        return AffineSpan.span(self.field, self.n, list(self.basis) + list(polys))

    def restrict(self, rho: PartialAssignment) -> "AffineSpan":
        return AffineSpan.span(self.field, self.n, [b.restrict(rho) for b in self.basis])

    def element_batches(self, budget: Optional[int] = None) -> Iterator[np.ndarray]:
        """All p^dim span elements as n+1 vectors, lexicographic by coefficients."""
        p = self.field.p
        check_budget(p ** self.dim, budget, "span enumeration")
        bm = self.basis_matrix()
        if self.dim == 0:
            yield np.zeros((1, self.n + 1), dtype=np.int64)
            return
        for coeffs in _coeff_batches(p, self.dim):
            yield (coeffs @ bm) % p

    def elements(self, budget: Optional[int] = None) -> Iterator[AffinePoly]:
        for block in self.element_batches(budget):
            for row in block:
                yield AffinePoly.from_vec(self.field, row)

    def min_weight(self, budget: Optional[int] = None) -> float:
        """Minimal weight over nonzero span elements; inf for the zero span."""
        best = math.inf
        for block in self.element_batches(budget):
            nonzero = block.any(axis=1)
            if not nonzero.any():
                continue
            w = np.count_nonzero(block[nonzero, : self.n], axis=1)
            best = min(best, int(w.min()))
            if best == 0:
                return 0
        return best

    def truncated(self, tau: int, budget: Optional[int] = None) -> "AffineSpan":
        """Span of all elements of weight <= tau."""
        p = self.field.p
        collected: List[np.ndarray] = []
        seen = AffineSpan.zero(self.field, self.n)
        for block in self.element_batches(budget):
            w = np.count_nonzero(block[:, : self.n], axis=1)
            for row in block[w <= tau]:
                q = AffinePoly.from_vec(self.field, row)
                if not seen.contains(q):
                    collected.append(row)
                    seen = seen.with_polys([q])
                    if seen.dim == self.dim:
                        return seen
        return seen

    def reduce_min_weight(
        self, h: AffinePoly, budget: Optional[int] = None
    ) -> Tuple[AffinePoly, int, AffinePoly]:
        """Minimal-weight h' = alpha*h + r with r in the span, alpha != 0.

        Ties break by the lexicographically smallest (alpha, echelon
        coordinates of r).
        """
        p = self.field.p
        check_budget((p - 1) * p ** self.dim, budget, "weight reduction")
        bm = self.basis_matrix()
        hv = h.vec()
        best_w = None
        best = None  # (weight, alpha, coords, hprime_vec)
        for alpha in range(1, p):
            base = (alpha * hv) % p
            if self.dim == 0:
                w = int(np.count_nonzero(base[: self.n]))
                if best_w is None or w < best_w:
                    best_w = w
                    best = (alpha, np.zeros(0, dtype=np.int64), base)
                continue
            offset = 0
            for coeffs in _coeff_batches(p, self.dim):
                cand = (coeffs @ bm + base) % p
                w = np.count_nonzero(cand[:, : self.n], axis=1)
                i = int(np.argmin(w))
                if best_w is None or w[i] < best_w:
                    best_w = int(w[i])
                    best = (alpha, coeffs[i].copy(), cand[i])
                offset += len(coeffs)
        alpha, coords, hp = best
        r_vec = (coords @ bm) % p if self.dim else np.zeros(self.n + 1, dtype=np.int64)
        hprime = AffinePoly.from_vec(self.field, hp)
        r = AffinePoly.from_vec(self.field, r_vec)
        return hprime, alpha, r

    def __eq__(self, other):
        return (
            isinstance(other, AffineSpan)
            and other.field == self.field
            and other.n == self.n
            and other.basis == self.basis
        )

    def __hash__(self):
        return hash((self.field.p, self.n, self.basis))

    def __repr__(self):
        return f"AffineSpan(dim={self.dim}, n={self.n}, p={self.field.p})"


def span_contains(space: AffineSpan, q: AffinePoly) -> bool:
    """True iff q lies in the span as a vector over n+1 coordinates."""
    return space.contains(q)


def truncated_span(space: AffineSpan, tau: int, budget: Optional[int] = None) -> AffineSpan:
    return space.truncated(tau, budget)


def reduce_min_weight(
    space: AffineSpan, h: AffinePoly, budget: Optional[int] = None
) -> Tuple[AffinePoly, int, AffinePoly]:
    return space.reduce_min_weight(h, budget)


def restrict(obj, rho: PartialAssignment):
    """Apply a 0-1 partial assignment to a poly, span, or system."""
    return obj.restrict(rho)


@lru_cache(maxsize=32)
def _cube_cached(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1, dtype=np.int64)) & 1
    return _frozen(bits)


def cube_batches(n: int, budget: Optional[int] = None, batch: int = _ENUM_BATCH) -> Iterator[np.ndarray]:
    """All 2^n boolean points in lexicographic order, in batches.

    Row order treats x0 as the most significant bit, so rows sort like
    tuples (0,..,0) < (0,..,1) < ... < (1,..,1).
    """
    check_budget(1 << n, budget, "boolean cube scan")
    if n <= 16:
        yield _cube_cached(n)
        return
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    start = 0
    total = 1 << n
    while start < total:
        stop = min(start + batch, total)
        idx = np.arange(start, stop, dtype=np.int64)
        yield (idx[:, None] >> shifts) & 1
        start = stop


def zero_one_models(space: AffineSpan, budget: Optional[int] = None) -> np.ndarray:
    """All boolean points annihilating every poly of the span, in lex order."""
    if space.inconsistent:
        check_budget(1 << space.n, budget, "boolean cube scan")
        return np.zeros((0, space.n), dtype=np.int64)
    if space.dim == 0:
        return np.concatenate(list(cube_batches(space.n, budget)))
    forms = space.basis_matrix()[:, : space.n]
    consts = space.basis_matrix()[:, space.n]
    out = []
    for block in cube_batches(space.n, budget):
        vals = (block @ forms.T + consts) % space.field.p
        out.append(block[(vals == 0).all(axis=1)])
    return np.concatenate(out)


def form_image(field: Field, coeffs: Sequence[int]) -> Tuple[int, ...]:
    """The value set of a linear form over the boolean cube, sorted.

    Computed by subset-sum closure over the nonzero coefficients, so the
    cost is O(weight * p) rather than 2^n.
    """
    vals = {0}
    for c in np.asarray(coeffs, dtype=np.int64) % field.p:
        if c:
            vals |= {(v + int(c)) % field.p for v in vals}
    return tuple(sorted(vals))
