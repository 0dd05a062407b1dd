"""Linear systems A*x = b over F_p and ECC-based instance generators.

An instance is hard to refute when A generates a code of large minimum
distance and b avoids the boolean-cube image A({0,1}^n).  The generators
here produce such pairs deterministically from a seed; every analysis
routine (distance, image, boolean satisfiability, rate check) is an exact
brute-force enumeration under the global budget.

Instance file format (UTF-8, line oriented, '#' starts a comment line):

    p <prime>
    dims <k> <n>
    <a_1 ... a_n> | <b_i>     (k rows, integers in [0, p))

Files written by `save_instance` round-trip bit-exactly through
`load_instance`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import BudgetExceeded, InfeasibleParams, ParseError, RetriesExhausted
from .linalg import (
    AffinePoly,
    AffineSpan,
    Field,
    PartialAssignment,
    check_budget,
    cube_batches,
    rank,
    rref_with_pivots,
    weight,
)


class LinearSystem:
    """A k x n matrix A paired with a right-hand side b, no implicit reduction."""

    __slots__ = ("a", "b", "field")

    def __init__(self, field: Field, a, b):
        a = field.matrix(a)
        b = field.vector(b)
        if a.shape[0] != b.shape[0]:
            raise ValueError("row count of A and length of b differ")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("LinearSystem is immutable")

    @property
    def k(self) -> int:
        return int(self.a.shape[0])

    @property
    def n(self) -> int:
        return int(self.a.shape[1])

    def polys(self) -> List[AffinePoly]:
        return [
            AffinePoly.from_equation(self.field, self.a[i], int(self.b[i]))
            for i in range(self.k)
        ]

    def span(self) -> AffineSpan:
        return AffineSpan.span(self.field, self.n, self.polys())

    def restrict(self, rho: PartialAssignment) -> "LinearSystem":
        """Fold bound variables into b; bound columns become zero."""
        if rho.n != self.n:
            raise ValueError("assignment ambient dimension mismatch")
        a = np.array(self.a)
        b = np.array(self.b)
        for j, v in rho.items():
            b = (b - a[:, j] * v) % self.field.p
            a[:, j] = 0
        return LinearSystem(self.field, a, b)

    def solvable_over_field(self) -> bool:
        """True iff A*x = b has a solution in F_p^n (not just the cube)."""
        aug = np.concatenate([self.a, self.b[:, None]], axis=1)
        return rank(aug, self.field.p) == rank(self.a, self.field.p)

    def key(self) -> bytes:
        return self.a.tobytes() + b"|" + self.b.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, LinearSystem)
            and other.field == self.field
            and np.array_equal(other.a, self.a)
            and np.array_equal(other.b, self.b)
        )

    def __hash__(self):
        return hash((self.field.p, self.key()))

    def __repr__(self):
        return f"LinearSystem(k={self.k}, n={self.n}, p={self.field.p})"


def code_distance(a: np.ndarray, field: Field, budget: Optional[int] = None) -> int:
    """min over nonzero y of weight(y @ A); 0 iff the rows are dependent."""
    k = a.shape[0]
    p = field.p
    check_budget(p ** k, budget, "code distance")
    best = None
    radix = p ** np.arange(k - 1, -1, -1, dtype=np.int64)
    total = p ** k
    start = 1  # skip y = 0
    batch = 1 << 14
    while start < total:
        stop = min(start + batch, total)
        idx = np.arange(start, stop, dtype=np.int64)
        ys = (idx[:, None] // radix) % p
        words = (ys @ a) % p
        w = np.count_nonzero(words, axis=1)
        m = int(w.min())
        best = m if best is None else min(best, m)
        if best == 0:
            return 0
        start = stop
    return int(best)


def zero_one_image(a: np.ndarray, field: Field, budget: Optional[int] = None) -> Set[Tuple[int, ...]]:
    """The exact image A({0,1}^n) as a set of tuples."""
    n = a.shape[1]
    out: Set[Tuple[int, ...]] = set()
    for block in cube_batches(n, budget):
        vals = (block @ a.T) % field.p
        out.update(map(tuple, vals.tolist()))
    return out


def zero_one_sat(system: LinearSystem, budget: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """Lexicographically first boolean solution, or None."""
    a, b, p = system.a, system.b, system.field.p
    for block in cube_batches(system.n, budget):
        vals = (block @ a.T) % p
        hits = (vals == b).all(axis=1)
        if hits.any():
            return tuple(int(v) for v in block[int(np.argmax(hits))])
    return None


def optimal_rate_check(
    a: np.ndarray, field: Field, budget: Optional[int] = None
) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """Check rank(A_I) >= (k/n)*|I| for every nonempty column subset I.

    Returns (True, None) or (False, worst I) where the worst subset
    maximizes the rank deficit (ties: first in subset enumeration order).
    """
    k, n = a.shape
    check_budget(1 << n, budget, "column subset scan")
    worst = None
    worst_deficit = 0.0
    for mask in range(1, 1 << n):
        cols = tuple(j for j in range(n) if (mask >> (n - 1 - j)) & 1)
        r = rank(a[:, cols], field.p)
        need = (k / n) * len(cols)
        deficit = need - r
        if deficit > worst_deficit + 1e-12:
            worst_deficit = deficit
            worst = cols
    if worst is None:
        return True, None
    return False, worst


def reed_solomon_matrix(field: Field, n: int, k: int) -> np.ndarray:
    """Rows (j^i) for i in [0,k), evaluation points j in [0,n); needs n <= p."""
    if n > field.p:
        raise InfeasibleParams(f"Reed-Solomon needs n <= p, got n={n}, p={field.p}")
    rows = [[pow(j, i, field.p) for j in range(n)] for i in range(k)]
    return field.matrix(rows)


def pick_nonimage_rhs(a: np.ndarray, field: Field, budget: Optional[int] = None) -> np.ndarray:
    """Lexicographically smallest b outside A({0,1}^n)."""
    k = a.shape[0]
    image = zero_one_image(a, field, budget)
    if len(image) >= field.p ** k:
        raise InfeasibleParams("boolean image covers the whole target space")
    p = field.p
    radix = p ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for idx in range(p ** k):
        cand = tuple(int(v) for v in (idx // radix) % p)
        if cand not in image:
            return field.vector(cand)
    raise InfeasibleParams("no vector outside the image")  # pragma: no cover


@dataclass(frozen=True)
class EccInstance:
    """A generated instance with its verified code parameters and provenance."""

    system: LinearSystem
    k: int
    n: int
    d: int
    kind: str
    seed: Optional[int]

    def verify(self, budget: Optional[int] = None) -> None:
        d = code_distance(self.system.a, self.system.field, budget)
        if d != self.d:
            raise ValueError(f"stored distance {self.d} != recomputed {d}")
        if zero_one_sat(self.system, budget) is not None:
            raise ValueError("instance is 0-1 satisfiable")


_KIND_ALIASES = {
    "rs": "reed-solomon",
    "reed-solomon": "reed-solomon",
    "random": "random-distance",
    "random-distance": "random-distance",
}

MAX_RETRIES = 1000


def gen_instance(
    kind: str,
    p: int,
    n: int,
    k: int,
    min_d: int = 0,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> EccInstance:
    """Build (A, b) with code_distance(A) >= min_d and b outside the image.

    The right-hand side is the lexicographically smallest non-image vector,
    so output is reproducible.  The random-distance generator resamples up
    to MAX_RETRIES uniformly random matrices until the distance threshold
    is met.
    """
    field = Field(p)
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in ("reed-solomon", "random-distance"):
        raise ValueError(f"unknown generator kind {kind!r}")
    if (1 << n) >= field.p ** k:
        raise InfeasibleParams(
            f"2^{n} >= {p}^{k}: the boolean image may cover the target space"
        )
    if kind == "reed-solomon":
        a = reed_solomon_matrix(field, n, k)
        d = code_distance(a, field, budget)
        if d < min_d:
            raise InfeasibleParams(f"Reed-Solomon distance {d} below requested {min_d}")
    else:
        if seed is None:
            raise ValueError("random-distance generator requires a seed")
        rng = np.random.default_rng(seed)
        d = -1
        a = None
        for _ in range(MAX_RETRIES):
            cand = field.matrix(rng.integers(0, field.p, size=(k, n)))
            dc = code_distance(cand, field, budget)
            if dc >= min_d and dc > 0:
                a, d = cand, dc
                break
        if a is None:
            raise RetriesExhausted(
                f"no {k}x{n} matrix of distance >= {min_d} in {MAX_RETRIES} samples"
            )
    b = pick_nonimage_rhs(a, field, budget)
    system = LinearSystem(field, a, b)
    return EccInstance(system=system, k=k, n=n, d=d, kind=kind, seed=seed)


def serialize_instance(system: LinearSystem, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"p {system.field.p}")
    lines.append(f"dims {system.k} {system.n}")
    for i in range(system.k):
        row = " ".join(str(int(v)) for v in system.a[i])
        lines.append(f"{row} | {int(system.b[i])}")
    return "\n".join(lines) + "\n"


def save_instance(system: LinearSystem, path, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(system, comments))


def parse_instance(text: str) -> LinearSystem:
    field = None
    k = n = None
    rows: List[List[int]] = []
    rhs: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] == "p":
            if field is not None:
                raise ParseError("duplicate p line", lineno)
            field = Field(int(toks[1]))
        elif toks[0] == "dims":
            if k is not None:
                raise ParseError("duplicate dims line", lineno)
            k, n = int(toks[1]), int(toks[2])
        else:
            if field is None or k is None:
                raise ParseError("row before p/dims header", lineno)
            if "|" not in toks:
                raise ParseError("row missing '|' separator", lineno)
            bar = toks.index("|")
            coeffs = [int(t) for t in toks[:bar]]
            tail = toks[bar + 1 :]
            if len(coeffs) != n or len(tail) != 1:
                raise ParseError(f"expected {n} coefficients, '|', one rhs", lineno)
            if any(not 0 <= c < field.p for c in coeffs + [int(tail[0])]):
                raise ParseError("entry outside [0, p)", lineno)
            rows.append(coeffs)
            rhs.append(int(tail[0]))
    if field is None or k is None:
        raise ParseError("missing p/dims header")
    if len(rows) != k:
        raise ParseError(f"expected {k} rows, found {len(rows)}")
    return LinearSystem(field, rows, rhs)


def load_instance(path) -> LinearSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
