"""The four target function classes with exact analytics.

Read-once CNFs, conjunctions with parity terms, combinatorial
rectangles and layered read-once branching programs, each with exact
(rational) expectation computation, restriction application and batch
evaluation.  Everything is immutable after construction; the sign
convention is the global one (-1 false, +1 true).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

import numpy as np

from .signs import pack_block


@dataclass(frozen=True)
class Literal:
    index: int
    negated: bool = False

    def truth(self, sign: int) -> bool:
        return (sign == 1) != self.negated

    def __str__(self):
        return f"{'-' if self.negated else ''}{self.index + 1}"


def _check_read_once(groups: Iterable[Sequence[Literal]], n: int) -> None:
    seen = set()
    for lits in groups:
        for lit in lits:
            if not 0 <= lit.index < n:
                raise ValueError(f"variable index {lit.index} outside [0,{n})")
            if lit.index in seen:
                raise ValueError(f"variable {lit.index} appears more than once")
            seen.add(lit.index)


# ---------------------------------------------------------------------------
# Read-once CNF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReadOnceCnf:
    """Conjunction of disjunctions in which no variable repeats.

    A formula with no clauses is the constant 1; a formula collapsed by
    a falsifying restriction is the distinguished constant 0
    (``is_false``), never an empty clause.
    """

    n: int
    clauses: Tuple[Tuple[Literal, ...], ...]
    is_false: bool = False

    def __post_init__(self):
        if self.is_false:
            if self.clauses:
                raise ValueError("constant-0 formula must carry no clauses")
            return
        if any(len(c) == 0 for c in self.clauses):
            raise ValueError("clauses must be nonempty")
        _check_read_once(self.clauses, self.n)

    @classmethod
    def constant_zero(cls, n: int) -> "ReadOnceCnf":
        return cls(n=n, clauses=(), is_false=True)

    @property
    def size(self) -> int:
        return len(self.clauses)

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def variables(self) -> frozenset:
        return frozenset(l.index for c in self.clauses for l in c)

    def evaluate(self, x) -> int:
        if self.is_false:
            return 0
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != n={self.n}")
        for clause in self.clauses:
            if not any(lit.truth(x[lit.index]) for lit in clause):
                return 0
        return 1

    def eval_batch(self, signs: np.ndarray) -> np.ndarray:
        if signs.shape[1] != self.n:
            raise ValueError("assignment width mismatch")
        acc = np.ones(signs.shape[0], dtype=bool)
        if self.is_false:
            acc[:] = False
            return acc
        for clause in self.clauses:
            sat = np.zeros(signs.shape[0], dtype=bool)
            for lit in clause:
                sat |= signs[:, lit.index] == (-1 if lit.negated else 1)
            acc &= sat
        return acc

    def exact_expectation(self) -> Fraction:
        if self.is_false:
            return Fraction(0)
        acc = Fraction(1)
        for clause in self.clauses:
            acc *= 1 - Fraction(1, 1 << len(clause))
        return acc


def tribes(width: int, size: int | None = None) -> ReadOnceCnf:
    """Read-once AND of disjoint ORs; size defaults to 2^(width+1) clauses."""
    m = (1 << (width + 1)) if size is None else size
    clauses = tuple(
        tuple(Literal(i * width + q) for q in range(width)) for i in range(m)
    )
    return ReadOnceCnf(n=m * width, clauses=clauses)


# ---------------------------------------------------------------------------
# Conjunctions of disjunctions and parities (CNF with XOR terms)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """One conjunct: an OR of literals, or a parity constraint.

    An XOR term is satisfied when the XOR of its literal truth values
    equals ``target``.
    """

    kind: str  # "or" | "xor"
    literals: Tuple[Literal, ...]
    target: int = 1

    def __post_init__(self):
        if self.kind not in ("or", "xor"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if not self.literals:
            raise ValueError("terms must be nonempty")
        if self.target not in (0, 1):
            raise ValueError("xor target must be 0 or 1")


@dataclass(frozen=True)
class XorCnf:
    """Read-once conjunction of OR and XOR terms on disjoint variables."""

    n: int
    terms: Tuple[Term, ...]
    is_false: bool = False

    def __post_init__(self):
        if self.is_false:
            if self.terms:
                raise ValueError("constant-0 formula must carry no terms")
            return
        _check_read_once((t.literals for t in self.terms), self.n)

    @classmethod
    def constant_zero(cls, n: int) -> "XorCnf":
        return cls(n=n, terms=(), is_false=True)

    @classmethod
    def from_rcnf(cls, f: ReadOnceCnf) -> "XorCnf":
        if f.is_false:
            return cls.constant_zero(f.n)
        return cls(n=f.n, terms=tuple(Term("or", c) for c in f.clauses))

    @property
    def size(self) -> int:
        return len(self.terms)

    def variables(self) -> frozenset:
        return frozenset(l.index for t in self.terms for l in t.literals)

    def evaluate(self, x) -> int:
        if self.is_false:
            return 0
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != n={self.n}")
        for term in self.terms:
            if term.kind == "or":
                if not any(lit.truth(x[lit.index]) for lit in term.literals):
                    return 0
            else:
                par = 0
                for lit in term.literals:
                    par ^= int(lit.truth(x[lit.index]))
                if par != term.target:
                    return 0
        return 1

    def eval_batch(self, signs: np.ndarray) -> np.ndarray:
        if signs.shape[1] != self.n:
            raise ValueError("assignment width mismatch")
        acc = np.ones(signs.shape[0], dtype=bool)
        if self.is_false:
            acc[:] = False
            return acc
        for term in self.terms:
            if term.kind == "or":
                sat = np.zeros(signs.shape[0], dtype=bool)
                for lit in term.literals:
                    sat |= signs[:, lit.index] == (-1 if lit.negated else 1)
            else:
                par = np.zeros(signs.shape[0], dtype=np.int8)
                for lit in term.literals:
                    par ^= ((signs[:, lit.index] == 1) != lit.negated).astype(np.int8)
                sat = par == term.target
            acc &= sat
        return acc

    def exact_expectation(self) -> Fraction:
        if self.is_false:
            return Fraction(0)
        acc = Fraction(1)
        for term in self.terms:
            if term.kind == "or":
                acc *= 1 - Fraction(1, 1 << len(term.literals))
            else:
                acc *= Fraction(1, 2)
        return acc


# ---------------------------------------------------------------------------
# Combinatorial rectangles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombRect:
    """AND of per-coordinate predicates over m blocks of w signs.

    Each table is a bitmask over the 2^w block patterns: bit a holds
    the accept flag for the block whose big-endian packing is a.
    """

    m: int
    w: int
    tables: Tuple[int, ...]

    def __post_init__(self):
        if len(self.tables) != self.m:
            raise ValueError("need one table per coordinate")
        limit = 1 << (1 << self.w)
        if any(not 0 <= t < limit for t in self.tables):
            raise ValueError(f"tables must have exactly {1 << self.w} entries")

    @property
    def n(self) -> int:
        return self.m * self.w

    def coordinate_accepts(self, i: int, block_index: int) -> int:
        return (self.tables[i] >> block_index) & 1

    def evaluate(self, x) -> int:
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != m*w={self.n}")
        for i in range(self.m):
            a = pack_block(x[i * self.w:(i + 1) * self.w])
            if not self.coordinate_accepts(i, a):
                return 0
        return 1

    def eval_batch(self, signs: np.ndarray) -> np.ndarray:
        if signs.shape[1] != self.n:
            raise ValueError("assignment width mismatch")
        acc = np.ones(signs.shape[0], dtype=bool)
        weights = 1 << np.arange(self.w - 1, -1, -1, dtype=np.int64)
        for i in range(self.m):
            block = (signs[:, i * self.w:(i + 1) * self.w] == 1).astype(np.int64)
            idx = block @ weights
            table = np.array(
                [(self.tables[i] >> a) & 1 for a in range(1 << self.w)], dtype=bool
            )
            acc &= table[idx]
        return acc

    def exact_expectation(self) -> Fraction:
        acc = Fraction(1)
        for t in self.tables:
            acc *= Fraction(bin(t).count("1"), 1 << self.w)
        return acc


# ---------------------------------------------------------------------------
# Read-once branching programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Robp:
    """Layered width-d branching program reading one variable per layer.

    States are (layer t, slot i) for t in 0..n, i in 0..d-1.  The start
    state is (0, 0); in the final layer slot 0 is Acc and every other
    slot is Rej.  ``next0[t][i]`` / ``next1[t][i]`` give the slot in
    layer t+1 followed on bit 0 / 1, and layer t reads variable
    ``order[t]`` (identity by default).
    """

    n: int
    d: int
    next0: Tuple[Tuple[int, ...], ...]
    next1: Tuple[Tuple[int, ...], ...]
    order: Tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.order is None:
            object.__setattr__(self, "order", tuple(range(self.n)))
        if len(self.next0) != self.n or len(self.next1) != self.n:
            raise ValueError("need one transition row per layer")
        for row in (*self.next0, *self.next1):
            if len(row) != self.d or any(not 0 <= v < self.d for v in row):
                raise ValueError("transition rows must map d slots into d slots")
        if sorted(self.order) != list(range(self.n)):
            raise ValueError("order must be a permutation of the variables")

    ACC = 0

    @property
    def rej(self) -> int:
        return self.d - 1

    def step(self, t: int, slot: int, bit: int) -> int:
        return (self.next1 if bit else self.next0)[t][slot]

    def path(self, x) -> list:
        """Slot occupied at every layer on input x (signs)."""
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != n={self.n}")
        slots = [0]
        cur = 0
        for t in range(self.n):
            bit = 1 if x[self.order[t]] == 1 else 0
            cur = self.step(t, cur, bit)
            slots.append(cur)
        return slots

    def evaluate(self, x) -> int:
        return 1 if self.path(x)[-1] == self.ACC else 0

    def eval_all(self) -> np.ndarray:
        """Accept flags for every input, indexed by the little-endian
        bit packing of the assignment (bit i = variable i, 1 = true)."""
        total = 1 << self.n
        inputs = np.arange(total, dtype=np.int64)
        state = np.zeros(total, dtype=np.int8)
        for t in range(self.n):
            bit = ((inputs >> self.order[t]) & 1).astype(np.int8)
            n0 = np.array(self.next0[t], dtype=np.int8)
            n1 = np.array(self.next1[t], dtype=np.int8)
            state = np.where(bit == 1, n1[state], n0[state])
        return state == self.ACC

    def eval_batch(self, signs: np.ndarray) -> np.ndarray:
        if signs.shape[1] != self.n:
            raise ValueError("assignment width mismatch")
        state = np.zeros(signs.shape[0], dtype=np.int8)
        for t in range(self.n):
            bit = signs[:, self.order[t]] == 1
            n0 = np.array(self.next0[t], dtype=np.int8)
            n1 = np.array(self.next1[t], dtype=np.int8)
            state = np.where(bit, n1[state], n0[state])
        return state == self.ACC

    def accept_probabilities(self) -> list:
        """p(v) for every state: exact probability of reaching Acc."""
        p = [[Fraction(0)] * self.d for _ in range(self.n + 1)]
        p[self.n][self.ACC] = Fraction(1)
        for t in range(self.n - 1, -1, -1):
            for i in range(self.d):
                p[t][i] = (p[t + 1][self.next0[t][i]] + p[t + 1][self.next1[t][i]]) / 2
        return p

    def accept_probabilities_float(self) -> np.ndarray:
        """Float fast path of the same backward recurrence."""
        p = np.zeros((self.n + 1, self.d))
        p[self.n][self.ACC] = 1.0
        for t in range(self.n - 1, -1, -1):
            n0 = np.array(self.next0[t])
            n1 = np.array(self.next1[t])
            p[t] = (p[t + 1][n0] + p[t + 1][n1]) / 2
        return p

    def reach_probabilities(self) -> list:
        """Probability of occupying each state on a uniform random walk."""
        r = [[Fraction(0)] * self.d for _ in range(self.n + 1)]
        r[0][0] = Fraction(1)
        for t in range(self.n):
            for i in range(self.d):
                if r[t][i]:
                    half = r[t][i] / 2
                    r[t + 1][self.next0[t][i]] += half
                    r[t + 1][self.next1[t][i]] += half
        return r

    def conditional_visit_probs(self) -> list:
        """q(v): probability a uniformly random accepted input visits v."""
        p = self.accept_probabilities()
        if p[0][0] == 0:
            raise ValueError("conditional visit probabilities undefined: E[f] = 0")
        r = self.reach_probabilities()
        return [
            [r[t][i] * p[t][i] / p[0][0] for i in range(self.d)]
            for t in range(self.n + 1)
        ]

    def exact_expectation(self) -> Fraction:
        return self.accept_probabilities()[0][0]

    def is_sudden_death(self) -> bool:
        """Bottom slot absorbs into the bottom slot at every interior layer."""
        b = self.rej
        return all(
            self.next0[t][b] == b and self.next1[t][b] == b
            for t in range(1, self.n)
        )


def and_chain_program(n: int, d: int = 3) -> Robp:
    """Width-d program computing the AND of all n variables."""
    next0 = []
    next1 = []
    rej = d - 1
    for t in range(n):
        row0 = [rej] * d
        row1 = [rej] * d
        row1[0] = 0
        next0.append(tuple(row0))
        next1.append(tuple(row1))
    return Robp(n=n, d=d, next0=tuple(next0), next1=tuple(next1))


def parity_program(n: int, d: int = 3, target: int = 1) -> Robp:
    """Width-d program accepting inputs whose true-count parity is target."""
    next0 = []
    next1 = []
    for t in range(n):
        row0 = list(range(d))
        row1 = [1, 0] + list(range(2, d))
        next0.append(tuple(row0))
        next1.append(tuple(row1))
    # final layer: slot holding the achieved parity must be slot 0 (Acc)
    if target == 1:
        next0[-1] = tuple([1, 0] + list(range(2, d)))
        next1[-1] = tuple(range(d))
    return Robp(n=n, d=d, next0=tuple(next0), next1=tuple(next1))


# ---------------------------------------------------------------------------
# Restrictions and bias functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Restriction:
    """A partial assignment: sorted variable indices with their signs."""

    indices: Tuple[int, ...]
    signs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.signs):
            raise ValueError("one sign per restricted index required")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be sorted and distinct")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("restriction signs must be -1 or +1")

    @classmethod
    def from_mapping(cls, assignment: dict) -> "Restriction":
        idx = tuple(sorted(assignment))
        return cls(indices=idx, signs=tuple(assignment[i] for i in idx))

    def sign_of(self, i: int):
        try:
            return self.signs[self.indices.index(i)]
        except ValueError:
            return None

    def as_dict(self) -> dict:
        return dict(zip(self.indices, self.signs))


def apply_restriction(f, rho: Restriction):
    """Fix the restricted variables; satisfied conjuncts drop out and a
    falsified conjunct collapses the formula to constant 0."""
    fixed = rho.as_dict()
    if isinstance(f, ReadOnceCnf):
        if f.is_false:
            return f
        clauses = []
        for clause in f.clauses:
            keep = []
            satisfied = False
            for lit in clause:
                if lit.index in fixed:
                    if lit.truth(fixed[lit.index]):
                        satisfied = True
                        break
                else:
                    keep.append(lit)
            if satisfied:
                continue
            if not keep:
                return ReadOnceCnf.constant_zero(f.n)
            clauses.append(tuple(keep))
        return ReadOnceCnf(n=f.n, clauses=tuple(clauses))
    if isinstance(f, XorCnf):
        if f.is_false:
            return f
        terms = []
        for term in f.terms:
            if term.kind == "or":
                keep = []
                satisfied = False
                for lit in term.literals:
                    if lit.index in fixed:
                        if lit.truth(fixed[lit.index]):
                            satisfied = True
                            break
                    else:
                        keep.append(lit)
                if satisfied:
                    continue
                if not keep:
                    return XorCnf.constant_zero(f.n)
                terms.append(Term("or", tuple(keep)))
            else:
                keep = []
                target = term.target
                for lit in term.literals:
                    if lit.index in fixed:
                        target ^= int(lit.truth(fixed[lit.index]))
                    else:
                        keep.append(lit)
                if not keep:
                    if target == 0:
                        continue
                    return XorCnf.constant_zero(f.n)
                terms.append(Term("xor", tuple(keep), target))
        return XorCnf(n=f.n, terms=tuple(terms))
    raise TypeError(f"cannot restrict {type(f).__name__}")


def bias_function(f, indices: Iterable[int], signs: Sequence[int]) -> Fraction:
    """E over uniform completions of f with the given variables fixed."""
    idx = tuple(indices)
    rho = Restriction(indices=tuple(sorted(idx)),
                      signs=tuple(s for _, s in sorted(zip(idx, signs))))
    return apply_restriction(f, rho).exact_expectation()
