"""Propositional core: clauses, DIMACS I/O, xor expansion, small-formula oracles.

Literals are DIMACS integers: ``v`` is the positive literal of variable ``v``
and ``-v`` its negation. A clause is a tuple of literals; the tuple order is
kept for output, while clause identity elsewhere is the literal set.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import BlockTooLarge, InvalidXorBlock, ParseError, TooLarge

Clause = tuple  # tuple[int, ...]

MAX_XOR_WIDTH = 20
MAX_BRUTE_FORCE_VARS = 30


def neg(lit: int) -> int:
    return -lit


def make_clause(lits: Iterable[int]) -> Clause:
    """Validate and freeze a clause. Tautologies and repeats are rejected."""
    lits = tuple(lits)
    seen = set()
    for lit in lits:
        if not isinstance(lit, int) or lit == 0:
            raise ValueError(f"invalid literal {lit!r}")
        if abs(lit) in seen:
            kind = "tautological" if -lit in lits else "repeated literal in"
            raise ValueError(f"{kind} clause {lits}")
        seen.add(abs(lit))
    return lits


def is_tautology(lits: Iterable[int]) -> bool:
    s = set(lits)
    return any(-lit in s for lit in s)


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula with a variable-count header.

    ``block_index`` optionally maps each clause position to
    ``(constraint id, block id)``; ``names`` maps variables to readable names
    (``x3``, ``s1``...). Neither takes part in equality, so a DIMACS round
    trip compares equal.
    """

    num_vars: int
    clauses: tuple = ()
    comments: tuple = field(default=(), compare=False)
    block_index: Optional[tuple] = field(default=None, compare=False)
    names: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        clauses = tuple(make_clause(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            for lit in c:
                if abs(lit) > self.num_vars:
                    raise ValueError(
                        f"literal {lit} exceeds num_vars={self.num_vars}")
        if self.block_index is not None:
            if len(self.block_index) != len(clauses):
                raise ValueError("block_index must cover every clause once")
            object.__setattr__(self, "block_index", tuple(self.block_index))

    def __len__(self):
        return len(self.clauses)

    def variables(self) -> set:
        return {abs(lit) for c in self.clauses for lit in c}

    def clause_sets(self) -> list:
        return [frozenset(c) for c in self.clauses]


def xor_clauses(lits: Sequence[int]) -> list:
    """Canonical CNF of ``l1 xor ... xor lk = 0``.

    Returns the 2^(k-1) clauses that each exclude one assignment of odd
    parity. Clauses come out in lexicographic sign order (negated literal
    first), which for three literals matches the usual printed form
    ``(-p -q -r) (-p q r) (p -q r) (p q -r)``.
    """
    lits = tuple(lits)
    k = len(lits)
    if k == 0:
        raise InvalidXorBlock("xor block needs at least one literal")
    if k > MAX_XOR_WIDTH:
        raise BlockTooLarge(f"xor block of width {k} > {MAX_XOR_WIDTH}")
    if len({abs(lit) for lit in lits}) != k:
        raise InvalidXorBlock(f"repeated variable in xor block {lits}")
    out = []
    # flips[i] is True when the clause carries the negation of lits[i]
    for flips in itertools.product((True, False), repeat=k):
        if sum(flips) % 2 == 1:
            out.append(tuple(-l if f else l for l, f in zip(lits, flips)))
    return out


# -- DIMACS ---------------------------------------------------------------

def write_dimacs(f: CnfFormula) -> str:
    out = []
    for line in f.comments:
        out.append(f"c {line}".rstrip() + "\n")
    for var in sorted(f.names):
        out.append(f"c varmap {f.names[var]} {var}\n")
    out.append(f"p cnf {f.num_vars} {len(f.clauses)}\n")
    for c in f.clauses:
        out.append(" ".join(map(str, c + (0,))) + "\n")
    return "".join(out)


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = num_clauses = None
    comments, names = [], {}
    clauses, current = [], []
    current_start = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            body = line[1:].strip()
            parts = body.split()
            if len(parts) == 3 and parts[0] == "varmap":
                try:
                    names[int(parts[2])] = parts[1]
                    continue
                except ValueError:
                    pass
            comments.append(body)
            continue
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise ParseError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise ParseError("negative header counts", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                try:
                    clauses.append(make_clause(current))
                except ValueError as exc:
                    raise ParseError(str(exc), current_start or lineno) from None
                current, current_start = [], None
                continue
            if abs(lit) > num_vars:
                raise ParseError(f"literal {lit} out of range", lineno)
            if current_start is None:
                current_start = lineno
            current.append(lit)
    if num_vars is None:
        raise ParseError("missing header")
    if current:
        raise ParseError("clause missing 0 terminator", current_start)
    if len(clauses) != num_clauses:
        raise ParseError(
            f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses), tuple(comments), None, names)


# -- oracles --------------------------------------------------------------

def _clauses_by_last_var(f: CnfFormula):
    buckets = defaultdict(list)
    for c in f.clauses:
        if c:
            buckets[max(abs(lit) for lit in c)].append(c)
    return buckets


def _search(f: CnfFormula):
    """Exhaustive enumeration over x1..xn in index order.

    A branch is cut as soon as a clause whose variables are all assigned is
    falsified; this only skips assignments that cannot be models, so the set
    of models visited is exactly the set of models of ``f``.
    """
    if any(len(c) == 0 for c in f.clauses):
        return
    n = f.num_vars
    buckets = _clauses_by_last_var(f)
    value = [False] * (n + 1)

    def falsified(c):
        for lit in c:
            if value[abs(lit)] == (lit > 0):
                return False
        return True

    def rec(v):
        if v > n:
            yield {i: int(value[i]) for i in range(1, n + 1)}
            return
        for bit in (False, True):
            value[v] = bit
            if not any(falsified(c) for c in buckets.get(v, ())):
                yield from rec(v + 1)

    yield from rec(1)


def brute_force_sat(f: CnfFormula) -> Optional[dict]:
    """Return a full satisfying assignment ``{var: 0/1}``, or None if unsat."""
    if f.num_vars > MAX_BRUTE_FORCE_VARS:
        raise TooLarge(f"{f.num_vars} variables > {MAX_BRUTE_FORCE_VARS}")
    for model in _search(f):
        return model
    return None


def enumerate_models(f: CnfFormula, max_vars: int = 20) -> list:
    """All models of ``f`` as assignment dicts (small formulas only)."""
    if f.num_vars > max_vars:
        raise TooLarge(f"{f.num_vars} variables > {max_vars}")
    return list(_search(f))


def satisfies(assignment: dict, clauses: Iterable[Sequence[int]]) -> bool:
    for c in clauses:
        if not any(assignment.get(abs(lit)) == (1 if lit > 0 else 0) for lit in c):
            return False
    return True


class Propagation(NamedTuple):
    conflict: bool
    assignment: dict
    residual: tuple


def unit_propagate(f) -> Propagation:
    """Unit propagation to fixpoint.

    Accepts a CnfFormula or any iterable of clauses. On conflict the
    assignment is the partial one reached and the residual is empty.
    """
    clauses = f.clauses if isinstance(f, CnfFormula) else tuple(map(tuple, f))
    assignment = {}
    work = [tuple(c) for c in clauses]
    while True:
        unit = None
        residual = []
        for c in work:
            reduced = []
            sat = False
            for lit in c:
                val = assignment.get(abs(lit))
                if val is None:
                    reduced.append(lit)
                elif val == (1 if lit > 0 else 0):
                    sat = True
                    break
            if sat:
                continue
            if not reduced:
                return Propagation(True, assignment, ())
            if len(reduced) == 1 and unit is None:
                unit = reduced[0]
            residual.append(tuple(reduced))
        if unit is None:
            return Propagation(False, assignment, tuple(residual))
        assignment[abs(unit)] = 1 if unit > 0 else 0
        work = residual
