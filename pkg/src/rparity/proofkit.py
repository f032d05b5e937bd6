"""DRAT proofs: data model, AT/RAT tests, a forward checker and text I/O."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cnf import CnfFormula, is_tautology, make_clause
from .errors import ParseError

ADD = "a"
DELETE = "d"


@dataclass(frozen=True)
class DratLine:
    kind: str
    lits: tuple
    pivot: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (ADD, DELETE):
            raise ValueError(f"unknown line kind {self.kind!r}")
        object.__setattr__(self, "lits", make_clause(self.lits))
        if self.pivot is not None and self.pivot not in self.lits:
            raise ValueError("pivot must be a literal of the clause")

    @property
    def is_add(self):
        return self.kind == ADD

    def text(self) -> str:
        lits = self.lits
        if self.pivot is not None:
            lits = (self.pivot,) + tuple(l for l in lits if l != self.pivot)
        body = " ".join(map(str, lits + (0,)))
        return "d " + body if self.kind == DELETE else body


def add(lits, pivot=None) -> DratLine:
    return DratLine(ADD, tuple(lits), pivot)


def delete(lits) -> DratLine:
    return DratLine(DELETE, tuple(lits))


@dataclass
class DratProof:
    lines: list = field(default_factory=list)

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    def extend(self, lines):
        self.lines.extend(lines)

    @property
    def num_adds(self):
        return sum(1 for l in self.lines if l.is_add)

    @property
    def num_deletes(self):
        return len(self.lines) - self.num_adds

    def max_add_width(self):
        return max((len(l.lits) for l in self.lines if l.is_add), default=0)

    def variables(self):
        return {abs(x) for l in self.lines for x in l.lits}


@dataclass
class CheckReport:
    verified: bool
    failing_line: Optional[int] = None
    lines_checked: int = 0
    new_vars_used: set = field(default_factory=set)
    reason: str = ""


class ClauseDB:
    """Mutable clause multiset with literal occurrence lists.

    Used by the checker; propagation scans the (short) clauses touched by
    each newly falsified literal.
    """

    def __init__(self, clauses: Iterable = ()):
        self.clauses = {}
        self.occ = defaultdict(set)
        self.by_key = defaultdict(list)
        self.units = set()
        self.empty = 0
        self._next = 0
        for c in clauses:
            self.add(c)

    def add(self, lits):
        lits = tuple(lits)
        cid = self._next
        self._next += 1
        self.clauses[cid] = lits
        for lit in lits:
            self.occ[lit].add(cid)
        self.by_key[frozenset(lits)].append(cid)
        if len(lits) == 1:
            self.units.add(cid)
        elif not lits:
            self.empty += 1
        return cid

    def remove(self, lits) -> bool:
        key = frozenset(lits)
        ids = self.by_key.get(key)
        if not ids:
            return False
        cid = ids.pop()
        if not ids:
            del self.by_key[key]
        c = self.clauses.pop(cid)
        for lit in c:
            self.occ[lit].discard(cid)
        self.units.discard(cid)
        if not c:
            self.empty -= 1
        return True

    def __contains__(self, lits):
        return frozenset(lits) in self.by_key

    def __len__(self):
        return len(self.clauses)

    def propagates_to_conflict(self, assumptions) -> bool:
        """True iff F plus the unit clauses ``assumptions`` yields bottom by UP."""
        if self.empty:
            return True
        true = set()
        queue = []
        for lit in assumptions:
            if -lit in true:
                return True
            if lit not in true:
                true.add(lit)
                queue.append(lit)
        for cid in self.units:
            lit = self.clauses[cid][0]
            if -lit in true:
                return True
            if lit not in true:
                true.add(lit)
                queue.append(lit)
        clauses, occ = self.clauses, self.occ
        i = 0
        while i < len(queue):
            falsified = -queue[i]
            i += 1
            for cid in occ.get(falsified, ()):
                unassigned = None
                count = 0
                for lit in clauses[cid]:
                    if lit in true:
                        break
                    if -lit not in true:
                        count += 1
                        if count > 1:
                            break
                        unassigned = lit
                else:
                    if count == 0:
                        return True
                    # exactly one open literal
                    true.add(unassigned)
                    queue.append(unassigned)
        return False

    def is_at(self, lits) -> bool:
        return self.propagates_to_conflict([-l for l in lits])

    def is_rat_on(self, lits, pivot) -> bool:
        base = [-l for l in lits]
        lit_set = set(lits)
        for cid in list(self.occ.get(-pivot, ())):
            other = self.clauses[cid]
            d = [l for l in other if l != -pivot]
            if any(-l in lit_set for l in d):
                continue  # tautological resolvent
            if not self.propagates_to_conflict(base + [-l for l in d]):
                return False
        return True

    def is_rat(self, lits, pivot=None) -> bool:
        if self.is_at(lits):
            return True
        candidates = [pivot] if pivot is not None else list(lits)
        return any(self.is_rat_on(lits, p) for p in candidates)


def _db(f) -> ClauseDB:
    if isinstance(f, ClauseDB):
        return f
    clauses = f.clauses if isinstance(f, CnfFormula) else f
    return ClauseDB(clauses)


def is_asymmetric_tautology(f, c) -> bool:
    return _db(f).is_at(tuple(c))


def is_rat(f, c, pivot=None) -> bool:
    """RAT test; with ``pivot`` only that literal is tried."""
    c = tuple(c)
    if pivot is not None and pivot not in c:
        raise ValueError("pivot must occur in the clause")
    if is_tautology(c):
        return True
    return _db(f).is_rat(c, pivot)


def check_drat(f: CnfFormula, proof, forbid_new_vars: bool = True) -> CheckReport:
    """Forward replay of ``proof`` on ``f``.

    Additions must be AT or RAT (on the recorded pivot when present, else on
    any literal); deletions must name a present clause. Verification succeeds
    when the empty clause is added.
    """
    db = ClauseDB(f.clauses)
    lines = proof.lines if isinstance(proof, DratProof) else list(proof)
    new_vars = set()
    for i, line in enumerate(lines):
        if forbid_new_vars:
            fresh = {abs(l) for l in line.lits if abs(l) > f.num_vars}
            if fresh:
                new_vars |= fresh
                return CheckReport(False, i, i + 1, new_vars,
                                   f"new variables {sorted(fresh)}")
        if line.kind == DELETE:
            if not db.remove(line.lits):
                return CheckReport(False, i, i + 1, new_vars,
                                   "deleted clause not present")
            continue
        if not db.is_rat(line.lits, line.pivot):
            return CheckReport(False, i, i + 1, new_vars,
                               "added clause is neither AT nor RAT")
        if not line.lits:
            return CheckReport(True, None, i + 1, new_vars)
        db.add(line.lits)
    return CheckReport(False, None, len(lines), new_vars,
                       "empty clause never added")


def write_drat(proof) -> str:
    lines = proof.lines if isinstance(proof, DratProof) else proof
    return "".join(line.text() + "\n" for line in lines)


def parse_drat(text: str) -> DratProof:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        kind = ADD
        if line.startswith("d"):
            kind = DELETE
            line = line[1:]
        try:
            nums = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError(f"bad token in {raw!r}", lineno) from None
        if not nums or nums[-1] != 0 or 0 in nums[:-1]:
            raise ParseError("line must be a single 0-terminated clause", lineno)
        try:
            out.append(DratLine(kind, tuple(nums[:-1])))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return DratProof(out)
