"""DRAT-minus refutations of rPar and rAddPar.

Reordering a linear parity encoding is done with a single local rewrite,
the switching step, which turns ``xor(x,y,p) & xor(p,z,q)`` into
``xor(y,z,p) & xor(p,x,q)`` in 32 proof lines without new variables. On
the tree of xor blocks this is a nearest-neighbour interchange across the
internal edge ``p``. The chain is rotated into a balanced tree, leaves are
swapped along tree paths, and the rotations are undone. Once every
constraint sits in increasing variable order, the contradiction is
refuted by bucket elimination whose resolvents are all AT.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Sequence

from .cnf import CnfFormula, is_tautology, xor_clauses
from .errors import InvalidTarget, MissingBlocks, PivotNotFresh
from .parity import EncodedParity, RAddParInstance, RParInstance, encode_parity
from .proofkit import DratLine, DratProof, add, delete

# sign patterns of the switching step; 1 keeps the literal, 0 negates it
ATA_PATTERNS = ((0, 1, 1, 1), (0, 0, 0, 1), (0, 1, 0, 0), (0, 0, 1, 0),
                (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0), (1, 0, 0, 0))
XOR3_PATTERNS = ((0, 1, 1), (0, 0, 0), (1, 1, 0), (1, 0, 1))


def _signed(lits, pattern):
    return tuple(l if keep else -l for l, keep in zip(lits, pattern))


class EmissionContext:
    """Current clause multiset plus the proof emitted so far.

    The variable universe is fixed to the input formula (DRAT-minus).
    ``deletions=False`` suppresses deletion lines of the elimination phase;
    the switching steps always delete, since they rely on freshness of p.
    """

    def __init__(self, formula: CnfFormula, deletions: bool = True, check: bool = True):
        self.formula = formula
        self.num_vars = formula.num_vars
        self.deletions = deletions
        self.check = check
        self.clauses = Counter(frozenset(c) for c in formula.clauses)
        self.var_occ = Counter(abs(l) for c in formula.clauses for l in c)
        self.proof = DratProof()

    def _emit(self, line: DratLine):
        if self.check and any(abs(l) > self.num_vars for l in line.lits):
            raise ValueError(f"line {line.lits} leaves the variable universe")
        self.proof.lines.append(line)
        return line

    def add(self, lits, pivot=None) -> DratLine:
        key = frozenset(lits)
        self.clauses[key] += 1
        for l in key:
            self.var_occ[abs(l)] += 1
        return self._emit(add(lits, pivot))

    def delete(self, lits) -> DratLine:
        key = frozenset(lits)
        if self.check and self.clauses[key] <= 0:
            raise MissingBlocks(f"clause {tuple(lits)} not present")
        self.clauses[key] -= 1
        if self.clauses[key] <= 0:
            del self.clauses[key]
        for l in key:
            self.var_occ[abs(l)] -= 1
        return self._emit(delete(lits))

    def has_block(self, block) -> bool:
        return all(self.clauses[frozenset(c)] > 0 for c in xor_clauses(block))

    def clause_set(self) -> set:
        return {c for c, m in self.clauses.items() if m > 0}

    def formula_now(self) -> CnfFormula:
        cls = []
        for c, m in self.clauses.items():
            cls.extend([tuple(sorted(c, key=abs))] * m)
        return CnfFormula(self.num_vars, tuple(cls))


def switch_step(ctx: EmissionContext, x: int, y: int, p: int, z: int, q: int) -> list:
    """Rewrite ``xor(x,y,p) & xor(p,z,q)`` into ``xor(y,z,p) & xor(p,x,q)``.

    ``p`` is the shared auxiliary variable and must occur in no other
    clause. Emits 8 AT additions, 8 deletions, 8 RAT additions on p and
    8 deletions.
    """
    if ctx.check:
        if not (ctx.has_block((x, y, p)) and ctx.has_block((p, z, q))):
            raise MissingBlocks(f"xor({x},{y},{p}) & xor({p},{z},{q}) not present")
        if ctx.var_occ[p] != 8:
            raise PivotNotFresh(f"variable {p} occurs outside the two blocks")
    start = len(ctx.proof.lines)
    ata = [_signed((q, x, y, z), pat) for pat in ATA_PATTERNS]
    for c in ata:
        ctx.add(c)
    for pat in XOR3_PATTERNS:
        ctx.delete(_signed((p, x, y), pat))
    for pat in XOR3_PATTERNS:
        ctx.delete(_signed((p, q, z), pat))
    for pat in XOR3_PATTERNS:
        c = _signed((p, z, y), pat)
        ctx.add(c, pivot=c[0])
    for pat in XOR3_PATTERNS:
        c = _signed((p, q, x), pat)
        ctx.add(c, pivot=c[0])
    for c in ata:
        ctx.delete(c)
    return ctx.proof.lines[start:]


# -- xor trees ------------------------------------------------------------

def _aux(v):
    return ("a", v)


def _slot(i):
    return ("s", i)


class XorTree:
    """Unrooted ternary tree of xor blocks for one parity constraint.

    Edges are labelled ``("a", var)`` for auxiliary variables and
    ``("s", i)`` for leaf slot i; ``slot_lit[i]`` is the input literal
    currently sitting in slot i. Every block is the xor of its three edge
    literals. ``history`` keeps the interchanges done while balancing so
    they can be undone.
    """

    def __init__(self, blocks, slot_lit):
        self.blocks = {i: list(b) for i, b in enumerate(blocks)}
        self.slot_lit = dict(slot_lit)
        self.edge_blocks = defaultdict(list)
        for bid, b in self.blocks.items():
            for e in b:
                self.edge_blocks[e].append(bid)
        self.history = []
        self.switches = 0

    @classmethod
    def from_linear(cls, enc: EncodedParity):
        k = len(enc)
        aux = [_aux(v) for v in enc.aux_vars]
        slots = [_slot(i) for i in range(1, k + 1)]
        lit = {i: l for i, l in enumerate(enc.ordered_lits, start=1)}
        if k <= 3:
            return cls([slots], lit)
        blocks = [(slots[0], slots[1], aux[0])]
        for j in range(k - 4):
            blocks.append((aux[j], slots[j + 2], aux[j + 1]))
        blocks.append((aux[k - 4], slots[k - 2], slots[k - 1]))
        return cls(blocks, lit)

    def lit(self, e) -> int:
        return e[1] if e[0] == "a" else self.slot_lit[e[1]]

    def block_lits(self) -> list:
        return [tuple(self.lit(e) for e in b) for b in self.blocks.values()]

    def leaf_order(self) -> tuple:
        return tuple(self.slot_lit[i] for i in sorted(self.slot_lit))

    def _block_with(self, e, other):
        for bid in self.edge_blocks[e]:
            if other in self.blocks[bid]:
                return bid
        raise MissingBlocks(f"no block holds both {e} and {other}")

    def interchange(self, ctx: EmissionContext, p, x, z) -> list:
        """Swap edge x (beside p) with edge z (across p) by one switching step."""
        b1, b2 = self._block_with(p, x), self._block_with(p, z)
        if b1 == b2:
            raise MissingBlocks("x and z lie in the same block")
        y = next(e for e in self.blocks[b1] if e not in (p, x))
        q = next(e for e in self.blocks[b2] if e not in (p, z))
        lines = switch_step(ctx, self.lit(x), self.lit(y), p[1], self.lit(z), self.lit(q))
        self.blocks[b1] = [y, z, p]
        self.blocks[b2] = [p, x, q]
        self.edge_blocks[x].remove(b1)
        self.edge_blocks[x].append(b2)
        self.edge_blocks[z].remove(b2)
        self.edge_blocks[z].append(b1)
        self.switches += 1
        return lines

    def depth(self) -> int:
        """Longest leaf-to-leaf path in blocks, halved (rounded up)."""
        def ecc(start):
            seen = {start: 0}
            dq = deque([start])
            while dq:
                b = dq.popleft()
                for e in self.blocks[b]:
                    for nb in self.edge_blocks[e]:
                        if nb not in seen:
                            seen[nb] = seen[b] + 1
                            dq.append(nb)
            far = max(seen, key=seen.get)
            return far, seen[far]
        far, _ = ecc(next(iter(self.blocks)))
        _, diam = ecc(far)
        return (diam + 2) // 2 + 1 if len(self.blocks) > 1 else 1

    def block_path(self, e1, e2) -> list:
        """Blocks from the one holding leaf e1 to the one holding leaf e2."""
        start, goal = self.edge_blocks[e1][0], self.edge_blocks[e2][0]
        prev = {start: None}
        dq = deque([start])
        while dq:
            b = dq.popleft()
            if b == goal:
                break
            for e in self.blocks[b]:
                for nb in self.edge_blocks[e]:
                    if nb not in prev:
                        prev[nb] = b
                        dq.append(nb)
        path = [goal]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        return path[::-1]

    def shared_edge(self, b1, b2):
        return next(e for e in self.blocks[b1] if e in self.blocks[b2])


class _Node:
    __slots__ = ("edge", "left", "right", "size")

    def __init__(self, edge, left, right):
        self.edge, self.left, self.right = edge, left, right
        self.size = _size(left) + _size(right)


def _size(t):
    return t.size if isinstance(t, _Node) else 1


def _edge(t):
    return t.edge if isinstance(t, _Node) else t


def _balance(ctx, tree: XorTree, v: _Node):
    target = v.size // 2
    while _size(v.left) > target:
        u = v.left
        a, b, c = u.left, u.right, v.right
        tree.interchange(ctx, u.edge, _edge(a), _edge(c))
        tree.history.append((u.edge, _edge(a), _edge(c)))
        u.left, u.right = b, c
        u.size = _size(b) + _size(c)
        v.left, v.right = a, u
    while _size(v.left) < target:
        u = v.right
        a, b, c = v.left, u.left, u.right
        tree.interchange(ctx, u.edge, _edge(c), _edge(a))
        tree.history.append((u.edge, _edge(c), _edge(a)))
        u.left, u.right = a, b
        u.size = _size(a) + _size(b)
        v.left, v.right = u, c
    for child in (v.left, v.right):
        if isinstance(child, _Node):
            _balance(ctx, tree, child)


def linear_to_tree(ctx: EmissionContext, enc: EncodedParity):
    """Rotate the chain of ``enc`` into a balanced tree by midpoint splits.

    The chain is viewed as a left comb hanging from the last leaf; each
    subtree is rotated until its left part holds half of its leaves, then
    both halves are processed left to right.
    """
    tree = XorTree.from_linear(enc)
    start = len(ctx.proof.lines)
    k = len(enc)
    if k >= 4:
        aux = [_aux(v) for v in enc.aux_vars]
        node = _Node(aux[0], _slot(1), _slot(2))
        for j in range(1, k - 3):
            node = _Node(aux[j], node, _slot(j + 2))
        root = _Node(_slot(k), node, _slot(k - 1))
        _balance(ctx, tree, root)
    return ctx.proof.lines[start:], tree


def swap_leaves(ctx: EmissionContext, tree: XorTree, i: int, j: int) -> int:
    """Exchange the literals in slots i and j; returns switching steps used."""
    a, b = _slot(i), _slot(j)
    path = tree.block_path(a, b)
    d = len(path) - 1
    if d > 0:
        edges = [tree.shared_edge(path[t], path[t + 1]) for t in range(d)]
        off = {}
        for t in range(1, d):
            off[t] = next(e for e in tree.blocks[path[t]]
                          if e != edges[t - 1] and e != edges[t])
        for t in range(d - 1):
            tree.interchange(ctx, edges[t], a, off[t + 1])
        tree.interchange(ctx, edges[d - 1], a, b)
        for t in range(d - 2, -1, -1):
            tree.interchange(ctx, edges[t], b, off[t + 1])
        for bid in (path[0], path[-1]):
            blk = tree.blocks[bid]
            tree.blocks[bid] = [b if e == a else a if e == b else e for e in blk]
        tree.edge_blocks[a], tree.edge_blocks[b] = tree.edge_blocks[b], tree.edge_blocks[a]
    tree.slot_lit[i], tree.slot_lit[j] = tree.slot_lit[j], tree.slot_lit[i]
    return max(2 * d - 1, 0)


def permute_leaves(ctx: EmissionContext, tree: XorTree, target_lits: Sequence[int]) -> list:
    """Selection-sort the slot contents into ``target_lits`` by leaf swaps."""
    target_lits = tuple(target_lits)
    current = tree.leaf_order()
    if sorted(target_lits) != sorted(current):
        raise InvalidTarget("target is not a permutation of the leaves")
    start = len(ctx.proof.lines)
    where = {l: i for i, l in tree.slot_lit.items()}
    for i, want in enumerate(target_lits, start=1):
        j = where[want]
        if j != i:
            have = tree.slot_lit[i]
            swap_leaves(ctx, tree, i, j)
            where[want], where[have] = i, j
    return ctx.proof.lines[start:]


def tree_to_linear(ctx: EmissionContext, tree: XorTree) -> list:
    """Undo the balancing interchanges, giving back a chain in slot order."""
    start = len(ctx.proof.lines)
    while tree.history:
        p, x, z = tree.history.pop()
        tree.interchange(ctx, p, z, x)
    return ctx.proof.lines[start:]


def reordered(enc: EncodedParity, target: Sequence[int]) -> EncodedParity:
    """The encoding of the same constraint in order ``target``, same aux vars."""
    return encode_parity(enc.constraint, target, aux=enc.aux_vars, flip=enc.flipped)


def reorder_parity(ctx: EmissionContext, enc: EncodedParity, target: Sequence[int]):
    """Reorder ``enc`` (present in ctx) to visit its inputs in ``target`` order.

    ``target`` lists 1-based positions into the constraint's literals, like
    ``enc.order``. Returns ``(lines, new_encoding)``; the auxiliary
    variables are reused in place.
    """
    target = tuple(target)
    new = reordered(enc, target)
    if target == enc.order or len(enc) <= 3:
        return [], new
    start = len(ctx.proof.lines)
    _, tree = linear_to_tree(ctx, enc)
    permute_leaves(ctx, tree, new.ordered_lits)
    tree_to_linear(ctx, tree)
    return ctx.proof.lines[start:], new


# -- elimination ----------------------------------------------------------

def elimination_order(encodings: Sequence[EncodedParity]) -> list:
    """Inputs by index; each aux var just before the input it first meets.

    For a chain over sorted inputs y1 < ... < ym, aux t_j links the block
    holding y_(j+1) to the one holding y_(j+2) and is eliminated right
    before y_(j+2).
    """
    keys = {}
    for enc in encodings:
        ys = enc.inputs
        for v in ys:
            keys[v] = (v, 1, v)
        for j, t in enumerate(enc.aux_vars, start=1):
            keys[t] = (ys[j + 1], 0, t)
    return sorted(keys, key=keys.get)


def eliminate(ctx: EmissionContext, order: Sequence[int]) -> bool:
    """Davis-Putnam elimination in ``order``; True once the empty clause is added.

    Every non-tautological resolvent not already present is added (it is
    AT by construction); clauses of the eliminated variable are then
    deleted when deletions are enabled.
    """
    active = set(ctx.clause_set())
    occ = defaultdict(set)
    for c in active:
        for l in c:
            occ[l].add(c)
    for v in order:
        pos, negs = list(occ[v]), list(occ[-v])
        new = []
        for cp in pos:
            rest_p = cp - {v}
            for cn in negs:
                r = rest_p | (cn - {-v})
                if is_tautology(r) or r in active or r in new:
                    continue
                new.append(r)
        for r in sorted(new, key=lambda c: (len(c), sorted(c, key=lambda l: (abs(l), l)))):
            if r in active:
                continue
            ctx.add(tuple(sorted(r, key=lambda l: (abs(l), l))))
            if not r:
                return True
            active.add(r)
            for l in r:
                occ[l].add(r)
        for c in pos + negs:
            active.discard(c)
            for l in c:
                occ[l].discard(c)
            if ctx.deletions:
                ctx.delete(tuple(sorted(c, key=lambda l: (abs(l), l))))
    if frozenset() in active:
        return True
    return False


# -- refutations ----------------------------------------------------------

@dataclass
class ProofStats:
    n: int
    lines: int
    adds: int
    deletes: int
    max_add_width: int
    switch_steps: int
    reorder_lines: int

    @property
    def ratio(self) -> float:
        """lines / (n log2 n): the constant of the n log n bound."""
        return self.lines / (self.n * math.log2(self.n)) if self.n > 1 else float(self.lines)

    def as_dict(self) -> dict:
        return {"n": self.n, "lines": self.lines, "adds": self.adds,
                "deletes": self.deletes, "max_add_width": self.max_add_width,
                "switch_steps": self.switch_steps, "reorder_lines": self.reorder_lines,
                "K": f"{self.ratio:.4f}"}


@dataclass
class Refutation:
    proof: DratProof
    stats: ProofStats
    final_encodings: tuple = field(default=())


def _refute(formula, n, encodings, targets, deletions):
    ctx = EmissionContext(formula, deletions=deletions)
    finals = []
    for enc, target in zip(encodings, targets):
        _, new = reorder_parity(ctx, enc, target)
        finals.append(new)
    reorder_lines = len(ctx.proof)
    if not eliminate(ctx, elimination_order(finals)):
        raise RuntimeError("elimination ended without the empty clause")
    proof = ctx.proof
    stats = ProofStats(n, len(proof), proof.num_adds, proof.num_deletes,
                       proof.max_add_width(), reorder_lines // 32, reorder_lines)
    return Refutation(proof, stats, tuple(finals))


def _sorted_target(enc: EncodedParity) -> tuple:
    lits = enc.constraint.lits
    return tuple(sorted(range(1, len(lits) + 1), key=lambda i: abs(lits[i - 1])))


def refute_rpar(inst: RParInstance, deletions: bool = True) -> Refutation:
    """Reorder the sigma constraint to the identity, then eliminate."""
    enc_s, enc_t = inst.encodings
    return _refute(inst.formula, inst.n, inst.encodings,
                   [enc_s.order, _sorted_target(enc_t)], deletions)


def refute_raddpar(inst: RAddParInstance, deletions: bool = True) -> Refutation:
    """Reorder all constraints to increasing index order, then eliminate.

    When A == B the sum constraint is absent and this is the rPar case.
    """
    encs = inst.encodings
    n = len(inst.A | inst.B)
    return _refute(inst.formula, n, encs, [_sorted_target(e) for e in encs], deletions)


def write_stats(stats: ProofStats) -> str:
    return "".join(f"{k}={v}\n" for k, v in stats.as_dict().items())
