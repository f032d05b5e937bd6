"""Linear CNF encodings of parity constraints and the rPar / rAddPar generators."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cnf import CnfFormula, xor_clauses
from .errors import EmptyConstraint, InvalidConstraint, InvalidParameter, TooSmall
from .permute import identity, is_permutation


class VarPool:
    """Hands out consecutive variable ids and remembers their names."""

    def __init__(self, start: int = 1):
        self.next = start
        self.names = {}

    def new(self, name: str) -> int:
        v = self.next
        self.next += 1
        self.names[v] = name
        return v

    def reserve(self, var: int, name: str):
        self.names[var] = name
        self.next = max(self.next, var + 1)

    @property
    def top(self):
        return self.next - 1


@dataclass(frozen=True)
class ParityConstraint:
    """``lits[0] xor ... xor lits[k-1] = target``."""

    lits: tuple
    target: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lits", tuple(self.lits))
        if self.target not in (0, 1):
            raise InvalidConstraint("target must be 0 or 1")
        if len({abs(l) for l in self.lits}) != len(self.lits):
            raise InvalidConstraint(f"repeated variable in {self.lits}")

    @property
    def variables(self):
        return tuple(abs(l) for l in self.lits)


@dataclass(frozen=True)
class EncodedParity:
    """Standard linear encoding of a parity constraint.

    ``order`` lists 1-based positions into ``constraint.lits``; block j of the
    chain uses the literals visited in that order. ``flipped`` is the
    variable whose literal was negated to realise target 1 (None otherwise).
    """

    constraint: ParityConstraint
    order: tuple
    aux_vars: tuple
    blocks: tuple
    flipped: Optional[int] = None

    @property
    def clauses(self) -> list:
        return [c for b in self.blocks for c in xor_clauses(b)]

    @property
    def ordered_lits(self) -> tuple:
        """Input literals in encoding order, flip applied."""
        out = []
        for pos in self.order:
            lit = self.constraint.lits[pos - 1]
            out.append(-lit if abs(lit) == self.flipped else lit)
        return tuple(out)

    @property
    def inputs(self) -> tuple:
        return tuple(abs(l) for l in self.ordered_lits)

    def __len__(self):
        return len(self.constraint.lits)


def chain_blocks(lits: Sequence[int], aux: Sequence[int]) -> tuple:
    """xor blocks of the linear chain over ``lits`` using aux vars ``aux``."""
    k = len(lits)
    if k <= 3:
        return (tuple(lits),)
    assert len(aux) == k - 3
    blocks = [(lits[0], lits[1], aux[0])]
    for j in range(k - 4):
        blocks.append((aux[j], lits[j + 2], aux[j + 1]))
    blocks.append((aux[k - 4], lits[k - 2], lits[k - 1]))
    return tuple(blocks)


def encode_parity(c: ParityConstraint, order: Optional[Sequence[int]] = None,
                  pool: Optional[VarPool] = None, *, prefix: str = "t",
                  flip: Optional[int] = None,
                  aux: Optional[Sequence[int]] = None) -> EncodedParity:
    """Encode ``c`` as a chain of 3-literal xor blocks in the given order.

    Target 1 is realised by negating one input literal: the variable ``flip``
    if given, else the last variable in ``order``. Constraints with at most
    three literals become a single block without auxiliary variables.
    ``aux`` reuses existing auxiliary variables instead of drawing from
    ``pool``.
    """
    k = len(c.lits)
    if k == 0:
        raise InvalidConstraint("empty parity constraint")
    order = tuple(order) if order is not None else identity(k)
    if len(order) != k or not is_permutation(order):
        raise InvalidConstraint(f"order {order} is not a permutation of 1..{k}")
    flipped = None
    if c.target == 1:
        flipped = flip if flip is not None else abs(c.lits[order[-1] - 1])
        if flipped not in c.variables:
            raise InvalidConstraint(f"flip variable {flipped} not in constraint")
    lits = []
    for pos in order:
        lit = c.lits[pos - 1]
        lits.append(-lit if abs(lit) == flipped else lit)
    n_aux = max(k - 3, 0)
    if aux is None:
        if n_aux and pool is None:
            raise InvalidParameter("a VarPool is needed for auxiliary variables")
        aux = tuple(pool.new(f"{prefix}{j + 1}") for j in range(n_aux))
    aux = tuple(aux)
    if len(aux) != n_aux:
        raise InvalidParameter(f"expected {n_aux} auxiliary variables")
    return EncodedParity(c, order, aux, chain_blocks(lits, aux), flipped)


def encodings_to_formula(encodings: Sequence[EncodedParity], num_vars: int,
                         names: Optional[dict] = None,
                         comments: Sequence[str] = ()) -> CnfFormula:
    clauses, index = [], []
    for cid, enc in enumerate(encodings):
        for bid, block in enumerate(enc.blocks):
            for cl in xor_clauses(block):
                clauses.append(cl)
                index.append((cid, bid))
    return CnfFormula(num_vars, tuple(clauses), tuple(comments), tuple(index),
                      dict(names or {}))


# -- rPar -----------------------------------------------------------------

@dataclass(frozen=True)
class RParInstance:
    n: int
    sigma: tuple
    formula: CnfFormula
    encodings: tuple
    params: dict = field(default_factory=dict, compare=False, hash=False)


def gen_rpar(n: int, sigma: Sequence[int]) -> RParInstance:
    """Two contradictory parity constraints over x1..xn, orders id and sigma.

    Variables: x1..xn, then s1..s(n-3) for the identity encoding, then
    t1..t(n-3) for the sigma encoding, whose x_n literal is flipped.
    """
    if n < 4:
        raise TooSmall("rPar needs n >= 4")
    sigma = tuple(sigma)
    if len(sigma) != n or not is_permutation(sigma):
        raise InvalidParameter(f"sigma is not a permutation of 1..{n}")
    pool = VarPool()
    for i in range(1, n + 1):
        pool.reserve(i, f"x{i}")
    xs = identity(n)
    enc_s = encode_parity(ParityConstraint(xs, 0), identity(n), pool, prefix="s")
    enc_t = encode_parity(ParityConstraint(xs, 1), sigma, pool, prefix="t", flip=n)
    formula = encodings_to_formula(
        (enc_s, enc_t), pool.top, pool.names,
        [f"rpar n={n} sigma={' '.join(map(str, sigma))}"])
    return RParInstance(n, sigma, formula, (enc_s, enc_t))


# -- rAddPar --------------------------------------------------------------

def random_subset(n: int, p: float, rng: random.Random) -> frozenset:
    if not 0.0 < p < 1.0:
        raise InvalidParameter(f"p must lie in (0, 1), got {p}")
    return frozenset(i for i in range(1, n + 1) if rng.random() < p)


def random_order(items, rng: random.Random) -> tuple:
    items = sorted(items)
    rng.shuffle(items)
    return tuple(items)


def favorable_sigma_c(A, B, sigma_a: Sequence[int], sigma_b: Sequence[int]) -> tuple:
    """Order for the sum constraint: A\\B in sigma_a order, then B\\A in sigma_b order.

    ``sigma_a`` / ``sigma_b`` are the visiting orders (sequences of variable
    indices) of the two summand encodings.
    """
    A, B = set(A), set(B)
    if not (A ^ B):
        raise EmptyConstraint("A and B have an empty symmetric difference")
    return tuple(i for i in sigma_a if i not in B) + tuple(i for i in sigma_b if i not in A)


@dataclass(frozen=True)
class RAddParInstance:
    n: int
    A: frozenset
    B: frozenset
    sigma_a: tuple
    sigma_b: tuple
    sigma_c: tuple
    a: EncodedParity
    b: EncodedParity
    c: Optional[EncodedParity]
    formula: CnfFormula
    params: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def C(self) -> frozenset:
        return self.A ^ self.B

    @property
    def encodings(self) -> tuple:
        return tuple(e for e in (self.a, self.b, self.c) if e is not None)


def _order_positions(lits_vars: Sequence[int], order: Sequence[int]) -> tuple:
    where = {v: i for i, v in enumerate(lits_vars, start=1)}
    return tuple(where[v] for v in order)


def gen_raddpar(A, B, sigma_a: Sequence[int], sigma_b: Sequence[int],
                sigma_c: Optional[Sequence[int]] = None,
                n: Optional[int] = None) -> RAddParInstance:
    """Two even parity constraints over A and B plus the odd constraint over A^B.

    Orders are visiting sequences of variable indices. ``sigma_c`` defaults
    to increasing index order. The flipped literal of the sum constraint is
    its last input in ``sigma_c``. When A == B the sum constraint is empty;
    the flip then moves to the last input of ``b``, which gives an rPar-type
    pair of contradictory constraints.
    """
    A, B = frozenset(A), frozenset(B)
    if not A or not B:
        raise InvalidConstraint("A and B must be non-empty")
    n = n if n is not None else max(A | B)
    if max(A | B) > n or min(A | B) < 1:
        raise InvalidConstraint(f"subsets must lie in 1..{n}")
    sigma_a, sigma_b = tuple(sigma_a), tuple(sigma_b)
    if sorted(sigma_a) != sorted(A) or sorted(sigma_b) != sorted(B):
        raise InvalidConstraint("orders must enumerate their subsets")
    C = A ^ B
    if sigma_c is None:
        sigma_c = tuple(sorted(C))
    sigma_c = tuple(sigma_c)
    if sorted(sigma_c) != sorted(C):
        raise InvalidConstraint("sigma_c must enumerate the symmetric difference")

    pool = VarPool()
    for i in range(1, n + 1):
        pool.reserve(i, f"x{i}")
    xa, xb = tuple(sorted(A)), tuple(sorted(B))
    enc_a = encode_parity(ParityConstraint(xa, 0), _order_positions(xa, sigma_a),
                          pool, prefix="s")
    b_target = 1 if not C else 0
    enc_b = encode_parity(ParityConstraint(xb, b_target), _order_positions(xb, sigma_b),
                          pool, prefix="t")
    enc_c = None
    if C:
        xc = tuple(sorted(C))
        enc_c = encode_parity(ParityConstraint(xc, 1), _order_positions(xc, sigma_c),
                              pool, prefix="u")
    encs = tuple(e for e in (enc_a, enc_b, enc_c) if e is not None)
    formula = encodings_to_formula(encs, pool.top, pool.names,
                                   [f"raddpar n={n} |A|={len(A)} |B|={len(B)} |C|={len(C)}"])
    return RAddParInstance(n, A, B, sigma_a, sigma_b, sigma_c, enc_a, enc_b, enc_c, formula)


def random_raddpar(n: int, p: float, rng: random.Random, favorable: bool = False,
                   min_size: int = 1) -> RAddParInstance:
    """Random subsets with inclusion probability p and uniform orders."""
    while True:
        A = random_subset(n, p, rng)
        B = random_subset(n, p, rng)
        if len(A) >= min_size and len(B) >= min_size:
            break
    sa, sb = random_order(A, rng), random_order(B, rng)
    sc = favorable_sigma_c(A, B, sa, sb) if favorable and (A ^ B) else None
    return gen_raddpar(A, B, sa, sb, sc, n=n)


# -- metadata sidecar -----------------------------------------------------

def _ints(seq) -> str:
    return " ".join(map(str, seq))


def instance_metadata(inst, **extra) -> dict:
    meta = {}
    if isinstance(inst, RParInstance):
        meta.update(kind="rpar", n=inst.n, sigma=_ints(inst.sigma))
    else:
        meta.update(kind="raddpar", n=inst.n, A=_ints(sorted(inst.A)),
                    B=_ints(sorted(inst.B)), sigma_a=_ints(inst.sigma_a),
                    sigma_b=_ints(inst.sigma_b), sigma_c=_ints(inst.sigma_c))
    meta.update(inst.params)
    meta.update(extra)
    meta["num_vars"] = inst.formula.num_vars
    meta["num_clauses"] = len(inst.formula)
    meta["varmap"] = " ".join(f"{name}={v}" for v, name in sorted(inst.formula.names.items()))
    return meta


def write_metadata(meta: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in meta.items())


def parse_metadata(text: str) -> dict:
    meta = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"metadata line {lineno}: expected key=value")
        k, v = line.split("=", 1)
        meta[k.strip()] = v.strip()
    return meta


def instance_from_metadata(meta: dict):
    def ints(key):
        return tuple(int(t) for t in meta[key].split())

    n = int(meta["n"])
    if meta["kind"] == "rpar":
        inst = gen_rpar(n, ints("sigma"))
    elif meta["kind"] == "raddpar":
        inst = gen_raddpar(ints("A"), ints("B"), ints("sigma_a"), ints("sigma_b"),
                           ints("sigma_c"), n=n)
    else:
        raise ValueError(f"unknown instance kind {meta['kind']!r}")
    return inst
