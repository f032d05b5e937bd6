import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from rparity.cnf import brute_force_sat, enumerate_models, write_dimacs
from rparity.errors import (EmptyConstraint, InvalidConstraint, InvalidParameter,
                            TooSmall)
from rparity.parity import (ParityConstraint, VarPool, encode_parity, favorable_sigma_c,
                            gen_raddpar, gen_rpar, instance_from_metadata, instance_metadata,
                            parse_metadata, random_order, random_raddpar, random_subset,
                            write_metadata)
from rparity.cnf import CnfFormula
from rparity.permute import identity, make_rng, uniform_permutation

from oracles import binomial_3sigma, parity

# example instance with n = 6: visiting orders of the two summands
EX_A, EX_B = {1, 2, 4, 5, 6}, {1, 2, 3, 5}
EX_SA, EX_SB = (4, 5, 1, 6, 2), (1, 5, 2, 3)


def _pool(k):
    pool = VarPool()
    for i in range(1, k + 1):
        pool.reserve(i, f"x{i}")
    return pool


def test_encode_k5_identity():
    enc = encode_parity(ParityConstraint((1, 2, 3, 4, 5)), pool=_pool(5))
    assert enc.aux_vars == (6, 7)
    assert enc.blocks == ((1, 2, 6), (6, 3, 7), (7, 4, 5))
    assert len(enc.clauses) == 12


def test_encode_k2_single_block():
    enc = encode_parity(ParityConstraint((1, 2)))
    assert enc.blocks == ((1, 2),) and enc.aux_vars == () and len(enc.clauses) == 2


def test_encode_k5_target1_models():
    enc = encode_parity(ParityConstraint((1, 2, 3, 4, 5), 1), pool=_pool(5))
    f = CnfFormula(7, tuple(enc.clauses))
    proj = {tuple(m[i] for i in range(1, 6)) for m in enumerate_models(f)}
    assert proj == {b for b in itertools.product((0, 1), repeat=5) if parity(b) == 1}
    assert len(enumerate_models(f)) == 16  # aux values are forced


def test_encode_errors():
    with pytest.raises(InvalidConstraint):
        ParityConstraint((1, -1))
    with pytest.raises(InvalidConstraint):
        encode_parity(ParityConstraint(()))
    with pytest.raises(InvalidConstraint):
        encode_parity(ParityConstraint((1, 2, 3)), order=(1, 1, 2))
    with pytest.raises(InvalidParameter):
        encode_parity(ParityConstraint((1, 2, 3, 4)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 1), st.randoms(use_true_random=False),
       st.lists(st.booleans(), min_size=6, max_size=6))
def test_encode_models_are_parity(k, target, rnd, signs):
    lits = tuple(i if s else -i for i, s in zip(range(1, k + 1), signs))
    order = list(range(1, k + 1))
    rnd.shuffle(order)
    enc = encode_parity(ParityConstraint(lits, target), order, _pool(k))
    nv = k + len(enc.aux_vars)
    # chain structure of the block sequence
    if k >= 4:
        t, ol = enc.aux_vars, enc.ordered_lits
        assert enc.blocks[0] == (ol[0], ol[1], t[0])
        assert enc.blocks[-1] == (t[-1], ol[-2], ol[-1])
        assert len(enc.blocks) == k - 2
    models = enumerate_models(CnfFormula(nv, tuple(enc.clauses)))
    proj = sorted(tuple(m[i] for i in range(1, k + 1)) for m in models)
    def val(bits):
        return [b if l > 0 else 1 - b for b, l in zip(bits, lits)]
    want = sorted(b for b in itertools.product((0, 1), repeat=k) if parity(val(b)) == target)
    assert proj == want


def test_rpar_counts_and_names():
    inst = gen_rpar(5, identity(5))
    assert inst.formula.num_vars == 9 and len(inst.formula) == 24
    names = inst.formula.names
    assert [names[v] for v in range(1, 10)] == ["x1", "x2", "x3", "x4", "x5",
                                                "s1", "s2", "t1", "t2"]
    big = gen_rpar(50, uniform_permutation(50, make_rng(0)))
    assert big.formula.num_vars == 144 and len(big.formula) == 384
    with pytest.raises(TooSmall):
        gen_rpar(3, (1, 2, 3))
    with pytest.raises(InvalidParameter):
        gen_rpar(4, (1, 2, 2, 4))


def test_rpar_example_unsat():
    inst = gen_rpar(5, (3, 1, 5, 4, 2))
    assert brute_force_sat(inst.formula) is None
    enc_t = inst.encodings[1]
    assert enc_t.inputs == (3, 1, 5, 4, 2) and enc_t.flipped == 5
    # exactly one negated literal in the whole formula's blocks
    negs = [l for e in inst.encodings for b in e.blocks for l in b if l < 0]
    assert negs == [-5]


@given(st.integers(4, 40), st.integers(0, 10 ** 6))
def test_rpar_closed_forms(n, seed):
    inst = gen_rpar(n, uniform_permutation(n, make_rng(seed)))
    assert inst.formula.num_vars == 3 * n - 6
    assert len(inst.formula) == 8 * (n - 2)
    assert write_dimacs(inst.formula) == write_dimacs(gen_rpar(n, inst.sigma).formula)


def test_random_subset_examples():
    a = random_subset(1000, 0.5, make_rng(1))
    assert abs(len(a) - 500) <= binomial_3sigma(1000, 0.5)
    assert random_subset(0, 0.3, make_rng(1)) == frozenset()
    assert random_subset(50, 0.3, make_rng(9)) == random_subset(50, 0.3, make_rng(9))
    for p in (0.0, 1.0):
        with pytest.raises(InvalidParameter):
            random_subset(5, p, make_rng(0))


def test_favorable_examples():
    assert favorable_sigma_c(EX_A, EX_B, EX_SA, EX_SB) == (4, 6, 3)
    assert favorable_sigma_c({1, 2}, {1, 2, 3, 4}, (2, 1), (4, 1, 3, 2)) == (4, 3)
    assert favorable_sigma_c({1, 2, 5, 3}, {1, 2}, (5, 1, 3, 2), (2, 1)) == (5, 3)
    with pytest.raises(EmptyConstraint):
        favorable_sigma_c({1, 2}, {1, 2}, (1, 2), (2, 1))


def test_raddpar_example_unsat():
    inst = gen_raddpar(EX_A, EX_B, EX_SA, EX_SB)
    assert inst.C == frozenset({3, 4, 6}) and inst.sigma_c == (3, 4, 6)
    # 6 inputs, 2 aux for a (k=5), 1 for b (k=4), none for c (k=3)
    assert inst.formula.num_vars == 9
    assert brute_force_sat(inst.formula) is None
    assert inst.c.flipped == 6 and inst.c.blocks == ((3, 4, -6),)


def test_raddpar_equal_sets_reduce_to_rpar():
    s = (2, 3, 4, 1)
    inst = gen_raddpar({1, 2, 3, 4}, {1, 2, 3, 4}, (1, 2, 3, 4), s)
    assert inst.c is None and inst.b.constraint.target == 1
    assert brute_force_sat(inst.formula) is None


def test_raddpar_singleton_difference():
    inst = gen_raddpar({1, 2, 3}, {1, 2, 3, 4}, (3, 1, 2), (4, 2, 1, 3))
    assert inst.c.blocks == ((-4,),)
    assert brute_force_sat(inst.formula) is None


def test_raddpar_errors():
    with pytest.raises(InvalidConstraint):
        gen_raddpar(set(), {1}, (), (1,))
    with pytest.raises(InvalidConstraint):
        gen_raddpar({1, 2}, {2}, (1, 3), (2,))
    with pytest.raises(InvalidConstraint):
        gen_raddpar({1, 2}, {2}, (1, 2), (2,), sigma_c=(2,))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 9), st.integers(0, 10 ** 6), st.booleans())
def test_raddpar_unsat_small(n, seed, fav):
    rng = random.Random(seed)
    inst = random_raddpar(n, 0.5, rng, favorable=fav)
    if inst.formula.num_vars > 30:
        return
    assert brute_force_sat(inst.formula) is None
    auxes = [set(e.aux_vars) for e in inst.encodings]
    assert all(not (a & b) for a, b in itertools.combinations(auxes, 2))
    if inst.c is not None:
        assert set(inst.c.inputs) == set(inst.A ^ inst.B)


def test_metadata_round_trip(tmp_path):
    for inst in (gen_rpar(7, (2, 7, 1, 3, 6, 5, 4)),
                 gen_raddpar(EX_A, EX_B, EX_SA, EX_SB, (4, 6, 3), n=6)):
        meta = parse_metadata(write_metadata(instance_metadata(inst, seed=3)))
        again = instance_from_metadata(meta)
        assert again.formula == inst.formula
        assert meta["seed"] == "3" and meta["num_vars"] == str(inst.formula.num_vars)
    with pytest.raises(ValueError):
        parse_metadata("no equals sign\n")


def test_random_order_is_permutation_of_items():
    o = random_order({5, 9, 2}, make_rng(0))
    assert sorted(o) == [2, 5, 9]
