import pytest
from hypothesis import given, settings, strategies as st

from rparity.cnf import CnfFormula, brute_force_sat, enumerate_models, xor_clauses
from rparity.errors import ParseError
from rparity.proofkit import (DratProof, add, check_drat, delete, is_asymmetric_tautology,
                              is_rat, parse_drat, write_drat)


def test_at_examples():
    x, y, z = 1, 2, 3
    f = CnfFormula(3, ((x, y),))
    assert is_asymmetric_tautology(f, (x, y, z))
    assert not is_asymmetric_tautology(f, (z,))


def test_at_switching_first_ata_clause():
    x, y, p, z, q = 1, 2, 3, 4, 5
    f = CnfFormula(5, tuple(xor_clauses((x, y, p)) + xor_clauses((p, z, q))))
    assert is_asymmetric_tautology(f, (-q, x, y, z))


def test_rat_examples():
    x, y, n, a = 1, 2, 3, 4
    # n-bar never occurs: RAT on n holds vacuously
    f = CnfFormula(4, ((x, y), (-x, a)))
    assert is_rat(f, (-x, y, n), pivot=n)
    f2 = CnfFormula(4, ((-n, a), (-a,)))
    assert not is_rat(f2, (n,), pivot=n)
    with pytest.raises(ValueError):
        is_rat(f2, (n,), pivot=a)


clause_st = st.lists(st.integers(1, 6).flatmap(lambda v: st.sampled_from([v, -v])),
                     min_size=1, max_size=3).map(
    lambda ls: tuple(dict((abs(l), l) for l in ls).values()))


@settings(max_examples=200)
@given(st.lists(clause_st, max_size=10), clause_st)
def test_at_implies_rat_and_preserves_models(clauses, c):
    f = CnfFormula(6, tuple(clauses))
    if is_asymmetric_tautology(f, c):
        for lit in c:
            assert is_rat(f, c, pivot=lit)
        g = CnfFormula(6, tuple(clauses) + (c,))
        assert enumerate_models(f) == enumerate_models(g)


@settings(max_examples=200)
@given(st.lists(clause_st, max_size=10), clause_st)
def test_rat_preserves_satisfiability(clauses, c):
    f = CnfFormula(6, tuple(clauses))
    if is_rat(f, c):
        g = CnfFormula(6, tuple(clauses) + (c,))
        assert (brute_force_sat(f) is None) == (brute_force_sat(g) is None)


@settings(max_examples=200)
@given(st.lists(clause_st, min_size=1, max_size=10), st.integers(0, 9))
def test_ate_preserves_models(clauses, i):
    i %= len(clauses)
    rest = clauses[:i] + clauses[i + 1:]
    if is_asymmetric_tautology(CnfFormula(6, tuple(rest)), clauses[i]):
        assert enumerate_models(CnfFormula(6, tuple(clauses))) == \
            enumerate_models(CnfFormula(6, tuple(rest)))


def test_check_examples():
    f = CnfFormula(1, ((1,), (-1,)))
    rep = check_drat(f, [add(())])
    assert rep.verified and rep.failing_line is None
    # z outside the variables of (x or y): rejected as a new variable
    rep = check_drat(CnfFormula(2, ((1, 2),)), [add((3,))], forbid_new_vars=True)
    assert not rep.verified and rep.failing_line == 0 and rep.new_vars_used == {3}
    # z declared but unused: (z) is RAT on z vacuously, so only the missing
    # empty clause makes the proof fail
    rep = check_drat(CnfFormula(3, ((1, 2),)), [add((3,))])
    assert not rep.verified and rep.failing_line is None
    rep = check_drat(CnfFormula(2, ((1, 2), (-1, 2))), [add((2,)), add((-2,))])
    assert not rep.verified and rep.failing_line == 1


def test_check_rejects_missing_delete_and_new_vars():
    f = CnfFormula(2, ((1, 2), (-1, 2), (1, -2), (-1, -2)))
    rep = check_drat(f, [delete((1,))])
    assert not rep.verified and rep.failing_line == 0
    rep = check_drat(f, [add((3, 2)), add(())])
    assert not rep.verified and rep.new_vars_used == {3}
    rep = check_drat(f, [add((3, 2), pivot=3), add((2,)), add(())], forbid_new_vars=False)
    assert rep.verified


def test_check_needs_empty_clause():
    f = CnfFormula(2, ((1, 2),))
    rep = check_drat(f, [add((2, 1))])
    assert not rep.verified and rep.failing_line is None


def test_text_examples():
    assert write_drat([add((1, -2))]) == "1 -2 0\n"
    assert write_drat([delete((1,))]) == "d 1 0\n"
    assert write_drat([add(())]) == "0\n"
    assert write_drat([add((2, -3, 5), pivot=5)]) == "5 2 -3 0\n"


@given(st.lists(st.tuples(st.booleans(), clause_st), max_size=10))
def test_text_round_trip(items):
    proof = DratProof([delete(c) if d else add(c) for d, c in items])
    assert parse_drat(write_drat(proof)).lines == proof.lines


@pytest.mark.parametrize("text", ["1 2\n", "1 0 2 0\n", "d x 0\n", "1 -1 0\n"])
def test_parse_drat_errors(text):
    with pytest.raises(ParseError):
        parse_drat(text)
