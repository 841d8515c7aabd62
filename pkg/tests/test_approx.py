import json
import random
from fractions import Fraction
from itertools import product

import pytest

from derand.approx import (MultilinearPoly, SandwichPair, and_of_parities_poly,
                           clause_poly, rcnf_poly, verify_sandwich, xor_compose)
from derand.models import Literal, ReadOnceCnf
from derand.smallbias import BiasedSpaceSpec, exact_bias, outputs_all_seeds


def test_sign_square_collapses():
    x = MultilinearPoly.variable(2, 0)
    assert (x * x).terms == {frozenset(): Fraction(1)}


def test_l1_examples():
    p = MultilinearPoly.build(2, [((), Fraction(1, 2)), ((0, 1), Fraction(-1, 2))])
    assert p.l1() == 1
    assert p.expectation() == Fraction(1, 2)


def test_l1_submultiplicative_sweep():
    rng = random.Random(31)
    for _ in range(500):
        n = 6

        def rand_poly():
            return MultilinearPoly.build(n, [
                (tuple(rng.sample(range(n), rng.randint(0, 3))),
                 Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
                for _ in range(4)])

        a, b = rand_poly(), rand_poly()
        assert (a * b).l1() <= a.l1() * b.l1()


def test_and_of_parities():
    single = and_of_parities_poly(4, [((0, 1), -1)])
    assert single.l1() == 1
    for x in product((-1, 1), repeat=4):
        assert single.evaluate(x) == (1 if x[0] * x[1] == -1 else 0)
    double = and_of_parities_poly(6, [((0, 1), -1), ((2, 3, 4), 1)])
    assert double.l1() == 1
    empty = and_of_parities_poly(3, [])
    assert empty.evaluate((1, -1, 1)) == 1
    with pytest.raises(ValueError):
        and_of_parities_poly(4, [((0, 1), -1), ((1, 2), 1)])


def test_rcnf_poly_is_exact():
    f = ReadOnceCnf(5, ((Literal(0), Literal(2, True)), (Literal(3),)))
    p = rcnf_poly(f)
    for x in product((-1, 1), repeat=5):
        assert p.evaluate(x) == f.evaluate(x)
    assert p.expectation() == f.exact_expectation()


def test_xor_compose_identity_case():
    f = ReadOnceCnf(3, ((Literal(0), Literal(1)),))
    pair = SandwichPair.exact(rcnf_poly(f))
    out = xor_compose(3, [Fraction(0), Fraction(1)], [pair])
    for x in product((-1, 1), repeat=3):
        assert out.lower.evaluate(x) == out.upper.evaluate(x) == f.evaluate(x)
    assert out.gap == 0


def test_xor_compose_exact_and_loosened():
    n = 6
    c1 = rcnf_poly(ReadOnceCnf(n, ((Literal(0), Literal(1)),)))
    c2 = rcnf_poly(ReadOnceCnf(n, ((Literal(3), Literal(4, True)),)))
    and_table = [Fraction(0), Fraction(0), Fraction(0), Fraction(1)]
    exact_out = xor_compose(n, and_table, [SandwichPair.exact(c1), SandwichPair.exact(c2)])
    assert exact_out.gap == 0
    eps = Fraction(1, 100)
    loose = [SandwichPair.of(c - eps / 2, c + eps / 2) for c in (c1, c2)]
    out = xor_compose(n, and_table, loose)
    rep = verify_sandwich(lambda x: c1.evaluate(x) * c2.evaluate(x), out, n)
    assert rep.pointwise_ok
    assert rep.gap <= Fraction(16) ** 2 * eps
    t = max(p.max_l1() for p in loose)
    assert max(rep.l1_lower, rep.l1_upper) <= Fraction(4) ** 2 * (t + 1) ** 2


def test_xor_compose_validation():
    n = 4
    p1 = SandwichPair.exact(rcnf_poly(ReadOnceCnf(n, ((Literal(0),),))))
    p2 = SandwichPair.exact(rcnf_poly(ReadOnceCnf(n, ((Literal(0),),))))
    with pytest.raises(ValueError):
        xor_compose(n, [0, 0, 0, 1], [p1, p2])  # overlapping blocks
    with pytest.raises(ValueError):
        xor_compose(n, [0, 2], [p1])  # combiner value outside [0,1]


def test_verify_sandwich_trivial_cases():
    f = ReadOnceCnf(4, ((Literal(1), Literal(2)),))
    p = rcnf_poly(f)
    exact_rep = verify_sandwich(lambda x: f.evaluate(x), SandwichPair.exact(p), 4,
                                bias=Fraction(1, 8))
    assert exact_rep.pointwise_ok and exact_rep.gap == 0
    assert exact_rep.fooling_bound == p.l1() * Fraction(1, 8)
    vacuous = SandwichPair.of(MultilinearPoly.constant(4, 0),
                              MultilinearPoly.constant(4, 1))
    rep = verify_sandwich(lambda x: f.evaluate(x), vacuous, 4)
    assert rep.pointwise_ok and rep.gap == 1


def test_fooling_transfer_against_concrete_biased_space():
    # |E_D[f] - E[f]| <= gap + L1 * measured bias, for the real spaces
    rng = random.Random(32)
    for _ in range(10):
        n = rng.randint(2, 6)
        clause = tuple(Literal(i, rng.randrange(2) == 1) for i in range(n))
        f = ReadOnceCnf(n, (clause,))
        pair = SandwichPair.exact(rcnf_poly(f))
        spec = BiasedSpaceSpec.with_degree(n, rng.randint(2, 5))
        bias, _ = exact_bias(spec)
        outs = outputs_all_seeds(spec)
        acc = f.eval_batch(outs)
        mean = Fraction(int(acc.sum()), outs.shape[0])
        assert abs(mean - f.exact_expectation()) <= pair.gap + pair.max_l1() * bias


def test_serialization_roundtrip():
    p = MultilinearPoly.build(5, [((0, 3), Fraction(2, 3)), ((), Fraction(-1, 7))])
    data = json.loads(json.dumps(p.to_json()))
    assert MultilinearPoly.from_json(5, data) == p
