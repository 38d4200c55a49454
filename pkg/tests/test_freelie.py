import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from braidcomplex.freelie import (
    LieElt,
    TraceElt,
    apply_derivation,
    assoc_commutator,
    assoc_mul,
    assoc_to_lie,
    bracketing,
    expand_lyndon,
    is_lyndon,
    lyndon_words,
    necklace_key,
    right_partial,
    standard_factorization,
    trace_project,
    witt_dimension,
)


def test_lyndon_words_small():
    assert lyndon_words(2, 1) == [(1,), (2,)]
    assert lyndon_words(2, 2) == [(1, 2)]
    assert lyndon_words(2, 3) == [(1, 1, 2), (1, 2, 2)]
    assert lyndon_words(2, 4) == [(1, 1, 1, 2), (1, 1, 2, 2), (1, 2, 2, 2)]
    assert lyndon_words(3, 2) == [(1, 2), (1, 3), (2, 3)]


def test_lyndon_counts_match_witt():
    for g in (1, 2, 3):
        for w in range(1, 7):
            assert len(lyndon_words(g, w)) == witt_dimension(g, w)


def test_witt_values():
    # necklace-polynomial values for two and three letters
    assert [witt_dimension(2, w) for w in range(1, 7)] == [2, 1, 2, 3, 6, 9]
    assert [witt_dimension(3, w) for w in range(1, 6)] == [3, 3, 8, 18, 48]


def test_is_lyndon():
    assert is_lyndon((1, 2))
    assert is_lyndon((1, 1, 2))
    assert not is_lyndon((2, 1))
    assert not is_lyndon((1, 2, 1, 2))
    assert not is_lyndon(())


def test_standard_factorization():
    assert standard_factorization((1, 2)) == ((1,), (2,))
    assert standard_factorization((1, 1, 2)) == ((1,), (1, 2))
    assert standard_factorization((1, 2, 2)) == ((1, 2), (2,))
    assert standard_factorization((1, 1, 2, 1, 2, 2)) == ((1,), (1, 2, 1, 2, 2))
    assert standard_factorization((1, 1, 2, 2)) == ((1,), (1, 2, 2))
    with pytest.raises(ValueError):
        standard_factorization((1,))


def test_bracketing_shape():
    assert bracketing((1,)) == 1
    assert bracketing((1, 2)) == (1, 2)
    assert bracketing((1, 1, 2)) == (1, (1, 2))
    assert bracketing((1, 2, 2)) == ((1, 2), 2)


def test_expand_lyndon_weight_two():
    assert expand_lyndon((1, 2)) == {(1, 2): Fraction(1), (2, 1): Fraction(-1)}


def test_expansions_are_triangular():
    # every Lyndon expansion starts at the word itself with coefficient 1,
    # and all other terms are lex-greater rearrangements
    for g, n in ((2, 6), (3, 5)):
        for w in range(1, n + 1):
            for word in lyndon_words(g, w):
                exp = expand_lyndon(word)
                assert exp[word] == 1
                assert min(exp) == word
                for other in exp:
                    assert sorted(other) == sorted(word)


def test_assoc_to_lie_round_trip():
    for word in lyndon_words(3, 4):
        x = LieElt({word: Fraction(3, 7)})
        assert assoc_to_lie(x.to_assoc()) == x


def test_assoc_to_lie_rejects_non_lie():
    with pytest.raises(ValueError):
        assoc_to_lie({(1, 2): Fraction(1)})
    with pytest.raises(ValueError):
        assoc_to_lie({(1, 1): Fraction(1)})


def test_bracket_of_generators():
    x, y = LieElt.generator(1), LieElt.generator(2)
    assert x.bracket(y) == LieElt({(1, 2): Fraction(1)})
    assert y.bracket(x) == LieElt({(1, 2): Fraction(-1)})
    assert x.bracket(x).is_zero()


def test_bracket_weight_three():
    x, y = LieElt.generator(1), LieElt.generator(2)
    xy = x.bracket(y)
    assert x.bracket(xy) == LieElt({(1, 1, 2): Fraction(1)})
    # [[x,y],y] = (1,2,2) basis element
    assert xy.bracket(y) == LieElt({(1, 2, 2): Fraction(1)})


def _random_lie(draw, letters=3, weight=3):
    words = []
    for w in range(1, weight + 1):
        words.extend(lyndon_words(letters, w))
    coeffs = draw(
        st.lists(st.integers(min_value=-3, max_value=3), min_size=len(words), max_size=len(words))
    )
    return LieElt({w: c for w, c in zip(words, coeffs) if c})


@settings(max_examples=10, deadline=None)
@given(st.data())
def test_jacobi_and_antisymmetry(data):
    a = _random_lie(data.draw)
    b = _random_lie(data.draw)
    c = _random_lie(data.draw, weight=2)
    assert a.bracket(b) + b.bracket(a) == LieElt.zero()
    jac = a.bracket(b.bracket(c)) + b.bracket(c.bracket(a)) + c.bracket(a.bracket(b))
    assert jac == LieElt.zero()


def test_derivation_leibniz():
    # derivation d with d(x1) = [x1,x2], d(x2) = 0 satisfies d[a,b] = [da,b]+[a,db]
    x, y = LieElt.generator(1), LieElt.generator(2)
    images = {1: x.bracket(y)}
    a = x.bracket(y)
    b = x.bracket(x.bracket(y))
    lhs = apply_derivation(images, a.bracket(b))
    rhs = apply_derivation(images, a).bracket(b) + a.bracket(apply_derivation(images, b))
    assert lhs == rhs


def test_derivation_on_generators():
    images = {1: LieElt.generator(2), 2: LieElt.generator(1)}
    assert apply_derivation(images, LieElt.generator(1)) == LieElt.generator(2)
    x, y = LieElt.generator(1), LieElt.generator(2)
    # d[x,y] = [y,y] + [x,x] = 0
    assert apply_derivation(images, x.bracket(y)).is_zero()


def test_necklace_key():
    assert necklace_key((2, 1, 3)) == (1, 3, 2)
    assert necklace_key((1, 1, 2)) == (1, 1, 2)
    assert necklace_key(()) == ()


def test_trace_cyclic_invariance():
    u = {(1, 2, 3): Fraction(1)}
    v = {(3, 1, 2): Fraction(1)}
    assert trace_project(u) == trace_project(v)


def test_trace_kills_commutators():
    rng_words = [(1,), (2,), (1, 2), (2, 2, 1), (1, 3)]
    for u, v in itertools.product(rng_words, repeat=2):
        a = {u: Fraction(2)}
        b = {v: Fraction(3)}
        assert trace_project(assoc_commutator(a, b)).is_zero()


def test_trace_distinguishes_necklaces():
    t = trace_project({(1, 2, 2): Fraction(1), (2, 1, 2): Fraction(1)})
    assert t == TraceElt({(1, 2, 2): Fraction(2)})
    assert not t.is_zero()


def test_right_partial_reconstruction():
    a = {
        (1, 2): Fraction(5),
        (2, 1): Fraction(-1),
        (1, 1, 2): Fraction(7),
        (2,): Fraction(4),
    }
    rebuilt = {}
    for k in (1, 2):
        part = right_partial(a, k)
        for w, c in assoc_mul(part, {(k,): Fraction(1)}).items():
            rebuilt[w] = rebuilt.get(w, 0) + c
    assert rebuilt == a


def test_right_partial_values():
    a = {(1, 2): Fraction(5), (2, 2): Fraction(3)}
    assert right_partial(a, 2) == {(1,): Fraction(5), (2,): Fraction(3)}
    assert right_partial(a, 1) == {}
