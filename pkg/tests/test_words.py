from hypothesis import given, strategies as st
import pytest

from pcfkit.words import (
    MarkedSphere,
    WordSyntaxError,
    block_word,
    conjugator,
    cyclic_reduce,
    format_word,
    free_reduce,
    inverse,
    is_conjugate,
    multiply,
    normal_form,
    oriented_key,
    parse_word,
    unoriented_key,
)

N = 5
letters = st.integers(1, N).flatmap(lambda i: st.sampled_from([i, -i]))
words = st.lists(letters, max_size=14).map(tuple)


@given(words)
def test_free_reduce_is_idempotent_and_reduced(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    assert all(a != -b for a, b in zip(r, r[1:]))


@given(words, words)
def test_inverse_cancels(u, w):
    assert multiply(u, inverse(u)) == ()
    assert inverse(multiply(u, w)) == multiply(inverse(w), inverse(u))


@given(words)
def test_format_parse_roundtrip(w):
    assert parse_word(format_word(w)) == w


@given(words, words)
def test_conjugator_returns_witness(w, g):
    u = multiply(g, w, inverse(g))
    t = conjugator(w, u)
    assert t is not None
    assert multiply(t, w, inverse(t)) == free_reduce(u)
    assert oriented_key(w) == oriented_key(u)
    assert is_conjugate(w, u)


@given(words)
def test_unoriented_key_ignores_orientation(w):
    assert unoriented_key(w) == unoriented_key(inverse(w))


@given(words)
def test_cyclic_reduce_splits(w):
    r = free_reduce(w)
    c, core = cyclic_reduce(r)
    assert multiply(c, core, inverse(c)) == r
    assert len(core) < 2 or core[0] != -core[-1]


@given(words)
def test_normal_form_drops_last_generator(w):
    nf = normal_form(w, N)
    assert all(abs(a) < N for a in nf)
    # x_n = (x_1 ... x_{n-1})^-1, so the full product is trivial
    assert normal_form(tuple(range(1, N + 1)), N) == ()
    assert normal_form(nf, N) == nf


def test_not_conjugate():
    assert conjugator((1,), (2,)) is None
    assert conjugator((1, 2), (1, -2)) is None


def test_parse_errors():
    with pytest.raises(WordSyntaxError):
        parse_word("x1y2")
    with pytest.raises(WordSyntaxError):
        parse_word("x0")
    with pytest.raises(WordSyntaxError):
        parse_word("x7", n=4)
    assert parse_word("") == ()


def test_marked_sphere():
    S = MarkedSphere(("a", "b", "c", "d"))
    assert S.n == 4 and S.index("c") == 3
    assert S.generator(4) == (-3, -2, -1)
    assert block_word(2, 3) == (2, 3)
    with pytest.raises(ValueError):
        MarkedSphere(("a", "b"))
    with pytest.raises(ValueError):
        MarkedSphere(("a", "a", "b"))
