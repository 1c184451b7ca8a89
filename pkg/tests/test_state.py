import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockvm.errors import EmptyState, ParseError
from fockvm.state import (
    BasisState,
    deserialize,
    inner_product,
    merge,
    probabilities,
    round_significant,
    sample,
    serialize,
    unit,
)

S = BasisState(register=1, mem={3: 4})
S1 = BasisState(register=1)
S2 = BasisState(register=2)


def snapped(x: float) -> float:
    return round_significant(x)


amplitudes = st.builds(
    complex,
    st.floats(-2, 2, allow_nan=False).map(snapped),
    st.floats(-2, 2, allow_nan=False).map(snapped),
)

states = st.builds(
    BasisState,
    register=st.integers(0, 5),
    pc=st.integers(0, 5),
    fuel=st.integers(0, 3),
    mem=st.dictionaries(st.integers(0, 6), st.integers(0, 9), max_size=3),
    input=st.lists(st.integers(0, 9), max_size=2).map(tuple),
    output=st.lists(st.integers(0, 9), max_size=2).map(tuple),
)

# Unique states keep merge from summing amplitudes, so the generated
# superpositions stay representable at 12 significant digits.
superpositions = st.dictionaries(states, amplitudes, max_size=5).map(
    lambda d: merge([(amp, s) for s, amp in d.items()])
)


class TestBasisState:
    def test_mem_drops_zeros_and_sorts(self):
        s = BasisState(mem={5: 0, 2: 7, 9: 1})
        assert s.mem == ((2, 7), (9, 1))
        assert s.mem_value(5) == 0
        assert s.mem_value(2) == 7

    def test_equality_ignores_zero_entries(self):
        assert BasisState(mem={1: 0}) == BasisState()

    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            BasisState(register=-1)
        with pytest.raises(ValueError):
            BasisState(mem={0: -2})

    def test_canonical_ordering_is_field_lexicographic(self):
        assert BasisState(register=0, pc=9) < BasisState(register=1)
        assert BasisState(mem={0: 1}) < BasisState(mem={0: 2})

    def test_pop_input(self):
        s = BasisState(input=(4, 5))
        value, rest = s.pop_input()
        assert value == 4 and rest.input == (5,)


class TestMerge:
    def test_exact_cancellation(self):
        assert merge([(1, S), (-1, S)]).terms == ()

    def test_distinct_states_unchanged(self):
        out = merge([(0.6, S1), (0.8, S2)])
        assert len(out) == 2
        assert out.amplitude(S1) == 0.6 and out.amplitude(S2) == 0.8

    def test_amplitude_addition(self):
        out = merge([(0.5, S), (0.5, S)])
        assert out.terms == ((1.0 + 0j, S),)

    def test_drop_tolerance_configurable(self):
        tiny = merge([(1e-13, S)])
        assert not tiny
        kept = merge([(1e-13, S)], drop_tolerance=1e-15)
        assert len(kept) == 1

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            merge([(complex("inf"), S)])

    @given(st.lists(st.tuples(amplitudes, states), max_size=6))
    def test_idempotent(self, terms):
        once = merge(terms)
        assert merge(once.terms) == once


class TestInnerProduct:
    def test_orthonormality(self):
        assert inner_product(unit(S), unit(S)) == 1
        assert inner_product(unit(S1), unit(S2)) == 0

    def test_pythagorean(self):
        v = merge([(0.6, S1), (0.8, S2)])
        assert inner_product(v, v) == pytest.approx(1.0, abs=1e-14)

    @given(superpositions)
    def test_self_product_is_norm_squared(self, v):
        ip = inner_product(v, v)
        assert ip.imag == 0
        assert ip.real >= 0
        assert abs(ip.real - v.norm_squared()) <= 1e-14

    @given(superpositions, superpositions)
    def test_conjugate_symmetry(self, a, b):
        assert inner_product(a, b) == pytest.approx(inner_product(b, a).conjugate(), abs=1e-12)


class TestProbabilities:
    def test_modulus_squared(self):
        v = merge([(1 / math.sqrt(3), S1), (math.sqrt(2 / 3), S2)])
        probs = probabilities(v)
        assert probs[S1] == pytest.approx(1 / 3, abs=1e-12)
        assert probs[S2] == pytest.approx(2 / 3, abs=1e-12)

    def test_single_term_normalizes(self):
        assert probabilities(merge([(0.3 - 0.4j, S)])) == {S: 1.0}

    def test_series_amplitudes(self):
        t = 0.1
        terms = [
            ((-1j * t) ** n / math.factorial(n), BasisState(mem={n: 1}))
            for n in range(9)
        ]
        probs = probabilities(merge(terms, drop_tolerance=0))
        total = sum((t**n / math.factorial(n)) ** 2 for n in range(9))
        for n in range(9):
            expected = (t**n / math.factorial(n)) ** 2 / total
            assert probs[BasisState(mem={n: 1})] == pytest.approx(expected, rel=1e-12)

    def test_empty_state_error(self):
        with pytest.raises(EmptyState):
            probabilities(merge([]))

    @given(superpositions.filter(bool))
    def test_sums_to_one(self, v):
        assert sum(probabilities(v).values()) == pytest.approx(1.0, abs=1e-12)


class TestSample:
    def test_single_state_gets_everything(self):
        assert sample(unit(S), 100, seed=0) == {S: 100}

    def test_zero_count(self):
        assert sample(unit(S), 0, seed=0) == {}

    def test_counts_sum(self):
        v = merge([(0.5, S1), (math.sqrt(0.75), S2)])
        counts = sample(v, 1000, seed=3)
        assert sum(counts.values()) == 1000

    def test_binomial_four_sigma(self):
        v = merge([(0.5, S1), (math.sqrt(0.75), S2)])
        counts = sample(v, 10_000, seed=11)
        sigma = math.sqrt(10_000 * 0.25 * 0.75)
        assert abs(counts.get(S1, 0) - 2500) <= 4 * sigma

    def test_deterministic_per_seed(self):
        v = merge([(0.5, S1), (math.sqrt(0.75), S2)])
        assert sample(v, 500, seed=9) == sample(v, 500, seed=9)
        with pytest.raises(EmptyState):
            sample(merge([]), 10, seed=0)


class TestSerialization:
    def test_empty_round_trip(self):
        assert serialize(merge([])) == "[]"
        assert deserialize("[]") == merge([])

    def test_single_term_bit_exact(self):
        term = merge([(0.75 - 0.25j, BasisState(register=2, mem={1: 3}, input=(7,), output=(9,)))])
        assert deserialize(serialize(term)) == term

    def test_deterministic_text(self):
        v = merge([(0.6, S1), (0.8, S2)])
        assert serialize(v) == serialize(merge(list(reversed(v.terms))))

    @given(superpositions)
    @settings(max_examples=150)
    def test_round_trip_identity(self, v):
        assert deserialize(serialize(v)) == v

    @given(superpositions)
    def test_serialize_of_parse_is_identity(self, v):
        text = serialize(v)
        assert serialize(deserialize(text)) == text

    def test_parse_error_has_position(self):
        with pytest.raises(ParseError) as err:
            deserialize("[{bad json\n}]")
        assert err.value.line is not None and err.value.column is not None

    def test_schema_errors(self):
        with pytest.raises(ParseError):
            deserialize('[{"amplitude": [1.0], "register": 0}]')
        with pytest.raises(ParseError):
            deserialize('[{"amplitude": [1.0, 0.0], "register": -3}]')
        with pytest.raises(ParseError):
            deserialize('[{"amplitude": [1.0, 0.0], "mem": {"x": 1}}]')
