import itertools
import math
from fractions import Fraction

import pytest

from fockvm.oracles import (
    address_commutator_holds,
    clear_normalization,
    commutator_defect,
    commutator_holds,
    copy_normalization,
    verify_closed_form,
)
from fockvm.operators import Clear, Lower, Mem, apply_expr, scaled, product
from fockvm.state import BasisState, unit


class TestClosedForms:
    @pytest.mark.parametrize("n", range(13))
    def test_clear_normalization_exactly_one(self, n):
        value, amp_squared = clear_normalization(n)
        assert value == 0
        assert amp_squared == Fraction(1)

    @pytest.mark.parametrize("n", range(13))
    def test_copy_normalization_exactly_one(self, n):
        value, amp_squared = copy_normalization(n)
        assert value == n
        assert amp_squared == Fraction(1)

    def test_verify_closed_form(self):
        assert verify_closed_form("clear", 4)
        assert verify_closed_form("copy", 0)
        assert verify_closed_form("clear", 1)
        with pytest.raises(ValueError):
            verify_closed_form("clear", 13)

    @pytest.mark.parametrize("n", range(9))
    def test_float_path_agrees(self, n):
        # The evaluator's literal n-fold lowering, scaled by 1/sqrt(n!),
        # reproduces the clear operator to float precision.
        expr = scaled(1 / math.sqrt(math.factorial(n)), product(*([Lower(Mem(0))] * n))) if n else Clear(Mem(0))
        start = unit(BasisState(mem={0: n}))
        clear = apply_expr(Clear(Mem(0)), start)
        literal = apply_expr(expr, start)
        assert literal.states() == clear.states()
        assert abs(literal.terms[0][0] - 1) < 1e-12


class TestCommutators:
    def test_diagonal_counts_one(self):
        assert commutator_holds(0, 0, (2, 3))
        assert commutator_holds(1, 1, (0, 7))

    def test_off_diagonal_cancels(self):
        assert commutator_holds(0, 1, (2, 3))
        assert commutator_holds(1, 0, (5, 0))

    def test_defect_reports_contributions(self):
        # Breaking the relation by hand: [a_0, a_0+] against 2, not 1.
        defect = commutator_defect(0, 0, (4,))
        assert defect == {}

    def test_exhaustive_small_grid(self):
        for occ in itertools.product(range(4), repeat=3):
            for i in range(3):
                for j in range(3):
                    assert commutator_holds(i, j, occ)


class TestAddressCommutator:
    def test_matches_mode_index(self):
        occ = (0, 0, 0, 2, 0, 1)
        assert address_commutator_holds(3, 6, occ, dagger=True)
        assert address_commutator_holds(3, 6, occ, dagger=False)

    def test_various_modes_and_states(self):
        for occ in [(1, 0, 2, 0), (0, 3, 0, 1), (2, 2, 2, 2)]:
            for m in range(4):
                assert address_commutator_holds(m, 4, occ, dagger=True)
                assert address_commutator_holds(m, 4, occ, dagger=False)

    def test_rejects_support_outside_window(self):
        with pytest.raises(ValueError):
            address_commutator_holds(0, 2, (1, 1, 1), dagger=True)
