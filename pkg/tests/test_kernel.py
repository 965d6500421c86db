"""Kernel scalars, multi-index combinatorics and signed corner sums."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvolume.kernel import (
    Box,
    GridSolution,
    ONE,
    SymmetricLevelValues,
    THREE_LEVEL,
    TWO_LEVEL,
    ZERO,
    adjacent_pairs,
    frechet_lower,
    frechet_upper,
    multi_indices,
    one_norm,
    parse_rational,
    q_volume,
    rational,
    rational_str,
    sign_of,
)

R = rational


class TestRational:
    def test_wire_format(self):
        assert rational_str(R(1, 2)) == "1/2"
        assert rational_str(R(-6, 4)) == "-3/2"
        assert rational_str(R(7, 1)) == "7"
        assert rational_str(R(0)) == "0"

    def test_parse(self):
        assert parse_rational("3/7") == R(3, 7)
        assert parse_rational("-10/4") == R(-5, 2)
        assert parse_rational("42") == R(42)

    @pytest.mark.parametrize("bad", ["1.5", "1/0", "1/-2", "a/b", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_rational(bad)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            rational(0.5)

    @settings(max_examples=100, derandomize=True)
    @given(st.integers(-10**30, 10**30), st.integers(1, 10**30))
    def test_roundtrip(self, p, q):
        value = R(p, q)
        assert parse_rational(rational_str(value)) == value
        # renormalization is idempotent
        assert R(value) == value

    def test_exactness(self):
        # 1/3 + 1/3 + 1/3 is exactly 1; never true in binary floating point
        third = R(1, 3)
        assert third + third + third == ONE


class TestMultiIndex:
    def test_sign_examples(self):
        assert sign_of((1, 1)) == 1
        assert sign_of((1, 0)) == -1
        assert sign_of((0, 1, 0)) == 1

    @pytest.mark.parametrize("d", range(1, 8))
    def test_sign_alternating_sum_vanishes(self, d):
        assert sum(sign_of(index) for index in multi_indices(d, 1)) == 0

    def test_lexicographic_order(self):
        indices = list(multi_indices(2, 1))
        assert indices == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert sorted(indices) == indices

    @pytest.mark.parametrize("d", range(2, 7))
    @pytest.mark.parametrize("s", (1, 2))
    def test_adjacent_pair_count(self, d, s):
        pairs = list(adjacent_pairs(d, s))
        assert len(pairs) == d * s * (s + 1) ** (d - 1)
        # oracle: re-enumerate by brute force over all index pairs
        all_indices = list(multi_indices(d, s))
        brute = {
            (lo, hi, axis)
            for lo in all_indices
            for hi in all_indices
            for axis in range(d)
            if all(
                hi[k] - lo[k] == (1 if k == axis else 0) for k in range(d)
            )
        }
        assert set(pairs) == brute

    def test_square_edges(self):
        pairs = list(adjacent_pairs(2, 1))
        assert len(pairs) == 4
        assert ((0, 0), (1, 0), 0) in pairs
        assert ((0, 0), (0, 1), 1) in pairs
        assert ((0, 1), (1, 1), 0) in pairs
        assert ((1, 0), (1, 1), 1) in pairs

    def test_one_norm(self):
        assert one_norm((0, 2, 1)) == 3


class TestFrechet:
    def test_lower(self):
        assert frechet_lower((R(2, 5), R(2, 5), R(2, 5))) == R(-4, 5)

    def test_upper(self):
        point = (R(8, 13), R(12, 13), ONE, ONE, ONE)
        assert frechet_upper(point) == R(8, 13)

    def test_lower_matches_all_b_vertex_value(self):
        # G at the all-b vertex of the d=5 minimal row: 5*(12/13) - 4 = 8/13
        assert frechet_lower((R(12, 13),) * 5) == R(8, 13)


class TestQVolume:
    def test_d2_table_row(self):
        corners = {
            (0, 0): ZERO,
            (1, 0): R(1, 3),
            (0, 1): R(1, 3),
            (1, 1): R(1, 3),
        }
        assert q_volume(corners) == R(-1, 3)

    def test_constant_telescopes(self):
        corners = {index: R(2, 7) for index in multi_indices(4, 1)}
        assert q_volume(corners) == ZERO

    def test_d5_binomial_expansion(self):
        level = [ZERO, ZERO, R(4, 13), R(4, 13), R(8, 13), R(8, 13)]
        corners = {
            index: level[one_norm(index)] for index in multi_indices(5, 1)
        }
        assert q_volume(corners) == R(-32, 13)

    def test_missing_corner(self):
        corners = {index: ZERO for index in multi_indices(2, 1)}
        del corners[(1, 0)]
        with pytest.raises(KeyError):
            q_volume(corners)

    @settings(max_examples=40, derandomize=True)
    @given(st.data())
    def test_additivity_under_axis_split(self, data):
        """Splitting a box at an interior cut and summing equals the whole."""
        d = data.draw(st.integers(2, 3))
        axis = data.draw(st.integers(0, d - 1))
        rat = st.builds(
            R, st.integers(0, 64), st.integers(1, 64).map(lambda x: x + 64)
        )
        # arbitrary values on the 3 x 2^(d-1) vertex set of the split pair
        values = {}
        for index in multi_indices(d, 1):
            for mid in (0, 1, 2):
                key = index[:axis] + (mid,) + index[axis + 1 :]
                values.setdefault(key, data.draw(rat))
        def volume(lo, hi):
            return q_volume(
                {
                    index: values[
                        index[:axis] + (hi if index[axis] else lo,) + index[axis + 1 :]
                    ]
                    for index in multi_indices(d, 1)
                }
            )
        assert volume(0, 2) == volume(0, 1) + volume(1, 2)


class TestBox:
    def test_validation(self):
        with pytest.raises(ValueError):
            Box((R(2, 3),), (R(1, 3),))
        with pytest.raises(ValueError):
            Box((R(-1, 3),), (R(1, 3),))
        with pytest.raises(ValueError):
            Box((ZERO,), (R(3, 2),))

    def test_strictness_flag(self):
        assert Box((ZERO, ZERO), (ONE, ONE)).is_strict
        assert not Box((ZERO, R(1, 2)), (ONE, R(1, 2))).is_strict

    def test_corner_and_volume(self):
        box = Box((R(1, 3), R(1, 4)), (R(2, 3), ONE))
        assert box.corner((0, 1)) == (R(1, 3), ONE)
        assert box.lebesgue() == R(1, 4)

    def test_json_roundtrip(self):
        box = Box((R(1, 3), ZERO), (R(2, 3), ONE))
        assert Box.from_json(box.to_json()) == box


class TestGridSolution:
    def _simple(self):
        values = {
            (0, 0): ZERO,
            (0, 1): R(1, 3),
            (1, 0): R(1, 3),
            (1, 1): R(1, 3),
        }
        return GridSolution(2, TWO_LEVEL, (R(1, 3),) * 2, (R(2, 3),) * 2, values)

    def test_vertices(self):
        sol = self._simple()
        assert sol.vertex((0, 1)) == (R(1, 3), R(2, 3))
        assert sol.inner_volume() == R(-1, 3)

    def test_three_level_vertex(self):
        table = {c: ZERO for c in SymmetricLevelValues._compositions(2, 3)}
        table[(0, 0, 2)] = ONE
        table[(0, 1, 1)] = R(2, 3)
        table[(1, 0, 1)] = R(1, 3)
        sol = GridSolution(
            2,
            THREE_LEVEL,
            (R(1, 3),) * 2,
            (R(2, 3),) * 2,
            SymmetricLevelValues(2, 2, table),
        )
        assert sol.vertex((1, 2)) == (R(2, 3), ONE)
        assert sol.value((1, 2)) == R(2, 3)

    def test_total_value_map_required(self):
        values = {(0, 0): ZERO, (1, 1): ONE}
        with pytest.raises(ValueError):
            GridSolution(2, TWO_LEVEL, (ZERO,) * 2, (ONE,) * 2, values)

    def test_values_within_unit_interval(self):
        values = {
            (0, 0): ZERO,
            (0, 1): R(3, 2),
            (1, 0): ZERO,
            (1, 1): ONE,
        }
        with pytest.raises(ValueError):
            GridSolution(2, TWO_LEVEL, (ZERO,) * 2, (ONE,) * 2, values)

    def test_json_roundtrip_dense_and_symmetric(self):
        sol = self._simple()
        again = GridSolution.from_json(sol.to_json())
        assert again.value((1, 0)) == R(1, 3)

        table = {(2 - k, k): [ZERO, R(1, 2), ONE][k] for k in range(3)}
        sym = GridSolution(
            2,
            TWO_LEVEL,
            (R(1, 2),) * 2,
            (ONE,) * 2,
            SymmetricLevelValues(2, 1, table),
        )
        again = GridSolution.from_json(sym.to_json())
        assert again.is_symmetric
        assert again.value((0, 1)) == R(1, 2)

    def test_symmetry_detection(self):
        assert not self._simple().is_symmetric
        table = {(2 - k, k): [ZERO, R(1, 3), R(1, 3)][k] for k in range(3)}
        sym = GridSolution(
            2,
            TWO_LEVEL,
            (R(1, 3),) * 2,
            (R(2, 3),) * 2,
            SymmetricLevelValues(2, 1, table),
        )
        assert sym.is_symmetric
