"""Feasibility predicate, constructive oracle and region enumeration."""

import numpy as np
import pytest

from cogia.dof import (
    closed_form_feasible,
    constructive_check,
    enumerate_region,
    grid_size,
    grid_tuples,
    projected_frontier,
)
from cogia.errors import GridTooLarge
from cogia.scenario import NetworkDims, StreamAlloc, derive_seed


class TestClosedForm:
    def test_reference_split_feasible(self):
        assert closed_form_feasible(NetworkDims(5, 5, 5, 3), StreamAlloc(1, 0, 2, 2)).feasible

    def test_secondary_bound(self):
        verdict = closed_form_feasible(NetworkDims(5, 5, 5, 3), StreamAlloc(0, 0, 3, 0))
        assert not verdict.feasible
        assert any(v.condition == "d_S1 <= M_S - N_S" and v.origin == "structural" for v in verdict.violated)

    def test_receiver_dimension_count(self):
        verdict = closed_form_feasible(NetworkDims(5, 5, 5, 3), StreamAlloc(2, 0, 2, 2))
        assert not verdict.feasible
        assert any(v.origin == "derived" for v in verdict.violated)

    def test_zero_alloc_always_feasible(self):
        for dims in (NetworkDims(1, 1, 1, 1), NetworkDims(3, 2, 5, 4)):
            assert closed_form_feasible(dims, StreamAlloc(0, 0, 0, 0)).feasible

    def test_correction_condition(self):
        # d_P1 = 1 > Z = 0 and M_S < N_P: corrections impossible
        verdict = closed_form_feasible(NetworkDims(3, 2, 3, 1), StreamAlloc(1, 0, 0, 0))
        assert not verdict.feasible
        assert any("M_S >= N_P" in v.condition for v in verdict.violated)

    def test_monotone_under_coordinatewise_decrease(self):
        dims = NetworkDims(5, 4, 4, 2)
        for t in grid_tuples(dims):
            if not closed_form_feasible(dims, t).feasible:
                continue
            smaller = StreamAlloc(max(t.d_P1 - 1, 0), t.d_P2, t.d_S1, max(t.d_S2 - 1, 0))
            assert closed_form_feasible(dims, smaller).feasible


class TestConstructiveCheck:
    def test_zero_alloc_vacuous(self):
        assert constructive_check(NetworkDims(2, 2, 2, 2), StreamAlloc(0, 0, 0, 0), trials=2).feasible

    def test_reference_split(self):
        verdict = constructive_check(NetworkDims(5, 5, 5, 3), StreamAlloc(1, 0, 2, 2), trials=20, seed=5)
        assert verdict.feasible

    def test_no_headroom_infeasible(self):
        verdict = constructive_check(NetworkDims(3, 3, 3, 3), StreamAlloc(0, 0, 1, 1), trials=5)
        assert not verdict.feasible
        assert verdict.violated[0].origin == "constructive"

    def test_agrees_with_closed_form_sampled_dims(self):
        # full agreement on every tuple for a handful of quartets
        for dims_tuple in ((3, 4, 2, 2), (4, 3, 3, 1), (2, 5, 4, 2), (5, 5, 5, 3)):
            dims = NetworkDims(*dims_tuple)
            for t in grid_tuples(dims):
                cf = closed_form_feasible(dims, t).feasible
                cc = constructive_check(dims, t, trials=5, seed=derive_seed(9, *t.as_tuple())).feasible
                assert cf == cc, f"dims {dims_tuple}, tuple {t.as_tuple()}: closed {cf}, constructive {cc}"

    def test_bound_sharpness(self):
        # construction succeeds exactly up to the antenna-difference bound
        for dims_tuple in ((5, 5, 5, 3), (4, 6, 4, 3), (3, 4, 3, 2)):
            dims = NetworkDims(*dims_tuple)
            k = max(dims.M_S - dims.N_S, 0)
            if 1 <= k <= dims.N_S:
                at_bound = StreamAlloc(0, 0, k, 0)
                assert constructive_check(dims, at_bound, trials=10, seed=1).feasible
            beyond = StreamAlloc(0, 0, k + 1, 0)
            assert not constructive_check(dims, beyond, trials=10, seed=1).feasible

    def test_bound_sharpness_hundred_seeds(self):
        dims = NetworkDims(5, 5, 5, 3)  # M_S - N_S = 2
        assert constructive_check(dims, StreamAlloc(0, 0, 2, 2), trials=100, seed=8).feasible
        assert not constructive_check(dims, StreamAlloc(0, 0, 3, 2), trials=100, seed=8).feasible


class TestRegion:
    def test_collapsed_secondary_axis(self):
        region = enumerate_region(NetworkDims(3, 3, 3, 3))
        assert region.points
        assert all(p.d_S1 == 0 and p.d_S2 == 0 for p in region.points)

    def test_reference_network_region(self):
        region = enumerate_region(NetworkDims(5, 5, 5, 3))
        ds_sums = [p.d_S1 + p.d_S2 for p in region.points]
        assert max(ds_sums) == 4
        for p in region.points:
            if p.d_S1 + p.d_S2 == 4:
                assert p.d_P1 <= 1 and p.d_P2 <= 1

    def test_frontier_is_antichain(self):
        region = enumerate_region(NetworkDims(5, 5, 5, 3))
        frontier = [np.array(p.as_tuple()) for p in region.frontier]
        for i, a in enumerate(frontier):
            for j, b in enumerate(frontier):
                if i != j:
                    assert not (np.all(a >= b) and np.any(a > b))
        assert set(region.frontier) <= set(region.points)

    def test_modes_agree(self):
        dims = NetworkDims(3, 3, 2, 1)
        closed = enumerate_region(dims, mode="closed_form")
        constructive = enumerate_region(dims, mode="constructive", seed=3, trials=5)
        assert closed.points == constructive.points

    def test_grid_cap(self):
        with pytest.raises(GridTooLarge):
            enumerate_region(NetworkDims(16, 16, 1, 1), cap=10_000)
        assert grid_size(NetworkDims(16, 16, 1, 1)) == 17**4

    def test_projection(self):
        region = enumerate_region(NetworkDims(5, 5, 5, 3))
        proj = projected_frontier(region)
        # with no secondary streams the corrections cancel every cross-user
        # term, so both primary users reach all N_P receive dimensions
        assert proj[0] == (0, 10)
        assert dict(proj)[4] == 2
        assert [p[0] for p in proj] == sorted(p[0] for p in proj)
