"""Construction, validation, orders, sublevels, and the file format."""

from __future__ import annotations

import math
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acyclekit.complexes import (
    Chain,
    SimplicialComplex,
    boundary_chain,
    build_complex,
    complete_skeleton,
    dumps_complex,
    loads_complex,
    sublevel_complex,
    total_order,
)
from acyclekit.errors import (
    MalformedFaceError,
    MissingFaceError,
    MissingWeightError,
    NonMonotoneWeightsError,
    ValidationError,
)


class TestBuildComplex:
    def test_triangle_closure(self):
        K = build_complex([(1, 2, 3)])
        assert K.f_vector() == {0: 3, 1: 3, 2: 1}

    def test_empty(self):
        K = build_complex([])
        assert K.f_vector() == {}
        assert K.dim == -1

    def test_path(self):
        K = build_complex([(1, 2), (2, 3)])
        assert K.f_vector() == {0: 3, 1: 2}

    def test_idempotent(self):
        K = build_complex([(1, 2, 3), (3, 4)])
        again = build_complex(list(K.all_faces()))
        assert K == again

    def test_duplicate_vertex_rejected(self):
        with pytest.raises(MalformedFaceError):
            build_complex([(1, 1, 2)])

    def test_negative_vertex_rejected(self):
        with pytest.raises(MalformedFaceError):
            build_complex([(-1, 2)])

    def test_unsorted_input_normalized(self):
        K = build_complex([(3, 1, 2)])
        assert (1, 2, 3) in K

    def test_closure_property_by_enumeration(self):
        K = build_complex([(1, 2, 3, 4), (4, 5, 6)])
        for d in K.f_vector():
            for f in K.faces(d):
                for k in range(1, len(f)):
                    for sub in combinations(f, k):
                        assert sub in K

    def test_missing_subface_detected(self):
        with pytest.raises(MissingFaceError):
            SimplicialComplex({1: [(1, 2)]})


class TestCompleteSkeleton:
    def test_k3(self):
        K = complete_skeleton(3, 1)
        assert K.f_vector() == {0: 3, 1: 3}

    def test_tetra_counts(self):
        K = complete_skeleton(4, 2)
        assert K.f_vector() == {0: 4, 1: 6, 2: 4}

    def test_binomials(self):
        K = complete_skeleton(5, 2)
        assert K.f(2) == 10

    @pytest.mark.parametrize("n,d", [(3, 5), (2, 3)])
    def test_top_dimension_clipped_not_error(self, n, d):
        K = complete_skeleton(n, d)
        assert K.dim == n - 1

    def test_invalid(self):
        with pytest.raises(ValidationError):
            complete_skeleton(0, 1)


class TestBoundaryChain:
    def test_triangle(self):
        c = boundary_chain((1, 2, 3))
        assert c.support == frozenset({(2, 3), (1, 3), (1, 2)})

    def test_edge(self):
        assert boundary_chain((1, 2)).support == frozenset({(1,), (2,)})

    def test_vertex_hits_augmentation(self):
        c = boundary_chain((7,))
        assert c.dim == -1 and c.support == frozenset({()})

    def test_boundary_of_boundary_is_zero(self):
        assert boundary_chain((1, 2, 3)).boundary().is_zero()

    def test_boundary_squared_on_random_complexes(self):
        K = build_complex([(1, 2, 3, 4, 5), (2, 4, 6, 7)])
        for d in K.f_vector():
            if d < 1:
                continue
            for f in K.faces(d):
                assert boundary_chain(f).boundary().is_zero()

    def test_chain_addition_is_symmetric_difference(self):
        a = Chain(1, frozenset({(1, 2), (2, 3)}))
        b = Chain(1, frozenset({(2, 3), (3, 4)}))
        assert (a + b).support == frozenset({(1, 2), (3, 4)})


class TestTotalOrder:
    def test_zero_weights_lexicographic(self):
        K = complete_skeleton(3, 1)
        wf = total_order(K, {f: 0.0 for f in K.all_faces()})
        assert wf.order == ((1,), (2,), (3,), (1, 2), (1, 3), (2, 3))

    def test_distinct_weights_sorted(self):
        K = complete_skeleton(3, 1)
        w = {(1,): 0.0, (2,): 0.0, (3,): 0.0, (1, 2): 0.3, (1, 3): 0.1, (2, 3): 0.2}
        wf = total_order(K, w)
        assert wf.faces_in_order(1) == ((1, 3), (2, 3), (1, 2))

    def test_monotonicity_violation_rejected(self):
        K = complete_skeleton(2, 1)
        w = {(1,): 0.5, (2,): 0.0, (1, 2): 0.2}
        with pytest.raises(NonMonotoneWeightsError):
            total_order(K, w)

    def test_missing_weight_rejected(self):
        K = complete_skeleton(2, 1)
        with pytest.raises(MissingWeightError):
            total_order(K, {(1,): 0.0, (2,): 0.0})

    def test_order_refines_weights_and_is_strict(self):
        K = build_complex([(1, 2, 3), (2, 3, 4), (1, 4)])
        w = {f: 0.1 * (len(f) - 1) for f in K.all_faces()}
        wf = total_order(K, w)
        faces = wf.order
        assert len(set(faces)) == len(faces)
        for a, b in combinations(range(len(faces)), 2):
            assert wf.weight(faces[a]) <= wf.weight(faces[b])

    def test_order_pairwise_on_medium_complex(self):
        import numpy as np

        K = complete_skeleton(8, 2)  # 92 faces
        rng = np.random.default_rng(0)
        w = {f: 0.0 for d in (0, 1) for f in K.faces(d)}
        for f in K.faces(2):
            w[f] = float(rng.choice([0.2, 0.5, 0.8]))
        wf = total_order(K, w)
        faces = wf.order
        assert len(faces) == len(K) <= 200
        for i in range(len(faces)):
            for j in range(i + 1, len(faces)):
                assert wf.weight(faces[i]) <= wf.weight(faces[j])
                assert wf.rank(faces[i]) < wf.rank(faces[j])

    def test_faces_precede_cofaces(self):
        K = build_complex([(1, 2, 3, 4)])
        w = {f: float(len(f) - 1) for f in K.all_faces()}
        wf = total_order(K, w)
        for f in K.all_faces():
            if len(f) == 1:
                continue
            for i in range(len(f)):
                assert wf.rank(f[:i] + f[i + 1 :]) < wf.rank(f)

    def test_revlex_differs_but_refines(self):
        K = complete_skeleton(3, 1)
        wf = total_order(K, {f: 0.0 for f in K.all_faces()}, tie_break="revlex")
        assert wf.faces_in_order(1) == ((2, 3), (1, 3), (1, 2))


class TestSublevel:
    def test_partial(self, k3):
        K, wf = k3
        sub = sublevel_complex(K, wf, 0.15)
        assert sub.f_vector() == {0: 3, 1: 1}

    def test_below_everything_empty(self, k3):
        K, wf = k3
        assert sublevel_complex(K, wf, -1.0).f_vector() == {}

    def test_above_everything_full(self, k3):
        K, wf = k3
        assert sublevel_complex(K, wf, math.inf) == K

    def test_sublevels_nested_and_valid(self, k3):
        K, wf = k3
        prev = None
        for t in (-1, 0.05, 0.15, 0.25, 1.0):
            sub = wf.sublevel(t)
            rebuilt = build_complex(list(sub.all_faces()))
            assert rebuilt == sub
            if prev is not None:
                assert set(prev.all_faces()) <= set(sub.all_faces())
            prev = sub


class TestFileFormat:
    def test_roundtrip(self, k3):
        K, wf = k3
        text = dumps_complex(wf)
        back = loads_complex(text)
        assert back.complex == K
        assert all(back.weight(f) == wf.weight(f) for f in K.all_faces())
        assert dumps_complex(back) == text

    def test_comments_and_blank_lines(self):
        text = "# header\n\n0 1 0.0\n0 2 0.0  # trailing\n1 1 2 0.5\n"
        wf = loads_complex(text)
        assert wf.complex.f_vector() == {0: 2, 1: 1}
        assert wf.weight((1, 2)) == 0.5

    def test_missing_subface_is_error(self):
        with pytest.raises(MissingFaceError):
            loads_complex("1 1 2 0.5\n")

    def test_auto_close_zero(self):
        wf = loads_complex("2 1 2 3 0.7\n", auto_close_zero=True)
        assert wf.complex.f_vector() == {0: 3, 1: 3, 2: 1}
        assert wf.weight((1, 2)) == 0.0

    def test_malformed_line(self):
        with pytest.raises(ValidationError):
            loads_complex("1 1 two 0.5\n")

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            loads_complex("2 1 2 0.5\n")


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=4, unique=True),
        min_size=0,
        max_size=6,
    )
)
def test_closure_always_validates(face_list):
    K = build_complex([tuple(f) for f in face_list])
    # re-validating the closure must never raise
    SimplicialComplex({d: K.faces(d) for d in K.f_vector()})
    for d in K.f_vector():
        if d == 0:
            continue
        for f in K.faces(d):
            for i in range(len(f)):
                assert f[:i] + f[i + 1 :] in K
