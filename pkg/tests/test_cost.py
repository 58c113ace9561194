import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherepath.augment import RngStream, augment
from spherepath.cost import cosine_logcost, cost_matrix, diag_logcost, inner_logcost
from spherepath.errors import DegenerateInputError, InvalidDimensionError
from spherepath.model import AugmentedSet, CostKind, CostMatrix, ObservationMatrix
from spherepath.path import heuristic_path


def test_inner_logcost_examples():
    assert inner_logcost([1.0, 0.0], [0.0, 3.0]) == 0.0
    assert inner_logcost([2.0, 0.0], [1.0, 0.0]) == -1.0
    assert np.exp(inner_logcost([2.0, 0.0], [1.0, 0.0])) == pytest.approx(0.3679, abs=1e-4)
    assert inner_logcost([0.0, 0.0], [0.0, 0.0]) == 0.0
    with pytest.raises(InvalidDimensionError):
        inner_logcost([1.0], [1.0, 2.0])


def test_diag_logcost_examples():
    assert diag_logcost([0.0, 0.0], [5.0, 1.0]) == 0.0
    assert diag_logcost([1.0, 1.0], [1.0, 1.0]) == -1.0
    assert diag_logcost([1.0, 2.0], [2.0, 1.0]) == -4.0


def test_cosine_logcost_examples():
    assert cosine_logcost([2.0, 0.0], [1.0, 0.0]) == -1.0
    assert cosine_logcost([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine_logcost([1.0, 1.0], [1.0, 0.0]) == pytest.approx(-0.5)
    with pytest.raises(DegenerateInputError):
        cosine_logcost([0.0, 0.0], [1.0, 0.0])


def test_cost_matrix_single_observation():
    aug = augment(ObservationMatrix([[1.0, 0.0]]), RngStream(0))
    cm = cost_matrix(aug)
    assert cm.logcost.shape == (2, 2)
    assert cm.forbidden.all()


@pytest.mark.parametrize("kind,kernel", [
    (CostKind.INNER_PRODUCT, inner_logcost),
    (CostKind.SQUARED_COORDINATE, diag_logcost),
    (CostKind.COSINE, cosine_logcost),
])
def test_cost_matrix_matches_scalar_kernels(kind, kernel):
    g = np.random.default_rng(5)
    for n, d in ((2, 3), (6, 17)):
        aug = augment(ObservationMatrix(g.standard_normal((n, d))), RngStream(1))
        cm = cost_matrix(aug, kind)
        z = aug.nodes
        for i in range(2 * n):
            for j in range(2 * n):
                if not cm.forbidden[i, j]:
                    assert cm.logcost[i, j] == pytest.approx(kernel(z[i], z[j]), rel=1e-12, abs=1e-15)
        assert np.array_equal(cm.logcost, cm.logcost.T)


def test_cosine_matrix_names_zero_node():
    base = ObservationMatrix([[1.0, 0.0], [0.0, 0.0]])
    aug = AugmentedSet(base, [[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(DegenerateInputError, match="node 2"):
        cost_matrix(aug, CostKind.COSINE)


@given(st.integers(2, 15), st.integers(1, 20), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_heuristic_depends_only_on_abs_inner_product_order(n, d, seed):
    g = np.random.default_rng(seed)
    aug = augment(ObservationMatrix(g.standard_normal((n, d))), RngStream(seed))
    path = heuristic_path(cost_matrix(aug))
    # a different strictly decreasing transform of |z_i . z_j| gives the same path
    z = aug.nodes
    raw = np.abs(z @ z.T)
    lc = -np.sqrt(raw)
    lc = np.triu(lc, 1) + np.triu(lc, 1).T
    assert heuristic_path(CostMatrix(lc, CostKind.INNER_PRODUCT)) == path


def test_diag_kernel_scale_covariance():
    g = np.random.default_rng(3)
    data = g.standard_normal((8, 6))
    aug = augment(ObservationMatrix(data), RngStream(4))
    scaled = AugmentedSet(ObservationMatrix(2.0 * data), 2.0 * aug.variants)
    a = cost_matrix(aug, CostKind.SQUARED_COORDINATE)
    b = cost_matrix(scaled, CostKind.SQUARED_COORDINATE)
    assert np.allclose(b.logcost, 16.0 * a.logcost, rtol=1e-12)
    assert heuristic_path(a) == heuristic_path(b)
