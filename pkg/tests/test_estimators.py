import numpy as np
import pytest
from sklearn.base import clone

from trifree.estimators import ScalingExponent, TriangleFreenessTester
from trifree.instance_gen import PartitionStrategy, gen_bipartite_random, gen_disjoint_triangles, partition_edges
from trifree.validation import check_fraction, check_instances, check_points, check_positive_int


def test_tester_params_round_trip():
    t = TriangleFreenessTester(protocol="sim_low", k=3)
    assert t.get_params()["k"] == 3
    assert clone(t).get_params() == t.get_params()
    assert t.set_params(delta=0.2).delta == 0.2


def test_tester_predicts():
    graphs = [gen_disjoint_triangles(100, seed=1), gen_bipartite_random(300, 4, seed=1)]
    t = TriangleFreenessTester(protocol="sim_low").fit()
    assert t.predict(graphs).tolist() == [1, 0]
    assert (t.bits_ > 0).all()


def test_tester_accepts_partitions():
    g = gen_disjoint_triangles(100, seed=2)
    p = partition_edges(g, PartitionStrategy("round_robin", 5))
    assert TriangleFreenessTester(protocol="sim_high").fit().predict(p).tolist() == [1]


@pytest.mark.parametrize("bad", [dict(epsilon=0), dict(delta=1), dict(k=0), dict(protocol="x"),
                                 dict(partition="x")])
def test_tester_validates(bad):
    with pytest.raises(ValueError):
        TriangleFreenessTester(**bad).fit()


def test_tester_requires_fit():
    with pytest.raises(Exception):
        TriangleFreenessTester().predict([gen_disjoint_triangles(1)])


def test_scaling_exponent():
    ns = 2.0 ** np.arange(6, 12)
    est = ScalingExponent().fit(ns, 3 * ns ** 0.75)
    assert est.slope_ == pytest.approx(0.75)
    assert est.predict([2 ** 20])[0] == pytest.approx(3 * 2 ** 15)


def test_validation_helpers():
    assert check_fraction(1.0, "eps", closed_right=True) == 1.0
    with pytest.raises(ValueError):
        check_fraction(1.0, "delta")
    with pytest.raises(TypeError):
        check_fraction("a", "delta")
    assert check_positive_int(3, "k") == 3
    with pytest.raises(TypeError):
        check_instances([1])
    with pytest.raises(ValueError):
        check_points([1, 2], [1])
