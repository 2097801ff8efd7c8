import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import pdist, squareform

from wect.analysis import (Dendrogram, adjusted_rand_index, cross_validate, cut, stratified_folds, svm_objective,
                           train_svm, ward_cluster)
from wect.metric import DistanceMatrix

THREE = np.array([[0, 1, 10], [1, 0, 10], [10, 10, 0]], dtype=float)


def test_ward_two_points():
    d = ward_cluster(np.array([[0, 2.5], [2.5, 0]]))
    assert len(d.merges) == 1
    m = d.merges[0]
    assert (m.a, m.b, m.height, m.size) == (0, 1, 2.5, 2)


def test_ward_three_point_hand_example():
    d = ward_cluster(DistanceMatrix(THREE))
    first, second = d.merges
    assert (first.a, first.b, first.height) == (0, 1, 1.0)
    # Lance-Williams: ((1+1)*100 + (1+1)*100 - 1*1) / 3 = 133
    assert (second.a, second.b) == (2, 3)
    assert second.height == pytest.approx(np.sqrt(133), rel=1e-15)
    assert cut(d, 2) == [0, 0, 1]


def test_ward_duplicates_merge_first(rng):
    X = rng.normal(size=(6, 3))
    X[4] = X[1]
    d = ward_cluster(squareform(pdist(X)))
    assert {d.merges[0].a, d.merges[0].b} == {1, 4} and d.merges[0].height == 0


@pytest.mark.parametrize("seed", range(5))
def test_ward_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, 4))
    D = squareform(pdist(X))
    ours = ward_cluster(D).to_linkage()
    ref = linkage(pdist(X), method="ward")
    assert np.allclose(ours[:, 2], ref[:, 2], rtol=1e-10)
    assert np.array_equal(ours[:, 3], ref[:, 3])
    for k in (2, 3, 5):
        from scipy.cluster.hierarchy import fcluster
        theirs = fcluster(ref, k, criterion="maxclust")
        assert adjusted_rand_index(cut(ward_cluster(D), k), theirs) == 1.0


def test_ward_heights_monotone(rng):
    for _ in range(5):
        D = squareform(pdist(rng.normal(size=(30, 5))))
        assert np.all(np.diff(ward_cluster(D).heights()) >= -1e-12)


def test_ward_rejects_bad_input():
    with pytest.raises(ValueError):
        ward_cluster(np.zeros((1, 1)))
    with pytest.raises(ValueError):
        ward_cluster(np.array([[0, 1], [2, 0]]))


def test_cut_extremes_and_partition(rng):
    D = squareform(pdist(rng.normal(size=(12, 2))))
    dend = ward_cluster(D)
    assert cut(dend, 1) == [0] * 12
    assert cut(dend, 12) == list(range(12))
    for k in range(1, 13):
        labels = cut(dend, k)
        assert len(labels) == 12 and len(set(labels)) == k
        # canonical: first occurrences appear in increasing order
        firsts = [labels.index(c) for c in range(k)]
        assert firsts == sorted(firsts)
    with pytest.raises(ValueError):
        cut(dend, 0)
    with pytest.raises(ValueError):
        cut(dend, 13)


def test_dendrogram_json_round_trip(rng):
    dend = ward_cluster(squareform(pdist(rng.normal(size=(5, 2)))))
    assert Dendrogram.from_dict(dend.to_dict()) == dend


def test_ari():
    assert adjusted_rand_index([0, 0, 1, 1], [5, 5, 2, 2]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def separable(rng, n=20):
    a = rng.normal(size=(n, 2)) * 0.5 + [-3, 0]
    b = rng.normal(size=(n, 2)) * 0.5 + [3, 0]
    return np.vstack([a, b]), np.array([0] * n + [1] * n)


@pytest.mark.parametrize("multiclass,rows", [("ovo", 1), ("ovr", 2)])
def test_svm_separable(rng, multiclass, rows):
    X, y = separable(rng)
    model = train_svm(X, y, lam=1e-2, epochs=20, seed=1, multiclass=multiclass)
    assert np.all(model.predict(X) == y)
    assert model.predict(X[[0]])[0] == 0 and model.predict(X[[-1]])[0] == 1
    assert model.weights.shape == (rows, 2) and np.all(np.isfinite(model.weights))


@pytest.mark.parametrize("multiclass,rows", [("ovo", 6), ("ovr", 4)])
def test_svm_multiclass(rng, multiclass, rows):
    centers = np.array([[0, 5], [5, 0], [-5, 0], [0, -5]])
    X = np.vstack([c + rng.normal(size=(15, 2)) * 0.4 for c in centers])
    y = np.repeat(np.arange(4), 15) + 10
    model = train_svm(X, y, lam=1e-3, epochs=30, seed=0, multiclass=multiclass)
    assert np.mean(model.predict(X) == y) == 1.0
    assert model.decision_function(X).shape == (60, rows)


def test_ovo_vote_ties_pick_smallest_class():
    # three classes, hand-set pairwise rules: 0 beats 1, 1 beats 2, 2 beats 0 -> one vote each
    from wect.analysis import SvmModel
    pairs = np.array([[0, 1], [0, 2], [1, 2]])
    model = SvmModel(np.array([3, 5, 7]), np.zeros((3, 1)), np.array([1.0, -1.0, 1.0]), np.zeros(1), np.ones(1),
                     1e-4, 1, 0, "ovo", pairs)
    assert model.predict(np.zeros((2, 1))).tolist() == [3, 3]
    model = SvmModel(model.classes, model.weights, np.array([-1.0, -1.0, 1.0]), model.mean, model.scale,
                     1e-4, 1, 0, "ovo", pairs)
    assert model.predict(np.zeros((1, 1))).tolist() == [5]


def test_svm_determinism(rng):
    X, y = separable(rng)
    m1 = train_svm(X, y, seed=3)
    m2 = train_svm(X, y, seed=3)
    assert np.array_equal(m1.weights, m2.weights) and np.array_equal(m1.bias, m2.bias)


def test_svm_duplication(rng):
    X, y = separable(rng)
    yb = np.where(y == 1, 1.0, -1.0)
    w, b = rng.normal(size=2), 0.3
    # mean-hinge objective is unchanged by duplicating every sample
    assert svm_objective(w, b, X, yb, 0.01) == pytest.approx(
        svm_objective(w, b, np.vstack([X, X]), np.concatenate([yb, yb]), 0.01), rel=1e-14)
    test = np.array([[-3.0, 0.2], [2.8, -0.1], [-2.5, 1.0], [3.3, 0.5]])
    single = train_svm(X, y, lam=1e-2, epochs=20, seed=0).predict(test)
    double = train_svm(np.vstack([X, X]), np.concatenate([y, y]), lam=1e-2, epochs=20, seed=0).predict(test)
    assert np.array_equal(single, double) and single.tolist() == [0, 1, 0, 1]


def test_svm_errors():
    with pytest.raises(ValueError):
        train_svm(np.zeros((3, 2)), [1, 1, 1])
    with pytest.raises(ValueError):
        train_svm(np.array([[np.nan, 1], [0, 1]]), [0, 1])
    with pytest.raises(ValueError):
        train_svm(np.eye(2), [0, 1], multiclass="ecoc")


def test_folds_partition():
    y = np.repeat(np.arange(10), 13)
    assign = stratified_folds(y, 10, seed=4)
    assert set(assign) == set(range(10))
    for f in range(10):
        counts = np.bincount(y[assign == f], minlength=10)
        assert counts.min() >= 1
    with pytest.raises(ValueError):
        stratified_folds(np.array([0] * 20 + [1] * 3), 5, 0)


def test_cv_separable_perfect(rng):
    X, y = separable(rng, 30)
    r = cross_validate(X, y, folds=5, lam=1e-2, epochs=10, seed=0)
    assert r.mean == 1.0 and r.std == 0.0 and len(r.per_fold) == 5


def test_cv_determinism_and_parallel(rng):
    X, y = separable(rng, 30)
    X = X + rng.normal(size=X.shape) * 2
    for multiclass in ("ovo", "ovr"):
        a = cross_validate(X, y, folds=5, epochs=5, seed=9, multiclass=multiclass)
        b = cross_validate(X, y, folds=5, epochs=5, seed=9, workers=3, multiclass=multiclass)
        assert (a.mean, a.std, a.per_fold) == (b.mean, b.std, b.per_fold)


def test_cv_chance_level(rng):
    X = rng.normal(size=(1000, 20))
    y = rng.permutation(np.repeat(np.arange(10), 100))
    r = cross_validate(X, y, folds=10, epochs=5, seed=0)
    assert abs(r.mean - 0.10) <= 0.05


def test_cv_order_robustness(rng):
    centers = rng.normal(size=(4, 6)) * 1.5
    y = np.repeat(np.arange(4), 40)
    X = centers[y] + rng.normal(size=(160, 6))
    perm = rng.permutation(160)
    means = [cross_validate(X, y, 5, 1e-3, 10, s).mean for s in range(5)]
    pmeans = [cross_validate(X[perm], y[perm], 5, 1e-3, 10, s).mean for s in range(5)]
    assert abs(np.mean(means) - np.mean(pmeans)) <= 0.01
