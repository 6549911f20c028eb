import numpy as np
import pytest

from skillpop.documents import PseudoCorpus, PseudoDocument
from skillpop.exceptions import DimMismatch, InvalidDims
from skillpop.sptm import SPTM, Hyperparameters
from skillpop.synthetic import (GroundTruth, documents_as_postings, generate_corpus, load_synthetic,
                                recovery_error, save_synthetic)

HP = Hyperparameters(alpha=0.5, beta=0.05, delta=1.0, gamma=0.5)


def test_same_seed_bit_identical(tmp_path):
    a, ta = generate_corpus(HP, 30, 20, 4, 16, 2, seed=5)
    b, tb = generate_corpus(HP, 30, 20, 4, 16, 2, seed=5)
    assert a.documents == b.documents
    assert np.array_equal(ta.phi, tb.phi) and np.array_equal(ta.theta, tb.theta)
    save_synthetic(a, ta, tmp_path / "a.json")
    save_synthetic(b, tb, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    c, tc = load_synthetic(tmp_path / "a.json")
    assert c.documents == a.documents and np.array_equal(tc.phi, ta.phi)


def test_truth_invariants():
    corpus, t = generate_corpus(HP, 50, 25, 5, 20, 4, seed=1)
    for k in range(5):
        for l in range(4):
            assert abs(t.phi[k, t.skill_category == l].sum() - 1) < 1e-12
    assert np.allclose(t.theta.sum(1), 1, atol=1e-12) and np.allclose(t.pi.sum(1), 1, atol=1e-12)
    assert (t.theta[~t.lam] == 0).all()
    for m, doc in enumerate(corpus):
        assert t.lam[m].any()
        assert set(t.z[m].tolist()) <= set(np.flatnonzero(t.lam[m]).tolist())
        assert np.array_equal(t.skill_category[t.w[m]], t.l[m])
        assert doc.n_tokens == 25 and doc.labels == tuple(np.flatnonzero(t.lam[m]).tolist())


def test_gamma_near_one():
    # alpha = 1 so that no Dirichlet component underflows to an exact zero
    _, t = generate_corpus(Hyperparameters(alpha=1.0, gamma=1 - 1e-12), 40, 5, 6, 12, 2, seed=0)
    assert t.lam.all() and (t.theta > 0).all()


def test_degenerate_dims():
    corpus, t = generate_corpus(HP, 20, 200, 1, 5, 1, seed=2)
    assert all((z == 0).all() for z in t.z) and all((l == 0).all() for l in t.l)
    counts = np.bincount(np.concatenate(t.w), minlength=5) / 4000
    assert 0.5 * np.abs(counts - t.phi[0]).sum() < 0.05


def test_invalid_dims():
    with pytest.raises(InvalidDims):
        generate_corpus(HP, 0, 5, 2, 4, 2)
    with pytest.raises(InvalidDims):
        generate_corpus(HP, 5, 5, 2, 2, 3)


def test_empirical_skill_frequencies_converge():
    corpus, t = generate_corpus(HP, 400, 200, 3, 12, 3, seed=8)
    tokens = np.concatenate(t.w)
    topics = np.concatenate(t.z)
    cats = np.concatenate(t.l)
    for k in range(3):
        for l in range(3):
            sel = (topics == k) & (cats == l)
            if sel.sum() < 2000:
                continue
            emp = np.bincount(tokens[sel], minlength=12) / sel.sum()
            assert 0.5 * np.abs(emp - t.phi[k] * (t.skill_category == l)).sum() < 0.05


def hand_truth(phi_row):
    S = len(phi_row)
    return GroundTruth(np.array([phi_row]), np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1), dtype=bool),
                       [np.zeros(4, dtype=np.int64)], [np.zeros(4, dtype=np.int64)],
                       [np.zeros(4, dtype=np.int64)], np.zeros(S, dtype=np.int64))


def counted_model(counts, beta=0.01):
    counts = np.asarray(counts)[:, None]
    corpus = PseudoCorpus([PseudoDocument(0, ((0, 1),), (0,))], np.zeros(len(counts)), 1)
    model = SPTM(beta=beta)
    model._set_counts(counts, np.zeros((1, 1), dtype=int), np.array([[counts.sum()]]), np.ones((1, 1), bool),
                      corpus)
    return model


def test_recovery_uniform_vs_concentrated():
    truth = hand_truth([1.0, 0.0, 0.0, 0.0])
    per_topic, mean = recovery_error(counted_model([10, 10, 10, 10]), truth)
    assert mean == pytest.approx(0.75, abs=1e-12)


def test_recovery_self_comparison():
    phi = np.array([0.5, 0.3, 0.15, 0.05])
    truth = hand_truth(phi)
    _, mean = recovery_error(counted_model((phi * 100_000).round().astype(int)), truth)
    assert mean <= 1e-3


def test_recovery_dim_mismatch():
    truth = hand_truth([0.5, 0.5, 0.0])
    with pytest.raises(DimMismatch):
        recovery_error(counted_model([1, 1]), truth)


def test_documents_as_postings(synthetic_small):
    corpus, _ = synthetic_small
    posts = documents_as_postings(corpus)
    assert len(posts) == len(corpus)
    assert posts[0].label_indices == list(corpus[0].labels)
    assert sum(posts[0].skills.values()) == corpus[0].n_tokens
