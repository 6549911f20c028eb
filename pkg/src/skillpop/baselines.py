"""Comparison methods: per-label skill frequency and Labeled-LDA."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import JobPosting
from .documents import PseudoCorpus
from .exceptions import EmptyCorpus, LabelUnseen, UnknownLabel
from .sptm import SPTM, Hyperparameters, held_out_log_likelihood, rank_scores
from .taxonomy import N_LABELS, label_index


class LabeledLDA(SPTM):
    """Labeled-LDA as the single-category special case of :class:`SPTM`.

    With every skill in one category the category factor of the sampler is
    identically 1 and the category prior of each skill is 1, which leaves
    the textbook Labeled-LDA conditional.
    """

    def _prepare(self, corpus: PseudoCorpus) -> PseudoCorpus:
        return PseudoCorpus(corpus.documents, np.zeros(corpus.n_skills, dtype=np.int64), corpus.n_topics,
                            corpus.label_prior, corpus.dictionary_hash, corpus.skill_names)


def llda_train(docs, hp: Hyperparameters = Hyperparameters(), max_iters: int = 800, tol: float = 1e-3,
               burn_in: int = 0, seed=None, **fit_params) -> LabeledLDA:
    model = LabeledLDA(alpha=hp.alpha, beta=hp.beta, delta=hp.delta, gamma=hp.gamma, max_iter=max_iters,
                       tol=tol, burn_in=burn_in, random_state=seed)
    return model.fit(docs, **fit_params)


class FrequencyRanker(BaseEstimator):
    """Rank skills by how often they are mentioned under each label.

    ``smoothing`` is an additive pseudo-count used only when the model
    scores held-out postings, so that unseen skills keep a finite log
    probability; rankings use the raw normalised frequencies.
    """

    def __init__(self, smoothing=0.01, n_labels=N_LABELS):
        self.smoothing = smoothing
        self.n_labels = n_labels

    def fit(self, postings: Iterable[JobPosting], y=None, n_skills: int | None = None,
            dictionary_hash: str | None = None):
        postings = list(postings)
        if not postings:
            raise EmptyCorpus("no postings to count")
        max_skill = max((max(p.skills, default=-1) for p in postings), default=-1)
        S = max_skill + 1 if n_skills is None else n_skills
        counts = np.zeros((self.n_labels, S), dtype=np.int64)
        carried = np.zeros(self.n_labels, dtype=np.int64)
        for post in postings:
            labels = post.label_indices
            carried[labels] += 1
            for s, c in post.skills.items():
                if 0 <= s < S:
                    counts[labels, s] += c
        self.counts_ = counts
        self.n_skills_ = S
        self.label_prior_ = carried / len(postings)
        self.label_support_ = carried
        self.dictionary_hash_ = dictionary_hash
        return self

    def frequency_table(self) -> dict[int, dict[int, float]]:
        """Per label, the normalised frequency of every skill seen under it."""
        check_is_fitted(self, "counts_")
        table = {}
        for k in range(self.n_labels):
            total = self.counts_[k].sum()
            if total:
                nz = np.flatnonzero(self.counts_[k])
                table[k] = {int(s): float(self.counts_[k, s] / total) for s in nz}
        return table

    def popularity(self, label, k: int | None = None) -> list[tuple[int, float]]:
        check_is_fitted(self, "counts_")
        idx = label_index(label)
        if not 0 <= idx < self.n_labels:
            raise UnknownLabel(f"label {idx} outside [0, {self.n_labels})")
        if self.label_support_[idx] == 0:
            raise LabelUnseen(f"no posting carries label {label}")
        row = self.counts_[idx]
        ranked = rank_scores(row / row.sum(), k)
        return [(s, p) for s, p in ranked if p > 0]

    def popularity_scores(self, criteria: Iterable, smoothing: float | None = None) -> np.ndarray:
        """Label-prior weighted mixture of the smoothed per-label frequencies."""
        check_is_fitted(self, "counts_")
        idx = sorted({label_index(c) for c in criteria})
        if not idx:
            raise UnknownLabel("criteria set is empty")
        weights = self.label_prior_[idx].astype(float)
        if weights.sum() <= 0:
            weights = np.ones(len(idx))
        weights /= weights.sum()
        b = self.smoothing if smoothing is None else smoothing
        totals = self.counts_[idx].sum(axis=1, keepdims=True) + self.n_skills_ * b
        rows = np.divide(self.counts_[idx] + b, totals, out=np.zeros(self.counts_[idx].shape), where=totals > 0)
        return weights @ rows

    def score(self, X, y=None) -> float:
        return held_out_log_likelihood(self, X)


def frequency_popularity(postings: Sequence[JobPosting], label) -> list[tuple[int, float]]:
    return FrequencyRanker().fit(postings).popularity(label)
