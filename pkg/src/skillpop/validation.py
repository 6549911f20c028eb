"""Input validation shared by the estimators."""
from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np

from .documents import PseudoCorpus, PseudoDocument
from .exceptions import EmptyCorpus, InvalidDims


def check_positive(name: str, value, upper: float | None = None) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive real, got {value!r}")
    if upper is not None and value >= upper:
        raise ValueError(f"{name} must be < {upper}, got {value!r}")
    return float(value)


def check_corpus(X, skill_category: Sequence[int] | None = None, n_topics: int | None = None,
                 label_prior=None) -> PseudoCorpus:
    """Coerce ``X`` into a validated :class:`PseudoCorpus`.

    ``X`` is either a corpus (whose fields win unless overridden) or a
    sequence of :class:`PseudoDocument`, in which case ``skill_category``
    and ``n_topics`` are required.
    """
    if isinstance(X, PseudoCorpus):
        corpus = PseudoCorpus(list(X.documents),
                              X.skill_category if skill_category is None else skill_category,
                              X.n_topics if n_topics is None else n_topics,
                              X.label_prior if label_prior is None else label_prior,
                              X.dictionary_hash, X.skill_names)
    else:
        if skill_category is None or n_topics is None:
            raise TypeError("skill_category and n_topics are required for a plain document list")
        corpus = PseudoCorpus(list(X), skill_category, n_topics, label_prior)
    if not corpus.documents:
        raise EmptyCorpus("no documents to train on")
    S, K = corpus.n_skills, corpus.n_topics
    if K < 1 or S < 1:
        raise InvalidDims(f"need at least one topic and one skill, got K={K}, S={S}")
    if (corpus.skill_category < 0).any():
        raise InvalidDims("skill categories must be non-negative")
    for doc in corpus.documents:
        if not isinstance(doc, PseudoDocument):
            raise TypeError(f"expected PseudoDocument, got {type(doc).__name__}")
        if not doc.labels:
            raise ValueError(f"document {doc.central_skill} has an empty label vector")
        if doc.labels[-1] >= K or doc.labels[0] < 0:
            raise InvalidDims(f"document {doc.central_skill} has a label outside [0, {K})")
        if doc.n_tokens == 0:
            raise ValueError(f"document {doc.central_skill} has no tokens")
        if doc.tokens[-1][0] >= S or doc.tokens[0][0] < 0:
            raise InvalidDims(f"document {doc.central_skill} has a token outside [0, {S})")
    if corpus.label_prior is not None:
        prior = np.asarray(corpus.label_prior, dtype=float)
        if prior.shape != (K,) or (prior < 0).any() or (prior > 1).any():
            raise ValueError("label_prior must hold K values in [0, 1]")
        corpus.label_prior = prior
    return corpus
