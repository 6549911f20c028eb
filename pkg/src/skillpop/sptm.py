"""Skill Popularity based Topic Model.

Each topic is bound to one criteria label. Documents are central skills
whose tokens are neighbouring skills, and a document may only use the
topics switched on in its label vector. Training is collapsed Gibbs
sampling over the token topic assignments.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _sampler
from .documents import PseudoCorpus
from .exceptions import EmptyTestSet, InconsistentCounts, TopicOutOfRange, UnknownLabel, UnknownSkill
from .taxonomy import N_LABELS, label_index
from .validation import check_corpus, check_positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparameters:
    alpha: float = 0.01
    beta: float = 0.01
    delta: float = 1.0
    # only used when generating synthetic corpora
    gamma: float = 0.01

    def __post_init__(self):
        check_positive("alpha", self.alpha)
        check_positive("beta", self.beta)
        check_positive("delta", self.delta)
        check_positive("gamma", self.gamma, upper=1.0)


class ModelState:
    """Token assignments and the count tables derived from them.

    Tokens are laid out document by document; ``doc_ptr[m]:doc_ptr[m+1]``
    are the tokens of document ``m``.
    """

    def __init__(self, corpus: PseudoCorpus, hp: Hyperparameters, n_categories: int | None = None):
        self.hp = hp
        self.K = corpus.n_topics
        self.S = corpus.n_skills
        self.L = n_categories or corpus.n_categories
        self.M = len(corpus)
        self.skill_category = corpus.skill_category
        arrays = [doc.token_array() for doc in corpus.documents]
        self.doc_len = np.array([len(a) for a in arrays], dtype=np.int64)
        self.doc_ptr = np.concatenate([[0], np.cumsum(self.doc_len)]).astype(np.int64)
        self.tok_skill = np.concatenate(arrays).astype(np.int64)
        self.tok_doc = np.repeat(np.arange(self.M, dtype=np.int64), self.doc_len)
        self.tok_cat = self.skill_category[self.tok_skill]
        self.lam = np.zeros((self.M, self.K), dtype=bool)
        for m, doc in enumerate(corpus.documents):
            self.lam[m, list(doc.labels)] = True
        self.doc_topic_ptr = np.concatenate([[0], np.cumsum(self.lam.sum(axis=1))]).astype(np.int64)
        self.doc_topics = np.nonzero(self.lam)[1].astype(np.int64)
        self.z = np.zeros(len(self.tok_skill), dtype=np.int64)
        self.recount()

    @property
    def n_tokens(self) -> int:
        return len(self.z)

    def recount(self) -> None:
        self.n_sk, self.n_k, self.n_mk, self.n_ml = self._tables()

    def _tables(self):
        n_sk = np.zeros((self.S, self.K), dtype=np.int64)
        np.add.at(n_sk, (self.tok_skill, self.z), 1)
        n_mk = np.zeros((self.M, self.K), dtype=np.int64)
        np.add.at(n_mk, (self.tok_doc, self.z), 1)
        n_ml = np.zeros((self.M, self.L), dtype=np.int64)
        np.add.at(n_ml, (self.tok_doc, self.tok_cat), 1)
        return n_sk, n_sk.sum(axis=0), n_mk, n_ml

    def check_consistency(self) -> None:
        """Recount from the assignments and compare with the live tables."""
        for name, fresh in zip(("n_sk", "n_k", "n_mk", "n_ml"), self._tables()):
            if not np.array_equal(getattr(self, name), fresh):
                raise InconsistentCounts(f"{name} disagrees with a full recount")
        if (self.n_mk[~self.lam] != 0).any():
            raise InconsistentCounts("a document uses a topic outside its label vector")

    def token_position(self, m: int, i: int) -> int:
        if not 0 <= i < self.doc_len[m]:
            raise IndexError(f"document {m} has {self.doc_len[m]} tokens, no position {i}")
        return int(self.doc_ptr[m] + i)


def init_state(corpus, hp: Hyperparameters, seed=None, n_categories: int | None = None) -> ModelState:
    """Assign every token a topic drawn uniformly from its document's labels."""
    corpus = check_corpus(corpus)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = ModelState(corpus, hp, n_categories)
    for m in range(state.M):
        allowed = state.doc_topics[state.doc_topic_ptr[m]:state.doc_topic_ptr[m + 1]]
        lo, hi = state.doc_ptr[m], state.doc_ptr[m + 1]
        state.z[lo:hi] = allowed[rng.integers(len(allowed), size=hi - lo)]
    state.recount()
    return state


def conditional(state: ModelState, m: int, i: int, include_category_factor: bool = True) -> np.ndarray:
    """Normalised sampling distribution of token ``i`` of document ``m``.

    The token's own contribution is removed from the counts before the
    three factors (skill given topic, category given document, topic given
    document) are multiplied.
    """
    t = state.token_position(m, i)
    w, c, old = state.tok_skill[t], state.tok_cat[t], state.z[t]
    hp = state.hp
    own = np.zeros(state.K)
    own[old] = 1.0

    n_wj = state.n_sk[w] - own
    n_j = state.n_k - own
    skill_factor = (n_wj + hp.beta) / (n_j + state.S * hp.beta)

    n_mj = state.n_mk[m] - own
    n_m = state.doc_len[m]
    lam = state.lam[m]
    topic_factor = (n_mj + hp.alpha) * lam / (n_m - 1 + hp.alpha * lam.sum())

    p = skill_factor * topic_factor
    if include_category_factor:
        n_ml = state.n_ml[m].astype(float)
        n_ml[c] -= 1
        p = p * (n_ml[c] + hp.delta) / (n_ml.sum() + state.L * hp.delta)
    return p / p.sum()


def gibbs_sweep(state: ModelState, rng: np.random.Generator) -> ModelState:
    """Resample every token once, in document then position order."""
    uniforms = rng.random(state.n_tokens)
    _sampler.sweep(state.z, state.tok_doc, state.tok_skill, state.doc_topics, state.doc_topic_ptr,
                   state.n_sk, state.n_k, state.n_mk, float(state.hp.alpha), float(state.hp.beta),
                   float(state.S * state.hp.beta), uniforms)
    return state


def log_likelihood(state: ModelState) -> float:
    """Collapsed log joint of tokens, categories and assignments."""
    hp = state.hp
    skills = (state.K * (gammaln(state.S * hp.beta) - state.S * gammaln(hp.beta))
              - gammaln(state.n_k + state.S * hp.beta).sum()
              + gammaln(state.n_sk + hp.beta).sum())
    a_m = hp.alpha * state.lam.sum(axis=1)
    topics = (gammaln(a_m).sum() - gammaln(state.doc_len + a_m).sum()
              + (gammaln(state.n_mk + hp.alpha) - gammaln(hp.alpha))[state.lam].sum())
    cats = (state.M * (gammaln(state.L * hp.delta) - state.L * gammaln(hp.delta))
            - gammaln(state.doc_len + state.L * hp.delta).sum()
            + gammaln(state.n_ml + hp.delta).sum())
    return float(skills + topics + cats)


class SPTM(BaseEstimator):
    """Skill popularity topic model fitted by collapsed Gibbs sampling.

    Parameters
    ----------
    alpha, beta, delta : float
        Symmetric Dirichlet priors on document-topic, topic-skill and
        document-category distributions.
    gamma : float
        Label inclusion probability; only meaningful for synthetic data.
    max_iter : int
        Maximum number of sweeps.
    tol : float
        Training stops once the relative change of the collapsed log
        likelihood between consecutive sweeps drops below ``tol``.
    burn_in : int
        Sweeps that always run before the stopping rule is checked.
    random_state : int or None
        Seed for initialisation and sampling.
    skill_normalization : {"category", "global"}
        How the skill-given-topic factor of the posterior is normalised.
        ``"category"`` normalises over the skills of the skill's own
        category, so that multiplying by the category prior gives a proper
        distribution over skills. ``"global"`` normalises over all skills,
        which leaves the total mass below one whenever there is more than
        one category.
    """

    def __init__(self, alpha=0.01, beta=0.01, delta=1.0, gamma=0.01, max_iter=800, tol=1e-3,
                 burn_in=0, random_state=None, skill_normalization="category"):
        self.alpha = alpha
        self.beta = beta
        self.delta = delta
        self.gamma = gamma
        self.max_iter = max_iter
        self.tol = tol
        self.burn_in = burn_in
        self.random_state = random_state
        self.skill_normalization = skill_normalization

    def _hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(self.alpha, self.beta, self.delta, self.gamma)

    def _prepare(self, corpus: PseudoCorpus) -> PseudoCorpus:
        return corpus

    def fit(self, X, y=None, skill_category=None, n_topics=None, label_prior=None):
        """Train on a :class:`PseudoCorpus` or a list of documents."""
        corpus = self._prepare(check_corpus(X, skill_category, n_topics, label_prior))
        if self.max_iter < 0 or self.burn_in < 0:
            raise ValueError("max_iter and burn_in must be non-negative")
        if self.skill_normalization not in ("category", "global"):
            raise ValueError(f"unknown skill_normalization {self.skill_normalization!r}")
        hp = self._hyperparameters()
        rng = np.random.default_rng(self.random_state)
        state = init_state(corpus, hp, rng)

        ll_prev = log_likelihood(state)
        self.iteration_log_ = [(0, ll_prev, 0.0)]
        self.converged_ = False
        start = time.perf_counter()
        it = 0
        for it in range(1, self.max_iter + 1):
            gibbs_sweep(state, rng)
            ll = log_likelihood(state)
            self.iteration_log_.append((it, ll, time.perf_counter() - start))
            if it >= self.burn_in and abs(ll - ll_prev) <= self.tol * abs(ll_prev):
                self.converged_ = True
                break
            ll_prev = ll
        logger.debug("stopped after %d sweeps, log likelihood %.3f", it, self.iteration_log_[-1][1])

        self.n_iter_ = it if self.max_iter else 0
        self.log_likelihood_ = self.iteration_log_[-1][1]
        self.assignments_ = state.z.copy()
        self._set_counts(state.n_sk, state.n_mk, state.n_ml, state.lam, corpus)
        return self

    def _set_counts(self, n_sk, n_mk, n_ml, lam, corpus: PseudoCorpus) -> None:
        self.skill_category_ = np.asarray(corpus.skill_category, dtype=np.int64)
        self.n_topics_ = corpus.n_topics
        self.n_skills_ = corpus.n_skills
        self.n_categories_ = n_ml.shape[1]
        self.topic_skill_counts_ = np.asarray(n_sk, dtype=np.int64)
        self.doc_topic_counts_ = np.asarray(n_mk, dtype=np.int64)
        self.doc_category_counts_ = np.asarray(n_ml, dtype=np.int64)
        self.lambda_ = np.asarray(lam, dtype=bool)
        self.central_skills_ = np.array([d.central_skill for d in corpus.documents], dtype=np.int64)
        self.dictionary_hash_ = corpus.dictionary_hash
        self.skill_names_ = corpus.skill_names
        if corpus.label_prior is not None:
            self.label_prior_ = np.asarray(corpus.label_prior, dtype=float)
        else:
            self.label_prior_ = self.lambda_.mean(axis=0)
        self._derive()

    def _derive(self) -> None:
        d = self.delta
        self.topic_counts_ = self.topic_skill_counts_.sum(axis=0)
        self.category_counts_ = self.doc_category_counts_.sum(axis=0)
        self.category_prior_ = (self.category_counts_ + d) / (self.category_counts_.sum() + self.n_categories_ * d)
        cat = self.skill_category_
        smoothed = self.topic_skill_counts_ + self.beta
        # the sampler's skill factor: smoothed share of each skill over all skills
        self.skill_given_topic_ = smoothed / (self.topic_counts_ + self.n_skills_ * self.beta)
        if self.skill_normalization == "global":
            self.skill_given_category_topic_ = self.skill_given_topic_
        else:
            per_cat = np.zeros((self.n_categories_, self.n_topics_))
            np.add.at(per_cat, cat, smoothed)
            self.skill_given_category_topic_ = smoothed / per_cat[cat]
        self.components_ = self.skill_given_category_topic_ * self.category_prior_[cat][:, None]

    # -- derived estimators -------------------------------------------------

    @property
    def theta_(self) -> np.ndarray:
        check_is_fitted(self, "doc_topic_counts_")
        num = (self.doc_topic_counts_ + self.alpha) * self.lambda_
        return num / num.sum(axis=1, keepdims=True)

    @property
    def pi_(self) -> np.ndarray:
        check_is_fitted(self, "doc_category_counts_")
        num = self.doc_category_counts_ + self.delta
        return num / num.sum(axis=1, keepdims=True)

    # -- queries --------------------------------------------------------------

    def topic_skill_posterior(self, skill: int, topic: int) -> float:
        """Probability of a skill together with its category under a topic."""
        check_is_fitted(self, "components_")
        if not 0 <= skill < self.n_skills_:
            raise UnknownSkill(f"skill id {skill} outside [0, {self.n_skills_})")
        if not 0 <= topic < self.n_topics_:
            raise TopicOutOfRange(f"topic {topic} outside [0, {self.n_topics_})")
        return float(self.components_[skill, topic])

    def criteria_weights(self, criteria: Iterable) -> np.ndarray:
        """Label weights over topics for a set of criteria, summing to 1."""
        check_is_fitted(self, "components_")
        idx = sorted({label_index(c) for c in criteria})
        if not idx:
            raise UnknownLabel("criteria set is empty")
        for k in idx:
            if not 0 <= k < self.n_topics_:
                raise UnknownLabel(f"label {k} outside [0, {self.n_topics_})")
        weights = np.zeros(self.n_topics_)
        weights[idx] = self.label_prior_[idx]
        if weights.sum() <= 0:
            weights[idx] = 1.0
        return weights / weights.sum()

    def popularity_scores(self, criteria: Iterable, weights: np.ndarray | None = None) -> np.ndarray:
        """Criteria-conditioned popularity of every skill, indexed by skill id."""
        if weights is None:
            weights = self.criteria_weights(criteria)
        return self.components_ @ weights

    def popularity(self, criteria: Iterable, k: int | None = None) -> list[tuple[int, float]]:
        """Skills ranked by popularity, best first; ties go to the lower id."""
        return rank_scores(self.popularity_scores(criteria), k)

    def score(self, X, y=None) -> float:
        """Held-out log likelihood of job postings."""
        return held_out_log_likelihood(self, X)


def rank_scores(scores: np.ndarray, k: int | None = None) -> list[tuple[int, float]]:
    order = np.lexsort((np.arange(len(scores)), -scores))
    if k is not None:
        order = order[:k]
    return [(int(s), float(scores[s])) for s in order]


def topic_skill_posterior(model: SPTM, skill: int, topic: int) -> float:
    return model.topic_skill_posterior(skill, topic)


def popularity(model: SPTM, criteria: Iterable) -> list[tuple[int, float]]:
    return model.popularity(criteria)


def held_out_log_likelihood(model, postings: Iterable) -> float:
    """Sum of log popularity of every skill mention in the test postings.

    Each posting is scored under its own label set. Postings without
    labels or skills are ignored; skills outside the model are skipped.
    """
    total = 0.0
    used = 0
    cache: dict[tuple, np.ndarray] = {}
    for post in postings:
        labels = tuple(post.label_indices)
        if not labels or not post.skills:
            continue
        if labels not in cache:
            cache[labels] = np.log(model.popularity_scores(labels))
        logp = cache[labels]
        for s, c in post.skills.items():
            if 0 <= s < len(logp):
                total += c * logp[s]
        used += 1
    if not used:
        raise EmptyTestSet("no test posting carries both labels and skills")
    return float(total)


def train(docs, hp: Hyperparameters = Hyperparameters(), max_iters: int = 800, tol: float = 1e-3,
          burn_in: int = 0, seed=None, **fit_params) -> SPTM:
    model = SPTM(alpha=hp.alpha, beta=hp.beta, delta=hp.delta, gamma=hp.gamma, max_iter=max_iters,
                 tol=tol, burn_in=burn_in, random_state=seed)
    return model.fit(docs, **fit_params)


__all__ = [
    "Hyperparameters", "ModelState", "SPTM", "conditional", "gibbs_sweep", "held_out_log_likelihood",
    "init_state", "log_likelihood", "popularity", "rank_scores", "topic_skill_posterior", "train",
    "N_LABELS",
]
