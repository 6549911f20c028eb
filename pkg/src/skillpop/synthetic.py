"""Forward sampler for the generative process, with ground truth kept.

Used as an oracle: corpora drawn here have known topic-skill
distributions that a trained model should recover.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import JobPosting
from .documents import PseudoCorpus, PseudoDocument
from .exceptions import DimMismatch, InvalidDims
from .sptm import Hyperparameters


@dataclass
class GroundTruth:
    phi: np.ndarray          # (K, S); row k restricted to category l is phi_{k,l}
    theta: np.ndarray        # (M, K), zero outside the label vector
    pi: np.ndarray           # (M, L)
    lam: np.ndarray          # (M, K) bool
    z: list[np.ndarray]      # per document topic of each token
    l: list[np.ndarray]      # per document category of each token
    w: list[np.ndarray]      # per document skill of each token
    skill_category: np.ndarray

    def skill_given_topic(self) -> np.ndarray:
        """Skill distribution of each topic, mixing categories by expected use.

        Category weights for topic ``k`` are ``sum_m N_m theta_mk pi_ml``,
        normalised over ``l``.
        """
        n_m = np.array([len(x) for x in self.w], dtype=float)
        mix = (self.theta * n_m[:, None]).T @ self.pi        # (K, L)
        mix /= np.maximum(mix.sum(axis=1, keepdims=True), 1e-300)
        return self.phi * mix[:, self.skill_category]

    def to_dict(self) -> dict:
        return {"phi": self.phi.tolist(), "theta": self.theta.tolist(), "pi": self.pi.tolist(),
                "lambda": self.lam.astype(int).tolist(), "z": [a.tolist() for a in self.z],
                "l": [a.tolist() for a in self.l], "w": [a.tolist() for a in self.w],
                "skill_category": self.skill_category.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        arr = lambda key, dt=np.int64: [np.asarray(a, dtype=dt) for a in d[key]]  # noqa: E731
        return cls(np.asarray(d["phi"]), np.asarray(d["theta"]), np.asarray(d["pi"]),
                   np.asarray(d["lambda"], dtype=bool), arr("z"), arr("l"), arr("w"),
                   np.asarray(d["skill_category"], dtype=np.int64))


def even_partition(n_skills: int, n_categories: int) -> np.ndarray:
    return (np.arange(n_skills) * n_categories) // n_skills


def _dirichlet(rng: np.random.Generator, conc: np.ndarray) -> np.ndarray:
    # gamma draws can all underflow for tiny concentrations; redraw with a larger floor
    g = rng.gamma(conc)
    while g.sum() <= 0:
        g = rng.gamma(conc + 1e-3)
    return g / g.sum()


def generate_corpus(hp: Hyperparameters, M: int, N: int, K: int, S: int, L: int, seed=None,
                    partition: np.ndarray | None = None) -> tuple[PseudoCorpus, GroundTruth]:
    """Draw ``M`` documents of ``N`` tokens each.

    Label vectors that come out all zero are redrawn.
    """
    for name, v in (("M", M), ("N", N), ("K", K), ("S", S), ("L", L)):
        if int(v) < 1:
            raise InvalidDims(f"{name} must be >= 1, got {v}")
    if S < L:
        raise InvalidDims(f"need at least one skill per category, got S={S}, L={L}")
    rng = np.random.default_rng(seed)
    cat = even_partition(S, L) if partition is None else np.asarray(partition, dtype=np.int64)
    if cat.shape != (S,) or set(np.unique(cat)) != set(range(L)):
        raise InvalidDims("partition must give every skill one of the L categories, using all of them")
    members = [np.flatnonzero(cat == l) for l in range(L)]

    phi = np.zeros((K, S))
    for k in range(K):
        for l in range(L):
            phi[k, members[l]] = _dirichlet(rng, np.full(len(members[l]), hp.beta))
    cdf = [[np.cumsum(phi[k, members[l]]) for l in range(L)] for k in range(K)]

    theta = np.zeros((M, K))
    pi = np.zeros((M, L))
    lam = np.zeros((M, K), dtype=bool)
    zs, ls, ws, docs = [], [], [], []
    for m in range(M):
        row = rng.random(K) < hp.gamma
        while not row.any():
            row = rng.random(K) < hp.gamma
        lam[m] = row
        pi[m] = _dirichlet(rng, np.full(L, hp.delta))
        support = np.flatnonzero(row)
        theta[m, support] = _dirichlet(rng, np.full(len(support), hp.alpha))
        z = rng.choice(K, size=N, p=theta[m])
        l = rng.choice(L, size=N, p=pi[m])
        u = rng.random(N)
        w = np.empty(N, dtype=np.int64)
        for kk, ll in sorted(set(zip(z.tolist(), l.tolist()))):
            sel = (z == kk) & (l == ll)
            pos = np.searchsorted(cdf[kk][ll], u[sel] * cdf[kk][ll][-1], side="right")
            w[sel] = members[ll][np.minimum(pos, len(members[ll]) - 1)]
        zs.append(z.astype(np.int64))
        ls.append(l.astype(np.int64))
        ws.append(w)
        docs.append(PseudoDocument(m, tuple(Counter(w.tolist()).items()), tuple(support.tolist())))

    truth = GroundTruth(phi, theta, pi, lam, zs, ls, ws, cat)
    return PseudoCorpus(docs, cat, K, lam.mean(axis=0)), truth


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def recovery_error(model, truth: GroundTruth) -> tuple[np.ndarray, float]:
    """Per-topic total variation between true and fitted skill distributions.

    The fitted side is the model's smoothed skill share per topic,
    normalised over skills. Topics are matched by their label, so no
    permutation search is needed.
    """
    fitted = model.skill_given_topic_.T                        # (K, S)
    fitted = fitted / fitted.sum(axis=1, keepdims=True)
    true = truth.skill_given_topic()
    if fitted.shape != true.shape:
        raise DimMismatch(f"model is {fitted.shape}, truth is {true.shape}")
    per_topic = 0.5 * np.abs(fitted - true).sum(axis=1)
    return per_topic, float(per_topic.mean())


def documents_as_postings(corpus: PseudoCorpus) -> list[JobPosting]:
    """View synthetic documents as postings: labels from the mask, skills from the tokens."""
    return [JobPosting(f"doc{d.central_skill}", frozenset(d.labels), Counter(dict(d.tokens)))
            for d in corpus.documents]


def save_synthetic(corpus: PseudoCorpus, truth: GroundTruth, path: str | Path, meta: dict | None = None) -> None:
    payload = {"meta": meta or {}, "n_topics": corpus.n_topics,
               "skill_category": corpus.skill_category.tolist(),
               "documents": [d.to_record() for d in corpus.documents],
               "truth": truth.to_dict()}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_synthetic(path: str | Path) -> tuple[PseudoCorpus, GroundTruth]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    docs = [PseudoDocument.from_record(r) for r in payload["documents"]]
    truth = GroundTruth.from_dict(payload["truth"])
    return PseudoCorpus(docs, payload["skill_category"], payload["n_topics"], truth.lam.mean(axis=0)), truth
