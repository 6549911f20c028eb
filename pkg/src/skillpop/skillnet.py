"""Skill co-occurrence graph and its conversion into pseudo-documents."""
from __future__ import annotations

import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import JobPosting, SkillDictionary
from .documents import PseudoCorpus, PseudoDocument
from .exceptions import UnknownSkill
from .taxonomy import N_LABELS

logger = logging.getLogger(__name__)

MULTIPLICITY_MODES = ("weighted", "binary")


@dataclass
class SkillNet:
    """Undirected weighted graph; each edge is stored once as ``(i, j)``, ``i < j``."""

    nodes: set[int] = field(default_factory=set)
    edges: Counter = field(default_factory=Counter)
    # number of postings containing each skill
    support: Counter = field(default_factory=Counter)

    def weight(self, i: int, j: int) -> int:
        if i == j:
            return 0
        return self.edges.get((min(i, j), max(i, j)), 0)

    def neighbors(self) -> dict[int, dict[int, int]]:
        adj: dict[int, dict[int, int]] = defaultdict(dict)
        for (i, j), w in self.edges.items():
            adj[i][j] = w
            adj[j][i] = w
        return adj

    def merge(self, other: "SkillNet") -> "SkillNet":
        return SkillNet(self.nodes | other.nodes, self.edges + other.edges, self.support + other.support)

    def to_edge_list(self) -> str:
        return "".join(f"{i},{j},{w}\n" for (i, j), w in sorted(self.edges.items()))

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_edge_list())


def build_skillnet(postings: Iterable[JobPosting]) -> SkillNet:
    """Connect every pair of distinct skills that share a posting.

    The weight of an edge is the number of postings containing both
    skills; repeated mentions inside one posting count once.
    """
    net = SkillNet()
    for post in postings:
        skills = sorted(post.skill_set())
        net.nodes.update(skills)
        net.support.update(skills)
        net.edges.update(itertools.combinations(skills, 2))
    return net


def _label_support(postings: Iterable[JobPosting]) -> dict[int, Counter]:
    support: dict[int, Counter] = defaultdict(Counter)
    for post in postings:
        labels = post.label_indices
        for s in post.skill_set():
            support[s].update(labels)
    return support


def criteria_vector(skill: int, postings: Sequence[JobPosting], min_support: int = 1,
                    n_labels: int = N_LABELS) -> np.ndarray:
    """Binary label vector of a skill.

    Entry ``k`` is set when the skill appears in at least ``min_support``
    postings carrying label ``k``.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    counts: Counter = Counter()
    seen = False
    for post in postings:
        if post.skills.get(skill, 0) > 0:
            seen = True
            counts.update(post.label_indices)
    if not seen:
        raise UnknownSkill(f"skill {skill} appears in no posting")
    lam = np.zeros(n_labels, dtype=bool)
    for k, c in counts.items():
        if c >= min_support:
            lam[k] = True
    return lam


@dataclass
class DocumentReport:
    n_nodes: int = 0
    n_documents: int = 0
    n_isolated: int = 0
    n_unlabeled: int = 0


def make_documents(net: SkillNet, postings: Sequence[JobPosting], multiplicity_mode: str = "weighted",
                   min_support: int = 1) -> tuple[list[PseudoDocument], DocumentReport]:
    """One pseudo-document per connected skill, ordered by skill id.

    Tokens are the node's neighbours, repeated by edge weight in
    ``weighted`` mode or once each in ``binary`` mode.  Isolated nodes and
    nodes whose label vector is empty are skipped and counted in the
    report.
    """
    if multiplicity_mode not in MULTIPLICITY_MODES:
        raise ValueError(f"multiplicity_mode must be one of {MULTIPLICITY_MODES}")
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    adj = net.neighbors()
    label_support = _label_support(postings)
    report = DocumentReport(n_nodes=len(net.nodes))
    docs = []
    for m in sorted(net.nodes):
        nbrs = adj.get(m)
        if not nbrs:
            report.n_isolated += 1
            continue
        labels = tuple(k for k, c in label_support.get(m, {}).items() if c >= min_support)
        if not labels:
            report.n_unlabeled += 1
            continue
        tokens = tuple((s, w if multiplicity_mode == "weighted" else 1) for s, w in nbrs.items())
        docs.append(PseudoDocument(m, tokens, labels))
    report.n_documents = len(docs)
    if report.n_isolated or report.n_unlabeled:
        logger.info("made %d documents; skipped %d isolated and %d unlabeled skills",
                    report.n_documents, report.n_isolated, report.n_unlabeled)
    return docs, report


def label_priors(postings: Sequence[JobPosting], n_labels: int = N_LABELS) -> np.ndarray:
    """Fraction of postings carrying each label."""
    counts = np.zeros(n_labels)
    for post in postings:
        for k in post.label_indices:
            counts[k] += 1
    return counts / max(len(postings), 1)


class SkillNetVectorizer(TransformerMixin, BaseEstimator):
    """Turn job postings into a :class:`PseudoCorpus`.

    ``fit`` builds the co-occurrence graph; ``transform`` emits the
    pseudo-documents, taking label vectors and label priors from the
    postings it is given.
    """

    def __init__(self, dictionary: SkillDictionary | None = None, multiplicity_mode: str = "weighted",
                 min_support: int = 1):
        self.dictionary = dictionary
        self.multiplicity_mode = multiplicity_mode
        self.min_support = min_support

    def fit(self, postings, y=None):
        postings = list(postings)
        self.skillnet_ = build_skillnet(postings)
        return self

    def transform(self, postings) -> PseudoCorpus:
        check_is_fitted(self, "skillnet_")
        postings = list(postings)
        docs, self.report_ = make_documents(self.skillnet_, postings, self.multiplicity_mode,
                                            self.min_support)
        if self.dictionary is not None:
            skill_category = self.dictionary.skill_category
            fingerprint = self.dictionary.fingerprint()
            names = [sk.name for sk in self.dictionary.skills]
        else:
            n = max(self.skillnet_.nodes, default=-1) + 1
            skill_category, fingerprint, names = np.zeros(n, dtype=np.int64), None, None
        return PseudoCorpus(docs, skill_category, N_LABELS, label_priors(postings),
                            fingerprint, names)
