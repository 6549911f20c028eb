"""Topic quality, resume scoring and rank correlation."""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .exceptions import DegenerateInput, IncompleteJudgments, LengthMismatch, MalformedRecord, TopicOutOfRange

logger = logging.getLogger(__name__)


def top_k_skills(model, topic: int, k: int = 8) -> list[tuple[int, float]]:
    """The ``k`` skills with the highest topic posterior, best first."""
    if not 0 <= topic < model.n_topics_:
        raise TopicOutOfRange(f"topic {topic} outside [0, {model.n_topics_})")
    col = model.components_[:, topic]
    order = np.lexsort((np.arange(len(col)), -col))[:k]
    return [(int(s), float(col[s])) for s in order]


# ---------------------------------------------------------------------------
# expert judgments

@dataclass(frozen=True)
class Judgment:
    judge_id: str
    topic_id: int
    skill: str
    relevant: int


@dataclass
class VMCM:
    per_judge: dict[str, tuple[float, float]]
    vm: float
    cm: float


def read_judgments(path: str | Path) -> list[Judgment]:
    """Read a ``judge_id,topic_id,skill,relevant`` CSV."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            try:
                out.append(Judgment(row["judge_id"], int(row["topic_id"]), row["skill"], int(row["relevant"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(f"bad judgment row {row!r}: {exc}") from None
    return out


def vm_cm(judgments: Iterable[Judgment], k: int = 8, validity_threshold: int = 4) -> VMCM:
    """Validity and coherence measures, per judge and averaged over judges.

    A topic is valid for a judge when at least ``validity_threshold`` of
    its ``k`` listed skills are marked relevant.
    """
    grouped: dict[str, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for j in judgments:
        if j.relevant not in (0, 1):
            raise IncompleteJudgments(f"relevance must be 0 or 1, got {j.relevant!r}")
        grouped[j.judge_id][j.topic_id].append(j.relevant)
    if not grouped:
        raise IncompleteJudgments("no judgments given")
    per_judge = {}
    for judge in sorted(grouped):
        topics = grouped[judge]
        for topic, marks in topics.items():
            if len(marks) != k:
                raise IncompleteJudgments(f"judge {judge} rated {len(marks)} skills of topic {topic}, expected {k}")
        valid = sum(sum(marks) >= validity_threshold for marks in topics.values())
        relevant = sum(sum(marks) for marks in topics.values())
        per_judge[judge] = (valid / len(topics), relevant / (k * len(topics)))
    vm = sum(v for v, _ in per_judge.values()) / len(per_judge)
    cm = sum(c for _, c in per_judge.values()) / len(per_judge)
    return VMCM(per_judge, vm, cm)


# ---------------------------------------------------------------------------
# resumes

@dataclass
class Resume:
    resume_id: str
    hr_score: int
    skills: list[str]


def read_resumes(path: str | Path) -> list[Resume]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                score = int(rec["hr_score"])
                if score not in (0, 1, 2, 3):
                    raise ValueError(f"hr_score {score} not in 0..3")
                out.append(Resume(str(rec["resume_id"]), score, list(rec.get("skills") or [])))
            except (KeyError, TypeError, ValueError) as exc:
                logger.warning("skipping resume on line %d: %s", lineno, exc)
    return out


def resume_skill_score(model, skills: Mapping[int, int] | Iterable[int], criteria) -> float:
    """Frequency-weighted popularity of a resume's skills.

    ``skills`` maps skill id to multiplicity (or is an iterable of ids).
    Ids the model does not know contribute nothing.
    """
    counts = skills if isinstance(skills, Mapping) else Counter(skills)
    if not counts:
        return 0.0
    scores = model.popularity_scores(criteria)
    total = 0.0
    unknown = 0
    for s, c in counts.items():
        if s is None or not 0 <= s < len(scores):
            unknown += c
            continue
        total += c * float(scores[s])
    if unknown:
        logger.warning("%d skill mentions not known to the model were ignored", unknown)
    return total


# ---------------------------------------------------------------------------
# rank correlation

def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"inputs must be 1-d and of equal length, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("need at least two observations")
    return x, y


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    x, y = _check_pair(x, y)
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0:
        raise DegenerateInput("one input has no variance")
    return float(rx @ ry) / denom


def _tie_pairs(*columns: np.ndarray) -> int:
    """Number of pairs equal in every given column."""
    order = np.lexsort(columns[::-1])
    stacked = np.column_stack([c[order] for c in columns])
    breaks = np.flatnonzero((np.diff(stacked, axis=0) != 0).any(axis=1)) + 1
    runs = np.diff(np.concatenate([[0], breaks, [len(order)]]))
    return int((runs * (runs - 1) // 2).sum())


def _discordant_pairs(x: np.ndarray, y: np.ndarray) -> int:
    # after sorting by (x, y), discordant pairs are exactly the strict inversions of y
    order = np.lexsort((y, x))
    ranks = (np.unique(y, return_inverse=True)[1][order] + 1).tolist()
    size = max(ranks)
    tree = [0] * (size + 1)
    inversions = 0
    for seen, r in enumerate(ranks):
        # how many earlier values are <= r
        i, le = r, 0
        while i > 0:
            le += tree[i]
            i -= i & -i
        inversions += seen - le
        i = r
        while i <= size:
            tree[i] += 1
            i += i & -i
    return inversions


def kendall_counts(x, y) -> tuple[int, int, int, int]:
    """``(concordant, discordant, pairs tied in x, pairs tied in y)``.

    A pair tied in both inputs is counted in both tie totals.
    """
    x, y = _check_pair(x, y)
    n = len(x)
    n0 = n * (n - 1) // 2
    tx = _tie_pairs(x)
    ty = _tie_pairs(y)
    txy = _tie_pairs(x, y)
    disc = _discordant_pairs(x, y)
    conc = n0 - tx - ty + txy - disc
    return conc, disc, tx, ty


def tau_b_from_counts(n: int, concordant: int, discordant: int, x_ties: int, y_ties: int) -> float:
    n0 = n * (n - 1) // 2
    denom = (n0 - x_ties) * (n0 - y_ties)
    if denom == 0:
        raise DegenerateInput("one input is constant")
    return (concordant - discordant) / math.sqrt(denom)


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall rank correlation (tau-b)."""
    conc, disc, tx, ty = kendall_counts(x, y)
    return tau_b_from_counts(len(x), conc, disc, tx, ty)


def tau_z_test(tau: float, n: int) -> float:
    """Normal-approximation z statistic of Kendall's tau over ``n`` samples."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return 3.0 * tau * math.sqrt(n * (n - 1)) / math.sqrt(2.0 * (2 * n + 5))


def two_sided_p(z: float) -> float:
    return float(2.0 * norm.sf(abs(z)))


@dataclass
class CorrelationRow:
    model: str
    spearman: float
    kendall_tau: float
    z: float
    p: float
    warning: str = ""


def correlate(model_name: str, skill_scores: Sequence[float], hr_scores: Sequence[int]) -> CorrelationRow:
    """Correlation of skill scores with HR outcomes; degenerate input yields a NaN row."""
    try:
        rho = spearman(skill_scores, hr_scores)
        tau = kendall_tau(skill_scores, hr_scores)
    except (DegenerateInput, LengthMismatch) as exc:
        logger.warning("%s: %s", model_name, exc)
        nan = float("nan")
        return CorrelationRow(model_name, nan, nan, nan, nan, str(exc))
    z = tau_z_test(tau, len(hr_scores))
    return CorrelationRow(model_name, rho, tau, z, two_sided_p(z))
