"""Pseudo-documents: one central skill, its neighbour tokens and a label mask."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class PseudoDocument:
    central_skill: int
    tokens: tuple[tuple[int, int], ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(sorted((int(s), int(c)) for s, c in self.tokens if c > 0)))
        object.__setattr__(self, "labels", tuple(sorted({int(k) for k in self.labels})))

    @property
    def n_tokens(self) -> int:
        return sum(c for _, c in self.tokens)

    def lambda_vector(self, n_topics: int) -> np.ndarray:
        lam = np.zeros(n_topics, dtype=bool)
        lam[list(self.labels)] = True
        return lam

    def token_array(self) -> np.ndarray:
        """Token skill ids with multiplicity, in ascending skill order."""
        return np.repeat(np.array([s for s, _ in self.tokens], dtype=np.int64),
                         [c for _, c in self.tokens])

    def token_categories(self, skill_category: Sequence[int]) -> np.ndarray:
        return np.asarray(skill_category, dtype=np.int64)[self.token_array()]

    def to_record(self) -> dict:
        return {"central_skill": self.central_skill,
                "tokens": [list(t) for t in self.tokens],
                "lambda": list(self.labels)}

    @classmethod
    def from_record(cls, rec: dict) -> "PseudoDocument":
        return cls(int(rec["central_skill"]), tuple(tuple(t) for t in rec["tokens"]), tuple(rec["lambda"]))


@dataclass
class PseudoCorpus:
    """Documents plus what a model needs to know about the skill space.

    ``label_prior[k]`` is the prior weight of label ``k`` used when ranking;
    it is left as ``None`` when the caller wants it estimated from documents.
    """

    documents: list[PseudoDocument]
    skill_category: np.ndarray
    n_topics: int
    label_prior: np.ndarray | None = None
    dictionary_hash: str | None = None
    skill_names: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.skill_category = np.asarray(self.skill_category, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, idx):
        if isinstance(idx, (slice, np.ndarray, list)):
            if isinstance(idx, slice):
                docs = self.documents[idx]
            else:
                docs = [self.documents[i] for i in np.asarray(idx).tolist()]
            return PseudoCorpus(docs, self.skill_category, self.n_topics, self.label_prior,
                                self.dictionary_hash, self.skill_names)
        return self.documents[idx]

    @property
    def n_skills(self) -> int:
        return len(self.skill_category)

    @property
    def n_categories(self) -> int:
        return int(self.skill_category.max()) + 1 if len(self.skill_category) else 0


def dump_documents(docs: Iterable[PseudoDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_record()) + "\n")


def load_documents(path: str | Path) -> list[PseudoDocument]:
    with open(path, encoding="utf-8") as fh:
        return [PseudoDocument.from_record(json.loads(line)) for line in fh if line.strip()]
