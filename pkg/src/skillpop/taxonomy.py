"""The fixed 23-label job criteria taxonomy.

Labels are declared in a fixed order; ``global_index`` is the position in
that order and doubles as the topic index bound to the label.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable

from .exceptions import UnknownLabel


class Category(enum.Enum):
    SALARY = "salary"
    COMPANY_SCALE = "scale"
    LOCATION = "location"
    FINANCING_ROUND = "financing"
    WORK_TYPE = "work_type"


# (category, value slug, display name); declaration order fixes global_index
_DECLARED = [
    (Category.SALARY, "very_high", "Very High Salary"),
    (Category.SALARY, "high", "High Salary"),
    (Category.SALARY, "medium", "Medium Salary"),
    (Category.SALARY, "low", "Low Salary"),
    (Category.SALARY, "very_low", "Very Low Salary"),
    (Category.COMPANY_SCALE, "very_big", "Very Big Company"),
    (Category.COMPANY_SCALE, "big", "Big Company"),
    (Category.COMPANY_SCALE, "medium", "Medium Company"),
    (Category.COMPANY_SCALE, "small", "Small Company"),
    (Category.COMPANY_SCALE, "very_small", "Very Small Company"),
    (Category.LOCATION, "huge", "Huge Cities"),
    (Category.LOCATION, "big", "Big Cities"),
    (Category.LOCATION, "normal", "Normal Cities"),
    (Category.FINANCING_ROUND, "angel", "Angel Round"),
    (Category.FINANCING_ROUND, "a", "A Round"),
    (Category.FINANCING_ROUND, "b", "B Round"),
    (Category.FINANCING_ROUND, "c", "C Round"),
    (Category.FINANCING_ROUND, "d", "D Round"),
    (Category.FINANCING_ROUND, "listed", "Listed"),
    (Category.FINANCING_ROUND, "unknown", "Unknown Financing"),
    (Category.WORK_TYPE, "fulltime", "Fulltime"),
    (Category.WORK_TYPE, "parttime", "Part-time"),
    (Category.WORK_TYPE, "intern", "Intern"),
]

N_LABELS = len(_DECLARED)

CATEGORY_ALIASES = {
    "salary": Category.SALARY,
    "scale": Category.COMPANY_SCALE,
    "company_scale": Category.COMPANY_SCALE,
    "company": Category.COMPANY_SCALE,
    "location": Category.LOCATION,
    "city": Category.LOCATION,
    "financing": Category.FINANCING_ROUND,
    "financing_round": Category.FINANCING_ROUND,
    "financial_round": Category.FINANCING_ROUND,
    "work_type": Category.WORK_TYPE,
    "worktype": Category.WORK_TYPE,
}


@dataclass(frozen=True, order=True)
class CriteriaLabel:
    global_index: int
    category: Category
    value: str
    name: str

    @property
    def slug(self) -> str:
        return f"{self.category.value}={self.value}"

    def __str__(self) -> str:
        return self.slug


LABELS: tuple[CriteriaLabel, ...] = tuple(
    CriteriaLabel(i, cat, value, name) for i, (cat, value, name) in enumerate(_DECLARED)
)

_BY_KEY = {(lab.category, lab.value): lab for lab in LABELS}


def _slugify(text: str) -> str:
    text = text.strip().lower()
    text = re.sub(r"[\s\-]+", "_", text)
    return re.sub(r"[^a-z0-9_]", "", text)


def labels_in(category: Category) -> list[CriteriaLabel]:
    return [lab for lab in LABELS if lab.category is category]


def get_label(category: Category | str, value: str) -> CriteriaLabel:
    if not isinstance(category, Category):
        key = _slugify(category)
        if key not in CATEGORY_ALIASES:
            raise UnknownLabel(
                f"unknown criteria category {category!r}; "
                f"valid: {', '.join(c.value for c in Category)}"
            )
        category = CATEGORY_ALIASES[key]
    lab = _BY_KEY.get((category, _slugify(value)))
    if lab is None:
        valid = ", ".join(lab.value for lab in labels_in(category))
        raise UnknownLabel(f"unknown {category.value} value {value!r}; valid values: {valid}")
    return lab


def parse_label(slug: str) -> CriteriaLabel:
    """Parse a ``category=value`` slug such as ``salary=very_high``."""
    if "=" not in slug:
        raise UnknownLabel(f"criteria must look like category=value, got {slug!r}")
    category, value = slug.split("=", 1)
    return get_label(category, value)


def label_index(label: CriteriaLabel | int) -> int:
    if isinstance(label, CriteriaLabel):
        return label.global_index
    return int(label)


def indices(labels: Iterable[CriteriaLabel | int]) -> list[int]:
    return sorted({label_index(lab) for lab in labels})
