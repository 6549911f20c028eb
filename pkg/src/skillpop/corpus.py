"""Job postings, the skill dictionary and skill extraction."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from .exceptions import DuplicateSkill, EmptyDictionary, MalformedRecord, UnknownLabel, UnknownSkill
from .taxonomy import Category, CriteriaLabel, get_label

logger = logging.getLogger(__name__)

POSTING_FIELDS = {
    Category.COMPANY_SCALE: "company_scale",
    Category.SALARY: "salary",
    Category.LOCATION: "location",
    Category.FINANCING_ROUND: "financing_round",
    Category.WORK_TYPE: "work_type",
}


def normalize_name(name: str) -> str:
    return " ".join(name.strip().lower().split())


@dataclass(frozen=True)
class Skill:
    id: int
    name: str
    category: int
    aliases: tuple[str, ...] = ()


class SkillDictionary:
    """Bijective skill-name/skill-id map with one category per skill.

    Ids are dense and assigned in first-seen order, both for skills and
    for categories.
    """

    def __init__(self, skills: list[Skill], categories: list[str]):
        if not skills:
            raise EmptyDictionary("skill dictionary has no entries")
        self.skills = list(skills)
        self.categories = list(categories)
        self._by_alias: dict[str, int] = {}
        for sk in self.skills:
            for alias in (sk.name, *sk.aliases):
                key = normalize_name(alias)
                if key in self._by_alias and self._by_alias[key] != sk.id:
                    raise DuplicateSkill(f"skill name or alias {alias!r} appears twice")
                self._by_alias[key] = sk.id
        self._matcher: re.Pattern[str] | None = None

    def __len__(self) -> int:
        return len(self.skills)

    @property
    def n_skills(self) -> int:
        return len(self.skills)

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def skill_category(self) -> list[int]:
        return [sk.category for sk in self.skills]

    def id_of(self, name: str) -> int:
        try:
            return self._by_alias[normalize_name(name)]
        except KeyError:
            raise UnknownSkill(f"skill {name!r} is not in the dictionary") from None

    def get(self, name: str) -> int | None:
        return self._by_alias.get(normalize_name(name))

    def name_of(self, skill_id: int) -> str:
        return self.skills[skill_id].name

    def category_name(self, skill_id: int) -> str:
        return self.categories[self.skills[skill_id].category]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for sk in self.skills:
            h.update(f"{sk.id}\t{normalize_name(sk.name)}\t{sk.category}\n".encode())
        for i, cat in enumerate(self.categories):
            h.update(f"c{i}\t{normalize_name(cat)}\n".encode())
        return h.hexdigest()

    def matcher(self) -> re.Pattern[str]:
        if self._matcher is None:
            aliases = sorted(self._by_alias, key=lambda a: (-len(a), a))
            body = "|".join(re.escape(a).replace(r"\ ", r"\s+") for a in aliases)
            self._matcher = re.compile(rf"(?<!\w)(?:{body})(?!\w)", re.IGNORECASE)
        return self._matcher


def load_skill_dictionary(source: Iterable[Any]) -> SkillDictionary:
    """Build a dictionary from ``(skill, category[, aliases])`` records.

    Records may be tuples or mappings with keys ``skill``, ``category`` and
    optionally ``aliases`` (a ``|``-separated string or a sequence).
    """
    skills: list[Skill] = []
    categories: list[str] = []
    cat_ids: dict[str, int] = {}
    seen: dict[str, str] = {}
    for rec in source:
        if isinstance(rec, Mapping):
            name, cat, aliases = rec["skill"], rec["category"], rec.get("aliases") or ()
        else:
            name, cat, *rest = rec
            aliases = rest[0] if rest and rest[0] else ()
        if isinstance(aliases, str):
            aliases = [a for a in aliases.split("|") if a.strip()]
        name = name.strip()
        if not name or not str(cat).strip():
            raise MalformedRecord(f"dictionary record {rec!r} lacks a skill or category")
        own = {normalize_name(name)}
        kept = []
        for alias in aliases:
            key = normalize_name(alias)
            if key not in own:
                own.add(key)
                kept.append(alias.strip())
        for key in own:
            if not re.search(r"\w", key):
                raise MalformedRecord(f"alias {key!r} has no word character")
            if key in seen:
                raise DuplicateSkill(f"{key!r} is used by both {seen[key]!r} and {name!r}")
            seen[key] = name
        cat_key = normalize_name(str(cat))
        if cat_key not in cat_ids:
            cat_ids[cat_key] = len(categories)
            categories.append(str(cat).strip())
        skills.append(Skill(len(skills), name, cat_ids[cat_key], tuple(kept)))
    if not skills:
        raise EmptyDictionary("skill dictionary source is empty")
    return SkillDictionary(skills, categories)


def read_skill_dictionary(path: str | Path) -> SkillDictionary:
    """Read a ``skill,category,aliases`` CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        return load_skill_dictionary(csv.DictReader(fh))


def write_skill_dictionary(dictionary: SkillDictionary, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["skill", "category", "aliases"])
        for sk in dictionary.skills:
            w.writerow([sk.name, dictionary.categories[sk.category], "|".join(sk.aliases)])


def extract_skills(description: str, dictionary: SkillDictionary) -> Counter:
    """Count dictionary skills mentioned in free text.

    Matching is case-insensitive on word boundaries. Longer aliases are
    tried first, so "JavaScript" is never read as "Java".
    """
    found: Counter = Counter()
    if not description:
        return found
    for match in dictionary.matcher().finditer(description):
        found[dictionary.get(" ".join(match.group(0).split()))] += 1
    return found


@dataclass(frozen=True)
class JobPosting:
    post_id: str
    labels: frozenset = field(default_factory=frozenset)
    skills: Counter = field(default_factory=Counter, hash=False, compare=True)

    def __post_init__(self):
        cats = [lab.category for lab in self.labels if isinstance(lab, CriteriaLabel)]
        if len(cats) != len(set(cats)):
            raise MalformedRecord(f"posting {self.post_id}: two labels share a category")

    @property
    def label_indices(self) -> list[int]:
        return sorted(lab.global_index if isinstance(lab, CriteriaLabel) else int(lab)
                      for lab in self.labels)

    def skill_set(self) -> set[int]:
        return {s for s, c in self.skills.items() if c > 0}


# ---------------------------------------------------------------------------
# criteria parsing

_NUM = r"(\d+(?:\.\d+)?)\s*(k|w|万)?"
_SALARY_BANDS = [(30.0, "very_high"), (20.0, "high"), (10.0, "medium"), (5.0, "low"), (0.0, "very_low")]
_SCALE_BANDS = [(2000.0, "very_big"), (500.0, "big"), (100.0, "medium"), (50.0, "small"), (0.0, "very_small")]
_STOP_WORDS = {"salary", "company", "cities", "city", "round", "series", "financing"}


def _band(value: float, bands) -> str:
    for lower, name in bands:
        if value >= lower:
            return name
    return bands[-1][1]


def _numbers(text: str) -> list[float]:
    scale = {"k": 1000.0, "w": 10000.0, "万": 10000.0}
    found = re.findall(_NUM, text.lower())
    # "8-10k": a bare number in a range borrows the unit written after it
    units = [u for _, u in found if u]
    out = []
    for num, unit in found:
        unit = unit or (units[-1] if units and float(num) < 1000 else "")
        out.append(float(num) * scale.get(unit, 1.0))
    return out


def _word_value(text: str) -> str:
    words = [w for w in re.split(r"[\s_\-]+", text.strip().lower()) if w and w not in _STOP_WORDS]
    return "_".join(words)


def parse_salary(raw: Any) -> CriteriaLabel:
    """Map a salary string to its band; monthly thresholds are half-open."""
    text = str(raw).strip().lower()
    nums = _numbers(text)
    if not nums:
        return get_label(Category.SALARY, _word_value(text))
    monthly = sum(nums[:2]) / len(nums[:2])
    if monthly < 1000:
        # bare small numbers are read as thousands
        monthly *= 1000
    if re.search(r"year|annual|/y\b|per y", text):
        monthly /= 12.0
    if len(nums) == 1 and re.search(r"<|less|under|below", text):
        monthly -= 1.0
    return get_label(Category.SALARY, _band(monthly / 1000.0, _SALARY_BANDS))


def parse_company_scale(raw: Any) -> CriteriaLabel:
    text = str(raw).strip().lower()
    nums = _numbers(text)
    if not nums:
        return get_label(Category.COMPANY_SCALE, _word_value(text))
    if len(nums) >= 2:
        count = (nums[0] + nums[1]) / 2
    elif re.search(r"<|less|under|fewer|below", text):
        count = nums[0] - 1
    else:
        count = nums[0] + (1 if re.search(r">|\+|more|over|above", text) else 0)
    return get_label(Category.COMPANY_SCALE, _band(count, _SCALE_BANDS))


def parse_location(raw: Any) -> CriteriaLabel:
    return get_label(Category.LOCATION, _word_value(str(raw)))


def parse_financing(raw: Any) -> CriteriaLabel:
    value = _word_value(str(raw))
    value = {"ipo": "listed", "public": "listed", "seed": "angel"}.get(value, value)
    return get_label(Category.FINANCING_ROUND, value)


def parse_work_type(raw: Any) -> CriteriaLabel:
    value = _word_value(str(raw)).replace("_", "")
    value = {"fulltime": "fulltime", "parttime": "parttime", "intern": "intern",
             "internship": "intern"}.get(value, value)
    return get_label(Category.WORK_TYPE, value)


_PARSERS = {
    Category.SALARY: parse_salary,
    Category.COMPANY_SCALE: parse_company_scale,
    Category.LOCATION: parse_location,
    Category.FINANCING_ROUND: parse_financing,
    Category.WORK_TYPE: parse_work_type,
}


def _missing(value: Any) -> bool:
    return value is None or (isinstance(value, str) and value.strip() == "")


def parse_labels(record: Mapping[str, Any]) -> frozenset:
    labels = set()
    for cat, key in POSTING_FIELDS.items():
        value = record.get(key)
        if _missing(value):
            if cat is Category.FINANCING_ROUND:
                labels.add(get_label(cat, "unknown"))
            continue
        try:
            labels.add(_PARSERS[cat](value))
        except UnknownLabel as exc:
            raise MalformedRecord(str(exc)) from None
    return frozenset(labels)


@dataclass
class IngestReport:
    n_records: int = 0
    n_parsed: int = 0
    n_malformed: int = 0
    n_no_skill: int = 0

    @property
    def n_dropped(self) -> int:
        return self.n_malformed + self.n_no_skill


def parse_posting(record: Mapping[str, Any], dictionary: SkillDictionary) -> JobPosting:
    if not isinstance(record, Mapping) or _missing(record.get("post_id")):
        raise MalformedRecord(f"record lacks a post_id: {record!r:.80}")
    labels = parse_labels(record)
    names = record.get("skills")
    if names is not None:
        if isinstance(names, str) or not isinstance(names, (list, tuple)):
            raise MalformedRecord(f"posting {record['post_id']}: skills must be a list of names")
        skills = Counter(s for s in map(dictionary.get, names) if s is not None)
    else:
        desc = record.get("description") or ""
        if not isinstance(desc, str):
            raise MalformedRecord(f"posting {record['post_id']}: description must be text")
        skills = extract_skills(desc, dictionary)
    return JobPosting(str(record["post_id"]), labels, skills)


def parse_postings(source: Iterable[Any], dictionary: SkillDictionary) -> tuple[list[JobPosting], IngestReport]:
    """Parse posting records, dropping malformed and skill-less ones.

    ``source`` yields mappings or JSON strings. Output order follows input
    order.
    """
    report = IngestReport()
    out = []
    for lineno, rec in enumerate(source, 1):
        report.n_records += 1
        try:
            if isinstance(rec, (str, bytes)):
                rec = json.loads(rec)
            posting = parse_posting(rec, dictionary)
        except (MalformedRecord, json.JSONDecodeError, TypeError, ValueError) as exc:
            report.n_malformed += 1
            logger.warning("skipping malformed record %d: %s", lineno, exc)
            continue
        if not posting.skills:
            report.n_no_skill += 1
            continue
        out.append(posting)
    report.n_parsed = len(out)
    if report.n_dropped:
        logger.info("parsed %d postings, dropped %d (%d malformed, %d without skills)",
                    report.n_parsed, report.n_dropped, report.n_malformed, report.n_no_skill)
    return out, report


def _iter_lines(path: str | Path) -> Iterator[str]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield line


def read_postings(path: str | Path, dictionary: SkillDictionary) -> tuple[list[JobPosting], IngestReport]:
    return parse_postings(_iter_lines(path), dictionary)


def posting_to_record(posting: JobPosting, dictionary: SkillDictionary) -> dict:
    rec: dict[str, Any] = {"post_id": posting.post_id}
    by_cat = {lab.category: lab for lab in posting.labels}
    for cat, key in POSTING_FIELDS.items():
        rec[key] = by_cat[cat].value if cat in by_cat else None
    rec["skills"] = [dictionary.name_of(s) for s in sorted(posting.skills)
                     for _ in range(posting.skills[s])]
    return rec


def write_postings(postings: Iterable[JobPosting], dictionary: SkillDictionary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in postings:
            fh.write(json.dumps(posting_to_record(p, dictionary), ensure_ascii=False) + "\n")
