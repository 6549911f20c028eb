"""Rank job skills by popularity under combinations of job criteria."""
from .baselines import FrequencyRanker, LabeledLDA, frequency_popularity, llda_train
from .corpus import (JobPosting, SkillDictionary, extract_skills, load_skill_dictionary, parse_postings,
                     read_postings, read_skill_dictionary)
from .documents import PseudoCorpus, PseudoDocument
from .skillnet import SkillNet, SkillNetVectorizer, build_skillnet, criteria_vector, make_documents
from .sptm import SPTM, Hyperparameters, held_out_log_likelihood, train
from .taxonomy import LABELS, N_LABELS, CriteriaLabel, parse_label

__version__ = "0.1.0"

__all__ = [
    "FrequencyRanker", "LabeledLDA", "frequency_popularity", "llda_train", "JobPosting", "SkillDictionary",
    "extract_skills", "load_skill_dictionary", "parse_postings", "read_postings", "read_skill_dictionary",
    "PseudoCorpus", "PseudoDocument", "SkillNet", "SkillNetVectorizer", "build_skillnet", "criteria_vector",
    "make_documents", "SPTM", "Hyperparameters", "held_out_log_likelihood", "train", "LABELS", "N_LABELS",
    "CriteriaLabel", "parse_label",
]
