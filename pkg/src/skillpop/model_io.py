"""Versioned, checksummed model files.

A model file is a single UTF-8 JSON object written with sorted keys::

    {"checksum": <sha256 hex of the canonical body>,
     "body": {"format_version": 1,
              "kind": "sptm" | "llda" | "frequency",
              "header": {"K", "S", "L", "M", "seed", "dictionary_hash"},
              "params": <estimator get_params()>,
              "payload": <count tables, priors, training metadata>}}

Floats are written with ``repr`` precision, so a round trip is lossless.
Nothing time-dependent is stored, so equal inputs give equal bytes.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .baselines import FrequencyRanker, LabeledLDA
from .exceptions import CorruptModel, VersionMismatch
from .sptm import SPTM

FORMAT_VERSION = 1

_KINDS = {"sptm": SPTM, "llda": LabeledLDA, "frequency": FrequencyRanker}


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False).encode()


def _kind(model) -> str:
    for kind, cls in _KINDS.items():
        if type(model) is cls:
            return kind
    raise TypeError(f"cannot serialise {type(model).__name__}")


def serialize(model) -> bytes:
    kind = _kind(model)
    if kind == "frequency":
        header = {"K": model.n_labels, "S": int(model.n_skills_), "L": None, "M": None,
                  "seed": None, "dictionary_hash": getattr(model, "dictionary_hash_", None)}
        payload = {"counts": model.counts_.tolist(), "label_prior": model.label_prior_.tolist(),
                   "label_support": model.label_support_.tolist()}
    else:
        header = {"K": int(model.n_topics_), "S": int(model.n_skills_), "L": int(model.n_categories_),
                  "M": int(model.doc_topic_counts_.shape[0]), "seed": model.random_state,
                  "dictionary_hash": model.dictionary_hash_}
        payload = {
            "skill_category": model.skill_category_.tolist(),
            "topic_skill_counts": model.topic_skill_counts_.tolist(),
            "doc_topic_counts": model.doc_topic_counts_.tolist(),
            "doc_category_counts": model.doc_category_counts_.tolist(),
            "lambda": model.lambda_.astype(int).tolist(),
            "central_skills": model.central_skills_.tolist(),
            "label_prior": model.label_prior_.tolist(),
            "skill_names": model.skill_names_,
            "n_iter": int(model.n_iter_),
            "converged": bool(model.converged_),
            "log_likelihood": float(model.log_likelihood_),
        }
    body = {"format_version": FORMAT_VERSION, "kind": kind, "header": header,
            "params": model.get_params(), "payload": payload}
    doc = {"checksum": hashlib.sha256(_canonical(body)).hexdigest(), "body": body}
    return _canonical(doc) + b"\n"


def deserialize(data: bytes, dictionary_hash: str | None = None):
    """Rebuild a fitted model.

    When ``dictionary_hash`` is given it must match the hash stored in the
    file; a mismatch means the skill ids no longer line up.
    """
    try:
        doc = json.loads(data)
        body = doc["body"]
        checksum = doc["checksum"]
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptModel(f"unreadable model file: {exc}") from None
    if hashlib.sha256(_canonical(body)).hexdigest() != checksum:
        raise CorruptModel("checksum mismatch")
    if body.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(f"model format {body.get('format_version')}, reader supports {FORMAT_VERSION}")
    header = body["header"]
    if dictionary_hash is not None and header.get("dictionary_hash") not in (None, dictionary_hash):
        raise VersionMismatch("model was trained against a different skill dictionary")
    try:
        cls = _KINDS[body["kind"]]
        model = cls(**body["params"])
        p = body["payload"]
        if cls is FrequencyRanker:
            model.counts_ = np.asarray(p["counts"], dtype=np.int64).reshape(model.n_labels, header["S"])
            model.n_skills_ = header["S"]
            model.label_prior_ = np.asarray(p["label_prior"], dtype=float)
            model.label_support_ = np.asarray(p["label_support"], dtype=np.int64)
            model.dictionary_hash_ = header.get("dictionary_hash")
            return model
        K, S, L, M = header["K"], header["S"], header["L"], header["M"]
        model.skill_category_ = np.asarray(p["skill_category"], dtype=np.int64)
        model.n_topics_, model.n_skills_, model.n_categories_ = K, S, L
        model.topic_skill_counts_ = np.asarray(p["topic_skill_counts"], dtype=np.int64).reshape(S, K)
        model.doc_topic_counts_ = np.asarray(p["doc_topic_counts"], dtype=np.int64).reshape(M, K)
        model.doc_category_counts_ = np.asarray(p["doc_category_counts"], dtype=np.int64).reshape(M, L)
        model.lambda_ = np.asarray(p["lambda"], dtype=bool).reshape(M, K)
        model.central_skills_ = np.asarray(p["central_skills"], dtype=np.int64)
        model.label_prior_ = np.asarray(p["label_prior"], dtype=float)
        model.skill_names_ = p["skill_names"]
        model.dictionary_hash_ = header["dictionary_hash"]
        model.n_iter_ = p["n_iter"]
        model.converged_ = p["converged"]
        model.log_likelihood_ = p["log_likelihood"]
        model._derive()
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"inconsistent model file: {exc}") from None
    return model


def save_model(model, path: str | Path) -> None:
    Path(path).write_bytes(serialize(model))


def load_model(path: str | Path, dictionary_hash: str | None = None):
    return deserialize(Path(path).read_bytes(), dictionary_hash)
