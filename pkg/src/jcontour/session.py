"""Serialized ask-tell sessions for driving external simulators.

A session file is a single versioned JSON document holding the observation
history, configuration, RNG state, and optimizer bookkeeping of a
:class:`~jcontour.design.JclDesigner`.  Floats survive the round trip
bit-exactly (JSON emits shortest round-trip representations), so a resumed
session continues the exact trace an uninterrupted run would have produced.

Writes are atomic (temp file + rename) and guarded by an advisory file lock:
sessions are single-writer.
"""

from __future__ import annotations

import fcntl
import json
import os
from contextlib import contextmanager

import numpy as np

from .acquisition import JclConfig, McmcSettings
from .design import JclDesigner, _method_rng
from .errors import InvalidArgumentError, InvalidStateError

STATE_VERSION = "1"


def new_session(d: int, config: JclConfig, surrogate_kind: str = "gp") -> JclDesigner:
    """Fresh designer seeded exactly like an in-process jCL run."""
    return JclDesigner(d, config, surrogate_kind, _method_rng("jcl", config.seed))


def _config_to_dict(config: JclConfig) -> dict:
    return {
        "targets": list(config.targets),
        "w": config.w,
        "p_star": config.p_star,
        "epsilon": config.epsilon,
        "n0": config.n0,
        "n_max": config.n_max,
        "scan_per_dim": config.scan_per_dim,
        "starts_per_dim": config.starts_per_dim,
        "max_evals_per_start": config.max_evals_per_start,
        "mcmc": {
            "n_iter": config.mcmc.n_iter,
            "burn": config.mcmc.burn,
            "thin": config.mcmc.thin,
        },
        "seed": config.seed,
    }


def _config_from_dict(doc: dict) -> JclConfig:
    doc = dict(doc)
    doc["targets"] = np.asarray(doc["targets"], dtype=float)
    doc["mcmc"] = McmcSettings(**doc["mcmc"])
    return JclConfig(**doc)


def designer_to_state(designer: JclDesigner) -> dict:
    return {
        "version": STATE_VERSION,
        "d": designer.d,
        "surrogate": designer.surrogate_kind,
        "config": _config_to_dict(designer.config),
        "rng": designer.rng.bit_generator.state,
        "X": designer.data.X.tolist(),
        "Y": designer.data.Y.tolist(),
        "pending_initial": [list(x) for x in designer.pending_initial],
        "previous_opt": (
            None if designer.previous_opt is None else list(designer.previous_opt)
        ),
    }


def designer_from_state(doc: dict) -> JclDesigner:
    from .data import Dataset

    if doc.get("version") != STATE_VERSION:
        raise InvalidStateError(
            f"stale or unknown state version {doc.get('version')!r}; "
            f"expected {STATE_VERSION!r}"
        )
    config = _config_from_dict(doc["config"])
    designer = JclDesigner.__new__(JclDesigner)
    designer.d = int(doc["d"])
    designer.config = config
    designer.surrogate_kind = doc["surrogate"]
    designer.rng = np.random.default_rng()
    designer.rng.bit_generator.state = doc["rng"]
    X = np.asarray(doc["X"], dtype=float).reshape(-1, designer.d)
    Y = np.asarray(doc["Y"], dtype=float).reshape(len(X), -1) if len(X) else None
    designer.data = (
        Dataset(X, Y) if len(X) else Dataset.empty(designer.d, len(config.targets))
    )
    designer.pending_initial = [
        np.asarray(x, dtype=float) for x in doc["pending_initial"]
    ]
    designer.previous_opt = (
        None
        if doc["previous_opt"] is None
        else np.asarray(doc["previous_opt"], dtype=float)
    )
    designer.last_suggestion = None
    return designer


@contextmanager
def session_lock(path: str):
    """Advisory single-writer lock on a session file's sidecar."""
    lock_path = path + ".lock"
    with open(lock_path, "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def save_session(designer: JclDesigner, path: str):
    """Atomic write: temp file in the same directory, then rename."""
    doc = designer_to_state(designer)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_session(path: str) -> JclDesigner:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InvalidStateError(f"no session at {path}; run init first") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"malformed session file: {exc}") from None
    return designer_from_state(doc)
