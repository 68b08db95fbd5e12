"""Versioned model dumps."""

from __future__ import annotations

import pickle

from .base import Predictor

FORMAT = "vivikit-model"
VERSION = 1


def dump_model(model: Predictor, path) -> None:
    with open(path, "wb") as fh:
        pickle.dump({"format": FORMAT, "version": VERSION, "model": model}, fh,
                    protocol=4)


def load_model(path) -> Predictor:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise ValueError(f"{path}: not a model dump")
    if payload.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported dump version {payload.get('version')!r}")
    return payload["model"]
