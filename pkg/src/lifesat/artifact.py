"""Versioned, checksummed model artifact: everything needed to serve
predictions without the original training config.
"""
from __future__ import annotations

import gzip
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Schema
from .explain import DiscretizerStats
from .learners import ClassifierModel, model_from_dict
from .preprocess import FittedPreprocessor
from .selection import PcaModel

FORMAT_VERSION = 1


class ArtifactError(RuntimeError):
    """Version mismatch, checksum failure, or corrupt artifact file."""


def _canonical_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def _checksum(payload: dict) -> str:
    return hashlib.sha256(_canonical_bytes(payload)).hexdigest()


@dataclass
class ModelArtifact:
    """Self-describing bundle of the fitted pipeline.

    ``schema`` is the original input schema (used to parse evaluation CSVs);
    ``selection_mode`` with ``selected_codes`` or ``pca`` describes the
    feature stage; ``models`` maps roster names to fitted classifiers with
    ``primary_model`` naming the one served by default.
    """

    schema: Schema
    preprocessor: FittedPreprocessor
    selection_mode: str
    selected_codes: tuple[str, ...]
    pca: Optional[PcaModel]
    models: dict[str, ClassifierModel]
    primary_model: str
    discretizer: DiscretizerStats
    config_fingerprint: str
    format_version: int = FORMAT_VERSION
    fingerprint: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.primary_model not in self.models:
            raise ValueError(
                f"primary model {self.primary_model!r} not in roster "
                f"{sorted(self.models)}"
            )
        if not self.fingerprint:
            object.__setattr__(self, "fingerprint", _checksum(self._payload()))

    @property
    def input_codes(self) -> tuple[str, ...]:
        """Feature codes a serving request must answer."""
        if self.selection_mode in ("pca95", "pca90"):
            return self.preprocessor.output_codes
        return self.selected_codes

    def prepare_row(self, answers: dict[str, float]) -> np.ndarray:
        """Validated feature vector: clamp outliers, project if PCA mode."""
        codes = self.input_codes
        missing = [c for c in codes if c not in answers]
        if missing:
            raise KeyError(f"missing answers for codes: {missing}")
        stats = self.preprocessor.outlier_stats
        pos = {c: i for i, c in enumerate(stats.codes)}
        row = np.empty(len(codes))
        for i, code in enumerate(codes):
            v = float(answers[code])
            j = pos.get(code)
            if j is not None and stats.std[j] > 0:
                lo = stats.mean[j] - 2.0 * stats.std[j]
                hi = stats.mean[j] + 2.0 * stats.std[j]
                if v < lo or v > hi:
                    v = float(stats.median[j])
            row[i] = v
        if self.pca is not None:
            return self.pca.transform(row.reshape(1, -1))[0]
        return row

    def model_input(self, answers: dict[str, float]) -> np.ndarray:
        return self.prepare_row(answers).reshape(1, -1)

    def _payload(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "preprocessor": self.preprocessor.to_dict(),
            "selection_mode": self.selection_mode,
            "selected_codes": list(self.selected_codes),
            "pca": None if self.pca is None else self.pca.to_dict(),
            "models": {name: m.to_dict() for name, m in self.models.items()},
            "primary_model": self.primary_model,
            "discretizer": self.discretizer.to_dict(),
            "config_fingerprint": self.config_fingerprint,
        }

    @classmethod
    def _from_payload(cls, payload: dict, fingerprint: str) -> "ModelArtifact":
        return cls(
            schema=Schema.from_dict(payload["schema"]),
            preprocessor=FittedPreprocessor.from_dict(payload["preprocessor"]),
            selection_mode=payload["selection_mode"],
            selected_codes=tuple(payload["selected_codes"]),
            pca=None if payload["pca"] is None
            else PcaModel.from_dict(payload["pca"]),
            models={name: model_from_dict(d)
                    for name, d in payload["models"].items()},
            primary_model=payload["primary_model"],
            discretizer=DiscretizerStats.from_dict(payload["discretizer"]),
            config_fingerprint=payload["config_fingerprint"],
            fingerprint=fingerprint,
        )


def save_artifact(artifact: ModelArtifact, path: str | Path) -> str:
    """Write the artifact with format version and payload checksum.

    A ``.gz`` suffix gzips the file. Returns the checksum.
    """
    path = Path(path)
    payload = artifact._payload()
    checksum = _checksum(payload)
    document = {
        "format_version": artifact.format_version,
        "checksum": checksum,
        "payload": payload,
    }
    raw = json.dumps(document).encode()
    if path.suffix == ".gz":
        path.write_bytes(gzip.compress(raw))
    else:
        path.write_bytes(raw)
    object.__setattr__(artifact, "fingerprint", checksum)
    return checksum


def load_artifact(path: str | Path) -> ModelArtifact:
    """Load and verify an artifact; never returns a partially-read model."""
    path = Path(path)
    try:
        raw = path.read_bytes()
        if path.suffix == ".gz":
            raw = gzip.decompress(raw)
        document = json.loads(raw)
    except (OSError, ValueError, gzip.BadGzipFile) as exc:
        raise ArtifactError(f"{path}: corrupt or unreadable artifact: {exc}") from exc
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ArtifactError(
            f"{path}: artifact format version {version} is not supported "
            f"(this build reads version {FORMAT_VERSION})"
        )
    payload = document.get("payload")
    stored = document.get("checksum")
    if payload is None or stored is None:
        raise ArtifactError(f"{path}: artifact is missing payload or checksum")
    actual = _checksum(payload)
    if actual != stored:
        raise ArtifactError(
            f"{path}: checksum mismatch (stored {stored[:12]}..., "
            f"computed {actual[:12]}...)"
        )
    return ModelArtifact._from_payload(payload, stored)
