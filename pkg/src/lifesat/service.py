"""HTTP deployment surface: questionnaire payload, prediction with
explanation, and health reporting over a read-only artifact.

The artifact is loaded once and never mutated; request handling is stateless
and no request data is persisted.
"""
from __future__ import annotations

import asyncio
import time
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .artifact import ModelArtifact
from .explain import explain_instance

DEFAULT_EXPLAIN_SAMPLES = 2000
EXPLAIN_SEED = 0  # fixed so identical requests return identical responses


class PredictRequest(BaseModel):
    answers: dict[str, float]


def questionnaire_payload(artifact: ModelArtifact) -> dict:
    """Items for every code a prediction request must answer."""
    items = []
    marginals = dict(zip(artifact.discretizer.codes,
                         artifact.discretizer.marginals))
    for code in artifact.input_codes:
        try:
            col = artifact.schema.column(code)
            prompt, kind, categories, domain = (col.prompt, col.kind,
                                                col.categories, col.domain)
        except KeyError:  # PCA components or synthetic codes
            prompt, kind, categories, domain = (code, "numeric", (), "")
        item: dict = {
            "code": code,
            "prompt": prompt or code,
            "kind": kind,
            "category": domain or "other",
        }
        if kind == "ordinal":
            item["options"] = [{"value": i, "label": label}
                               for i, label in enumerate(categories)]
        else:
            seen = marginals.get(code)
            if seen is not None and seen.size:
                item["range"] = {"min": float(seen.min()),
                                 "max": float(seen.max())}
        items.append(item)
    return {"items": items, "artifact_fingerprint": artifact.fingerprint}


def validate_answers(artifact: ModelArtifact,
                     answers: dict[str, float]) -> Optional[dict]:
    """Structured validation error body, or None when the request is valid."""
    codes = artifact.input_codes
    missing = [c for c in codes if c not in answers]
    unknown = [c for c in answers if c not in codes]
    out_of_range = []
    for code in codes:
        if code in missing:
            continue
        value = answers[code]
        if not np.isfinite(value):
            out_of_range.append({"code": code, "value": value,
                                 "reason": "not a finite number"})
            continue
        try:
            col = artifact.schema.column(code)
        except KeyError:
            continue
        if col.kind == "ordinal":
            if float(value) != int(value) or not (
                0 <= int(value) < len(col.categories)
            ):
                out_of_range.append({
                    "code": code,
                    "value": value,
                    "reason": f"expected an integer in [0, "
                              f"{len(col.categories) - 1}]",
                })
    if missing or unknown or out_of_range:
        return {
            "error": "validation",
            "missing_codes": missing,
            "unknown_codes": sorted(unknown),
            "out_of_range": out_of_range,
        }
    return None


def create_app(
    artifact: Optional[ModelArtifact],
    max_concurrency: int = 8,
    explain_samples: int = DEFAULT_EXPLAIN_SAMPLES,
    static_dir: Optional[str] = None,
) -> FastAPI:
    """Build the service app around one immutable artifact."""
    app = FastAPI(title="lifesat", version="0.1.0")
    app.state.artifact = artifact
    app.state.started = time.monotonic()
    app.state.semaphore = asyncio.Semaphore(max(1, max_concurrency))
    app.state.explain_samples = explain_samples

    def require_artifact() -> ModelArtifact:
        if app.state.artifact is None:
            raise HTTPException(status_code=503,
                                detail="no artifact loaded")
        return app.state.artifact

    @app.get("/questionnaire")
    def get_questionnaire():
        return questionnaire_payload(require_artifact())

    @app.get("/health")
    def get_health():
        loaded = app.state.artifact is not None
        return {
            "status": "ok" if loaded else "degraded",
            "artifact_fingerprint": (app.state.artifact.fingerprint
                                     if loaded else None),
            "format_version": (app.state.artifact.format_version
                               if loaded else None),
            "uptime_seconds": time.monotonic() - app.state.started,
        }

    @app.post("/predict")
    async def post_predict(request: PredictRequest,
                           full: bool = Query(default=False)):
        art = require_artifact()
        issue = validate_answers(art, request.answers)
        if issue is not None:
            return JSONResponse(status_code=422, content=issue)
        async with app.state.semaphore:
            row = art.model_input(request.answers)
            model = art.models[art.primary_model]
            explanation = explain_instance(
                model, row[0], art.discretizer,
                n_samples=app.state.explain_samples, seed=EXPLAIN_SEED,
            )
        p_discontent, p_content = explanation.class_probs
        label = "Content" if p_content >= p_discontent else "Discontent"
        rules = [
            {"code": code, "rule": rule, "weight": weight}
            for code, rule, weight in explanation.contributions
        ]
        if not full:
            rules = rules[:10]
        return {
            "label": label,
            "probabilities": {"discontent": p_discontent,
                              "content": p_content},
            "explanation": {
                "intercept": explanation.intercept,
                "fidelity": explanation.fidelity,
                "rules": rules,
            },
            "artifact_fingerprint": art.fingerprint,
            "model": art.primary_model,
        }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app
