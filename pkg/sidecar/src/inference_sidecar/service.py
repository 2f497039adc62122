"""HTTP endpoints implementing the embedding/entailment wire protocol.

POST /embed   {"texts": [...]}                      -> {"dim": D, "vectors": [[...]]}
POST /entail  {"pairs": [{"premise","hypothesis"}]} -> {"probs": [...]}
GET  /health                                        -> {"status": "ok", ...}

400 for malformed bodies, 413 when a batch exceeds max_batch, 503 while
models are still loading. When server-side truncation to max_seq_len
was applied, the response carries an "x-truncated: true" header.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .models import ModelBundle, SidecarConfig

__all__ = ["create_app"]

TRUNCATION_HEADER = "x-truncated"


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


async def _read_body(request: Request):
    try:
        return json.loads(await request.body())
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None


def create_app(bundle: ModelBundle | None, config: SidecarConfig) -> FastAPI:
    """Build the service; pass bundle=None to model the still-loading state."""
    app = FastAPI(title="inference-sidecar")
    app.state.bundle = bundle
    app.state.config = config

    @app.get("/health")
    def health():
        bundle = app.state.bundle
        body = {
            "status": "ok" if bundle is not None else "loading",
            "embed_model": config.embed_model,
            "nli_model": config.nli_model,
            "max_seq_len": config.max_seq_len,
            "max_batch": config.max_batch,
        }
        if bundle is not None:
            body["dim"] = bundle.dim
        return JSONResponse(body, status_code=200 if bundle is not None else 503)

    @app.post("/embed")
    async def embed(request: Request):
        bundle = app.state.bundle
        if bundle is None:
            return _error(503, "models are still loading")
        body = await _read_body(request)
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        texts = body.get("texts")
        if (
            not isinstance(texts, list)
            or not texts
            or not all(isinstance(t, str) and t.strip() for t in texts)
        ):
            return _error(400, "texts must be a non-empty list of non-empty strings")
        if len(texts) > config.max_batch:
            return _error(413, f"batch of {len(texts)} exceeds max_batch {config.max_batch}")
        vectors, truncated = bundle.embed(texts)
        headers = {TRUNCATION_HEADER: "true"} if truncated else {}
        return JSONResponse({"dim": bundle.dim, "vectors": vectors}, headers=headers)

    @app.post("/entail")
    async def entail(request: Request):
        bundle = app.state.bundle
        if bundle is None:
            return _error(503, "models are still loading")
        body = await _read_body(request)
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        pairs = body.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            return _error(400, "pairs must be a non-empty list")
        cleaned: list[tuple[str, str]] = []
        for item in pairs:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("premise"), str)
                or not isinstance(item.get("hypothesis"), str)
            ):
                return _error(400, "each pair needs string premise and hypothesis")
            cleaned.append((item["premise"], item["hypothesis"]))
        if len(cleaned) > config.max_batch:
            return _error(413, f"batch of {len(cleaned)} exceeds max_batch {config.max_batch}")
        probs, truncated = bundle.entail(cleaned)
        headers = {TRUNCATION_HEADER: "true"} if truncated else {}
        return JSONResponse({"probs": probs}, headers=headers)

    return app
