"""Command-line entry point: load both models, then serve HTTP."""

from __future__ import annotations

import argparse
import sys

from .models import ModelBundle, SidecarConfig
from .service import create_app

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inference-sidecar",
        description="Serve sentence embeddings and entailment probabilities over HTTP.",
    )
    defaults = SidecarConfig()
    parser.add_argument("--embed-model", default=defaults.embed_model,
                        help="sentence-embedding model id or local path")
    parser.add_argument("--nli-model", default=defaults.nli_model,
                        help="NLI classification model id or local path")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=defaults.port)
    parser.add_argument("--max-batch", type=int, default=defaults.max_batch,
                        help="largest accepted request batch; larger ones get 413")
    parser.add_argument("--max-seq-len", type=int, default=defaults.max_seq_len,
                        help="token cap per text; longer inputs are truncated")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = SidecarConfig(
        embed_model=args.embed_model,
        nli_model=args.nli_model,
        port=args.port,
        max_batch=args.max_batch,
        max_seq_len=args.max_seq_len,
    )
    try:
        config.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    # Models must be usable before the port opens; a broken id is a
    # startup failure, not a per-request 500.
    try:
        bundle = ModelBundle(config)
    except Exception as exc:
        print(f"error: failed to load models: {exc}", file=sys.stderr)
        return 1

    import uvicorn

    app = create_app(bundle, config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
