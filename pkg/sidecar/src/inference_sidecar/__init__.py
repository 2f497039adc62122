"""HTTP sidecar serving sentence embeddings and entailment probabilities."""

from .models import ModelBundle, SidecarConfig, resolve_entailment_index
from .service import create_app

__all__ = ["ModelBundle", "SidecarConfig", "create_app", "resolve_entailment_index"]

__version__ = "0.1.0"
