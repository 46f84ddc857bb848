"""Classify explanation requirements, encode them in RDF, and generate explanations from audit trails."""

from .errors import PleadError
from .registry import ExplanationRequirement, Registry, lint_registry, load_registry, load_registry_file, matrix
from .taxonomy import Classification, vocabulary

__all__ = [
    "Classification",
    "ExplanationRequirement",
    "PleadError",
    "Registry",
    "lint_registry",
    "load_registry",
    "load_registry_file",
    "matrix",
    "vocabulary",
]

__version__ = "0.1.0"
