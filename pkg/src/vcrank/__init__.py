"""Concept-level sensitivity audits for a toy multimodal classifier."""

__version__ = "0.1.0"
