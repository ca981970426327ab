"""Embed and rank knowledge-graph entities that were unseen during training."""

__all__ = ["__version__"]
__version__ = "0.1.0"
