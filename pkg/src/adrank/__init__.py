"""adrank: rank action-reason statements against ad-style images using
visual-semantic projections, scene-text attention and lexical tf-idf scoring."""

from .kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
