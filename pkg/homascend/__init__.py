"""
homascend.

Exact homological algebra over finite-dimensional local algebras: ascent and
descent of module structures along local homomorphisms, with a batch CLI.
"""
from homascend.core.config import settings

__version__ = settings.SERVICE_VERSION

__all__ = ["settings", "__version__"]
