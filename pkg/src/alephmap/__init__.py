"""Per-pixel spatiotemporal error-tolerance (aleph) maps for rendering."""
from __future__ import annotations

__version__ = "0.1.0"
