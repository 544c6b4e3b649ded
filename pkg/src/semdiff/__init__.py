"""Interest diffusion on a two-layer semantic co-authorship multiplex."""

__version__ = "0.1.0"
