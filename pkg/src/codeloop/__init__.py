"""codeloop: search-generate-repair automatic programming pipeline."""

__version__ = "0.1.0"
