"""Non-Archimedean homological algebra over the Novikov field."""

__version__ = "0.1.0"
