"""Computational checks of Hecke-character modularity for CM K3 surfaces over Q(i)."""

__version__ = "0.1.0"
