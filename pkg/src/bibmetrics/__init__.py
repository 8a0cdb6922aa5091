"""Bibliographic-export analytics: parsing, cleaning, collaboration graphs,
centrality, trend and relevance scoring, and LaTeX report generation."""

__version__ = "0.1.0"
