"""SARA: selection/acquisition/refinement/analysis pipeline for app-store review corpora."""

__version__ = "0.1.0"
