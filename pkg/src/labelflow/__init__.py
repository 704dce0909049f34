"""labelflow: workflow compiler, checker, and engine for data-labeling tools."""

__version__ = "0.1.0"
