"""Batch pipeline for synthesizing code-instruction QA datasets.

Two construction flows (reverse: code snippet to problem; backfeed:
keyword graph to problem), a seven-criteria quality filter, and a
cross-language static-analysis gate over generated responses.
"""

__version__ = "0.1.0"
