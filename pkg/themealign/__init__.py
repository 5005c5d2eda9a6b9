"""
ThemeAlign
Thematic segment alignment for comparable corpora in one or two languages
"""

__version__ = "1.0.0"
