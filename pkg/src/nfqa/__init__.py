"""Toolkit for silver-labeled multilingual non-factoid QA corpora:
curation from news-article HTML, paragraph-selection instance building,
lexical and external scoring backends, and the evaluation metric suite.
"""

__version__ = "0.1.0"
