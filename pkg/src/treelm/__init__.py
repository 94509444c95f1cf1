"""treelm: desk-scale lab for structurally supervised neural language models
and surprisal-based psycholinguistic evaluation."""

__version__ = "0.1.0"
