"""Class-algebra ontology reasoning engine."""

__version__ = "0.1.0"
