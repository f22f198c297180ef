"""Pipeline for mining log-related issues into a preference-pair dataset
of before/after log statements, plus the matching evaluation metric suite
and human relevance-review tooling."""

__version__ = "0.1.0"
