"""Query non-RDF sources (CSV, JSON, XML, HTML, YAML, Markdown, ...) with SPARQL
through the Façade-X meta-model and ``x-sparql-anything:`` SERVICE clauses."""

__version__ = "0.1.0"
