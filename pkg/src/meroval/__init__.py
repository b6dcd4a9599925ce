"""Cross-validation of WordNet meronymy against a formal ontology.

The pipeline parses WordNet database files, maps synsets onto ontology
concepts, generates competency questions for each meronymy pair, decides
them with a prover portfolio, and aggregates verdicts into
recall/precision/F1 reports that drive a three-phase correction process.
"""

__version__ = "0.1.0"
