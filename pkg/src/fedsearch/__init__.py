"""Federated full-text search over partitioned publication corpora.

A deployment is a set of virtual organizations (VOs). Each VO runs one
broker (node registry, data-source locator, execution planner, job
manager) and any number of worker processes that scan their local
partitions. Brokers federate single-hop so a query submitted to any VO
covers the whole deployment.
"""

__version__ = "0.1.0"
