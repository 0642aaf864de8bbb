"""Deterministic simulator for polar Walker-star LEO constellations.

Closed-form circular orbits, ground/inter-satellite link geometry and budgets,
greedy inter-plane link matching, orthogonal resource allocation with
zero-outage rates, cooperative swarm MIMO, and a CLI that emits CSV reports.
"""

__version__ = "0.1.0"
