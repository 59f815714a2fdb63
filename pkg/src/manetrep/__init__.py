"""Reputation-based cooperation for mobile ad hoc networks.

A deterministic discrete-event simulator in which selfish and malicious nodes
forward traffic, watch each other and penalise misbehaviour through a fuzzy
penalty controller.
"""

__version__ = "0.1.0"
