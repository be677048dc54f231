"""Deadlock analysis and choreography extraction for the pi-calculus."""
__version__ = "0.1.0"
