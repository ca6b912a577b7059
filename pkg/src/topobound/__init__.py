"""Topology optimization with semidefinite upper bounds."""

__version__ = "0.1.0"
