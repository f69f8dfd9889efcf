"""Tendon-driven biped simulator that learns walking from motor babbling."""

__version__ = "0.1.0"
