"""Stern-Gerlach splitting and weighted multiverse branching."""
