"""Crowd congestion analytics: detector building blocks, box geometry and stampede alerts."""

__version__ = "0.1.0"
