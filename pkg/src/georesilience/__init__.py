"""Disaster-resilient routing: geography-aware backup topologies on the data
plane and load-aware path splicing on the controller, with a Monte Carlo
harness for regional disk failures."""

__version__ = "0.1.0"
