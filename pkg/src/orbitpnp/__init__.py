"""Orbital debris pick-and-place: rigid-body dynamics, system identification,
debris fields, a multi-robot retrieval simulator and task-allocation policies."""

__version__ = "0.1.0"
