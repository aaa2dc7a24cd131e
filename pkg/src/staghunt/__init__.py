"""Stag-hunt grid arena with a standoff A* planner and a numpy DQN."""

__version__ = "0.1.0"
