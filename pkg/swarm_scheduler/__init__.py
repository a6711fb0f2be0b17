"""Swarm Scheduler - симулятор роя узлов с прерывистым питанием."""

__version__ = "0.1.0"
