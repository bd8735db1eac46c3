"""Time-stepped simulator for RF energy-harvesting sensor networks recharged
by mobile transmitter actors."""

__version__ = "0.1.0"
