"""Triangle-freeness testing protocols for edge-partitioned graphs."""

__version__ = "0.1.0"
