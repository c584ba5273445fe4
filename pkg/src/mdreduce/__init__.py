"""mdreduce: build and verify a 3DM -> resolving-set -> metric-dimension reduction."""

__version__ = "0.1.0"
