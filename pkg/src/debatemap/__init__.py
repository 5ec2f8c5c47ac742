"""debatemap: meeting-protocol transcripts to topics, time series, and speaker-topic networks."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
