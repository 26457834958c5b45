"""Joint source and channel sensing power model for cognitive radio sensor nodes."""

__version__ = "0.1.0"
