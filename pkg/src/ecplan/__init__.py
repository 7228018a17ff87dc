"""Planning and operation numerics for European energy communities."""

__version__ = "0.1.0"
