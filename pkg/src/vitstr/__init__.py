"""Single-stage vision-transformer scene text recognition on a numpy tensor core."""

__version__ = "0.1.0"
