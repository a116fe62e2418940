"""Double cosets of Sylow p-subgroups of the symmetric group."""

__version__ = "0.1.0"
