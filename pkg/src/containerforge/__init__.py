"""containerforge: procedural labeled synthetic container-inspection imagery."""

__version__ = "0.1.0"
