"""Design and scale-up toolkit for inductively heated metamaterial reactors."""

__version__ = "0.1.0"
