"""knotlab: pillowcase images of SU(2) character varieties and surgery slope obstructions."""

__version__ = "0.1.0"
