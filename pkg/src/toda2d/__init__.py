"""Extended dispersionless 2D Toda hierarchy on the loop space of Lax symbols."""
__version__ = "0.1.0"
