"""
Shape-sphere reduction and geometric phases of three-body motions.
"""

__version__ = "0.1.0"
