"""
gainscope - certified parameter-dependent gain bounds for uncertain LTI systems.
"""

__version__ = "0.1.0"
