"""
Set version for the multi-study stacking package
"""


__version__ = '0.4.0'
