# Automatically created. Please do not edit.
__version__ = '0.1.0'
