"""
PHC network simulator with real-time length-of-stay predictors
and real-time facility assignment.
"""

__version__ = "1.0.0"
