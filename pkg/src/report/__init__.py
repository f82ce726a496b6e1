from .checker import Checker
from .reporter import Reporter

__all__ = ['Checker', 'Reporter']
