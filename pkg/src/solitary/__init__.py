"""Subgroup spaces of finitely presented groups and their permutation actions."""

from .errors import GroupError
from .words import Alphabet, Presentation, Word, parse_presentation, parse_word, parse_words

__all__ = ["Alphabet", "GroupError", "Presentation", "Word", "parse_presentation", "parse_word", "parse_words"]
__version__ = "0.1.0"
