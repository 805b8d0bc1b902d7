"""Store languages of finite-crossing one-way nondeterministic Turing machines."""

from . import fixtures, history, machine, nfa, twonfa

__all__ = ["fixtures", "history", "machine", "nfa", "twonfa"]
__version__ = "0.1.0"
