"""Checking side-channel declassification for a small while-language.

Programs emit a transcript of branch decisions. The checkers decide, over
finite input domains, whether that transcript and the final low store leak
more than a declassifier program releases.
"""

from .lang import Policy, Program, make_policy, parse_program, pretty_print
from .semantics import Fault, RunResult, run

__version__ = "0.1.0"

__all__ = ["Fault", "Policy", "Program", "RunResult", "make_policy", "parse_program", "pretty_print", "run"]
