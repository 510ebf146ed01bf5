"""Sparse range-constrained grading.

Matrices use one column per atom or sample, matching the C++ library.
"""

from ._srcl import *  # noqa: F401,F403
from ._srcl import SrclError, Task, make_variant, parse_method


def grade(atoms, grades, samples, method="sc+rc", task=Task.CDR):
    """Grade every column of `samples` against the reference atoms with a preset variant."""
    import numpy as np

    grader = Grader(np.asarray(atoms, dtype=float), np.asarray(grades, dtype=float))  # noqa: F405
    return grader.grade_all(np.asarray(samples, dtype=float), make_variant(parse_method(method), task))


__all__ = [name for name in dir() if not name.startswith("_")]
