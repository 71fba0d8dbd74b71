"""Depth-wise graph reasoning: generator, exact solver, and property suites."""

from ._depwise import (
    compose,
    generate,
    labels,
    parse,
    predict_exact,
    render,
    run_props,
    trace,
)

__all__ = [
    "compose",
    "generate",
    "labels",
    "parse",
    "predict_exact",
    "render",
    "run_props",
    "trace",
]
