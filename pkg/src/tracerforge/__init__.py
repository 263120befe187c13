"""Trace-driven debugging and monitoring for a finite-domain constraint solver."""

from .intset import MAX_INT, IntSet, parse_interval_str, render_domain
from .kernel import Model, Solver, catalog_model, load_model, solve
from .match import ActivePatternSet, compile_condition, naive_eval, port_relevance, run
from .patterns import (
    Pattern,
    PatternError,
    format_pattern,
    parse_pattern,
    parse_patterns,
    typecheck_pattern,
)
from .trace_model import AttributeKey, Port, TraceEvent, default_trace_keys
from .wire import TraceMessage, decode_event, encode_event

__version__ = "1.0.0"

__all__ = [
    "MAX_INT",
    "IntSet",
    "parse_interval_str",
    "render_domain",
    "Model",
    "Solver",
    "catalog_model",
    "load_model",
    "solve",
    "ActivePatternSet",
    "compile_condition",
    "naive_eval",
    "port_relevance",
    "run",
    "Pattern",
    "PatternError",
    "format_pattern",
    "parse_pattern",
    "parse_patterns",
    "typecheck_pattern",
    "AttributeKey",
    "Port",
    "TraceEvent",
    "default_trace_keys",
    "TraceMessage",
    "decode_event",
    "encode_event",
    "__version__",
]
