from .ast import Ast, Node, isomorphic
from .parser import ParseError, parse_program
from .pretty import pretty_print
from .cfg import Cfg, build_cfg
from .deps import DepGraph, compute_deps

__all__ = [
    "Ast",
    "Node",
    "Cfg",
    "DepGraph",
    "ParseError",
    "build_cfg",
    "compute_deps",
    "isomorphic",
    "parse_program",
    "pretty_print",
]
