"""Parsed program bundle: AST plus lazily-built CFG and dependence graph."""

from __future__ import annotations

from .lang.ast import Ast
from .lang.cfg import Cfg, build_cfg
from .lang.deps import DepGraph, compute_deps
from .lang.parser import parse_program
from .lang.pretty import pretty_print


class Program:
    def __init__(self, program_id: str, ast: Ast):
        self.program_id = program_id
        self.ast = ast
        self._cfg: Cfg | None = None
        self._deps: DepGraph | None = None

    @classmethod
    def from_source(cls, program_id: str, source: str) -> "Program":
        return cls(program_id, parse_program(source))

    @property
    def cfg(self) -> Cfg:
        if self._cfg is None:
            self._cfg = build_cfg(self.ast)
        return self._cfg

    @property
    def deps(self) -> DepGraph:
        if self._deps is None:
            self._deps = compute_deps(self.ast, self.cfg)
        return self._deps

    def pretty(self) -> str:
        return pretty_print(self.ast)
