"""Type checking and name resolution for MiniC ASTs.

Annotates every expression node with its resolved ``dtype`` and marks
array-name atoms (which decay to ``int*`` values). Declarations follow
textual order within a single function-level scope; redeclaring a name
in the same function is an error, as is use before declaration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import INT, INT_PTR, VOID, RELATIONAL_OPS, Ast, Node
from .parser import Diagnostic, ParseError


@dataclass
class _Var:
    name: str
    dtype: str            # "int" or "int*"
    array_size: int | None


def _type_err(node: Node, message: str, category: str = "type") -> ParseError:
    return ParseError([Diagnostic(node.line, node.col, message, category)])


def is_lvalue(node: Node) -> bool:
    """An assignable location: a scalar or pointer variable, or a deref."""
    if node.kind == "identifier":
        return not node.is_array_name
    return node.kind == "deref"


class _Checker:
    def __init__(self, ast: Ast):
        self.ast = ast
        self.signatures: dict[str, tuple[str, list[str]]] = {}

    def run(self) -> None:
        for fn in self.ast.functions():
            if fn.name in self.signatures:
                raise _type_err(fn, f"function {fn.name!r} redefined", "duplicate-declaration")
            params = [c.dtype for c in fn.children[:-1]]
            self.signatures[fn.name] = (fn.dtype, params)
        if "trap" in self.signatures:
            fn = self.ast.function_named("trap")
            raise _type_err(fn, "'trap' is a reserved builtin", "duplicate-declaration")
        for fn in self.ast.functions():
            self.check_function(fn)

    def check_function(self, fn: Node) -> None:
        scope: dict[str, _Var] = {}
        for p in fn.children[:-1]:
            if p.name in scope:
                raise _type_err(p, f"duplicate parameter {p.name!r}", "duplicate-declaration")
            scope[p.name] = _Var(p.name, p.dtype, None)
        self.check_block(fn.children[-1], fn, scope)

    def check_block(self, block: Node, fn: Node, scope: dict[str, _Var]) -> None:
        for item in block.children:
            if item.kind == "decl":
                if item.name in scope:
                    raise _type_err(item, f"duplicate declaration of {item.name!r}",
                                    "duplicate-declaration")
                scope[item.name] = _Var(item.name, item.dtype, item.array_size)
            else:
                self.check_stmt(item, fn, scope)

    def check_stmt(self, stmt: Node, fn: Node, scope: dict[str, _Var]) -> None:
        kind = stmt.kind
        if kind == "assign":
            target, rhs = stmt.children
            self.check_expr(target, scope)
            if not is_lvalue(target):
                raise _type_err(target, "assignment target is not an lvalue")
            self.check_expr(rhs, scope)
            if target.dtype != rhs.dtype:
                raise _type_err(stmt, f"cannot assign {rhs.dtype} to {target.dtype}")
        elif kind == "io-read":
            target = stmt.children[0]
            self.check_expr(target, scope)
            if not is_lvalue(target) or target.dtype != INT:
                raise _type_err(target, "read target must be an int lvalue")
        elif kind == "io-write":
            value = stmt.children[0]
            self.check_expr(value, scope)
            if value.dtype != INT:
                raise _type_err(value, "print requires an int value")
        elif kind == "return":
            if stmt.children:
                value = stmt.children[0]
                self.check_expr(value, scope)
                if fn.dtype == VOID:
                    raise _type_err(stmt, "void function cannot return a value")
                if value.dtype != INT:
                    raise _type_err(stmt, "return value must be int")
            elif fn.dtype != VOID:
                raise _type_err(stmt, "int function must return a value")
        elif kind == "if":
            cond = stmt.children[0]
            self.check_expr(cond, scope)
            if cond.dtype != INT:
                raise _type_err(cond, "condition must be int")
            self.check_block(stmt.children[1], fn, scope)
            if len(stmt.children) == 3:
                tail = stmt.children[2]
                if tail.kind == "if":
                    self.check_stmt(tail, fn, scope)
                else:
                    self.check_block(tail, fn, scope)
        elif kind == "while":
            cond = stmt.children[0]
            self.check_expr(cond, scope)
            if cond.dtype != INT:
                raise _type_err(cond, "condition must be int")
            self.check_block(stmt.children[1], fn, scope)
        elif kind == "switch":
            scrutinee = stmt.children[0]
            self.check_expr(scrutinee, scope)
            if scrutinee.dtype != INT:
                raise _type_err(scrutinee, "switch value must be int")
            for case in stmt.children[1:]:
                self.check_block(case.children[0], fn, scope)
        elif kind == "call":
            self.check_expr(stmt, scope, allow_void=True)
        elif kind == "unary-op":
            self.check_expr(stmt, scope)
        elif kind == "block":
            self.check_block(stmt, fn, scope)
        else:  # pragma: no cover - parser only produces the kinds above
            raise _type_err(stmt, f"unexpected statement kind {kind!r}")

    def check_expr(self, node: Node, scope: dict[str, _Var], allow_void: bool = False) -> None:
        kind = node.kind
        if kind == "literal":
            node.dtype = INT
            return
        if kind == "identifier":
            var = scope.get(node.name)
            if var is None:
                raise _type_err(node, f"undeclared identifier {node.name!r}", "undeclared")
            if var.array_size is not None:
                node.dtype = INT_PTR
                node.is_array_name = True
            else:
                node.dtype = var.dtype
            return
        if kind == "binary-op":
            left, right = node.children
            self.check_expr(left, scope)
            self.check_expr(right, scope)
            lt, rt = left.dtype, right.dtype
            if lt == INT and rt == INT:
                node.dtype = INT
                return
            if lt == INT_PTR and rt == INT and node.op in ("+", "-"):
                node.dtype = INT_PTR
                return
            if lt == INT_PTR and rt == INT_PTR and node.op in RELATIONAL_OPS:
                node.dtype = INT
                return
            raise _type_err(node, f"invalid operand types {lt} {node.op} {rt}")
        if kind == "unary-op":
            operand = node.children[0]
            self.check_expr(operand, scope)
            if node.op in ("neg", "not", "bnot", "abs"):
                if operand.dtype != INT:
                    raise _type_err(node, f"unary {node.op} requires an int operand")
                node.dtype = INT
                return
            # ++/-- (pre and post) need an assignable operand.
            if not is_lvalue(operand):
                raise _type_err(node, f"{node.op} requires an lvalue operand")
            node.dtype = operand.dtype
            return
        if kind == "deref":
            operand = node.children[0]
            self.check_expr(operand, scope)
            if operand.dtype != INT_PTR:
                raise _type_err(node, "deref of non-pointer")
            node.dtype = INT
            return
        if kind == "call":
            if node.name == "trap":
                node.dtype = INT
                return
            sig = self.signatures.get(node.name)
            if sig is None:
                raise _type_err(node, f"call to undeclared function {node.name!r}", "undeclared")
            ret, params = sig
            if len(node.children) != len(params):
                raise _type_err(node, f"{node.name!r} expects {len(params)} argument(s), "
                                      f"got {len(node.children)}")
            for arg, expected in zip(node.children, params):
                self.check_expr(arg, scope)
                if arg.dtype != expected:
                    raise _type_err(arg, f"argument type {arg.dtype} does not match {expected}")
            node.dtype = ret
            if ret == VOID and not allow_void:
                raise _type_err(node, "void value used in expression")
            return
        raise _type_err(node, f"unexpected expression kind {kind!r}")  # pragma: no cover


def check_types(ast: Ast) -> None:
    _Checker(ast).run()
