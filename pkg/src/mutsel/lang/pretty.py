"""Canonical pretty-printer for MiniC ASTs.

The output reparses to an AST isomorphic to the input (modulo node ids
and spans). Layout is fixed: 4-space indents, one statement per line,
spaces around binary operators.
"""

from __future__ import annotations

from .ast import Ast, Node

# Mirror of the parser's precedence table; higher binds tighter.
_BIN_PREC = {
    "||": 0, "&&": 1, "|": 2, "^": 3, "&": 4,
    "==": 5, "!=": 5,
    "<": 6, "<=": 6, ">": 6, ">=": 6,
    "<<": 7, ">>": 7,
    "+": 8, "-": 8,
    "*": 9, "/": 9, "%": 9,
}
_UNARY_PREC = 10
_ATOM_PREC = 12

_PREFIX = {"neg": "-", "not": "!", "bnot": "~", "pre-inc": "++", "pre-dec": "--"}
_POSTFIX = {"post-inc": "++", "post-dec": "--"}


def _prec(node: Node) -> int:
    if node.kind == "binary-op":
        return _BIN_PREC[node.op]
    if node.kind in ("unary-op", "deref"):
        return _UNARY_PREC
    return _ATOM_PREC


def expr_text(node: Node) -> str:
    kind = node.kind
    if kind == "literal":
        return str(node.value)
    if kind == "identifier":
        return node.name
    if kind == "call":
        args = ", ".join(expr_text(c) for c in node.children)
        return f"{node.name}({args})"
    if kind == "deref":
        inner = node.children[0]
        if inner.kind == "identifier":
            return f"*{inner.name}"
        return f"*({expr_text(inner)})"
    if kind == "unary-op":
        operand = node.children[0]
        if node.op == "abs":
            return f"abs({expr_text(operand)})"
        if node.op in _POSTFIX:
            if operand.kind == "identifier":
                return f"{operand.name}{_POSTFIX[node.op]}"
            return f"({expr_text(operand)}){_POSTFIX[node.op]}"
        text = expr_text(operand)
        needs_parens = _prec(operand) < _UNARY_PREC
        # Avoid "--x" when printing neg(neg(x)) and "++x" for neg(pre-inc).
        if not needs_parens and text and text[0] in "-+~!":
            needs_parens = node.op in ("neg", "not", "bnot")
        if needs_parens:
            return f"{_PREFIX[node.op]}({text})"
        return f"{_PREFIX[node.op]}{text}"
    if kind == "binary-op":
        prec = _BIN_PREC[node.op]
        left, right = node.children
        lt = expr_text(left)
        rt = expr_text(right)
        if _prec(left) < prec:
            lt = f"({lt})"
        if _prec(right) <= prec:
            rt = f"({rt})"
        return f"{lt} {node.op} {rt}"
    raise ValueError(f"not an expression node: {kind}")


def _stmt_lines(stmt: Node, indent: int) -> list[str]:
    pad = " " * (4 * indent)
    kind = stmt.kind
    if kind == "decl":
        if stmt.array_size is not None:
            return [f"{pad}int {stmt.name}[{stmt.array_size}];"]
        if stmt.dtype == "int*":
            return [f"{pad}int *{stmt.name};"]
        return [f"{pad}int {stmt.name};"]
    if kind == "assign":
        target, rhs = stmt.children
        return [f"{pad}{expr_text(target)} = {expr_text(rhs)};"]
    if kind == "io-read":
        return [f"{pad}read {expr_text(stmt.children[0])};"]
    if kind == "io-write":
        return [f"{pad}print {expr_text(stmt.children[0])};"]
    if kind == "return":
        if stmt.children:
            return [f"{pad}return {expr_text(stmt.children[0])};"]
        return [f"{pad}return;"]
    if kind in ("call", "unary-op"):
        return [f"{pad}{expr_text(stmt)};"]
    if kind == "if":
        cond = stmt.children[0]
        lines = [f"{pad}if ({expr_text(cond)}) {{"]
        lines.extend(_block_lines(stmt.children[1], indent + 1))
        if len(stmt.children) == 3:
            tail = stmt.children[2]
            if tail.kind == "if":
                tail_lines = _stmt_lines(tail, indent)
                lines.append(f"{pad}}} else {tail_lines[0].lstrip()}")
                lines.extend(tail_lines[1:])
                return lines
            lines.append(f"{pad}}} else {{")
            lines.extend(_block_lines(tail, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if kind == "while":
        lines = [f"{pad}while ({expr_text(stmt.children[0])}) {{"]
        lines.extend(_block_lines(stmt.children[1], indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if kind == "switch":
        lines = [f"{pad}switch ({expr_text(stmt.children[0])}) {{"]
        inner = " " * (4 * (indent + 1))
        for case in stmt.children[1:]:
            label = "default" if case.value is None else f"case {case.value}"
            lines.append(f"{inner}{label}: {{")
            lines.extend(_block_lines(case.children[0], indent + 2))
            lines.append(f"{inner}}}")
        lines.append(f"{pad}}}")
        return lines
    if kind == "block":
        lines = [f"{pad}{{"]
        lines.extend(_block_lines(stmt, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise ValueError(f"not a statement node: {kind}")


def _block_lines(block: Node, indent: int) -> list[str]:
    lines: list[str] = []
    for item in block.children:
        lines.extend(_stmt_lines(item, indent))
    return lines


def pretty_print(ast: Ast) -> str:
    lines: list[str] = []
    for fn in ast.functions():
        params = []
        for p in fn.children[:-1]:
            if p.dtype == "int*":
                params.append(f"int *{p.name}")
            else:
                params.append(f"int {p.name}")
        lines.append(f"{fn.dtype} {fn.name}({', '.join(params)}) {{")
        lines.extend(_block_lines(fn.children[-1], 1))
        lines.append("}")
        lines.append("")
    return "\n".join(lines)
