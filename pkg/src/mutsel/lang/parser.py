"""Recursive-descent parser and type checker for MiniC.

``parse_program`` is the single entry point: it lexes, parses, resolves
and type-checks, and returns an :class:`Ast` with preorder node ids.
All failures raise :class:`ParseError` carrying a diagnostic list; each
diagnostic has a position and message.

Grammar summary (C-like):

    program   = function+
    function  = ("int" | "void") IDENT "(" params? ")" block
    param     = "int" "*"? IDENT
    block     = "{" (decl | stmt)* "}"
    decl      = "int" declarator ("," declarator)* ";"
    declarator= "*" IDENT | IDENT ("[" INT "]")? ("=" expr)?
    stmt      = assign | "read" lvalue ";" | "print" expr ";"
              | "return" expr? ";" | if | while | switch
              | call ";" | incdec ";" | block
    switch    = "switch" "(" expr ")" "{" case* ("default" ":" block)? "}"
    case      = "case" "-"? INT ":" block

Expressions use C precedence over ``|| && | ^ & == != < <= > >=
<< >> + - * / %`` with unary ``- ! ~ ++ -- *`` (deref), ``abs(e)``,
``trap()``, calls, and postfix ``++ -- []``. ``a[i]`` desugars to
``*(a + i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import INT, INT_PTR, VOID, Ast, Node
from .lexer import LexError, Token, tokenize


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    category: str  # "syntax", "type", "duplicate-declaration", "undeclared"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.category}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


def _err(line: int, col: int, message: str, category: str = "syntax") -> ParseError:
    return ParseError([Diagnostic(line, col, message, category)])


# Binary precedence table: higher binds tighter.
_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_sym(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == text

    def at_kw(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == text

    def expect_sym(self, text: str) -> Token:
        t = self.peek()
        if not self.at_sym(text):
            raise _err(t.line, t.col, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def expect_kw(self, text: str) -> Token:
        t = self.peek()
        if not self.at_kw(text):
            raise _err(t.line, t.col, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise _err(t.line, t.col, f"expected identifier, found {t.text or 'end of input'!r}")
        return self.next()

    # -- grammar -------------------------------------------------------
    def parse_program(self) -> Node:
        first = self.peek()
        functions = []
        while self.peek().kind != "eof":
            functions.append(self.parse_function())
        if not functions:
            t = self.peek()
            raise _err(t.line, t.col, "empty program: at least one function required")
        return Node(0, "program", children=functions, line=first.line, col=first.col)

    def parse_function(self) -> Node:
        t = self.peek()
        if not (self.at_kw("int") or self.at_kw("void")):
            raise _err(t.line, t.col, "expected function return type ('int' or 'void')")
        ret = self.next().text
        name = self.expect_ident()
        self.expect_sym("(")
        params: list[Node] = []
        if not self.at_sym(")"):
            while True:
                pt = self.expect_kw("int")
                dtype = INT
                if self.at_sym("*"):
                    self.next()
                    dtype = INT_PTR
                pname = self.expect_ident()
                params.append(Node(0, "decl", name=pname.text, dtype=dtype,
                                   line=pt.line, col=pt.col))
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym(")")
        body = self.parse_block()
        fn = Node(0, "function", name=name.text, dtype=ret, line=t.line, col=t.col)
        fn.children = params + [body]
        return fn

    def parse_block(self) -> Node:
        open_tok = self.expect_sym("{")
        items: list[Node] = []
        while not self.at_sym("}"):
            if self.peek().kind == "eof":
                raise _err(open_tok.line, open_tok.col, "unterminated block")
            if self.at_kw("int"):
                items.extend(self.parse_decl())
            else:
                items.append(self.parse_stmt())
        self.expect_sym("}")
        return Node(0, "block", children=items, line=open_tok.line, col=open_tok.col)

    def parse_decl(self) -> list[Node]:
        t = self.expect_kw("int")
        out: list[Node] = []
        while True:
            dtype = INT
            if self.at_sym("*"):
                self.next()
                dtype = INT_PTR
            name = self.expect_ident()
            size = None
            if self.at_sym("["):
                if dtype == INT_PTR:
                    raise _err(name.line, name.col, "array of pointers is not supported")
                self.next()
                sz = self.peek()
                if sz.kind != "int":
                    raise _err(sz.line, sz.col, "array size must be an integer literal")
                self.next()
                size = int(sz.text)
                if size <= 0:
                    raise _err(sz.line, sz.col, "array size must be positive")
                self.expect_sym("]")
            decl = Node(0, "decl", name=name.text, dtype=dtype, array_size=size,
                        line=name.line, col=name.col)
            out.append(decl)
            if self.at_sym("="):
                eq = self.next()
                if size is not None:
                    raise _err(eq.line, eq.col, "array initializers are not supported")
                rhs = self.parse_expr()
                target = Node(0, "identifier", name=name.text, line=name.line, col=name.col)
                out.append(Node(0, "assign", children=[target, rhs],
                                line=name.line, col=name.col))
            if self.at_sym(","):
                self.next()
                continue
            self.expect_sym(";")
            return out

    def parse_stmt(self) -> Node:
        t = self.peek()
        if self.at_kw("read"):
            self.next()
            target = self.parse_unary()
            self.expect_sym(";")
            return Node(0, "io-read", children=[target], line=t.line, col=t.col)
        if self.at_kw("print"):
            self.next()
            value = self.parse_expr()
            self.expect_sym(";")
            return Node(0, "io-write", children=[value], line=t.line, col=t.col)
        if self.at_kw("return"):
            self.next()
            children = []
            if not self.at_sym(";"):
                children = [self.parse_expr()]
            self.expect_sym(";")
            return Node(0, "return", children=children, line=t.line, col=t.col)
        if self.at_kw("if"):
            return self.parse_if()
        if self.at_kw("while"):
            self.next()
            self.expect_sym("(")
            cond = self.parse_expr()
            self.expect_sym(")")
            body = self.parse_block()
            return Node(0, "while", children=[cond, body], line=t.line, col=t.col)
        if self.at_kw("switch"):
            return self.parse_switch()
        if self.at_sym("{"):
            return self.parse_block()
        # Expression-statement forms: assignment, call, or ++/--.
        expr = self.parse_expr()
        if self.at_sym("="):
            self.next()
            rhs = self.parse_expr()
            self.expect_sym(";")
            return Node(0, "assign", children=[expr, rhs], line=t.line, col=t.col)
        self.expect_sym(";")
        if expr.kind == "call":
            return expr
        if expr.kind == "unary-op" and expr.op in ("post-inc", "post-dec", "pre-inc", "pre-dec"):
            return expr
        raise _err(t.line, t.col, "expression statement must be a call, an assignment or ++/--")

    def parse_if(self) -> Node:
        t = self.expect_kw("if")
        self.expect_sym("(")
        cond = self.parse_expr()
        self.expect_sym(")")
        then = self.parse_block()
        children = [cond, then]
        if self.at_kw("else"):
            self.next()
            if self.at_kw("if"):
                children.append(self.parse_if())
            else:
                children.append(self.parse_block())
        return Node(0, "if", children=children, line=t.line, col=t.col)

    def parse_switch(self) -> Node:
        t = self.expect_kw("switch")
        self.expect_sym("(")
        scrutinee = self.parse_expr()
        self.expect_sym(")")
        self.expect_sym("{")
        children = [scrutinee]
        seen_values = set()
        seen_default = False
        while not self.at_sym("}"):
            if self.at_kw("case"):
                ct = self.next()
                negative = False
                if self.at_sym("-"):
                    self.next()
                    negative = True
                lit = self.peek()
                if lit.kind != "int":
                    raise _err(lit.line, lit.col, "case label must be an integer literal")
                self.next()
                value = -int(lit.text) if negative else int(lit.text)
                if value in seen_values:
                    raise _err(ct.line, ct.col, f"duplicate case label {value}")
                seen_values.add(value)
                self.expect_sym(":")
                body = self.parse_block()
                children.append(Node(0, "case", value=value, children=[body],
                                     line=ct.line, col=ct.col))
            elif self.at_kw("default"):
                dt = self.next()
                if seen_default:
                    raise _err(dt.line, dt.col, "duplicate default label")
                seen_default = True
                self.expect_sym(":")
                body = self.parse_block()
                children.append(Node(0, "case", value=None, children=[body],
                                     line=dt.line, col=dt.col))
            else:
                bad = self.peek()
                raise _err(bad.line, bad.col, "expected 'case' or 'default' in switch body")
        self.expect_sym("}")
        return Node(0, "switch", children=children, line=t.line, col=t.col)

    # -- expressions ---------------------------------------------------
    def parse_expr(self) -> Node:
        return self.parse_binary(0)

    def parse_binary(self, level: int) -> Node:
        if level >= len(_PRECEDENCE):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        ops = _PRECEDENCE[level]
        while self.peek().kind == "sym" and self.peek().text in ops:
            t = self.next()
            right = self.parse_binary(level + 1)
            left = Node(0, "binary-op", op=t.text, children=[left, right],
                        line=t.line, col=t.col)
        return left

    def parse_unary(self) -> Node:
        t = self.peek()
        if t.kind == "sym" and t.text in ("-", "!", "~"):
            self.next()
            operand = self.parse_unary()
            op = {"-": "neg", "!": "not", "~": "bnot"}[t.text]
            # "-abs(e)" is one catalog form; it still parses as neg(abs(e)).
            return Node(0, "unary-op", op=op, children=[operand], line=t.line, col=t.col)
        if t.kind == "sym" and t.text in ("++", "--"):
            self.next()
            operand = self.parse_unary()
            op = "pre-inc" if t.text == "++" else "pre-dec"
            return Node(0, "unary-op", op=op, children=[operand], line=t.line, col=t.col)
        if t.kind == "sym" and t.text == "*":
            self.next()
            operand = self.parse_unary()
            return Node(0, "deref", children=[operand], line=t.line, col=t.col)
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while True:
            t = self.peek()
            if t.kind == "sym" and t.text in ("++", "--"):
                self.next()
                op = "post-inc" if t.text == "++" else "post-dec"
                node = Node(0, "unary-op", op=op, children=[node], line=t.line, col=t.col)
                continue
            if self.at_sym("["):
                self.next()
                index = self.parse_expr()
                close = self.expect_sym("]")
                plus = Node(0, "binary-op", op="+", children=[node, index],
                            line=t.line, col=t.col)
                node = Node(0, "deref", children=[plus], line=close.line, col=close.col)
                continue
            break
        return node

    def parse_primary(self) -> Node:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Node(0, "literal", value=int(t.text), dtype=INT, line=t.line, col=t.col)
        if self.at_kw("abs"):
            self.next()
            self.expect_sym("(")
            operand = self.parse_expr()
            self.expect_sym(")")
            return Node(0, "unary-op", op="abs", children=[operand], line=t.line, col=t.col)
        if self.at_kw("trap"):
            self.next()
            self.expect_sym("(")
            self.expect_sym(")")
            return Node(0, "call", name="trap", dtype=INT, line=t.line, col=t.col)
        if t.kind == "ident":
            self.next()
            if self.at_sym("("):
                self.next()
                args = []
                if not self.at_sym(")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at_sym(","):
                            self.next()
                            continue
                        break
                self.expect_sym(")")
                return Node(0, "call", name=t.text, children=args, line=t.line, col=t.col)
            return Node(0, "identifier", name=t.text, line=t.line, col=t.col)
        if self.at_sym("("):
            self.next()
            inner = self.parse_expr()
            self.expect_sym(")")
            return inner
        raise _err(t.line, t.col, f"expected expression, found {t.text or 'end of input'!r}")


def parse_program(source: str) -> Ast:
    """Parse and type-check MiniC source into an :class:`Ast`.

    Raises :class:`ParseError` with positioned diagnostics on syntax
    errors, type errors, undeclared identifiers, or duplicate
    declarations.
    """
    try:
        tokens = tokenize(source)
    except LexError as e:
        raise ParseError([Diagnostic(e.line, e.col, e.message, "syntax")]) from None
    parser = _Parser(tokens)
    root = parser.parse_program()
    ast = Ast(root, source=source)
    from .typecheck import check_types

    check_types(ast)
    return ast
