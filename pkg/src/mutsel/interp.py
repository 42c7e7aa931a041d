"""Deterministic tree-walking interpreter for MiniC.

Semantics are fully defined (no UB): 64-bit two's-complement wrapping
arithmetic, C-style truncating division, division/modulo by zero and
out-of-range shift amounts are runtime errors, dereferences are
bounds-checked, uninitialized scalars and array cells read as 0,
uninitialized pointers are null (error on deref), reading past the end
of the input stream is a runtime error.

Execution cost is counted in *statement steps*: one step per executed
statement site (simple statements, loop/branch conditions, switch
heads). Exceeding the step budget yields the TIMEOUT outcome. The set
of executed site node ids is recorded as coverage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang.ast import Ast, Node

MASK = (1 << 64) - 1
SIGN = 1 << 63

OK = "ok"
TRAP = "trap"
TIMEOUT = "timeout"
RUNTIME_ERROR = "runtime-error"

DEFAULT_STEP_BUDGET = 1_000_000
CALL_DEPTH_LIMIT = 200


def wrap64(v: int) -> int:
    v &= MASK
    return v - (1 << 64) if v & SIGN else v


class MiniRuntimeError(Exception):
    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind


class _Trap(Exception):
    pass


class _Timeout(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: int):
        self.value = value


def eval_binop(op: str, a: int, b: int) -> int:
    """Integer binary operators, shared with canonicalization so folding
    matches runtime behaviour exactly. Raises MiniRuntimeError for
    division/modulo by zero and out-of-range shifts."""
    if op == "+":
        return wrap64(a + b)
    if op == "-":
        return wrap64(a - b)
    if op == "*":
        return wrap64(a * b)
    if op == "/":
        if b == 0:
            raise MiniRuntimeError("div-by-zero")
        q = abs(a) // abs(b)
        return wrap64(-q if (a < 0) != (b < 0) else q)
    if op == "%":
        if b == 0:
            raise MiniRuntimeError("div-by-zero")
        q = abs(a) // abs(b)
        q = -q if (a < 0) != (b < 0) else q
        return wrap64(a - wrap64(q * b))
    if op == "&":
        return wrap64(a & b)
    if op == "|":
        return wrap64(a | b)
    if op == "^":
        return wrap64(a ^ b)
    if op == "<<":
        if b < 0 or b >= 64:
            raise MiniRuntimeError("shift-range")
        return wrap64(a << b)
    if op == ">>":
        if b < 0 or b >= 64:
            raise MiniRuntimeError("shift-range")
        return wrap64(a >> b)  # arithmetic shift on signed python ints
    if op == "<":
        return 1 if a < b else 0
    if op == "<=":
        return 1 if a <= b else 0
    if op == ">":
        return 1 if a > b else 0
    if op == ">=":
        return 1 if a >= b else 0
    if op == "==":
        return 1 if a == b else 0
    if op == "!=":
        return 1 if a != b else 0
    if op == "&&":
        return 1 if (a != 0 and b != 0) else 0
    if op == "||":
        return 1 if (a != 0 or b != 0) else 0
    raise ValueError(f"unknown operator {op!r}")


def eval_unop(op: str, a: int) -> int:
    if op == "neg":
        return wrap64(-a)
    if op == "not":
        return 0 if a else 1
    if op == "bnot":
        return wrap64(~a)
    if op == "abs":
        return wrap64(-a) if a < 0 else a
    raise ValueError(f"unknown unary operator {op!r}")


@dataclass(frozen=True)
class Pointer:
    seq: int               # allocation sequence (deterministic ordering)
    buf: list              # the pointed-to array storage itself
    off: int

    def moved(self, delta: int) -> "Pointer":
        return Pointer(self.seq, self.buf, self.off + delta)


@dataclass
class Outcome:
    status: str
    output: tuple[int, ...]
    steps: int
    coverage: frozenset[int]
    error_kind: str | None = None

    def tagged_output(self) -> tuple:
        """Comparable observable behaviour: output stream plus a distinct
        sentinel per abnormal status (trap, timeout, each error kind)."""
        if self.status == OK:
            return (self.output, OK)
        if self.status == RUNTIME_ERROR:
            return (self.output, RUNTIME_ERROR, self.error_kind)
        return (self.output, self.status)


class _Frame:
    __slots__ = ("scalars", "pointers", "arrays")

    def __init__(self) -> None:
        self.scalars: dict[str, int] = {}
        self.pointers: dict[str, Pointer | None] = {}
        self.arrays: dict[str, Pointer] = {}  # base pointer per local array


class _Interp:
    def __init__(self, ast: Ast, inputs: list[int], budget: int):
        self.ast = ast
        self.functions = {f.name: f for f in ast.functions()}
        self.inputs = inputs
        self.in_pos = 0
        self.output: list[int] = []
        self.steps = 0
        self.budget = budget
        self.coverage: set[int] = set()
        self.alloc_seq = 0
        self.depth = 0

    # -- plumbing -------------------------------------------------------
    def step(self, node: Node) -> None:
        self.steps += 1
        self.coverage.add(node.nid)
        if self.steps > self.budget:
            raise _Timeout()

    def call(self, name: str, args: list) -> int:
        fn = self.functions.get(name)
        if fn is None:
            raise MiniRuntimeError("unknown-function")
        self.depth += 1
        if self.depth > CALL_DEPTH_LIMIT:
            raise MiniRuntimeError("call-depth")
        frame = _Frame()
        params = fn.children[:-1]
        for p, a in zip(params, args):
            if p.dtype == "int*":
                frame.pointers[p.name] = a
            else:
                frame.scalars[p.name] = a
        for node in fn.children[-1].walk():
            if node.kind == "decl" and node.name not in frame.scalars \
                    and node.name not in frame.pointers and node.name not in frame.arrays:
                if node.array_size is not None:
                    self.alloc_seq += 1
                    frame.arrays[node.name] = Pointer(self.alloc_seq,
                                                      [0] * node.array_size, 0)
                elif node.dtype == "int*":
                    frame.pointers[node.name] = None
                else:
                    frame.scalars[node.name] = 0
        try:
            self.exec_block(fn.children[-1], frame)
        except _Return as r:
            self.depth -= 1
            return r.value
        self.depth -= 1
        return 0  # fall off the end

    def read_input(self) -> int:
        if self.in_pos >= len(self.inputs):
            raise MiniRuntimeError("input-exhausted")
        v = self.inputs[self.in_pos]
        self.in_pos += 1
        return wrap64(v)

    # -- statements -----------------------------------------------------
    def exec_block(self, block: Node, frame: _Frame) -> None:
        for item in block.children:
            if item.kind == "decl":
                continue
            self.exec_stmt(item, frame)

    def exec_stmt(self, stmt: Node, frame: _Frame) -> None:
        kind = stmt.kind
        if kind == "assign":
            self.step(stmt)
            target, rhs = stmt.children
            value = self.eval(rhs, frame)
            self.store(target, value, frame)
            return
        if kind == "io-read":
            self.step(stmt)
            value = self.read_input()
            self.store(stmt.children[0], value, frame)
            return
        if kind == "io-write":
            self.step(stmt)
            self.output.append(self.eval(stmt.children[0], frame))
            return
        if kind == "return":
            self.step(stmt)
            value = self.eval(stmt.children[0], frame) if stmt.children else 0
            raise _Return(value)
        if kind in ("call", "unary-op"):
            self.step(stmt)
            self.eval(stmt, frame)
            return
        if kind == "block":
            self.exec_block(stmt, frame)
            return
        if kind == "if":
            cond = stmt.children[0]
            self.step(cond)
            if self.eval(cond, frame) != 0:
                self.exec_block(stmt.children[1], frame)
            elif len(stmt.children) == 3:
                tail = stmt.children[2]
                if tail.kind == "if":
                    self.exec_stmt(tail, frame)
                else:
                    self.exec_block(tail, frame)
            return
        if kind == "while":
            cond = stmt.children[0]
            while True:
                self.step(cond)
                if self.eval(cond, frame) == 0:
                    return
                self.exec_block(stmt.children[1], frame)
        if kind == "switch":
            scrutinee = stmt.children[0]
            self.step(scrutinee)
            value = self.eval(scrutinee, frame)
            default = None
            for case in stmt.children[1:]:
                if case.value is None:
                    default = case
                elif case.value == value:
                    self.exec_block(case.children[0], frame)
                    return
            if default is not None:
                self.exec_block(default.children[0], frame)
            return

    # -- expressions ----------------------------------------------------
    def eval(self, node: Node, frame: _Frame):
        kind = node.kind
        if kind == "literal":
            return wrap64(node.value)
        if kind == "identifier":
            name = node.name
            if name in frame.scalars:
                return frame.scalars[name]
            if name in frame.arrays:
                return frame.arrays[name]  # array name decays to its base pointer
            return frame.pointers[name]
        if kind == "binary-op":
            return self.eval_binary(node, frame)
        if kind == "unary-op":
            return self.eval_unary(node, frame)
        if kind == "deref":
            ptr = self.eval(node.children[0], frame)
            return self.load_ptr(ptr, frame)
        if kind == "call":
            if node.name == "trap":
                raise _Trap()
            args = [self.eval(a, frame) for a in node.children]
            return self.call(node.name, args)
        raise ValueError(f"unexpected node in eval: {kind}")  # pragma: no cover

    def eval_binary(self, node: Node, frame: _Frame):
        op = node.op
        left = node.children[0]
        right = node.children[1]
        if op == "&&":
            if self.eval(left, frame) == 0:
                return 0
            return 1 if self.eval(right, frame) != 0 else 0
        if op == "||":
            if self.eval(left, frame) != 0:
                return 1
            return 1 if self.eval(right, frame) != 0 else 0
        a = self.eval(left, frame)
        b = self.eval(right, frame)
        if isinstance(a, Pointer) or a is None:
            if op in ("+", "-") and isinstance(b, int):
                if a is None:
                    raise MiniRuntimeError("null-pointer")
                return a.moved(b if op == "+" else -b)
            return self.pointer_compare(op, a, b)
        return eval_binop(op, a, b)

    def pointer_compare(self, op: str, a, b) -> int:
        ka = (-1, 0) if a is None else (a.seq, a.off)
        kb = (-1, 0) if b is None else (b.seq, b.off)
        if op == "<":
            return 1 if ka < kb else 0
        if op == "<=":
            return 1 if ka <= kb else 0
        if op == ">":
            return 1 if ka > kb else 0
        if op == ">=":
            return 1 if ka >= kb else 0
        if op == "==":
            return 1 if ka == kb else 0
        if op == "!=":
            return 1 if ka != kb else 0
        raise MiniRuntimeError("pointer-arithmetic")

    def eval_unary(self, node: Node, frame: _Frame):
        op = node.op
        operand = node.children[0]
        if op in ("neg", "not", "bnot", "abs"):
            return eval_unop(op, self.eval(operand, frame))
        # ++/--: evaluate location once, read, write back
        delta = 1 if op in ("pre-inc", "post-inc") else -1
        if operand.kind == "identifier":
            name = operand.name
            if name in frame.scalars:
                old = frame.scalars[name]
                new = wrap64(old + delta)
                frame.scalars[name] = new
                return old if op.startswith("post") else new
            ptr = frame.pointers[name]
            if ptr is None:
                raise MiniRuntimeError("null-pointer")
            moved = ptr.moved(delta)
            frame.pointers[name] = moved
            return ptr if op.startswith("post") else moved
        # deref lvalue
        ptr = self.eval(operand.children[0], frame)
        old = self.load_ptr(ptr, frame)
        new = wrap64(old + delta)
        self.store_ptr(ptr, new, frame)
        return old if op.startswith("post") else new

    # -- storage ---------------------------------------------------------
    def load_ptr(self, ptr, frame: _Frame) -> int:
        if not isinstance(ptr, Pointer):
            raise MiniRuntimeError("null-pointer")
        if not (0 <= ptr.off < len(ptr.buf)):
            raise MiniRuntimeError("out-of-bounds")
        return ptr.buf[ptr.off]

    def store_ptr(self, ptr, value: int, frame: _Frame) -> None:
        if not isinstance(ptr, Pointer):
            raise MiniRuntimeError("null-pointer")
        if not (0 <= ptr.off < len(ptr.buf)):
            raise MiniRuntimeError("out-of-bounds")
        ptr.buf[ptr.off] = value

    def store(self, target: Node, value, frame: _Frame) -> None:
        if target.kind == "identifier":
            if target.name in frame.scalars:
                frame.scalars[target.name] = value
            else:
                frame.pointers[target.name] = value
            return
        ptr = self.eval(target.children[0], frame)
        self.store_ptr(ptr, value, frame)


def run_program(ast: Ast, inputs: list[int],
                step_budget: int = DEFAULT_STEP_BUDGET) -> Outcome:
    """Execute ``main`` on the given input token stream."""
    if ast.function_named("main") is None:
        raise ValueError("program has no 'main' function")
    interp = _Interp(ast, list(inputs), step_budget)
    status = OK
    error_kind = None
    try:
        interp.call("main", [])
    except _Trap:
        status = TRAP
    except _Timeout:
        status = TIMEOUT
    except MiniRuntimeError as e:
        status = RUNTIME_ERROR
        error_kind = e.kind
    return Outcome(
        status=status,
        output=tuple(interp.output),
        steps=interp.steps,
        coverage=frozenset(interp.coverage),
        error_kind=error_kind,
    )
