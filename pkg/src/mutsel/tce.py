"""Trivial-equivalence and duplicate detection by canonical-form diffing.

Programs are canonicalized with a fixed, ordered pass list (constant
folding, algebraic identities, unreachable-branch pruning, dead-store
elimination, alpha renaming), iterated to a fixpoint with a 10-round
cap; the canonical form is the pretty-printed result. A mutant whose
canonical form equals the original's is trivially equivalent; mutants
sharing a canonical form are duplicates of the lowest-id member.

Every rewrite is behaviour-preserving under the interpreter semantics:
folding uses the interpreter's own operator evaluation, and rewrites
that discard or deduplicate a subexpression require it to be pure and
fault-free (no ++/--, calls, dereferences, division, or shifts).
Detection is sound but deliberately incomplete: equivalences that need
context (e.g. a variable known to be zero) are not found.
"""

from __future__ import annotations

from .interp import MiniRuntimeError, eval_binop, eval_unop
from .lang.ast import INT, Ast, Node
from .lang.deps import INCDEC
from .lang.pretty import pretty_print
from .mutation import Mutant, apply_mutant
from .program import Program

MAX_ROUNDS = 10

LIVE = "live"
TRIVIALLY_EQUIVALENT = "trivially_equivalent"
DUPLICATE = "duplicate"

_FAULTLESS_BINOPS = frozenset(
    {"+", "-", "*", "&", "|", "^", "<", "<=", ">", ">=", "==", "!=", "&&", "||"}
)


def _pure_faultless(node: Node) -> bool:
    """True when evaluating the expression has no side effects and cannot
    fault, so it may be discarded or de-duplicated."""
    kind = node.kind
    if kind in ("identifier", "literal"):
        return True
    if kind == "binary-op":
        return node.op in _FAULTLESS_BINOPS and all(_pure_faultless(c) for c in node.children)
    if kind == "unary-op":
        return node.op in ("neg", "not", "bnot", "abs") and _pure_faultless(node.children[0])
    return False  # deref, call, ++/--


def _lit(value: int, like: Node) -> Node:
    return Node(0, "literal", value=value, dtype=INT, line=like.line, col=like.col)


def _is_lit(node: Node, value: int | None = None) -> bool:
    return node.kind == "literal" and (value is None or node.value == value)


class _Rewriter:
    def __init__(self) -> None:
        self.changed = False

    def mark(self) -> None:
        self.changed = True

    # -- pass 1+2: folding and identities on expressions ------------------
    def expr(self, node: Node) -> Node:
        node.children = [self.expr(c) if c.kind in
                         ("binary-op", "unary-op", "deref", "call", "identifier", "literal")
                         else c for c in node.children]
        if node.kind == "binary-op":
            return self.binary(node)
        if node.kind == "unary-op":
            return self.unary(node)
        return node

    def binary(self, node: Node) -> Node:
        left, right = node.children
        op = node.op
        if node.dtype == INT and _is_lit(left) and _is_lit(right) \
                and left.dtype == INT and right.dtype == INT:
            try:
                return self.replaced(_lit(eval_binop(op, left.value, right.value), node))
            except MiniRuntimeError:
                return node  # keep the faulting expression
        # short-circuit forms decided by a literal left operand
        if op == "&&" and _is_lit(left):
            if left.value == 0:
                return self.replaced(_lit(0, node))
            return self.replaced(
                Node(0, "binary-op", op="!=", children=[right, _lit(0, node)],
                     dtype=INT, line=node.line, col=node.col))
        if op == "||" and _is_lit(left):
            if left.value != 0:
                return self.replaced(_lit(1, node))
            return self.replaced(
                Node(0, "binary-op", op="!=", children=[right, _lit(0, node)],
                     dtype=INT, line=node.line, col=node.col))
        if node.dtype != INT or left.dtype != INT or right.dtype != INT:
            return node  # pointer arithmetic: no algebraic rewrites
        # identities that keep evaluation order and multiplicity
        if op == "+" and _is_lit(right, 0):
            return self.replaced(left)
        if op == "+" and _is_lit(left, 0):
            return self.replaced(right)
        if op == "-" and _is_lit(right, 0):
            return self.replaced(left)
        if op == "*" and _is_lit(right, 1):
            return self.replaced(left)
        if op == "*" and _is_lit(left, 1):
            return self.replaced(right)
        if op == "/" and _is_lit(right, 1):
            return self.replaced(left)
        if op in ("<<", ">>") and _is_lit(right, 0):
            return self.replaced(left)
        # identities that discard or duplicate an operand: purity required
        if op == "*" and (_is_lit(right, 0) and _pure_faultless(left)
                          or _is_lit(left, 0) and _pure_faultless(right)):
            return self.replaced(_lit(0, node))
        if op == "%" and _is_lit(right, 1) and _pure_faultless(left):
            return self.replaced(_lit(0, node))
        if _pure_faultless(left) and left.signature() == right.signature():
            if op in ("-", "^"):
                return self.replaced(_lit(0, node))
            if op in ("&", "|"):
                return self.replaced(left)
            if op in ("==", "<=", ">="):
                return self.replaced(_lit(1, node))
            if op in ("!=", "<", ">"):
                return self.replaced(_lit(0, node))
        return node

    def unary(self, node: Node) -> Node:
        operand = node.children[0]
        op = node.op
        if op in ("neg", "not", "bnot", "abs") and _is_lit(operand):
            return self.replaced(_lit(eval_unop(op, operand.value), node))
        if op == "neg" and operand.kind == "unary-op" and operand.op == "neg":
            return self.replaced(operand.children[0])
        if op == "bnot" and operand.kind == "unary-op" and operand.op == "bnot":
            return self.replaced(operand.children[0])
        if op == "abs" and operand.kind == "unary-op" and operand.op == "abs":
            return self.replaced(operand)
        if op == "abs" and operand.kind == "unary-op" and operand.op == "neg":
            node.children = [operand.children[0]]
            self.mark()
            return node
        return node

    def replaced(self, node: Node) -> Node:
        self.mark()
        return node

    # -- pass 3: unreachable-branch pruning --------------------------------
    def block_items(self, block: Node) -> None:
        out: list[Node] = []
        for item in block.children:
            items = self.stmt(item)
            out.extend(items)
        if len(out) != len(block.children) or any(a is not b for a, b in zip(out, block.children)):
            self.mark()
        block.children = out

    def stmt(self, stmt: Node) -> list[Node]:
        kind = stmt.kind
        if kind == "decl":
            return [stmt]
        if kind == "assign":
            stmt.children = [stmt.children[0], self.expr(stmt.children[1])]
            target = stmt.children[0]
            if target.kind == "deref":
                target.children = [self.expr(target.children[0])]
            rhs = stmt.children[1]
            if target.kind == "identifier" and rhs.kind == "identifier" \
                    and target.name == rhs.name:
                self.mark()
                return []  # v = v;
            return [stmt]
        if kind in ("io-write", "return"):
            stmt.children = [self.expr(c) for c in stmt.children]
            return [stmt]
        if kind == "io-read":
            target = stmt.children[0]
            if target.kind == "deref":
                target.children = [self.expr(target.children[0])]
            return [stmt]
        if kind in ("call", "unary-op"):
            new = self.expr(stmt)
            # expression statements must stay calls or ++/--; a rewrite that
            # would change the statement kind never fires on them
            return [new]
        if kind == "if":
            cond = self.expr(stmt.children[0])
            stmt.children[0] = cond
            self.block_items(stmt.children[1])
            if len(stmt.children) == 3:
                tail = stmt.children[2]
                if tail.kind == "if":
                    replacement = self.stmt(tail)
                    if len(replacement) != 1 or replacement[0] is not tail:
                        self.mark()
                        if not replacement:
                            stmt.children = stmt.children[:2]
                        elif len(replacement) == 1:
                            stmt.children[2] = replacement[0]
                        else:
                            wrapper = Node(0, "block", children=replacement,
                                           line=tail.line, col=tail.col)
                            stmt.children[2] = wrapper
                else:
                    self.block_items(tail)
                    if not tail.children:
                        stmt.children = stmt.children[:2]
                        self.mark()
            if _is_lit(cond):
                self.mark()
                if cond.value != 0:
                    return list(stmt.children[1].children)
                if len(stmt.children) == 3:
                    tail = stmt.children[2]
                    return self.stmt(tail) if tail.kind == "if" else list(tail.children)
                return []
            if len(stmt.children) == 2 and not stmt.children[1].children \
                    and _pure_faultless(cond):
                self.mark()
                return []  # empty if with pure condition
            return [stmt]
        if kind == "while":
            cond = self.expr(stmt.children[0])
            stmt.children[0] = cond
            self.block_items(stmt.children[1])
            if _is_lit(cond, 0):
                self.mark()
                return []
            return [stmt]
        if kind == "switch":
            scrutinee = self.expr(stmt.children[0])
            stmt.children[0] = scrutinee
            for case in stmt.children[1:]:
                self.block_items(case.children[0])
            if _is_lit(scrutinee):
                self.mark()
                default = None
                for case in stmt.children[1:]:
                    if case.value is None:
                        default = case
                    elif case.value == scrutinee.value:
                        return list(case.children[0].children)
                return list(default.children[0].children) if default is not None else []
            return [stmt]
        if kind == "block":
            self.block_items(stmt)
            if not stmt.children:
                self.mark()
                return []
            return [stmt]
        return [stmt]


def _read_vars(fn: Node) -> set[str]:
    """Names whose value is observed somewhere in the function. Pure write
    positions (assign/read targets, bare ++/-- statements) do not count."""
    reads: set[str] = set()

    def visit_expr(node: Node) -> None:
        if node.kind == "identifier":
            reads.add(node.name)
            return
        for c in node.children:
            visit_expr(c)

    def visit_stmt(stmt: Node) -> None:
        kind = stmt.kind
        if kind in ("decl",):
            return
        if kind == "assign" or kind == "io-read":
            target = stmt.children[0]
            if target.kind != "identifier":
                visit_expr(target)
            for c in stmt.children[1:]:
                visit_expr(c)
            return
        if kind == "unary-op" and stmt.children[0].kind == "identifier":
            return  # bare `v++;`: the value feeds only v itself
        if kind in ("if", "while"):
            visit_expr(stmt.children[0])
            for c in stmt.children[1:]:
                visit_stmt(c) if c.kind == "if" else visit_block(c)
            return
        if kind == "switch":
            visit_expr(stmt.children[0])
            for case in stmt.children[1:]:
                visit_block(case.children[0])
            return
        if kind == "block":
            visit_block(stmt)
            return
        visit_expr(stmt)

    def visit_block(block: Node) -> None:
        for item in block.children:
            visit_stmt(item)

    visit_block(fn.children[-1])
    return reads


def _written_vars(fn: Node) -> set[str]:
    written: set[str] = set()
    for node in fn.children[-1].walk():
        if node.kind in ("assign", "io-read") and node.children[0].kind == "identifier":
            written.add(node.children[0].name)
        if node.kind == "unary-op" and node.op in INCDEC and \
                node.children[0].kind == "identifier":
            written.add(node.children[0].name)
    return written


def _dead_store_pass(fn: Node, rewriter: _Rewriter) -> None:
    reads = _read_vars(fn)
    written = _written_vars(fn)

    def scrub(block: Node) -> None:
        out = []
        for item in block.children:
            if item.kind == "assign" and item.children[0].kind == "identifier" \
                    and item.children[0].name not in reads \
                    and _pure_faultless(item.children[1]):
                rewriter.mark()
                continue
            if item.kind == "unary-op" and item.children[0].kind == "identifier" \
                    and item.children[0].name not in reads:
                rewriter.mark()
                continue
            if item.kind == "decl" and item.array_size is None \
                    and item.name not in reads and item.name not in written:
                rewriter.mark()
                continue
            out.append(item)
        block.children = out
        for item in block.children:
            scrub_stmt(item)

    def scrub_stmt(item: Node) -> None:
        if item.kind == "while":
            scrub(item.children[1])
        elif item.kind == "if":
            scrub(item.children[1])
            if len(item.children) == 3:
                tail = item.children[2]
                scrub_stmt(tail) if tail.kind == "if" else scrub(tail)
        elif item.kind == "switch":
            for case in item.children[1:]:
                scrub(case.children[0])
        elif item.kind == "block":
            scrub(item)

    scrub(fn.children[-1])


def _alpha_rename(ast: Ast) -> None:
    for fn in ast.functions():
        mapping: dict[str, str] = {}
        for p in fn.children[:-1]:
            mapping[p.name] = f"v{len(mapping)}"
        for node in fn.children[-1].walk():
            if node.kind == "decl" and node.name not in mapping:
                mapping[node.name] = f"v{len(mapping)}"
        for node in fn.walk():
            if node.kind in ("decl", "identifier") and node.name in mapping:
                node.name = mapping[node.name]


def canonicalize(program: Program) -> str:
    """Deterministic canonical serialization of a program's behaviour-
    preserving normal form."""
    ast = program.ast.clone()
    for _ in range(MAX_ROUNDS):
        rewriter = _Rewriter()
        for fn in ast.functions():
            rewriter.block_items(fn.children[-1])
            _dead_store_pass(fn, rewriter)
        _alpha_rename(ast)
        if not rewriter.changed:
            break
    ast.reindex()
    return pretty_print(ast)


def dedup_mutants(program: Program, mutants: list[Mutant]) -> list[Mutant]:
    """Flag trivially-equivalent and duplicate mutants via canonical forms."""
    original = canonicalize(program)
    groups: dict[str, int] = {}
    for m in sorted(mutants, key=lambda m: m.mutant_id):
        form = canonicalize(apply_mutant(program, m))
        if form == original:
            m.trivially_equivalent = True
            m.duplicate_of = None
            continue
        m.trivially_equivalent = False
        first = groups.get(form)
        if first is None:
            groups[form] = m.mutant_id
            m.duplicate_of = None
        else:
            m.duplicate_of = first
    return mutants


def status_of(mutant: Mutant) -> str:
    if mutant.trivially_equivalent:
        return TRIVIALLY_EQUIVALENT
    if mutant.duplicate_of is not None:
        return DUPLICATE
    return LIVE


def tce_report_rows(mutants: list[Mutant]) -> list[list]:
    rows = [["mutant_id", "status", "duplicate_of"]]
    for m in mutants:
        rows.append([m.mutant_id, status_of(m),
                     "" if m.duplicate_of is None else m.duplicate_of])
    return rows
