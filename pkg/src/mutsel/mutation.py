"""Mutant enumeration and application for MiniC programs.

Every mutation rule is an instance of an (original instruction type,
mutated instruction type) pair from the supported operator table
(`TABLE_PAIRS`). The concrete rule set:

  statement level (per statement site; conditions and switch heads are
  sites of their own, loop/branch conditions are never deleted):
    - trap replacement, statement deletion
    - argument shuffling for calls with >= 2 same-typed arguments
    - case-body shuffling and single-case removal for switches

  expression level (per expression node outside lvalue-only positions):
    - scalar binary: swap to each of the 17 other scalar operators,
      replacement by either operand, replacement by a unary form of an
      operand, unary wrapping
    - pointer binary: arithmetic swap (p+i <-> p-i), pointer-operand
      increment/decrement forms; pointer comparisons swap among the six
      relational operators
    - unary: swap to every other applicable unary form, operator
      removal, unary wrapping
    - atoms: unary-form insertion ({-,!,~,abs,-abs} plus ++/-- pre/post
      on assignable operands); integer literals additionally combine
      with the unit constant under every binary operator

The unary value menu is {-e, !e, ~e, abs(e), -abs(e)}; the assignment
menu is {e++, e--, ++e, --e}. With this catalog a loop condition of the
shape ``while (v-- > 0)`` carries exactly 72 mutants, matching the
per-statement density the feature definitions were validated against.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .lang.ast import (ARITH_OPS, BINARY_OPS, BITWISE_OPS, INT, INT_PTR,
                       LOGICAL_OPS, RELATIONAL_OPS, Ast, Node)
from .lang.cfg import StatementSite
from .program import Program

# Instruction-type vocabulary.
ANY_STMT = "ANY-STMT"
TRAPSTMT = "TRAPSTMT"
DELSTMT = "DELSTMT"
CALL_STATEMENT = "CALL-STATEMENT"
SWITCH_STATEMENT = "SWITCH-STATEMENT"
SHUFFLEARGS = "SHUFFLEARGS"
SHUFFLECASESDESTS = "SHUFFLECASESDESTS"
REMOVECASES = "REMOVECASES"
SCALAR_ATOM = "SCALAR.ATOM"
SCALAR_UNARY = "SCALAR.UNARY"
SCALAR_BINARY = "SCALAR.BINARY"
POINTER_ATOM = "POINTER.ATOM"
POINTER_UNARY = "POINTER.UNARY"
POINTER_BINARY = "POINTER.BINARY"
DEREF_UNARY = "DEREFERENCE.UNARY"
DEREF_BINARY = "DEREFERENCE.BINARY"

# The supported (original, mutated) instruction-type pairs.
TABLE_PAIRS = frozenset({
    (ANY_STMT, TRAPSTMT),
    (ANY_STMT, DELSTMT),
    (CALL_STATEMENT, SHUFFLEARGS),
    (SWITCH_STATEMENT, SHUFFLECASESDESTS),
    (SWITCH_STATEMENT, REMOVECASES),
    (SCALAR_ATOM, SCALAR_UNARY),
    (SCALAR_BINARY, SCALAR_BINARY),
    (SCALAR_BINARY, SCALAR_UNARY),
    (SCALAR_ATOM, SCALAR_BINARY),
    (SCALAR_BINARY, TRAPSTMT),
    (POINTER_BINARY, POINTER_BINARY),
    (SCALAR_BINARY, DELSTMT),
    (DEREF_BINARY, DEREF_BINARY),
    (SCALAR_UNARY, SCALAR_UNARY),
    (POINTER_BINARY, POINTER_UNARY),
    (DEREF_BINARY, DEREF_UNARY),
    (POINTER_ATOM, POINTER_UNARY),
    (POINTER_UNARY, POINTER_UNARY),
})

UNARY_FORMS = ("neg", "not", "bnot", "abs", "negabs")
INCDEC_FORMS = ("post-inc", "post-dec", "pre-inc", "pre-dec")

_UOP_TEXT = {
    "neg": "-()", "not": "!()", "bnot": "~()", "abs": "abs()", "negabs": "-abs()",
    "post-inc": "()++", "post-dec": "()--", "pre-inc": "++()", "pre-dec": "--()",
}

_OP_CATEGORY = {}
for _o in ARITH_OPS:
    _OP_CATEGORY[_o] = "arith"
for _o in BITWISE_OPS:
    _OP_CATEGORY[_o] = "bitwise"
for _o in RELATIONAL_OPS:
    _OP_CATEGORY[_o] = "relational"
for _o in LOGICAL_OPS:
    _OP_CATEGORY[_o] = "logical"


@dataclass(frozen=True)
class MutationOperator:
    operator_id: str
    original_type: str
    mutated_type: str
    pattern: str            # matched pattern -> replacement descriptor
    category: str

    def __post_init__(self):
        assert (self.original_type, self.mutated_type) in TABLE_PAIRS, \
            (self.original_type, self.mutated_type)


@dataclass
class Mutant:
    mutant_id: int
    program_id: str
    operator_id: str
    stmt_id: int            # statement site the mutation lives on
    expr_id: int            # mutated expression node (site node for stmt ops)
    block_id: int
    type_string: str
    line: int
    col: int
    recipe: tuple = ()      # how to apply; not serialized
    trivially_equivalent: bool = False
    duplicate_of: int | None = None

    @property
    def live(self) -> bool:
        return not self.trivially_equivalent and self.duplicate_of is None


class OperatorRegistry:
    def __init__(self) -> None:
        self.operators: dict[str, MutationOperator] = {}

    def get(self, operator_id: str, orig: str, mut: str, pattern: str,
            category: str) -> MutationOperator:
        op = self.operators.get(operator_id)
        if op is None:
            op = MutationOperator(operator_id, orig, mut, pattern, category)
            self.operators[operator_id] = op
        return op


REGISTRY = OperatorRegistry()


def is_scalar_lvalue(node: Node) -> bool:
    if node.kind == "identifier":
        return node.dtype == INT and not node.is_array_name
    return node.kind == "deref"


def is_pointer_lvalue(node: Node) -> bool:
    return node.kind == "identifier" and node.dtype == INT_PTR and not node.is_array_name


class _Enumerator:
    def __init__(self, program: Program):
        self.program = program
        self.ast = program.ast
        self.cfg = program.cfg
        self.mutants: list[Mutant] = []

    def run(self) -> list[Mutant]:
        for nid in self.cfg.site_order:
            site = self.cfg.sites[nid]
            self.stmt_level(site)
            root = self.site_root_expr(site)
            if root is not None:
                self.walk_expr(root, lvalue_position=False)
            elif site.node.kind == "assign":
                target, rhs = site.node.children
                self.walk_expr(target, lvalue_position=True)
                self.walk_expr(rhs, lvalue_position=False)
            elif site.node.kind == "io-read":
                self.walk_expr(site.node.children[0], lvalue_position=True)
        for i, m in enumerate(self.mutants, start=1):
            m.mutant_id = i
        return self.mutants

    # -- helpers ----------------------------------------------------------
    def site_root_expr(self, site: StatementSite) -> Node | None:
        """The value expression a site evaluates, when it has a single one."""
        node = site.node
        if site.role != "simple":
            return node  # condition / scrutinee root expression
        if node.kind in ("io-write", "return"):
            return node.children[0] if node.children else None
        if node.kind in ("call", "unary-op"):
            return node
        return None  # assign and io-read are handled separately

    def principal_itype(self, site: StatementSite) -> str:
        root = self.site_root_expr(site)
        if root is not None and root.kind == "binary-op" and root.dtype == INT \
                and all(c.dtype == INT for c in root.children):
            return SCALAR_BINARY
        return ANY_STMT

    def emit(self, site: StatementSite, expr: Node, operator: MutationOperator,
             recipe: tuple) -> None:
        node = expr
        self.mutants.append(Mutant(
            mutant_id=0,
            program_id=self.program.program_id,
            operator_id=operator.operator_id,
            stmt_id=site.nid,
            expr_id=node.nid,
            block_id=site.block,
            type_string=operator.pattern,
            line=node.line,
            col=node.col,
            recipe=recipe,
        ))

    # -- statement-level rules ---------------------------------------------
    def stmt_level(self, site: StatementSite) -> None:
        node = site.node
        orig = self.principal_itype(site)
        trap_op = REGISTRY.get(f"stmt.trap@{orig}", orig, TRAPSTMT,
                               "stmt → trap()", "stmt-trap")
        self.emit(site, node, trap_op, ("stmt-trap", site.nid, site.role))
        if site.role == "simple":
            del_op = REGISTRY.get(f"stmt.del@{orig}", orig, DELSTMT,
                                  "stmt → ;", "stmt-del")
            self.emit(site, node, del_op, ("stmt-del", site.nid))
        if site.role == "switch-head":
            self.switch_rules(site)

    def switch_rules(self, site: StatementSite) -> None:
        switch = self.ast.parent_of(site.nid)
        assert switch is not None and switch.kind == "switch"
        cases = [c for c in switch.children[1:] if c.value is not None]
        for i in range(len(cases)):
            for j in range(i + 1, len(cases)):
                op = REGISTRY.get("switch.shufflecases", SWITCH_STATEMENT,
                                  SHUFFLECASESDESTS,
                                  "switch(c1..c2) → switch(c2..c1)", "shuffle-cases")
                self.emit(site, switch, op,
                          ("shuffle-cases", switch.nid, cases[i].nid, cases[j].nid))
        for case in cases:
            op = REGISTRY.get("switch.removecase", SWITCH_STATEMENT, REMOVECASES,
                              "switch(case) → switch()", "remove-case")
            self.emit(site, switch, op, ("remove-case", switch.nid, case.nid))

    # -- expression walk -----------------------------------------------------
    def walk_expr(self, node: Node, lvalue_position: bool) -> None:
        site = self.enclosing_site(node)
        if not lvalue_position:
            self.expr_rules(site, node)
        elif node.kind == "deref":
            # the deref must stay an lvalue, but its pointer subtree is fair game
            self.walk_expr(node.children[0], lvalue_position=False)
            return
        if lvalue_position:
            return
        kind = node.kind
        if kind == "binary-op":
            self.walk_expr(node.children[0], lvalue_position=False)
            self.walk_expr(node.children[1], lvalue_position=False)
        elif kind == "unary-op":
            inner_lvalue = node.op in INCDEC_FORMS
            self.walk_expr(node.children[0], lvalue_position=inner_lvalue)
        elif kind == "deref":
            self.walk_expr(node.children[0], lvalue_position=False)
        elif kind == "call":
            for arg in node.children:
                self.walk_expr(arg, lvalue_position=False)

    def enclosing_site(self, node: Node) -> StatementSite:
        cur: Node | None = node
        while cur is not None:
            if cur.nid in self.cfg.sites:
                return self.cfg.sites[cur.nid]
            cur = self.ast.parent_of(cur.nid)
        raise KeyError(f"node {node.nid} has no enclosing statement site")

    # -- expression rules ------------------------------------------------------
    def expr_rules(self, site: StatementSite, node: Node) -> None:
        kind = node.kind
        in_deref = (par := self.ast.parent_of(node.nid)) is not None and par.kind == "deref"
        if kind == "binary-op":
            lt, rt = (c.dtype for c in node.children)
            if node.dtype == INT and lt == INT and rt == INT:
                self.scalar_binary_rules(site, node)
            elif node.dtype == INT_PTR:
                self.pointer_binary_rules(site, node, in_deref)
            elif node.dtype == INT and lt == INT_PTR:
                self.pointer_compare_rules(site, node)
        elif kind == "unary-op":
            operand = node.children[0]
            if node.dtype == INT:
                self.scalar_unary_rules(site, node)
            elif node.op in INCDEC_FORMS and node.dtype == INT_PTR:
                self.pointer_unary_rules(site, node)
            _ = operand
        elif kind == "identifier":
            if node.dtype == INT:
                self.scalar_atom_rules(site, node, literal=False)
            elif node.dtype == INT_PTR and is_pointer_lvalue(node):
                self.pointer_atom_rules(site, node)
        elif kind == "literal":
            self.scalar_atom_rules(site, node, literal=True)
        elif kind == "deref":
            if node.dtype == INT:
                self.scalar_atom_rules(site, node, literal=False)
        # calls: only argument shuffling applies
        if kind == "call" and node.name != "trap":
            self.shuffle_args_rules(site, node)

    def unary_insertions(self, site: StatementSite, node: Node, orig: str) -> None:
        for uop in UNARY_FORMS:
            op = REGISTRY.get(f"insert.{uop}@{orig}", orig, SCALAR_UNARY,
                              f"() → {_UOP_TEXT[uop]}", f"insert-{uop}")
            self.emit(site, node, op, ("wrap", node.nid, uop))
        if is_scalar_lvalue(node):
            for iop in INCDEC_FORMS:
                op = REGISTRY.get(f"insert.{iop}@{orig}", orig, SCALAR_UNARY,
                                  f"() → {_UOP_TEXT[iop]}", f"insert-{iop}")
                self.emit(site, node, op, ("wrap", node.nid, iop))

    def scalar_atom_rules(self, site: StatementSite, node: Node, literal: bool) -> None:
        self.unary_insertions(site, node, SCALAR_ATOM)
        if literal:
            for bop in BINARY_OPS:
                op = REGISTRY.get(f"lit.binop.{bop}", SCALAR_ATOM, SCALAR_BINARY,
                                  f"() → (){bop}1", "lit-binop")
                self.emit(site, node, op, ("lit-binop", node.nid, bop))

    def pointer_atom_rules(self, site: StatementSite, node: Node) -> None:
        for iop in INCDEC_FORMS:
            op = REGISTRY.get(f"ptr.insert.{iop}", POINTER_ATOM, POINTER_UNARY,
                              f"() → {_UOP_TEXT[iop]}", f"insert-{iop}")
            self.emit(site, node, op, ("wrap", node.nid, iop))

    def scalar_binary_rules(self, site: StatementSite, node: Node) -> None:
        cat = _OP_CATEGORY[node.op]
        for new in BINARY_OPS:
            if new == node.op:
                continue
            op = REGISTRY.get(
                f"bin.swap.{node.op}.{new}", SCALAR_BINARY, SCALAR_BINARY,
                f"(){node.op}() → (){new}()", f"swap-{cat}-{_OP_CATEGORY[new]}")
            self.emit(site, node, op, ("op-swap", node.nid, new))
        for idx, side in ((0, "left"), (1, "right")):
            op = REGISTRY.get(f"bin.{side}.{node.op}", SCALAR_BINARY, DELSTMT,
                              f"(){node.op}() → ()", "operand-del")
            self.emit(site, node, op, ("take-child", node.nid, idx))
        for idx in (0, 1):
            child = node.children[idx]
            for uop in UNARY_FORMS:
                op = REGISTRY.get(f"bin.unary.{uop}", SCALAR_BINARY, SCALAR_UNARY,
                                  f"()()() → {_UOP_TEXT[uop]}", "unary-of-operand")
                self.emit(site, node, op, ("unary-of-child", node.nid, idx, uop))
            if is_scalar_lvalue(child):
                for iop in INCDEC_FORMS:
                    op = REGISTRY.get(f"bin.incdec.{iop}", SCALAR_BINARY, SCALAR_UNARY,
                                      f"()()() → {_UOP_TEXT[iop]}", "unary-of-operand")
                    self.emit(site, node, op, ("unary-of-child", node.nid, idx, iop))
        for uop in UNARY_FORMS:
            op = REGISTRY.get(f"insert.{uop}@{SCALAR_BINARY}", SCALAR_BINARY,
                              SCALAR_UNARY, f"() → {_UOP_TEXT[uop]}", f"insert-{uop}")
            self.emit(site, node, op, ("wrap", node.nid, uop))

    def pointer_binary_rules(self, site: StatementSite, node: Node, in_deref: bool) -> None:
        orig = DEREF_BINARY if in_deref else POINTER_BINARY
        same = DEREF_BINARY if in_deref else POINTER_BINARY
        unary = DEREF_UNARY if in_deref else POINTER_UNARY
        other = "-" if node.op == "+" else "+"
        op = REGISTRY.get(f"pbin.swap.{node.op}.{other}@{orig}", orig, same,
                          f"(){node.op}() → (){other}()", "swap-pointer")
        self.emit(site, node, op, ("op-swap", node.nid, other))
        left = node.children[0]
        if is_pointer_lvalue(left):
            for iop in INCDEC_FORMS:
                op = REGISTRY.get(f"pbin.incdec.{iop}@{orig}", orig, unary,
                                  f"()()() → {_UOP_TEXT[iop]}", "unary-of-operand")
                self.emit(site, node, op, ("unary-of-child", node.nid, 0, iop))

    def pointer_compare_rules(self, site: StatementSite, node: Node) -> None:
        for new in sorted(RELATIONAL_OPS):
            if new == node.op:
                continue
            op = REGISTRY.get(f"pcmp.swap.{node.op}.{new}", POINTER_BINARY,
                              POINTER_BINARY, f"(){node.op}() → (){new}()",
                              "swap-pointer")
            self.emit(site, node, op, ("op-swap", node.nid, new))

    def scalar_unary_rules(self, site: StatementSite, node: Node) -> None:
        operand = node.children[0]
        current = node.op
        targets = [u for u in UNARY_FORMS if u != current]
        if is_scalar_lvalue(operand):
            targets.extend(i for i in INCDEC_FORMS if i != current)
        for uop in targets:
            op = REGISTRY.get(f"un.swap.{current}.{uop}", SCALAR_UNARY, SCALAR_UNARY,
                              f"{_UOP_TEXT[current]} → {_UOP_TEXT[uop]}", "unary-swap")
            self.emit(site, node, op, ("unary-swap", node.nid, uop))
        op = REGISTRY.get(f"un.remove.{current}", SCALAR_UNARY, SCALAR_UNARY,
                          f"{_UOP_TEXT[current]} → ()", "unary-removal")
        self.emit(site, node, op, ("take-child", node.nid, 0))
        for uop in UNARY_FORMS:
            op = REGISTRY.get(f"insert.{uop}@{SCALAR_UNARY}", SCALAR_UNARY,
                              SCALAR_UNARY, f"() → {_UOP_TEXT[uop]}", f"insert-{uop}")
            self.emit(site, node, op, ("wrap", node.nid, uop))

    def pointer_unary_rules(self, site: StatementSite, node: Node) -> None:
        for iop in INCDEC_FORMS:
            if iop == node.op:
                continue
            op = REGISTRY.get(f"pun.swap.{node.op}.{iop}", POINTER_UNARY,
                              POINTER_UNARY,
                              f"{_UOP_TEXT[node.op]} → {_UOP_TEXT[iop]}", "unary-swap")
            self.emit(site, node, op, ("unary-swap", node.nid, iop))
        op = REGISTRY.get(f"pun.remove.{node.op}", POINTER_UNARY, POINTER_UNARY,
                          f"{_UOP_TEXT[node.op]} → ()", "unary-removal")
        self.emit(site, node, op, ("take-child", node.nid, 0))

    def shuffle_args_rules(self, site: StatementSite, node: Node) -> None:
        args = node.children
        for i in range(len(args)):
            for j in range(i + 1, len(args)):
                if args[i].dtype == args[j].dtype:
                    op = REGISTRY.get("call.shuffleargs", CALL_STATEMENT, SHUFFLEARGS,
                                      "call(a..b) → call(b..a)", "shuffle-args")
                    self.emit(site, node, op, ("shuffle-args", node.nid, i, j))


def enumerate_mutants(program: Program) -> list[Mutant]:
    """Deterministic, stable-ordered first-order mutant list."""
    return _Enumerator(program).run()


# -- application -------------------------------------------------------------

def _make_unary(uop: str, operand: Node) -> Node:
    if uop == "negabs":
        inner = Node(0, "unary-op", op="abs", children=[operand],
                     line=operand.line, col=operand.col)
        return Node(0, "unary-op", op="neg", children=[inner],
                    line=operand.line, col=operand.col)
    return Node(0, "unary-op", op=uop, children=[operand],
                line=operand.line, col=operand.col)


def _replace_node(ast: Ast, nid: int, new: Node) -> None:
    parent = ast.parent_of(nid)
    assert parent is not None, "cannot replace the root"
    for i, c in enumerate(parent.children):
        if c.nid == nid:
            parent.children[i] = new
            return
    raise KeyError(nid)


def _delete_stmt(ast: Ast, nid: int) -> None:
    parent = ast.parent_of(nid)
    assert parent is not None and parent.kind == "block"
    parent.children = [c for c in parent.children if c.nid != nid]


def _trap_call(line: int, col: int) -> Node:
    return Node(0, "call", name="trap", dtype=INT, line=line, col=col)


def apply_mutant(program: Program, mutant: Mutant) -> Program:
    """Apply a mutant to its program, returning a new Program.

    The original program is unchanged. Raises KeyError when the mutant
    does not belong to this program (stale site ids).
    """
    if mutant.program_id != program.program_id:
        raise KeyError(f"mutant {mutant.mutant_id} belongs to "
                       f"{mutant.program_id!r}, not {program.program_id!r}")
    root = program.ast.root.clone()
    # clone() preserves node ids until reindex, so build a temporary index
    mutated = Ast(root)  # reindex assigns same preorder ids as the original
    kind = mutant.recipe[0]
    if kind == "stmt-trap":
        _, nid, _role = mutant.recipe
        node = mutated.nodes[nid]
        # simple statement -> `trap();`; condition/scrutinee -> `trap()` expr
        _replace_node(mutated, nid, _trap_call(node.line, node.col))
    elif kind == "stmt-del":
        _, nid = mutant.recipe
        _delete_stmt(mutated, nid)
    elif kind == "op-swap":
        _, nid, new_op = mutant.recipe
        mutated.nodes[nid].op = new_op
        mutated.nodes[nid].dtype = None  # re-established below
    elif kind == "take-child":
        _, nid, idx = mutant.recipe
        node = mutated.nodes[nid]
        _replace_node(mutated, nid, node.children[idx])
    elif kind == "unary-of-child":
        _, nid, idx, uop = mutant.recipe
        node = mutated.nodes[nid]
        _replace_node(mutated, nid, _make_unary(uop, node.children[idx]))
    elif kind == "unary-swap":
        _, nid, uop = mutant.recipe
        node = mutated.nodes[nid]
        _replace_node(mutated, nid, _make_unary(uop, node.children[0]))
    elif kind == "wrap":
        _, nid, uop = mutant.recipe
        node = mutated.nodes[nid]
        _replace_node(mutated, nid, _make_unary(uop, node))
    elif kind == "lit-binop":
        _, nid, bop = mutant.recipe
        node = mutated.nodes[nid]
        one = Node(0, "literal", value=1, dtype=INT, line=node.line, col=node.col)
        _replace_node(mutated, nid,
                      Node(0, "binary-op", op=bop, children=[node, one],
                           line=node.line, col=node.col))
    elif kind == "shuffle-args":
        _, nid, i, j = mutant.recipe
        args = mutated.nodes[nid].children
        args[i], args[j] = args[j], args[i]
    elif kind == "shuffle-cases":
        _, nid, case_a, case_b = mutant.recipe
        a = mutated.nodes[case_a]
        b = mutated.nodes[case_b]
        a.children, b.children = b.children, a.children
    elif kind == "remove-case":
        _, nid, case_nid = mutant.recipe
        switch = mutated.nodes[nid]
        switch.children = [c for c in switch.children if c.nid != case_nid]
    else:  # pragma: no cover
        raise ValueError(f"unknown recipe {kind!r}")
    mutated.reindex()
    from .lang.typecheck import check_types

    check_types(mutated)  # also refreshes expression dtypes
    out = Program(program.program_id, mutated)
    return out


def mutants_to_csv_rows(mutants: list[Mutant]) -> list[list]:
    rows = [["mutant_id", "program_id", "operator_id", "stmt_id", "expr_id",
             "block_id", "type_string", "line", "column"]]
    for m in mutants:
        rows.append([m.mutant_id, m.program_id, m.operator_id, m.stmt_id,
                     m.expr_id, m.block_id, m.type_string, m.line, m.col])
    return rows
