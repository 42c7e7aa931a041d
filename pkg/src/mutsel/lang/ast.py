"""AST node model for MiniC.

A single generic ``Node`` covers every construct; ``kind`` selects the
shape. Expression nodes carry a resolved data type (``int``, ``int*``)
after type checking; declarations carry the declared type. Node ids are
assigned in preorder, so identical source always yields identical ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

# Node kinds. "program" and "decl" are structural extras on top of the
# statement/expression kinds.
STMT_KINDS = frozenset(
    {"assign", "io-read", "io-write", "return", "if", "while", "switch", "call", "unary-op"}
)
EXPR_KINDS = frozenset({"binary-op", "unary-op", "deref", "identifier", "literal", "call"})

INT = "int"
INT_PTR = "int*"
VOID = "void"

BINARY_OPS = (
    "+", "-", "*", "/", "%",
    "&", "|", "^", "<<", ">>",
    "<", "<=", ">", ">=", "==", "!=",
    "&&", "||",
)
ARITH_OPS = frozenset({"+", "-", "*", "/", "%"})
BITWISE_OPS = frozenset({"&", "|", "^", "<<", ">>"})
RELATIONAL_OPS = frozenset({"<", "<=", ">", ">=", "==", "!="})
LOGICAL_OPS = frozenset({"&&", "||"})

# Unary operator spellings. Pre/post increment/decrement are distinct ops.
UNARY_VALUE_OPS = ("neg", "not", "bnot", "abs", "negabs")
UNARY_INCDEC_OPS = ("post-inc", "post-dec", "pre-inc", "pre-dec")


@dataclass
class Node:
    nid: int
    kind: str
    op: Optional[str] = None        # operator spelling for binary-op/unary-op
    name: Optional[str] = None      # identifier / function / call target name
    value: Optional[int] = None     # literal and case-label values
    dtype: Optional[str] = None     # resolved type of expressions; decl type
    children: list["Node"] = field(default_factory=list)
    line: int = 0
    col: int = 0
    # decl extras
    array_size: Optional[int] = None
    # set on identifier atoms that name a whole array (decayed to int*)
    is_array_name: bool = False

    def clone(self) -> "Node":
        return Node(
            nid=self.nid,
            kind=self.kind,
            op=self.op,
            name=self.name,
            value=self.value,
            dtype=self.dtype,
            children=[c.clone() for c in self.children],
            line=self.line,
            col=self.col,
            array_size=self.array_size,
            is_array_name=self.is_array_name,
        )

    def walk(self) -> Iterator["Node"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def signature(self) -> tuple:
        """Structural identity, independent of node ids and source spans."""
        return (
            self.kind,
            self.op,
            self.name,
            self.value,
            self.array_size,
            tuple(c.signature() for c in self.children),
        )


class Ast:
    """A parsed and type-checked MiniC translation unit.

    Holds the root ``program`` node plus derived indexes: node-by-id,
    parent links, and the per-function statement-site lists the CFG and
    mutation engine operate on.
    """

    def __init__(self, root: Node, source: str = ""):
        self.root = root
        self.source = source
        self.nodes: dict[int, Node] = {}
        self.parent: dict[int, Optional[int]] = {}
        self.reindex()

    def reindex(self) -> None:
        """Renumber nodes in preorder and rebuild indexes."""
        self.nodes.clear()
        self.parent.clear()
        counter = 0

        def visit(node: Node, parent: Optional[int]) -> None:
            nonlocal counter
            node.nid = counter
            counter += 1
            self.nodes[node.nid] = node
            self.parent[node.nid] = parent
            for c in node.children:
                visit(c, node.nid)

        visit(self.root, None)

    def node(self, nid: int) -> Node:
        return self.nodes[nid]

    def parent_of(self, nid: int) -> Optional[Node]:
        pid = self.parent.get(nid)
        return None if pid is None else self.nodes[pid]

    def functions(self) -> list[Node]:
        return [c for c in self.root.children if c.kind == "function"]

    def function_named(self, name: str) -> Optional[Node]:
        for f in self.functions():
            if f.name == name:
                return f
        return None

    def clone(self) -> "Ast":
        return Ast(self.root.clone(), source=self.source)

    def expression_ancestors(self, nid: int) -> list[Node]:
        """Proper ancestors of a node that are expression nodes, innermost
        first, stopping at the enclosing statement."""
        out = []
        cur = self.parent_of(nid)
        while cur is not None and cur.kind in ("binary-op", "unary-op", "deref", "call"):
            # a call used as a statement is the statement itself, not a
            # parent expression of its arguments for our purposes... it is
            # still an expression ancestor (consumes the value).
            out.append(cur)
            cur = self.parent_of(cur.nid)
        return out

    def to_json(self) -> dict:
        def conv(node: Node) -> dict:
            d: dict = {"id": node.nid, "kind": node.kind}
            for k in ("op", "name", "value", "dtype", "array_size"):
                v = getattr(node, k)
                if v is not None:
                    d[k] = v
            d["line"] = node.line
            d["col"] = node.col
            if node.children:
                d["children"] = [conv(c) for c in node.children]
            return d

        return conv(self.root)


def isomorphic(a: Ast, b: Ast) -> bool:
    """Structural equality modulo node ids and source spans."""
    return a.root.signature() == b.root.signature()
