"""Control-flow graphs over MiniC functions.

Granularity: the unit of execution/mutation is a *statement site*.
Simple statements are their own sites; the condition of an ``if`` or
``while`` and the scrutinee of a ``switch`` are sites identified by the
root expression node (the construct's body is not part of the site).

Block kinds use a fixed vocabulary. ``if`` conditions stay in the
current block (the branch happens at block end); ``while`` conditions
get a dedicated block because they are loop headers; ``switch``
scrutinees get a dedicated "Switch Head" block. A synthetic "Exit"
block (no statements) closes every function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import Ast, Node

BLOCK_KINDS = (
    "Entry", "Exit", "Plain", "If-Then", "If-Else",
    "While Condition", "While Body", "Switch Head", "Case Body", "Return",
)

# site roles
SIMPLE = "simple"
IF_COND = "if-cond"
WHILE_COND = "while-cond"
SWITCH_HEAD = "switch-head"


@dataclass
class StatementSite:
    nid: int                 # site id: stmt node id, or condition root expr id
    role: str                # simple | if-cond | while-cond | switch-head
    node: Node               # the site node itself
    owner_nid: int           # enclosing construct node (== nid for simple stmts)
    function: str
    block: int = -1


@dataclass
class Block:
    bid: int
    kind: str
    function: str
    sites: list[int] = field(default_factory=list)


@dataclass
class FuncCfg:
    function: str
    blocks: dict[int, Block] = field(default_factory=dict)
    succs: dict[int, list[int]] = field(default_factory=dict)
    preds: dict[int, list[int]] = field(default_factory=dict)
    entry: int = 0
    exit: int = -1

    def real_succs(self, bid: int) -> list[int]:
        return [b for b in self.succs[bid] if b != self.exit]

    def real_preds(self, bid: int) -> list[int]:
        return list(self.preds[bid])

    def depth_from_entry(self, bid: int) -> int:
        """Number of blocks strictly before ``bid`` on a shortest path from
        the entry block (0 when ``bid`` is the entry)."""
        from collections import deque

        dist = {self.entry: 0}
        q = deque([self.entry])
        while q:
            cur = q.popleft()
            if cur == bid:
                return dist[cur]
            for s in self.succs[cur]:
                if s not in dist:
                    dist[s] = dist[cur] + 1
                    q.append(s)
        return dist.get(bid, 0)


class Cfg:
    def __init__(self) -> None:
        self.funcs: dict[str, FuncCfg] = {}
        self.sites: dict[int, StatementSite] = {}
        self.site_order: list[int] = []

    def func_of_site(self, nid: int) -> FuncCfg:
        return self.funcs[self.sites[nid].function]

    def block_of_site(self, nid: int) -> Block:
        site = self.sites[nid]
        return self.funcs[site.function].blocks[site.block]

    def sites_in_function(self, name: str) -> list[StatementSite]:
        return [self.sites[n] for n in self.site_order if self.sites[n].function == name]

    def to_json(self) -> dict:
        out: dict = {"functions": {}}
        for name, fc in self.funcs.items():
            out["functions"][name] = {
                "entry": fc.entry,
                "exit": fc.exit,
                "blocks": [
                    {"id": b.bid, "kind": b.kind, "sites": list(b.sites)}
                    for b in fc.blocks.values()
                ],
                "edges": sorted(
                    (src, dst) for src, dsts in fc.succs.items() for dst in dsts
                ),
            }
        return out


class _Builder:
    def __init__(self, cfg: Cfg, fn: Node):
        self.cfg = cfg
        self.fn = fn
        self.fc = FuncCfg(function=fn.name)
        self.next_bid = 0
        self.edges: list[tuple[int, int]] = []

    def new_block(self, kind: str) -> int:
        bid = self.next_bid
        self.next_bid += 1
        self.fc.blocks[bid] = Block(bid, kind, self.fn.name)
        return bid

    def add_edge(self, src: int, dst: int) -> None:
        self.edges.append((src, dst))

    def add_site(self, node: Node, role: str, owner: Node, block: int) -> None:
        site = StatementSite(node.nid, role, node, owner.nid, self.fn.name, block)
        self.cfg.sites[node.nid] = site
        self.cfg.site_order.append(node.nid)
        self.fc.blocks[block].sites.append(node.nid)

    def build(self) -> FuncCfg:
        entry = self.new_block("Entry")
        self.fc.entry = entry
        tail = self.walk_block(self.fn.children[-1], entry)
        exit_bid = self.new_block("Exit")
        self.fc.exit = exit_bid
        if tail is not None:
            self.add_edge(tail, exit_bid)
        for bid, block in self.fc.blocks.items():
            if block.sites and self.cfg.sites[block.sites[-1]].node.kind == "return":
                self.add_edge(bid, exit_bid)
        self.finish()
        return self.fc

    def walk_block(self, block: Node, current: int | None) -> int | None:
        """Place a brace-block's statements; returns the live tail block
        (``None`` after a return)."""
        for item in block.children:
            if item.kind == "decl":
                continue
            if current is None:
                # unreachable code after a return still gets a block
                current = self.new_block("Plain")
            current = self.walk_stmt(item, current)
        return current

    def walk_stmt(self, stmt: Node, current: int) -> int | None:
        kind = stmt.kind
        if kind in ("assign", "io-read", "io-write", "call", "unary-op"):
            self.add_site(stmt, SIMPLE, stmt, current)
            return current
        if kind == "return":
            self.add_site(stmt, SIMPLE, stmt, current)
            return None
        if kind == "block":
            return self.walk_block(stmt, current)
        if kind == "if":
            cond = stmt.children[0]
            self.add_site(cond, IF_COND, stmt, current)
            then_bid = self.new_block("If-Then")
            self.add_edge(current, then_bid)
            then_tail = self.walk_block(stmt.children[1], then_bid)
            join = self.new_block("Plain")
            if len(stmt.children) == 3:
                else_bid = self.new_block("If-Else")
                self.add_edge(current, else_bid)
                tail_stmt = stmt.children[2]
                if tail_stmt.kind == "if":
                    else_tail = self.walk_stmt(tail_stmt, else_bid)
                else:
                    else_tail = self.walk_block(tail_stmt, else_bid)
                if else_tail is not None:
                    self.add_edge(else_tail, join)
            else:
                self.add_edge(current, join)
            if then_tail is not None:
                self.add_edge(then_tail, join)
            return join
        if kind == "while":
            cond = stmt.children[0]
            cond_bid = self.new_block("While Condition")
            self.add_edge(current, cond_bid)
            self.add_site(cond, WHILE_COND, stmt, cond_bid)
            body_bid = self.new_block("While Body")
            self.add_edge(cond_bid, body_bid)
            body_tail = self.walk_block(stmt.children[1], body_bid)
            if body_tail is not None:
                self.add_edge(body_tail, cond_bid)
            after = self.new_block("Plain")
            self.add_edge(cond_bid, after)
            return after
        if kind == "switch":
            scrutinee = stmt.children[0]
            head = self.new_block("Switch Head")
            self.add_edge(current, head)
            self.add_site(scrutinee, SWITCH_HEAD, stmt, head)
            join = self.new_block("Plain")
            has_default = False
            for case in stmt.children[1:]:
                if case.value is None:
                    has_default = True
                cb = self.new_block("Case Body")
                self.add_edge(head, cb)
                tail = self.walk_block(case.children[0], cb)
                if tail is not None:
                    self.add_edge(tail, join)
            if not has_default:
                self.add_edge(head, join)
            return join
        raise ValueError(f"unexpected statement kind {kind!r}")  # pragma: no cover

    def finish(self) -> None:
        # Drop empty Plain join blocks by splicing their edges.
        succs: dict[int, list[int]] = {b: [] for b in self.fc.blocks}
        for src, dst in self.edges:
            succs[src].append(dst)
        changed = True
        while changed:
            changed = False
            for bid, block in list(self.fc.blocks.items()):
                if block.kind != "Plain" or block.sites or bid == self.fc.entry:
                    continue
                targets = succs.get(bid, [])
                if len(targets) != 1:
                    continue
                target = targets[0]
                for src in list(succs):
                    succs[src] = [target if d == bid else d for d in succs[src]]
                del succs[bid]
                del self.fc.blocks[bid]
                changed = True
        # Relabel fall-through blocks that end in a return.
        for block in self.fc.blocks.values():
            if block.kind == "Plain" and block.sites:
                last = self.cfg.sites[block.sites[-1]].node
                if last.kind == "return":
                    block.kind = "Return"
        # Deduplicate edges, preserve first-seen order.
        self.fc.succs = {b: [] for b in self.fc.blocks}
        self.fc.preds = {b: [] for b in self.fc.blocks}
        for src in succs:
            for dst in succs[src]:
                if dst not in self.fc.succs[src]:
                    self.fc.succs[src].append(dst)
                    self.fc.preds[dst].append(src)
        for block in self.fc.blocks.values():
            for nid in block.sites:
                self.cfg.sites[nid].block = block.bid


def build_cfg(ast: Ast) -> Cfg:
    """Build per-function CFGs; total on well-typed ASTs."""
    cfg = Cfg()
    for fn in ast.functions():
        cfg.funcs[fn.name] = _Builder(cfg, fn).build()
    return cfg
