"""Data and control dependence over MiniC CFGs.

Data dependence: flow-sensitive reaching definitions over variables,
path-insensitive. Def sites are the nodes that perform the write: the
``assign``/``io-read`` statement node, or the ``++/--`` expression node
(which is both a def and a use, so it can depend on itself across loop
iterations). Pointer dereferences conservatively may-alias every array
the pointer was ever assigned from (weak defs: they do not kill).
Arrays are tracked as single variables. Calls are opaque (no
inter-procedural dependence).

Control dependence: computed from post-dominators over the CFG with the
synthetic exit block. Only the immediate (innermost) controlling branch
is recorded per statement site; a loop condition is not considered
dependent on itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import Ast, Node
from .cfg import Cfg, FuncCfg

INCDEC = ("post-inc", "post-dec", "pre-inc", "pre-dec")

# Sentinel alias target for pointers with unknown provenance (parameters).
ANY_ARRAY = "<any>"


@dataclass
class DepGraph:
    # (use node id, def node id, variable)
    data_edges: list[tuple[int, int, str]] = field(default_factory=list)
    # statement site id -> controlling condition root expression id
    control_edges: dict[int, int] = field(default_factory=dict)
    # def node id -> list of (use node id, variable)
    uses_of_def: dict[int, list[tuple[int, str]]] = field(default_factory=dict)
    # use node id -> list of (def node id, variable)
    defs_of_use: dict[int, list[tuple[int, str]]] = field(default_factory=dict)
    # condition root expr id -> statement site ids control-dependent on it
    controlled_sites: dict[int, list[int]] = field(default_factory=dict)

    def add_data_edge(self, use: int, definition: int, var: str) -> None:
        self.data_edges.append((use, definition, var))
        self.uses_of_def.setdefault(definition, []).append((use, var))
        self.defs_of_use.setdefault(use, []).append((definition, var))


@dataclass
class _Event:
    node: int       # node the event is attributed to
    action: str     # "read" | "write"
    var: str
    strong: bool = True


def _array_names(ast: Ast, fn: Node) -> list[str]:
    names = []
    for node in fn.walk():
        if node.kind == "decl" and node.array_size is not None:
            names.append(node.name)
    return names


def _pointer_aliases(ast: Ast, fn: Node) -> dict[str, set[str]]:
    """Flow-insensitive may-point-to sets per pointer variable."""
    aliases: dict[str, set[str]] = {}
    for node in fn.walk():
        if node.kind == "decl" and node.dtype == "int*" and node.array_size is None:
            aliases.setdefault(node.name, set())
            if ast.parent_of(node.nid) is fn:  # parameter: unknown provenance
                aliases[node.name].add(ANY_ARRAY)

    def base_set(expr: Node) -> set[str]:
        if expr.kind == "identifier":
            if expr.is_array_name:
                return {expr.name}
            return set(aliases.get(expr.name, {ANY_ARRAY}))
        if expr.kind == "binary-op":
            return base_set(expr.children[0])
        if expr.kind == "unary-op" and expr.op in INCDEC:
            return base_set(expr.children[0])
        return {ANY_ARRAY}

    for _ in range(len(aliases) + 1):
        changed = False
        for node in fn.walk():
            if node.kind == "assign":
                target, rhs = node.children
                if target.kind == "identifier" and target.dtype == "int*" \
                        and not target.is_array_name:
                    new = base_set(rhs) - {target.name}
                    if not new <= aliases.setdefault(target.name, set()):
                        aliases[target.name] |= new
                        changed = True
        if not changed:
            break
    return aliases


def _resolve_arrays(ptr_expr: Node, aliases: dict[str, set[str]],
                    all_arrays: list[str]) -> list[str]:
    def base_set(expr: Node) -> set[str]:
        if expr.kind == "identifier":
            if expr.is_array_name:
                return {expr.name}
            return set(aliases.get(expr.name, {ANY_ARRAY}))
        if expr.kind == "binary-op":
            return base_set(expr.children[0])
        if expr.kind == "unary-op" and expr.op in INCDEC:
            return base_set(expr.children[0])
        return {ANY_ARRAY}

    base = base_set(ptr_expr)
    if ANY_ARRAY in base:
        return sorted((base - {ANY_ARRAY}) | set(all_arrays))
    return sorted(base)


class _EventCollector:
    """Reads and writes of a statement site, in evaluation order."""

    def __init__(self, aliases: dict[str, set[str]], arrays: list[str]):
        self.aliases = aliases
        self.arrays = arrays

    def expr_events(self, node: Node) -> list[_Event]:
        kind = node.kind
        if kind == "literal":
            return []
        if kind == "identifier":
            if node.is_array_name:
                return []  # address of the array, not its contents
            return [_Event(node.nid, "read", node.name)]
        if kind == "binary-op":
            return self.expr_events(node.children[0]) + self.expr_events(node.children[1])
        if kind == "unary-op":
            operand = node.children[0]
            if node.op in INCDEC:
                events = self.expr_events(operand)
                if operand.kind == "identifier":
                    events.append(_Event(node.nid, "write", operand.name))
                else:  # deref lvalue: weak writes on aliased arrays
                    for arr in _resolve_arrays(operand.children[0], self.aliases, self.arrays):
                        events.append(_Event(node.nid, "write", arr, strong=False))
                return events
            return self.expr_events(operand)
        if kind == "deref":
            events = self.expr_events(node.children[0])
            for arr in _resolve_arrays(node.children[0], self.aliases, self.arrays):
                events.append(_Event(node.nid, "read", arr))
            return events
        if kind == "call":
            events: list[_Event] = []
            for arg in node.children:
                events.extend(self.expr_events(arg))
            return events
        raise ValueError(f"unexpected expression kind {kind!r}")  # pragma: no cover

    def site_events(self, node: Node, role: str) -> list[_Event]:
        if role != "simple":
            return self.expr_events(node)
        kind = node.kind
        if kind == "assign":
            target, rhs = node.children
            events = self.expr_events(rhs)
            if target.kind == "identifier":
                events.append(_Event(node.nid, "write", target.name))
            else:
                events.extend(self.expr_events(target.children[0]))
                for arr in _resolve_arrays(target.children[0], self.aliases, self.arrays):
                    events.append(_Event(node.nid, "write", arr, strong=False))
            return events
        if kind == "io-read":
            target = node.children[0]
            if target.kind == "identifier":
                return [_Event(node.nid, "write", target.name)]
            events = self.expr_events(target.children[0])
            for arr in _resolve_arrays(target.children[0], self.aliases, self.arrays):
                events.append(_Event(node.nid, "write", arr, strong=False))
            return events
        if kind in ("io-write", "return"):
            events = []
            for c in node.children:
                events.extend(self.expr_events(c))
            return events
        if kind in ("call", "unary-op"):
            return self.expr_events(node)
        raise ValueError(f"unexpected site kind {kind!r}")  # pragma: no cover


_State = dict[str, frozenset]


def _merge(states: list[_State]) -> _State:
    out: _State = {}
    for st in states:
        for var, defs in st.items():
            out[var] = out.get(var, frozenset()) | defs
    return out


def compute_data_deps(ast: Ast, cfg: Cfg, graph: DepGraph) -> None:
    for fn in ast.functions():
        fc = cfg.funcs[fn.name]
        aliases = _pointer_aliases(ast, fn)
        arrays = _array_names(ast, fn)
        collector = _EventCollector(aliases, arrays)
        block_events: dict[int, list[_Event]] = {}
        for bid, block in fc.blocks.items():
            events: list[_Event] = []
            for nid in block.sites:
                site = cfg.sites[nid]
                events.extend(collector.site_events(site.node, site.role))
            block_events[bid] = events

        def transfer(state: _State, events: list[_Event],
                     emit: DepGraph | None = None) -> _State:
            state = dict(state)
            for ev in events:
                if ev.action == "read":
                    if emit is not None:
                        for d in sorted(state.get(ev.var, frozenset())):
                            emit.add_data_edge(ev.node, d, ev.var)
                else:
                    if ev.strong:
                        state[ev.var] = frozenset({ev.node})
                    else:
                        state[ev.var] = state.get(ev.var, frozenset()) | {ev.node}
            return state

        block_in: dict[int, _State] = {bid: {} for bid in fc.blocks}
        block_out: dict[int, _State] = {bid: {} for bid in fc.blocks}
        changed = True
        while changed:
            changed = False
            for bid in fc.blocks:
                in_state = _merge([block_out[p] for p in fc.preds.get(bid, [])])
                out_state = transfer(in_state, block_events[bid])
                if out_state != block_out[bid] or in_state != block_in[bid]:
                    block_in[bid] = in_state
                    block_out[bid] = out_state
                    changed = True
        for bid in fc.blocks:
            transfer(block_in[bid], block_events[bid], emit=graph)


def _post_dominators(fc: FuncCfg) -> dict[int, set[int]]:
    blocks = list(fc.blocks)
    pdom: dict[int, set[int]] = {b: set(blocks) for b in blocks}
    pdom[fc.exit] = {fc.exit}
    changed = True
    while changed:
        changed = False
        for b in blocks:
            if b == fc.exit:
                continue
            succs = fc.succs.get(b, [])
            if succs:
                new = set.intersection(*(pdom[s] for s in succs)) | {b}
            else:
                new = {b}
            if new != pdom[b]:
                pdom[b] = new
                changed = True
    return pdom


def compute_control_deps(ast: Ast, cfg: Cfg, graph: DepGraph) -> None:
    for fn in ast.functions():
        fc = cfg.funcs[fn.name]
        pdom = _post_dominators(fc)
        branch_blocks = [b for b in fc.blocks if len(fc.succs.get(b, [])) >= 2]
        # Block-level control dependence (Ferrante-style): s depends on
        # branch b iff s post-dominates some successor of b but does not
        # strictly post-dominate b. Self-dependence (loop headers) excluded.
        cd: dict[int, set[int]] = {b: set() for b in fc.blocks}
        for b in branch_blocks:
            for x in fc.succs[b]:
                for s in pdom[x]:
                    if s != b and s not in pdom[b]:
                        cd[s].add(b)
        # innermost controller per block
        def innermost(controllers: set[int]) -> int | None:
            if not controllers:
                return None
            if len(controllers) == 1:
                return next(iter(controllers))
            closure: dict[int, set[int]] = {}

            def anc(b: int, seen: frozenset = frozenset()) -> set[int]:
                if b in closure:
                    return closure[b]
                out: set[int] = set()
                for c in cd.get(b, set()):
                    if c in seen:
                        continue
                    out.add(c)
                    out |= anc(c, seen | {b})
                closure[b] = out
                return out

            for c in sorted(controllers):
                if all(other in anc(c) for other in controllers if other != c):
                    return c
            return min(controllers)

        for bid, block in fc.blocks.items():
            controller_block = innermost(cd.get(bid, set()))
            if controller_block is None:
                continue
            ctrl_sites = fc.blocks[controller_block].sites
            if not ctrl_sites:
                continue
            cond_nid = ctrl_sites[-1]  # the branch decision is the last site
            for nid in block.sites:
                graph.control_edges[nid] = cond_nid
                graph.controlled_sites.setdefault(cond_nid, []).append(nid)


def compute_deps(ast: Ast, cfg: Cfg) -> DepGraph:
    graph = DepGraph()
    compute_data_deps(ast, cfg, graph)
    compute_control_deps(ast, cfg, graph)
    return graph
