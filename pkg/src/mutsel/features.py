"""Static mutant features and their numeric encoding.

28 features per mutant, computed on the original (unmutated) program:
counts over the CFG and the dependence graph, booleans over the mutated
expression's immediate shape, and categorical descriptors. Dependence
conventions follow the feature definitions validated on the reference
loop example:

  - an expression depends on (in-deps) its compound immediate operands
    plus, for directly-read variables, the definition sites reaching the
    read (a read-modify-write expression can reach itself via a loop);
  - out-deps are the reads reached by the node's own variable writes;
  - "mutants on" an expression counts mutants whose mutated expression
    is that node; "mutants on" a statement counts every mutant of the
    statement.

Encoding: numerics are min-max scaled (fitted on training data, clipped
at prediction time, constant features encode to 0); booleans pass
through; single-valued categoricals are one-hot with a trailing unknown
bucket; multi-valued categoricals sum the one-hot vectors of their
members, so entries can exceed 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .lang.ast import Node
from .lang.deps import INCDEC
from .mutation import Mutant
from .program import Program

NUMERIC_FEATURES = (
    "Complexity", "CfgDepth", "CfgPredNum", "CfgSuccNum", "AstNumParents",
    "NumOutDataDeps", "NumInDataDeps", "NumOutCtrlDeps", "NumInCtrlDeps",
    "NumTieDeps", "AstParentsNumOutDataDeps", "AstParentsNumInDataDeps",
    "AstParentsNumOutCtrlDeps", "AstParentsNumInCtrlDeps", "AstParentsNumTieDeps",
)
BOOLEAN_FEATURES = ("AstChildHasIdentifier", "AstChildHasLiteral", "AstChildHasOperator")
SINGLE_CATEGORICAL_FEATURES = (
    "TypeAstParent", "TypeMutant", "TypeStmtBB", "DataTypesOfOperands", "DataTypeOfValue",
)
MULTI_CATEGORICAL_FEATURES = (
    "AstParentMutantType", "OutDataDepMutantType", "InDataDepMutantType",
    "OutCtrlDepMutantType", "InCtrlDepMutantType",
)
ALL_FEATURES = NUMERIC_FEATURES + BOOLEAN_FEATURES \
    + SINGLE_CATEGORICAL_FEATURES + MULTI_CATEGORICAL_FEATURES

_UOP_TEXT = {
    "neg": "-()", "not": "!()", "bnot": "~()", "abs": "abs()", "negabs": "-abs()",
    "post-inc": "()++", "post-dec": "()--", "pre-inc": "++()", "pre-dec": "--()",
}


@dataclass
class RawFeatureRecord:
    Complexity: int = 0
    CfgDepth: int = 0
    CfgPredNum: int = 0
    CfgSuccNum: int = 0
    AstNumParents: int = 0
    NumOutDataDeps: int = 0
    NumInDataDeps: int = 0
    NumOutCtrlDeps: int = 0
    NumInCtrlDeps: int = 0
    NumTieDeps: int = 0
    AstParentsNumOutDataDeps: int = 0
    AstParentsNumInDataDeps: int = 0
    AstParentsNumOutCtrlDeps: int = 0
    AstParentsNumInCtrlDeps: int = 0
    AstParentsNumTieDeps: int = 0
    AstChildHasIdentifier: int = 0
    AstChildHasLiteral: int = 0
    AstChildHasOperator: int = 0
    TypeAstParent: str = "none"
    TypeMutant: str = ""
    TypeStmtBB: str = ""
    DataTypesOfOperands: str = "none"
    DataTypeOfValue: str = "void"
    AstParentMutantType: dict[str, int] = field(default_factory=dict)
    OutDataDepMutantType: dict[str, int] = field(default_factory=dict)
    InDataDepMutantType: dict[str, int] = field(default_factory=dict)
    OutCtrlDepMutantType: dict[str, int] = field(default_factory=dict)
    InCtrlDepMutantType: dict[str, int] = field(default_factory=dict)

    def get(self, name: str):
        return getattr(self, name)


def node_descriptor(node: Node) -> str:
    """Short shape descriptor used for the TypeAstParent vocabulary."""
    kind = node.kind
    if kind == "binary-op":
        return f"(){node.op}()"
    if kind == "unary-op":
        return _UOP_TEXT[node.op]
    if kind == "deref":
        return "*()"
    if kind == "call":
        return "call()"
    if kind == "identifier":
        return "ident"
    if kind == "literal":
        return "literal"
    return kind  # statements: assign, io-read, io-write, return, while, if, ...


class FeatureExtractor:
    """Per-program feature extraction context.

    Precomputes mutant indexes so per-mutant extraction is cheap; all 28
    features are populated for every mutant of the program.
    """

    _EXPR_KINDS = ("binary-op", "unary-op", "deref", "call")

    def __init__(self, program: Program, mutants: list[Mutant]):
        self.program = program
        self.ast = program.ast
        self.cfg = program.cfg
        self.deps = program.deps
        self.mutants = mutants
        self.by_expr: dict[int, list[Mutant]] = {}
        self.by_stmt: dict[int, list[Mutant]] = {}
        for m in mutants:
            self.by_expr.setdefault(m.expr_id, []).append(m)
            self.by_stmt.setdefault(m.stmt_id, []).append(m)

    # -- "mutants on" counting ------------------------------------------------
    def expr_mutants(self, nid: int) -> list[Mutant]:
        return self.by_expr.get(nid, [])

    def stmt_mutants(self, nid: int) -> list[Mutant]:
        return self.by_stmt.get(nid, [])

    def target_mutants(self, nid: int) -> list[Mutant]:
        """Mutants on a dependence target: whole-statement sets for
        statement nodes, node-exact sets for expressions."""
        node = self.ast.nodes[nid]
        if nid in self.cfg.sites and node.kind not in self._EXPR_KINDS \
                and node.kind not in ("identifier", "literal"):
            return self.stmt_mutants(nid)
        if node.kind in ("assign", "io-read"):
            return self.stmt_mutants(nid)
        return self.expr_mutants(nid)

    # -- dependence target sets -------------------------------------------------
    def in_dep_targets(self, node: Node) -> list[int]:
        targets: list[int] = []
        seen: set[int] = set()

        def add(nid: int) -> None:
            if nid not in seen:
                seen.add(nid)
                targets.append(nid)

        children: list[Node] = []
        kind = node.kind
        if kind == "assign":
            target, rhs = node.children
            children = [rhs] + ([target.children[0]] if target.kind == "deref" else [])
        elif kind == "io-read":
            target = node.children[0]
            children = [target.children[0]] if target.kind == "deref" else []
        elif kind == "switch":
            children = [node.children[0]]
        else:
            children = list(node.children)
        for c in children:
            if c.kind == "identifier" and not c.is_array_name:
                for d, _var in self.deps.defs_of_use.get(c.nid, []):
                    add(d)
            elif c.kind in ("literal", "identifier"):
                continue
            else:
                add(c.nid)
        # reads attributed to the node's own operator (array loads at derefs)
        for d, _var in self.deps.defs_of_use.get(node.nid, []):
            add(d)
        return targets

    def out_dep_targets(self, node: Node) -> list[int]:
        targets: list[int] = []
        seen: set[int] = set()
        for use, _var in self.deps.uses_of_def.get(node.nid, []):
            parent = self.ast.parent_of(use)
            tgt = use
            if parent is not None and parent.kind in self._EXPR_KINDS:
                tgt = parent.nid
            if tgt not in seen:
                seen.add(tgt)
                targets.append(tgt)
        return targets

    # -- per-mutant extraction ----------------------------------------------------
    def extract(self, mutant: Mutant) -> RawFeatureRecord:
        rec = RawFeatureRecord()
        site = self.cfg.sites[mutant.stmt_id]
        fc = self.cfg.funcs[site.function]
        block = fc.blocks[site.block]
        expr = self.ast.nodes[mutant.expr_id]

        rec.Complexity = len(self.stmt_mutants(mutant.stmt_id))
        rec.CfgDepth = fc.depth_from_entry(block.bid)
        rec.CfgPredNum = len(fc.real_preds(block.bid))
        rec.CfgSuccNum = len(fc.real_succs(block.bid))
        rec.AstNumParents = len(self.ast.expression_ancestors(expr.nid))

        out_targets = self.out_dep_targets(expr)
        in_targets = self.in_dep_targets(expr)
        rec.NumOutDataDeps, rec.OutDataDepMutantType = self._aggregate(out_targets)
        rec.NumInDataDeps, rec.InDataDepMutantType = self._aggregate(in_targets)

        controlled = self.deps.controlled_sites.get(expr.nid, [])
        rec.NumOutCtrlDeps, rec.OutCtrlDepMutantType = self._aggregate_stmts(controlled)
        controller = self.deps.control_edges.get(mutant.stmt_id)
        rec.NumInCtrlDeps, rec.InCtrlDepMutantType = self._aggregate(
            [controller] if controller is not None else [])

        rec.NumTieDeps = len(self.expr_mutants(expr.nid))

        parent = self.ast.parent_of(expr.nid)
        if parent is not None and parent.kind in self._EXPR_KINDS:
            rec.AstParentsNumOutDataDeps, _types_out = self._aggregate(
                self.out_dep_targets(parent))
            rec.AstParentsNumInDataDeps, _types_in = self._aggregate(
                self.in_dep_targets(parent))
            p_controlled = self.deps.controlled_sites.get(parent.nid, [])
            rec.AstParentsNumOutCtrlDeps, _ = self._aggregate_stmts(p_controlled)
            p_controller = self.deps.control_edges.get(mutant.stmt_id)
            rec.AstParentsNumInCtrlDeps, _ = self._aggregate(
                [p_controller] if p_controller is not None else [])
            rec.AstParentsNumTieDeps = len(self.expr_mutants(parent.nid))
            rec.AstParentMutantType = self._type_hist(self.expr_mutants(parent.nid))
            rec.TypeAstParent = node_descriptor(parent)
        elif parent is not None:
            rec.TypeAstParent = node_descriptor(parent)

        rec.TypeMutant = mutant.type_string
        rec.TypeStmtBB = block.kind

        children = expr.children
        rec.AstChildHasIdentifier = int(any(c.kind == "identifier" for c in children))
        rec.AstChildHasLiteral = int(any(c.kind == "literal" for c in children))
        rec.AstChildHasOperator = int(
            expr.kind in ("binary-op", "unary-op", "deref")
            or any(c.kind in ("binary-op", "unary-op", "deref") for c in children))

        operand_types = sorted({c.dtype for c in children if c.dtype is not None})
        rec.DataTypesOfOperands = ",".join(operand_types) if operand_types else "none"
        rec.DataTypeOfValue = expr.dtype if expr.dtype is not None else "void"
        return rec

    def extract_all(self) -> list[RawFeatureRecord]:
        return [self.extract(m) for m in self.mutants]

    def _aggregate(self, targets: list[int]) -> tuple[int, dict[str, int]]:
        count = 0
        hist: dict[str, int] = {}
        for nid in targets:
            for m in self.target_mutants(nid):
                count += 1
                hist[m.type_string] = hist.get(m.type_string, 0) + 1
        return count, hist

    def _aggregate_stmts(self, stmt_nids: list[int]) -> tuple[int, dict[str, int]]:
        count = 0
        hist: dict[str, int] = {}
        for nid in stmt_nids:
            for m in self.stmt_mutants(nid):
                count += 1
                hist[m.type_string] = hist.get(m.type_string, 0) + 1
        return count, hist

    def _type_hist(self, mutants: list[Mutant]) -> dict[str, int]:
        hist: dict[str, int] = {}
        for m in mutants:
            hist[m.type_string] = hist.get(m.type_string, 0) + 1
        return hist


def extract_raw_features(program: Program, mutants: list[Mutant],
                         mutant: Mutant) -> RawFeatureRecord:
    """One-off extraction; use FeatureExtractor for whole programs."""
    return FeatureExtractor(program, mutants).extract(mutant)


# -- encoding -----------------------------------------------------------------

UNKNOWN = "<unknown>"


@dataclass
class Encoding:
    numeric_range: dict[str, tuple[float, float]]
    vocabularies: dict[str, list[str]]   # per categorical feature, sans unknown

    def column_names(self) -> list[str]:
        names = list(NUMERIC_FEATURES) + list(BOOLEAN_FEATURES)
        for feat in SINGLE_CATEGORICAL_FEATURES + MULTI_CATEGORICAL_FEATURES:
            names.extend(f"{feat}={v}" for v in self.vocabularies[feat])
            names.append(f"{feat}={UNKNOWN}")
        return names

    def width(self) -> int:
        n = len(NUMERIC_FEATURES) + len(BOOLEAN_FEATURES)
        for feat in SINGLE_CATEGORICAL_FEATURES + MULTI_CATEGORICAL_FEATURES:
            n += len(self.vocabularies[feat]) + 1
        return n

    def schema_hash(self) -> str:
        import hashlib

        payload = json.dumps(
            {"ranges": {k: list(v) for k, v in sorted(self.numeric_range.items())},
             "vocab": {k: v for k, v in sorted(self.vocabularies.items())}},
            sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def encode(self, record: RawFeatureRecord) -> np.ndarray:
        out = np.zeros(self.width(), dtype=np.float64)
        i = 0
        for feat in NUMERIC_FEATURES:
            lo, hi = self.numeric_range[feat]
            v = float(record.get(feat))
            if hi > lo:
                out[i] = min(max((v - lo) / (hi - lo), 0.0), 1.0)
            else:
                out[i] = 0.0
            i += 1
        for feat in BOOLEAN_FEATURES:
            out[i] = float(record.get(feat))
            i += 1
        for feat in SINGLE_CATEGORICAL_FEATURES:
            vocab = self.vocabularies[feat]
            index = {v: k for k, v in enumerate(vocab)}
            value = record.get(feat)
            slot = index.get(value, len(vocab))
            out[i + slot] = 1.0
            i += len(vocab) + 1
        for feat in MULTI_CATEGORICAL_FEATURES:
            vocab = self.vocabularies[feat]
            index = {v: k for k, v in enumerate(vocab)}
            for value, count in record.get(feat).items():
                slot = index.get(value, len(vocab))
                out[i + slot] += count
            i += len(vocab) + 1
        return out

    def encode_many(self, records: list[RawFeatureRecord]) -> np.ndarray:
        return np.stack([self.encode(r) for r in records]) if records else \
            np.zeros((0, self.width()))

    def to_json(self) -> str:
        return json.dumps({
            "version": 1,
            "numeric_range": {k: list(v) for k, v in self.numeric_range.items()},
            "vocabularies": self.vocabularies,
        }, indent=0, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Encoding":
        data = json.loads(text)
        return cls(
            numeric_range={k: (v[0], v[1]) for k, v in data["numeric_range"].items()},
            vocabularies=data["vocabularies"],
        )


def fit_encoder(records: list[RawFeatureRecord]) -> Encoding:
    """Fit value ranges and vocabularies on training records only."""
    if not records:
        raise ValueError("cannot fit an encoder on zero records")
    numeric_range = {}
    for feat in NUMERIC_FEATURES:
        values = [float(r.get(feat)) for r in records]
        numeric_range[feat] = (min(values), max(values))
    vocabularies: dict[str, list[str]] = {}
    for feat in SINGLE_CATEGORICAL_FEATURES:
        vocabularies[feat] = sorted({str(r.get(feat)) for r in records})
    for feat in MULTI_CATEGORICAL_FEATURES:
        seen: set[str] = set()
        for r in records:
            seen.update(r.get(feat).keys())
        vocabularies[feat] = sorted(seen)
    return Encoding(numeric_range=numeric_range, vocabularies=vocabularies)


def feature_matrix_rows(encoding: Encoding, mutants: list[Mutant],
                        records: list[RawFeatureRecord]) -> list[list]:
    """CSV rows: mutant_id plus the expanded encoded columns."""
    header = ["mutant_id"] + encoding.column_names()
    rows = [header]
    for m, r in zip(mutants, records):
        vec = encoding.encode(r)
        rows.append([m.mutant_id] + [format(x, ".10g") for x in vec])
    return rows
