"""Gold SRL records (one JSON object per line) and a synthetic corpus generator."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, TextIO

from .convert import RuleSet, convert_tree, load_rules
from .inference import NON_VERB_FORBIDDEN
from .learning import CORE_ROLES, REL, RoleSet
from .treebank import DEFAULT_TAGS, BracketedTree, TagInventory, parse_tree

__all__ = [
    "Argument",
    "PredicateAnnotation",
    "GoldRecord",
    "read_corpus",
    "write_corpus",
    "propositions",
    "generate_corpus",
]


@dataclass(frozen=True)
class Argument:
    role: str
    span: tuple[int, int]


@dataclass
class PredicateAnnotation:
    leaf_index: int
    arguments: list = field(default_factory=list)

    def labelled_spans(self) -> list[tuple[tuple[int, int], str]]:
        return [(a.span, a.role) for a in self.arguments]


@dataclass
class GoldRecord:
    tree_text: str
    predicates: list = field(default_factory=list)
    id: str = ""

    @cached_property
    def tree(self) -> BracketedTree:
        return parse_tree(self.tree_text)

    def validate(self, role_set: RoleSet = RoleSet()) -> None:
        n = len(self.tree)
        for pred in self.predicates:
            if not 0 <= pred.leaf_index < n:
                raise ValueError(f"predicate index {pred.leaf_index} out of range ({n} leaves)")
            spans = []
            for arg in pred.arguments:
                start, end = arg.span
                if not 0 <= start < end <= n:
                    raise ValueError(f"argument span {arg.span} outside sentence of {n} leaves")
                if arg.role != REL and arg.role not in role_set:
                    raise ValueError(f"unknown role {arg.role!r}")
                spans.append((start, end))
            spans.sort()
            for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
                if b0 < a1:
                    raise ValueError(f"overlapping arguments {(a0, a1)} and {(b0, b1)}")

    def to_json(self) -> str:
        data = {
            "id": self.id,
            "tree_text": self.tree_text,
            "predicates": [
                {"leaf_index": p.leaf_index,
                 "arguments": [{"role": a.role, "span": list(a.span)} for a in p.arguments]}
                for p in self.predicates
            ],
        }
        return json.dumps(data, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str, default_id: str = "") -> "GoldRecord":
        data = json.loads(line)
        preds = []
        for p in data.get("predicates", []):
            args = [Argument(a["role"], (int(a["span"][0]), int(a["span"][1])))
                    for a in p.get("arguments", [])]
            preds.append(PredicateAnnotation(int(p["leaf_index"]), args))
        return cls(data["tree_text"], preds, str(data.get("id", default_id)))


def read_corpus(fh: TextIO, role_set: RoleSet = RoleSet(), name: str = "<corpus>") -> list[GoldRecord]:
    records = []
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            record = GoldRecord.from_json(line, default_id=str(lineno))
            record.validate(role_set)
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{name}:{lineno}: {exc}") from None
        records.append(record)
    return records


def write_corpus(records: Iterable[GoldRecord], fh: TextIO) -> None:
    for record in records:
        fh.write(record.to_json() + "\n")


def propositions(records: Iterable[GoldRecord]):
    """Flatten records into ``(X, y, keys)`` for the estimator API.

    ``X`` holds ``(tree, predicate_leaf)`` pairs, ``y`` the gold
    ``(span, role)`` lists and ``keys`` ``(record_id, predicate_leaf)``.
    """
    X, y, keys = [], [], []
    for record in records:
        for pred in record.predicates:
            X.append((record.tree, pred.leaf_index))
            y.append(pred.labelled_spans())
            keys.append((record.id, pred.leaf_index))
    return X, y, keys


# --- synthetic corpus -------------------------------------------------------

_NOUNS = ["nhà", "con_trai", "sinh_viên", "bài", "cơm", "sách", "xe", "trường", "thành_phố",
          "bạn", "mẹ", "cô_giáo", "bác_sĩ", "hoa", "thư", "áo", "chợ", "ruộng", "công_ty", "bàn"]
_PRONOUNS = ["tôi", "nó", "họ", "chúng_tôi", "bà", "anh_ấy", "em"]
_VERBS = ["ăn", "đọc", "mua", "viết", "xem", "sửa", "làm", "bán", "học", "giặt", "vẽ", "đón"]
_GIVE_VERBS = ["tặng", "gửi", "đưa", "trả"]
_SAY_VERBS = ["nói", "biết", "nghĩ", "tin"]
_INTRANS = ["đi", "chạy", "ngủ", "khóc", "cười", "đến"]
_ADJS = ["đẹp", "cao", "vui", "mới", "lớn", "buồn", "giỏi"]
_ADVS = ["đã", "đang", "sẽ", "cũng", "vẫn"]
_NEGS = ["không", "chẳng", "chưa_hề"]
_LOC_PREPS = ["ở", "trong", "trên", "tại"]
_DIR_PREPS = ["vào", "tới", "về"]
_CAUSAL = ["vì", "do", "bởi"]
_MANNER = ["nhanh", "chậm", "cẩn_thận", "vội_vàng"]
_DISCOURSE = ["nhưng", "còn", "tuy_nhiên"]
_PASSIVE = ["bị", "được"]


class _Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng

    def choice(self, seq):
        return self.rng.choice(seq)

    def noun_phrase(self, tag: Optional[str] = None):
        label = "NP" + (f"-{tag}" if tag else "")
        r = self.rng.random()
        if r < 0.3:
            return (label, [("P-H", self.choice(_PRONOUNS))])
        kids = []
        if self.rng.random() < 0.3:
            kids.append(("L", self.choice(["những", "các", "mọi"])))
        kids.append(("N-H", self.choice(_NOUNS)))
        if self.rng.random() < 0.3:
            kids.append(("A", self.choice(_ADJS)))
        if self.rng.random() < 0.2:
            kids.append(("P", self.choice(_PRONOUNS)))
        return (label, kids)

    def pp(self, tag: Optional[str], preps):
        label = "PP" + (f"-{tag}" if tag else "")
        return (label, [("E-H", self.choice(preps)), self.noun_phrase()])

    def clause(self, depth: int = 0):
        """``(label, children)`` for an S; predicate leaves are 3-tuples."""
        kids = []
        if self.rng.random() < 0.15:
            kids.append(("C", self.choice(_DISCOURSE)))
        kids.append(self.noun_phrase("SUB"))
        if self.rng.random() < 0.2:
            kids.append(("AP", [("R", "rất"), ("A-H", self.choice(_ADJS), True)]))
        else:
            kids.append(self.verb_phrase(depth))
        if self.rng.random() < 0.5 and depth == 0:
            kids.append((".", "."))
        return ("S", kids)

    def verb_phrase(self, depth: int):
        rng = self.rng
        kids = []
        if rng.random() < 0.3:
            kids.append(("R", self.choice(_ADVS)))
        if rng.random() < 0.35:
            kids.append(("R", self.choice(_NEGS)))
        kind = rng.random()
        if kind < 0.12 and depth == 0:
            kids.append(("V-H", self.choice(_SAY_VERBS), True))
            kids.append(("SBAR", [self.clause(depth + 1)]))
        elif kind < 0.3:
            kids.append(("V-H", self.choice(_GIVE_VERBS), True))
            kids.append(self.noun_phrase("IOB"))
            kids.append(self.noun_phrase("DOB"))
        elif kind < 0.45:
            kids.append(("V-H", self.choice(_INTRANS), True))
            if rng.random() < 0.5:
                kids.append(self.pp("DIR", _DIR_PREPS))
        elif kind < 0.55:
            kids.append(("V", self.choice(_PASSIVE)))
            kids.append(("V-H", self.choice(_VERBS), True))
        else:
            kids.append(("V-H", self.choice(_VERBS), True))
            kids.append(self.noun_phrase("DOB" if rng.random() < 0.6 else None))
        if rng.random() < 0.3:
            kids.append(self.pp("LOC", _LOC_PREPS))
        if rng.random() < 0.15:
            kids.append(("AP-MNR", [("A-H", self.choice(_MANNER))]))
        if rng.random() < 0.1:
            kids.append(("QP-EXT", [("M", self.choice(["hai", "ba"])), ("N-H", "lần")]))
        if rng.random() < 0.15:
            kids.append(self.pp(None, _CAUSAL))
        return ("VP", kids)


def _render(node, leaves: list, preds: list) -> str:
    label, body = node[0], node[1]
    if isinstance(body, str):
        if len(node) > 2 and node[2]:
            preds.append(len(leaves))
        leaves.append(body)
        return f"({label} {body})"
    return f"({label} {' '.join(_render(k, leaves, preds) for k in body)})"


def _consistent(roles: list[str], predicate_type: str) -> bool:
    core = [r for r in roles if r in CORE_ROLES]
    if len(core) != len(set(core)):
        return False
    return predicate_type == "V" or not (set(roles) & NON_VERB_FORBIDDEN)


def generate_corpus(n_sentences: int = 500, seed: int = 0, rules: Optional[RuleSet] = None,
                    inventory: TagInventory = DEFAULT_TAGS) -> list[GoldRecord]:
    """Random function-tagged trees annotated by the conversion rules.

    Predicates whose rule-derived roles would break the decoding constraints
    (a repeated core role, Arg2-4 on a non-verbal predicate) are left
    unannotated, so every gold proposition is reachable by the pipeline.
    """
    rng = random.Random(seed)
    rules = load_rules() if rules is None else rules
    builder = _Builder(rng)
    records = []
    while len(records) < n_sentences:
        leaves, preds = [], []
        text = _render(builder.clause(), leaves, preds)
        tree = parse_tree(text, inventory)
        annotations = []
        for leaf in preds:
            labelled = convert_tree(tree, leaf, rules)
            roles = [role for _, role in labelled if role != REL]
            if not _consistent(roles, tree.leaf(leaf).phrase_type):
                continue
            args = [Argument(role, span) for span, role in labelled]
            annotations.append(PredicateAnnotation(leaf, args))
        if annotations:
            records.append(GoldRecord(text, annotations, f"syn{len(records):05d}"))
    return records
