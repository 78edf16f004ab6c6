"""Line-oriented block language for contract clauses.

A ``.spa`` file is a sequence of blocks::

    block Party Eva
      role: Seller
    end

Values are identifiers, integers, or comma-separated identifier lists.
``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

Value = Union[int, str, tuple[str, ...]]

KINDS = (
    "Party",
    "Asset",
    "PropertyFact",
    "ContractDates",
    "TransferClaim",
    "PayClaim",
    "WarrantyClaim",
    "PerformanceClaim",
    "CompensationClaim",
    "RestitutionClaim",
)

CLAIM_KINDS = KINDS[4:]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
INT_RE = re.compile(r"-?[0-9]+\Z")

# key -> expected value kind; "int", "ident", "list", "day" (int or `closing`)
SCHEMA: dict[str, dict[str, str]] = {
    "Party": {"role": "ident"},
    "Asset": {"type": "ident", "amount": "int"},
    "PropertyFact": {"asset": "ident", "owner": "ident"},
    "ContractDates": {"closing": "int", "horizon": "int"},
    "TransferClaim": {"debtor": "ident", "creditor": "ident", "asset": "ident", "due": "day"},
    "PayClaim": {"debtor": "ident", "creditor": "ident", "asset": "ident", "due": "day"},
    "WarrantyClaim": {
        "debtor": "ident",
        "creditor": "ident",
        "measure": "ident",
        "threshold": "int",
        "assert_window": "int",
        "limitation": "int",
        "consequences": "list",
    },
    "PerformanceClaim": {"primary": "ident", "perform_window": "int"},
    "CompensationClaim": {
        "primary": "ident",
        "perform_window": "int",
        "pay_window": "int",
        "rate": "int",
        "unit": "int",
        "minimum": "int",
    },
    "RestitutionClaim": {"primary": "ident"},
}

# Asset.amount is only required for Cash assets; checked separately.
OPTIONAL_KEYS = {("Asset", "amount")}

ROLES = ("Seller", "Purchaser", "Third")
# names used by the encoding: the ownership function and its two sorts
RESERVED_IDS = frozenset({"owner", "Person", "Object"})
ASSET_TYPES = ("Shares", "Cash")


@dataclass(frozen=True)
class SourceSpan:
    line_start: int
    line_end: int

    def __post_init__(self) -> None:
        if not 1 <= self.line_start <= self.line_end:
            raise ValueError(f"invalid span {self.line_start}-{self.line_end}")

    def __str__(self) -> str:
        if self.line_start == self.line_end:
            return f"line {self.line_start}"
        return f"lines {self.line_start}-{self.line_end}"


@dataclass(frozen=True)
class Block:
    """One parsed block. Equality ignores the source span."""

    kind: str
    id: str
    attrs: dict[str, Value]
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BlockDocument:
    blocks: tuple[Block, ...] = ()

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def get(self, block_id: str) -> Block | None:
        for block in self.blocks:
            if block.id == block_id:
                return block
        return None

    def of_kind(self, kind: str) -> list[Block]:
        return [b for b in self.blocks if b.kind == kind]


@dataclass(frozen=True)
class Diagnostic:
    block_id: str | None
    span: SourceSpan | None
    message: str

    def __str__(self) -> str:
        where = []
        if self.span is not None:
            where.append(str(self.span))
        if self.block_id is not None:
            where.append(f"block {self.block_id}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


class BlockSyntaxError(ValueError):
    """Malformed block text. Carries the 1-based line number."""

    def __init__(self, line: int, message: str) -> None:
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


def _parse_value(raw: str, lineno: int) -> Value:
    if INT_RE.match(raw):
        return int(raw)
    if IDENT_RE.match(raw):
        return raw
    parts = raw.split(", ")
    if len(parts) > 1 and all(IDENT_RE.match(p) for p in parts):
        return tuple(parts)
    raise BlockSyntaxError(lineno, f"malformed value {raw!r}")


def _check_kind(kind: str, key: str, value: Value, lineno: int) -> None:
    expected = SCHEMA[kind].get(key)
    if expected == "int" and not isinstance(value, int):
        raise BlockSyntaxError(lineno, f"{key} requires an integer, got {value!r}")
    if expected == "day" and not (isinstance(value, int) or value == "closing"):
        raise BlockSyntaxError(lineno, f"{key} requires an integer day or 'closing', got {value!r}")


def parse_blocks(text: str) -> BlockDocument:
    blocks: list[Block] = []
    seen_ids: set[str] = set()
    current: tuple[str, str, int, dict[str, Value]] | None = None

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if current is None:
            head = line.split(" ")
            if head[0] != "block":
                raise BlockSyntaxError(lineno, f"expected 'block', got {line.strip()!r}")
            if len(head) != 3:
                raise BlockSyntaxError(lineno, "malformed block header, expected 'block <Kind> <Id>'")
            _, kind, block_id = head
            if kind not in SCHEMA:
                raise BlockSyntaxError(lineno, f"unknown block kind {kind!r}")
            if not IDENT_RE.match(block_id):
                raise BlockSyntaxError(lineno, f"invalid block id {block_id!r}")
            if block_id in seen_ids:
                raise BlockSyntaxError(lineno, f"duplicate block id {block_id}")
            seen_ids.add(block_id)
            current = (kind, block_id, lineno, {})
            continue

        kind, block_id, start, attrs = current
        if line.strip() == "end":
            blocks.append(Block(kind, block_id, attrs, SourceSpan(start, lineno)))
            current = None
            continue
        if line.lstrip().startswith("block ") or line == "block":
            raise BlockSyntaxError(start, f"unterminated block {block_id}")
        if not line[0].isspace():
            raise BlockSyntaxError(lineno, "attribute lines must be indented")
        key, sep, rest = line.strip().partition(":")
        if not sep or not IDENT_RE.match(key):
            raise BlockSyntaxError(lineno, f"malformed attribute {line.strip()!r}")
        if not rest.startswith(" ") or not rest.strip():
            raise BlockSyntaxError(lineno, f"missing value for {key}")
        if key in attrs:
            raise BlockSyntaxError(lineno, f"duplicate key {key}")
        value = _parse_value(rest[1:], lineno)
        _check_kind(kind, key, value, lineno)
        attrs[key] = value

    if current is not None:
        raise BlockSyntaxError(current[2], f"unterminated block {current[1]}")
    return BlockDocument(tuple(blocks))


def _format_value(value: Value) -> str:
    if isinstance(value, tuple):
        return ", ".join(value)
    return str(value)


def serialize_blocks(doc: BlockDocument) -> str:
    chunks = []
    for block in doc.blocks:
        lines = [f"block {block.kind} {block.id}"]
        lines += [f"  {key}: {_format_value(v)}" for key, v in block.attrs.items()]
        lines.append("end\n")
        chunks.append("\n".join(lines))
    return "\n".join(chunks)


# ---------------------------------------------------------------------------
# validation

_REFERENCES: dict[str, dict[str, tuple[str, ...]]] = {
    "PropertyFact": {"asset": ("Asset",), "owner": ("Party",)},
    "TransferClaim": {"debtor": ("Party",), "creditor": ("Party",), "asset": ("Asset",)},
    "PayClaim": {"debtor": ("Party",), "creditor": ("Party",), "asset": ("Asset",)},
    "WarrantyClaim": {
        "debtor": ("Party",),
        "creditor": ("Party",),
        "consequences": ("PerformanceClaim", "CompensationClaim"),
    },
    "PerformanceClaim": {"primary": ("WarrantyClaim",)},
    "CompensationClaim": {"primary": ("WarrantyClaim",)},
    "RestitutionClaim": {"primary": ("TransferClaim", "PayClaim")},
}

_NON_NEGATIVE = ("assert_window", "limitation", "perform_window", "pay_window", "threshold", "rate", "minimum", "amount")


def _value_ok(expected: str, value: Value) -> bool:
    if expected == "int":
        return isinstance(value, int)
    if expected == "ident":
        return isinstance(value, str)
    if expected == "list":
        return isinstance(value, (str, tuple))
    return isinstance(value, int) or value == "closing"


def as_list(value: Value) -> tuple[str, ...]:
    if isinstance(value, tuple):
        return value
    return (str(value),)


def validate_blocks(doc: BlockDocument) -> list[Diagnostic]:
    """Check required keys, value kinds and references.

    Returns diagnostics in block order; document-level problems come last.
    """
    diags: list[Diagnostic] = []
    by_id = {b.id: b for b in doc.blocks}
    dates = doc.of_kind("ContractDates")
    horizon = dates[0].attrs.get("horizon") if len(dates) == 1 else None
    owned: set[Value] = set()

    for block in doc.blocks:
        def report(message: str, block: Block = block) -> None:
            diags.append(Diagnostic(block.id, block.span, message))

        if block.id in RESERVED_IDS or re.match(r"[dkl]_", block.id):
            report(f"id {block.id} is reserved for generated symbols")

        schema = SCHEMA[block.kind]
        for key in block.attrs:
            if key not in schema:
                report(f"unknown key {key}")
        for key, expected in schema.items():
            if key not in block.attrs:
                if (block.kind, key) in OPTIONAL_KEYS:
                    continue
                report(f"missing key {key}")
            elif not _value_ok(expected, block.attrs[key]):
                report(f"bad value for {key}: {block.attrs[key]!r}")

        attrs = block.attrs
        if block.kind == "Party" and attrs.get("role") not in (None, *ROLES):
            report(f"unknown role {attrs['role']}")
        if block.kind == "Asset":
            kind = attrs.get("type")
            if kind not in (None, *ASSET_TYPES):
                report(f"unknown asset type {kind}")
            if kind == "Cash" and "amount" not in attrs:
                report("missing key amount")
            if kind == "Shares" and "amount" in attrs:
                report("amount is only allowed on Cash assets")

        for key in _NON_NEGATIVE:
            value = attrs.get(key)
            if isinstance(value, int) and value < 0:
                report(f"{key} must be non-negative")
        if block.kind == "CompensationClaim" and isinstance(attrs.get("unit"), int) and attrs["unit"] < 1:
            report("unit must be positive")
        due = attrs.get("due")
        if isinstance(due, int) and due < 0:
            report("due must be non-negative")

        for key, kinds in _REFERENCES.get(block.kind, {}).items():
            if key not in attrs or not _value_ok(schema[key], attrs[key]):
                continue
            for ref in as_list(attrs[key]):
                target = by_id.get(ref)
                if target is None:
                    report(f"unresolved reference {ref}")
                elif target.kind not in kinds:
                    report(f"{key} {ref} must be a {' or '.join(kinds)} (found {target.kind})")

        if block.kind == "PayClaim":
            target = by_id.get(attrs.get("asset"))  # type: ignore[arg-type]
            if target is not None and target.kind == "Asset" and target.attrs.get("type") != "Cash":
                report(f"paid asset {target.id} must be Cash")

        if block.kind == "WarrantyClaim" and isinstance(attrs.get("consequences"), (str, tuple)):
            for ref in as_list(attrs["consequences"]):
                target = by_id.get(ref)
                if target is not None and target.attrs.get("primary") not in (None, block.id):
                    report(f"consequence {ref} names a different primary")
            measure = attrs.get("measure")
            if isinstance(measure, str) and measure in by_id:
                report(f"measure {measure} collides with a block id")
            if isinstance(measure, str) and re.match(r"[dkl]_", measure):
                report(f"measure {measure} collides with generated symbol names")

        if block.kind in ("PerformanceClaim", "CompensationClaim"):
            warranty = by_id.get(attrs.get("primary"))  # type: ignore[arg-type]
            if warranty is not None and warranty.kind == "WarrantyClaim":
                cons = warranty.attrs.get("consequences", ())
                if block.id not in as_list(cons):
                    report(f"not listed among the consequences of {warranty.id}")

        if block.kind == "CompensationClaim":
            warranty = by_id.get(attrs.get("primary"))  # type: ignore[arg-type]
            if warranty is not None:
                for sibling in doc.of_kind("PerformanceClaim"):
                    if (
                        sibling.attrs.get("primary") == warranty.id
                        and sibling.attrs.get("perform_window") != attrs.get("perform_window")
                    ):
                        report(f"perform_window differs from {sibling.id}")

        if block.kind == "PropertyFact" and "asset" in attrs:
            if attrs["asset"] in owned:
                report(f"second owner for asset {attrs['asset']}")
            owned.add(attrs["asset"])

        if block.kind == "ContractDates":
            c, h = attrs.get("closing"), attrs.get("horizon")
            if isinstance(c, int) and isinstance(h, int) and not 0 <= c <= h:
                report("closing must lie within [0, horizon]")

        if isinstance(due, int) and isinstance(horizon, int) and due > horizon:
            report("due lies beyond the horizon")

    if not dates:
        diags.append(Diagnostic(None, None, "missing ContractDates"))
    for extra in dates[1:]:
        diags.append(Diagnostic(extra.id, extra.span, "duplicate ContractDates"))
    roles = {b.attrs.get("role") for b in doc.of_kind("Party")}
    if doc.blocks and "Seller" not in roles:
        diags.append(Diagnostic(None, None, "missing Seller party"))
    if doc.blocks and "Purchaser" not in roles:
        diags.append(Diagnostic(None, None, "missing Purchaser party"))
    return diags
