"""Typed contract object model built from a validated block document."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .blocks import BlockDocument, SourceSpan, as_list, validate_blocks


class InternalError(RuntimeError):
    """A caller broke a precondition (e.g. built a model from invalid blocks)."""


class Role(str, enum.Enum):
    SELLER = "Seller"
    PURCHASER = "Purchaser"
    THIRD = "Third"


class AssetType(str, enum.Enum):
    SHARES = "Shares"
    CASH = "Cash"


class ClaimKind(str, enum.Enum):
    TRANSFER = "Transfer"
    PAY = "Pay"
    WARRANTY = "Warranty"
    PERFORMANCE = "Performance"
    COMPENSATION = "Compensation"
    RESTITUTION = "Restitution"

    @property
    def is_primary(self) -> bool:
        return self in (ClaimKind.TRANSFER, ClaimKind.PAY, ClaimKind.WARRANTY)


_CLAIM_BLOCKS = {
    "TransferClaim": ClaimKind.TRANSFER,
    "PayClaim": ClaimKind.PAY,
    "WarrantyClaim": ClaimKind.WARRANTY,
    "PerformanceClaim": ClaimKind.PERFORMANCE,
    "CompensationClaim": ClaimKind.COMPENSATION,
    "RestitutionClaim": ClaimKind.RESTITUTION,
}


@dataclass(frozen=True)
class Party:
    id: str
    role: Role


@dataclass(frozen=True)
class Asset:
    id: str
    asset_type: AssetType
    amount: int | None = None


@dataclass(frozen=True)
class PropertyFact:
    id: str
    asset: str
    owner: str


@dataclass(frozen=True)
class ClaimSpec:
    id: str
    kind: ClaimKind
    debtor: str
    creditor: str
    subject: str | None = None
    due_day: int | None = None
    measure_name: str | None = None
    threshold: int | None = None
    assert_window: int | None = None
    limitation: int | None = None
    consequences: tuple[str, ...] = ()
    primary: str | None = None
    perform_window: int | None = None
    pay_window: int | None = None
    rate: int | None = None
    unit: int | None = None
    minimum: int | None = None

    @property
    def day_var(self) -> str:
        return f"d_{self.id}"

    @property
    def amount_var(self) -> str:
        return f"l_{self.id}"

    @property
    def units_var(self) -> str:
        return f"k_{self.id}"


@dataclass(frozen=True)
class ContractModel:
    parties: dict[str, Party]
    assets: dict[str, Asset]
    facts: dict[str, PropertyFact]
    claims: dict[str, ClaimSpec]
    closing_day: int
    horizon: int
    signing_day: int = 0
    block_of: dict[str, str] = field(default_factory=dict)
    spans: dict[str, SourceSpan] = field(default_factory=dict)

    def claim(self, claim_id: str) -> ClaimSpec:
        return self.claims[claim_id]

    def primaries(self) -> list[ClaimSpec]:
        return [c for c in self.claims.values() if c.kind.is_primary]

    def consequences_of(self, claim_id: str) -> list[ClaimSpec]:
        """Claims whose ``primary`` is ``claim_id``, in declaration order."""
        return [c for c in self.claims.values() if c.primary == claim_id]

    def with_horizon(self, horizon: int) -> ContractModel:
        if not self.closing_day <= horizon:
            raise ValueError(f"horizon {horizon} precedes closing day {self.closing_day}")
        return replace(self, horizon=horizon)


def build_model(doc: BlockDocument) -> ContractModel:
    diags = validate_blocks(doc)
    if diags:
        raise InternalError(f"build_model on an invalid document: {diags[0]}")

    dates = doc.of_kind("ContractDates")[0]
    closing = dates.attrs["closing"]
    assert isinstance(closing, int)
    parties: dict[str, Party] = {}
    assets: dict[str, Asset] = {}
    facts: dict[str, PropertyFact] = {}
    claims: dict[str, ClaimSpec] = {}
    block_of = {"dates": dates.id}
    spans = {b.id: b.span for b in doc.blocks if b.span is not None}

    for block in doc.blocks:
        a = block.attrs
        block_of[block.id] = block.id
        if block.kind == "Party":
            parties[block.id] = Party(block.id, Role(a["role"]))
        elif block.kind == "Asset":
            amount = a.get("amount")
            assets[block.id] = Asset(block.id, AssetType(a["type"]), amount)  # type: ignore[arg-type]
        elif block.kind == "PropertyFact":
            facts[block.id] = PropertyFact(block.id, str(a["asset"]), str(a["owner"]))

    # primaries before consequences, so consequences can inherit their parties
    ordered = sorted(
        (b for b in doc.blocks if b.kind in _CLAIM_BLOCKS),
        key=lambda b: not _CLAIM_BLOCKS[b.kind].is_primary,
    )
    for block in ordered:
        a = block.attrs
        kind = _CLAIM_BLOCKS[block.kind]
        if kind in (ClaimKind.TRANSFER, ClaimKind.PAY):
            due = closing if a["due"] == "closing" else a["due"]
            claims[block.id] = ClaimSpec(
                block.id, kind, str(a["debtor"]), str(a["creditor"]),
                subject=str(a["asset"]), due_day=due,  # type: ignore[arg-type]
            )
        elif kind is ClaimKind.WARRANTY:
            claims[block.id] = ClaimSpec(
                block.id, kind, str(a["debtor"]), str(a["creditor"]),
                measure_name=str(a["measure"]),
                threshold=a["threshold"],  # type: ignore[arg-type]
                assert_window=a["assert_window"],  # type: ignore[arg-type]
                limitation=a["limitation"],  # type: ignore[arg-type]
                consequences=as_list(a["consequences"]),
            )
        else:
            primary = claims[str(a["primary"])]
            claims[block.id] = ClaimSpec(
                block.id, kind, primary.debtor, primary.creditor,
                subject=primary.subject,
                primary=primary.id,
                perform_window=a.get("perform_window"),  # type: ignore[arg-type]
                pay_window=a.get("pay_window"),  # type: ignore[arg-type]
                rate=a.get("rate"),  # type: ignore[arg-type]
                unit=a.get("unit"),  # type: ignore[arg-type]
                minimum=a.get("minimum"),  # type: ignore[arg-type]
            )

    # restore declaration order
    claims = {b.id: claims[b.id] for b in doc.blocks if b.id in claims}
    return ContractModel(
        parties=parties,
        assets=assets,
        facts=facts,
        claims=claims,
        closing_day=closing,
        horizon=dates.attrs["horizon"],  # type: ignore[arg-type]
        block_of=block_of,
        spans=spans,
    )
