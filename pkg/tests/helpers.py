"""Shared test helpers."""

from __future__ import annotations

import os
from importlib.resources import files

from contractcheck.blocks import BlockDocument, parse_blocks
from contractcheck.model import ContractModel, build_model

BAKERY_PATH = files("contractcheck").joinpath("data/bakery.spa")

MINIMAL_SPA = """\
block Party S
  role: Seller
end

block Party P
  role: Purchaser
end

block Asset A
  type: Shares
end

block ContractDates D
  closing: 2
  horizon: 5
end

block TransferClaim T
  debtor: S
  creditor: P
  asset: A
  due: closing
end
"""


def solver_command() -> str:
    return os.environ.get("CONTRACTCHECK_SOLVER", "z3 -in")


def bakery_text() -> str:
    return BAKERY_PATH.read_text(encoding="utf-8")


def without(doc: BlockDocument, *ids: str) -> BlockDocument:
    return BlockDocument(tuple(b for b in doc.blocks if b.id not in ids))


def bakery_model(*drop: str) -> ContractModel:
    return build_model(without(parse_blocks(bakery_text()), *drop))

# acceptance lines collected during a run, echoed in the terminal summary
ACCEPTANCE: list[str] = []
