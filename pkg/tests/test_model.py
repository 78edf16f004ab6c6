import pytest

from contractcheck.blocks import parse_blocks
from contractcheck.model import ClaimKind, InternalError, build_model

from helpers import MINIMAL_SPA, bakery_model, bakery_text


def test_bakery_model(bakery):
    assert (len(bakery.parties), len(bakery.assets), len(bakery.facts), len(bakery.claims)) == (3, 2, 1, 7)
    assert bakery.closing_day == 28
    assert bakery.horizon == 365
    assert bakery.signing_day == 0
    assert list(bakery.claims) == [
        "Transfer", "Pay", "PretzelWarranty", "Claim1", "Claim2", "ResPurchaser", "ResSeller",
    ]


def test_due_closing_resolves(bakery):
    assert bakery.claims["Transfer"].due_day == 28
    assert bakery.claims["Pay"].due_day == 28


def test_consequences_inherit_parties(bakery):
    claim2 = bakery.claims["Claim2"]
    assert claim2.kind is ClaimKind.COMPENSATION
    assert (claim2.debtor, claim2.creditor) == ("Eva", "Chris")
    assert [c.id for c in bakery.consequences_of("PretzelWarranty")] == ["Claim1", "Claim2"]
    assert [c.id for c in bakery.consequences_of("Transfer")] == ["ResPurchaser"]
    res = bakery.claims["ResSeller"]
    assert (res.debtor, res.creditor) == ("Chris", "Eva")


def test_primaries(bakery):
    assert [c.id for c in bakery.primaries()] == ["Transfer", "Pay", "PretzelWarranty"]


def test_block_of_covers_every_element(bakery):
    elements = [*bakery.parties, *bakery.assets, *bakery.facts, *bakery.claims]
    assert all(e in bakery.block_of for e in elements)
    assert set(bakery.block_of.values()) <= set(bakery.spans)


def test_without_warranty_blocks():
    m = bakery_model("PretzelWarranty", "Claim1", "Claim2")
    assert list(m.claims) == ["Transfer", "Pay", "ResPurchaser", "ResSeller"]


def test_minimal_document():
    m = build_model(parse_blocks(MINIMAL_SPA))
    assert len(m.claims) == 1
    assert m.facts == {}


def test_invalid_document_is_an_internal_error():
    with pytest.raises(InternalError):
        build_model(parse_blocks(bakery_text().replace("debtor: Eva", "debtor: Nobody")))


def test_with_horizon(bakery):
    assert bakery.with_horizon(100).horizon == 100
    with pytest.raises(ValueError):
        bakery.with_horizon(10)


def test_distinct_documents_give_distinct_models():
    a = build_model(parse_blocks(MINIMAL_SPA))
    b = build_model(parse_blocks(MINIMAL_SPA.replace("closing: 2", "closing: 3")))
    assert a != b
