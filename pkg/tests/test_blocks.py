from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from contractcheck.blocks import (
    Block,
    BlockDocument,
    BlockSyntaxError,
    SourceSpan,
    parse_blocks,
    serialize_blocks,
    validate_blocks,
)

from helpers import MINIMAL_SPA, without


def test_empty_document():
    assert parse_blocks("") == BlockDocument(())
    assert serialize_blocks(BlockDocument(())) == ""


def test_single_block():
    doc = parse_blocks("block Party Eva\n  role: Seller\nend")
    assert len(doc) == 1
    block = doc.blocks[0]
    assert (block.kind, block.id, block.attrs) == ("Party", "Eva", {"role": "Seller"})
    assert block.span == SourceSpan(1, 3)


def test_single_block_canonical_text():
    doc = BlockDocument((Block("Party", "Eva", {"role": "Seller"}),))
    assert serialize_blocks(doc) == "block Party Eva\n  role: Seller\nend\n"


def test_bakery_counts(bakery_doc):
    kinds = [b.kind for b in bakery_doc]
    assert len(kinds) == 14
    assert kinds.count("Party") == 3
    assert kinds.count("Asset") == 2
    assert kinds.count("PropertyFact") == 1
    assert kinds.count("ContractDates") == 1
    assert sum(k.endswith("Claim") for k in kinds) == 7


def test_bakery_values(bakery_doc):
    assert bakery_doc.get("PurchasePrice").attrs == {"type": "Cash", "amount": 40000}
    assert bakery_doc.get("PretzelWarranty").attrs["consequences"] == ("Claim1", "Claim2")
    assert bakery_doc.get("Transfer").attrs["due"] == "closing"
    assert bakery_doc.get("BankSecurity").span == SourceSpan(26, 29)


def test_bakery_round_trip(bakery_doc):
    again = parse_blocks(serialize_blocks(bakery_doc))
    assert again == bakery_doc
    assert serialize_blocks(again) == serialize_blocks(bakery_doc)


def test_bakery_is_valid(bakery_doc):
    assert validate_blocks(bakery_doc) == []


def test_comments_and_blank_lines():
    doc = parse_blocks("# header\n\nblock Party Eva  # trailing\n  role: Seller # why\n\nend\n")
    assert doc.blocks[0].attrs == {"role": "Seller"}
    assert doc.blocks[0].span == SourceSpan(3, 6)


def test_negative_integer_value():
    doc = parse_blocks("block ContractDates D\n  closing: -1\n  horizon: 3\nend\n")
    assert doc.blocks[0].attrs["closing"] == -1


@pytest.mark.parametrize(
    "text, line",
    [
        ("blok Party Eva\nend\n", 1),
        ("block Party\nend\n", 1),
        ("block Nonsense X\nend\n", 1),
        ("block Party Eva\n  role: Seller\n", 1),
        ("block Party Eva\n  role: Seller\n  role: Seller\nend\n", 3),
        ("block Party Eva\n  role: Seller\nend\nblock Party Eva\n  role: Seller\nend\n", 4),
        ("block ContractDates D\n  closing: soon\n  horizon: 3\nend\n", 2),
        ("block Party Eva\n  role Seller\nend\n", 2),
        ("block Party Eva\n  role: Sel ler\nend\n", 2),
        ("  role: Seller\n", 1),
        ("block Party 9Eva\nend\n", 1),
    ],
)
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(BlockSyntaxError) as info:
        parse_blocks(text)
    assert info.value.line == line


def test_unresolved_reference(bakery_doc):
    transfer = bakery_doc.get("Transfer")
    attrs = {**transfer.attrs, "debtor": "Nobody"}
    doc = BlockDocument(tuple(replace(b, attrs=attrs) if b is transfer else b for b in bakery_doc))
    diags = validate_blocks(doc)
    assert [d.message for d in diags] == ["unresolved reference Nobody"]
    assert diags[0].block_id == "Transfer"
    assert diags[0].span == transfer.span


def test_missing_contract_dates(bakery_doc):
    diags = validate_blocks(without(bakery_doc, "Dates"))
    assert [d.message for d in diags] == ["missing ContractDates"]


@pytest.mark.parametrize(
    "extra, message",
    [
        ("block Party X\n  role: Boss\nend\n", "unknown role Boss"),
        ("block Party X\n  role: Third\n  age: 3\nend\n", "unknown key age"),
        ("block Asset X\n  type: Cash\nend\n", "missing key amount"),
        ("block Asset X\n  type: Shares\n  amount: 3\nend\n", "amount is only allowed on Cash assets"),
        ("block RestitutionClaim X\n  primary: A\nend\n", "primary A must be a TransferClaim or PayClaim (found Asset)"),
        ("block PropertyFact X\n  asset: A\n  owner: P\nend\nblock PropertyFact Y\n  asset: A\n  owner: S\nend\n",
         "second owner for asset A"),
        ("block ContractDates D2\n  closing: 1\n  horizon: 2\nend\n", "duplicate ContractDates"),
        ("block Party owner\n  role: Third\nend\n", "id owner is reserved for generated symbols"),
        ("block Party d_x\n  role: Third\nend\n", "id d_x is reserved for generated symbols"),
        ("block PayClaim Z\n  debtor: P\n  creditor: S\n  asset: A\n  due: 1\nend\n", "paid asset A must be Cash"),
        ("block TransferClaim Z\n  debtor: P\n  creditor: S\n  asset: A\n  due: 9\nend\n", "due lies beyond the horizon"),
    ],
)
def test_validation_messages(extra, message):
    diags = validate_blocks(parse_blocks(MINIMAL_SPA + "\n" + extra))
    assert message in [d.message for d in diags]


def test_validation_follows_block_order():
    text = MINIMAL_SPA + "\nblock Party X\n  role: Boss\nend\nblock Party Y\n  role: Boss\nend\n"
    assert [d.block_id for d in validate_blocks(parse_blocks(text))] == ["X", "Y"]


def test_warranty_checks(bakery_doc):
    claim2 = bakery_doc.get("Claim2")
    changed = replace(claim2, attrs={**claim2.attrs, "perform_window": 5})
    doc = BlockDocument(tuple(changed if b is claim2 else b for b in bakery_doc))
    assert [d.message for d in validate_blocks(doc)] == ["perform_window differs from Claim1"]

    warranty = bakery_doc.get("PretzelWarranty")
    changed = replace(warranty, attrs={**warranty.attrs, "consequences": "Claim1"})
    doc = BlockDocument(tuple(changed if b is warranty else b for b in bakery_doc))
    assert [d.message for d in validate_blocks(doc)] == ["not listed among the consequences of PretzelWarranty"]


def test_missing_parties():
    text = "block ContractDates D\n  closing: 0\n  horizon: 1\nend\n"
    messages = [d.message for d in validate_blocks(parse_blocks(text))]
    assert messages == ["missing Seller party", "missing Purchaser party"]


idents = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,6}", fullmatch=True).filter(lambda s: s != "closing")
values = st.one_of(
    st.integers(-1000, 10**6),
    idents,
    st.lists(idents, min_size=2, max_size=3).map(tuple),
)
KEYS = ["role", "type", "amount", "asset", "owner", "closing", "horizon", "debtor", "rate"]


@st.composite
def documents(draw):
    kinds = ["Party", "Asset", "PropertyFact", "ContractDates", "TransferClaim", "WarrantyClaim"]
    ids = draw(st.lists(idents, max_size=5, unique=True))
    blocks = []
    for ident in ids:
        keys = draw(st.lists(st.sampled_from(KEYS), max_size=4, unique=True))
        attrs = {k: draw(values) for k in keys}
        # schema-typed int keys must hold ints to parse
        for k in ("amount", "closing", "horizon", "rate"):
            if k in attrs and not isinstance(attrs[k], int):
                attrs[k] = 0
        blocks.append(Block(draw(st.sampled_from(kinds)), ident, attrs))
    return BlockDocument(tuple(blocks))


@given(documents())
def test_round_trip_property(doc):
    assert parse_blocks(serialize_blocks(doc)) == doc


@given(st.text(alphabet="blockend PartyEva:\n-0123#,", max_size=80))
def test_parsing_is_total(text):
    try:
        doc = parse_blocks(text)
    except BlockSyntaxError as exc:
        assert exc.line >= 1
    else:
        assert all(b.span.line_start >= 1 for b in doc)
