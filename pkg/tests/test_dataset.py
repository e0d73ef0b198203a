import io
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from piotrowski.dataset import (
    ChangeDataset,
    DatasetError,
    DegenerateDatasetWarning,
    EmptyDatasetError,
    YearCount,
    merge_datasets,
    parse_text_records,
    parse_yearly_counts,
    total_attestations,
    write_yearly_counts,
)


def yearly(rows, header="year,recessive,innovative"):
    return "\n".join([header, *(",".join(map(str, r)) for r in rows)]) + "\n"


def test_parse_yearly_readback():
    ds = parse_yearly_counts(yearly([(1543, 10, 1), (1600, 5, 20)]), "x")
    assert len(ds) == 2
    assert total_attestations(ds)[:2] == (15, 21)


def test_duplicate_years_are_summed():
    ds = parse_yearly_counts(yearly([(1600, 2, 3), (1600, 4, 0)]), "x")
    assert ds.records == (YearCount(1600, 6, 3),)


def test_rows_sorted_comments_and_crlf():
    text = "# exported counts\r\nyear,recessive,innovative\r\n1700,1,2\r\n# mid comment\r\n1650,3,4\r\n"
    ds = parse_yearly_counts(io.StringIO(text), "x")
    assert ds.years == [1650, 1700]


@pytest.mark.parametrize("body, fragment", [
    ("year,recessive,innovative\n1600,2,x\n", "line 2"),
    ("year,recessive,innovative\n1600,2\n", "line 2"),
    ("year,recessive,innovative\n1600,1,1\n1601,-1,0\n", "line 3"),
    ("year,recessive,innovative\n900,1,1\n", "line 2"),
    ("yr,rec,inn\n1600,1,1\n", "header"),
])
def test_malformed_rows(body, fragment):
    with pytest.raises(DatasetError, match=fragment):
        parse_yearly_counts(body, "x")


def test_empty_body():
    with pytest.raises(EmptyDatasetError):
        parse_yearly_counts("year,recessive,innovative\n", "x")
    with pytest.raises(EmptyDatasetError):
        parse_yearly_counts("", "x")


def test_single_form_only_warns():
    with pytest.warns(DegenerateDatasetWarning):
        parse_yearly_counts(yearly([(1600, 3, 0), (1610, 2, 0)]), "x")


def test_text_records_point_and_range_dating():
    header = "text_id,year_from,year_to,recessive,innovative"
    assert parse_text_records(yearly([("A", 1601, 1601, 3, 1)], header), "x").records == (YearCount(1601, 3, 1),)
    with pytest.warns(DegenerateDatasetWarning):
        ds = parse_text_records(yearly([("B", 1600, 1621, 0, 4)], header), "x")
    assert ds.records == (YearCount(1610, 0, 4),)


def test_text_records_midpoints_match_reference():
    header = "text_id,year_from,year_to,recessive,innovative"
    rows = [("A", 1601, 1601, 3, 1), ("B", 1619, 1621, 2, 2)]
    reference = sorted({(a + b) // 2 for _, a, b, _, _ in rows})
    ds = parse_text_records(yearly(rows, header), "x")
    assert ds.years == reference == [1601, 1620]


def test_text_record_reversed_range_names_text():
    header = "text_id,year_from,year_to,recessive,innovative"
    with pytest.raises(DatasetError, match="'late'"):
        parse_text_records(yearly([("late", 1650, 1600, 1, 1)], header), "x")


def test_merge_elementwise_and_disjoint():
    a = ChangeDataset("a", (YearCount(1500, 1, 0),))
    b = ChangeDataset("b", (YearCount(1500, 0, 2),))
    c = ChangeDataset("c", (YearCount(1510, 0, 2),))
    assert merge_datasets(a, b, "m").records == (YearCount(1500, 1, 2),)
    assert merge_datasets(a, c, "m").records == (YearCount(1500, 1, 0), YearCount(1510, 0, 2))


def test_empty_totals():
    assert total_attestations(ChangeDataset("e")) == (0, 0, 0)


def test_unsorted_records_rejected():
    with pytest.raises(DatasetError):
        ChangeDataset("x", (YearCount(1600, 1, 1), YearCount(1500, 1, 1)))


# fixture datasets are synthetic stand-ins built with the attestation totals of the real changes
@pytest.mark.parametrize("name, total", [
    ("wszytek_wszystek", 55_005),
    ("barzo_bardzo", 17_938),
    ("abo_albo", 44_743),
    ("inszy_inny", 25_103),
    ("na_naj", 8_832),
    ("ir_er", 49_829),
    ("wietszy_wiekszy", 9_158),
])
def test_fixture_totals(datasets, name, total):
    assert total_attestations(datasets[name])[2] == total


def test_fixture_merged_bych_total(datasets):
    assert total_attestations(datasets["bych_merged"])[2] == 7_491 + 2_585 == 10_076


def test_fixture_barzo_before_1600(datasets):
    rec, inn, _ = total_attestations(datasets["barzo_bardzo"].between(stop=1600))
    assert (rec, inn) == (2_213, 25)


year_counts = st.lists(
    st.tuples(st.integers(1380, 1850), st.integers(0, 500), st.integers(0, 500)), max_size=40
)


@given(year_counts)
def test_csv_round_trip(rows):
    ds = ChangeDataset.from_counts("x", rows)
    if not ds.records:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDatasetWarning)
        assert parse_yearly_counts(write_yearly_counts(ds), "x") == ds


@given(year_counts, year_counts, year_counts)
def test_merge_commutative_associative_additive(r1, r2, r3):
    a, b, c = (ChangeDataset.from_counts(n, r) for n, r in (("a", r1), ("b", r2), ("c", r3)))
    assert merge_datasets(a, b, "m").records == merge_datasets(b, a, "m").records
    left = merge_datasets(merge_datasets(a, b, "ab"), c, "m")
    right = merge_datasets(a, merge_datasets(b, c, "bc"), "m")
    assert left.records == right.records
    ta, tb = total_attestations(a), total_attestations(b)
    assert total_attestations(merge_datasets(a, b, "m")) == tuple(x + y for x, y in zip(ta, tb))
