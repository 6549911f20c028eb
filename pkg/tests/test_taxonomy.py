import pytest

from skillpop.exceptions import UnknownLabel
from skillpop.taxonomy import LABELS, N_LABELS, Category, get_label, label_index, labels_in, parse_label


def test_twenty_three_labels_with_category_sizes():
    assert N_LABELS == 23
    sizes = {c: len(labels_in(c)) for c in Category}
    assert sizes == {Category.SALARY: 5, Category.COMPANY_SCALE: 5, Category.LOCATION: 3,
                     Category.FINANCING_ROUND: 7, Category.WORK_TYPE: 3}


def test_indices_are_dense_and_stable():
    assert [lab.global_index for lab in LABELS] == list(range(23))
    assert parse_label("salary=very_high").global_index == 0
    assert parse_label("financing=listed").global_index == 18
    assert parse_label("work_type=intern").global_index == 22


def test_slug_round_trip():
    for lab in LABELS:
        assert parse_label(lab.slug) is lab
        assert label_index(lab) == lab.global_index


def test_aliases_and_spelling():
    assert get_label("company_scale", "Very Big") is parse_label("scale=very_big")
    assert get_label("financing_round", "A") is parse_label("financing=a")


def test_unknown_value_lists_valid_values():
    with pytest.raises(UnknownLabel, match="very_high"):
        parse_label("salary=ultra")
    with pytest.raises(UnknownLabel):
        parse_label("salary")
    with pytest.raises(UnknownLabel):
        parse_label("colour=red")
