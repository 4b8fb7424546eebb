import pytest

from homascend.core.config import settings
from homascend.core.errors import BoundsExceeded
from homascend.services.gallery import GALLERY_ITEMS, gallery


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gorenstein_truncations(n):
    report = gallery("2.11", n=n, L=5)
    assert report.values["ext"] == [1, 0, 0, 0, 0, 0]
    assert report.values["retract_exists"] is False


def test_field_extension():
    report = gallery("2.8", L=3)
    assert report.values["flat"] is True
    assert report.values["free_rank"] == 2
    assert report.values["residue_iso"] is False
    assert report.values["dagger"] is False
    assert report.values["ext"] == [0, 0, 0]
    assert report.values["compatible"] is False


def test_truncated_frobenius():
    report = gallery("2.9", p=2, N=2, L=3)
    assert report.values["free_rank"] == 2
    assert report.values["ext"] == [0, 0, 0]
    assert report.values["retract"] == "none"
    assert report.params == {"p": 2, "N": 2, "L": 3}


def test_frobenius_in_characteristic_three():
    assert gallery("2.9", p=3, N=2, L=2).values["free_rank"] == 3


def test_regular_element():
    report = gallery("2.10")
    assert report.values["ext1"] == {"free_rank": 0, "exponents": [1], "side": "over-R"}
    assert report.values["ext0"]["exponents"] == []


def test_every_item_is_registered():
    assert GALLERY_ITEMS == ("2.8", "2.9", "2.10", "2.11")


@pytest.mark.parametrize(
    "which, params",
    [
        ("2.9", {"p": 4}),
        ("2.9", {"p": 11}),
        ("2.9", {"N": 1}),
        ("2.11", {"n": 9}),
        ("3.7", {}),
    ],
)
def test_bounds_are_enforced(which, params):
    with pytest.raises(BoundsExceeded):
        gallery(which, **params)


def test_frobenius_retract_search_beyond_the_candidate_limit(monkeypatch):
    monkeypatch.setattr(settings, "EXHAUSTIVE_LIMIT", 1)
    with pytest.raises(BoundsExceeded):
        gallery("2.9", p=2, N=2, L=1)
