import pytest

from towerbench import i18n
from towerbench.i18n import get_available_langs, t


@pytest.fixture(autouse=True)
def english():
    i18n.init("en")


def test_english_is_available():
    assert "en" in get_available_langs()


def test_messages_are_formatted():
    assert t("commands.train.seed", seed=3) == "Seed 3"
    assert t("common.cancelled") == "Cancelled."


def test_missing_key_returns_the_key():
    assert t("commands.nothing.here") == "commands.nothing.here"
    assert t("commands.train") == "commands.train"


def test_bad_placeholders_leave_the_message_alone():
    assert t("commands.train.seed", other=1) == "Seed {seed}"


def test_unknown_language_exits():
    with pytest.raises(SystemExit, match="Available: en"):
        i18n.init("xx")
