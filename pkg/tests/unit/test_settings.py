import re
from pathlib import Path

import pytest

from nlscap import settings
from nlscap.settings import NumberOfThreads, Sector, StopPolicy


class TestStopPolicy:
    @pytest.mark.parametrize(
        ("description", "expected"),
        [
            ("stable-set", StopPolicy.STABLE_SET),
            ("STABLE_SET", StopPolicy.STABLE_SET),
            ("stable", StopPolicy.STABLE_SET),
            ("max-steps", StopPolicy.MAX_STEPS),
            ("MAX_STEPS", StopPolicy.MAX_STEPS),
            ("", ValueError),
            ("forever", ValueError),
        ],
    )
    def test_from_str(self, description: str, expected: StopPolicy):
        if expected is ValueError:
            with pytest.raises(ValueError, match=r"stop policy"):
                assert StopPolicy.from_str(description)
        else:
            assert StopPolicy.from_str(description) is expected


class TestSector:
    @pytest.mark.parametrize(
        ("description", "expected"),
        [
            ("forward", Sector.FORWARD),
            ("F", Sector.FORWARD),
            ("backward", Sector.BACKWARD),
            ("b", Sector.BACKWARD),
            ("sideways", ValueError),
        ],
    )
    def test_from_str(self, description: str, expected: Sector):
        if expected is ValueError:
            with pytest.raises(ValueError, match=r"sector"):
                assert Sector.from_str(description)
        else:
            assert Sector.from_str(description) is expected


class TestNumberOfThreads:
    def test_set_and_reset(self):
        previous = NumberOfThreads.get()
        try:
            NumberOfThreads.set(3)
            assert NumberOfThreads.get() == 3
            NumberOfThreads.set(None)
            assert NumberOfThreads.get() >= 1
        finally:
            NumberOfThreads.set(previous)

    def test_rejects_non_integers(self):
        with pytest.raises(TypeError, match=r"integer"):
            NumberOfThreads.set(2.5)  # type: ignore[arg-type]


def test_shipped_definitions_exist():
    with open(settings.EQUILIBRIA_DEFINITIONS_PATH) as stream:
        assert "u1" in stream.read()


def test_every_setting_is_read():
    package = Path(settings.__file__).parent
    sources = "\n".join(
        path.read_text(encoding="utf-8")
        for path in package.rglob("*.py")
        if path.name != "settings.py"
    )
    names = [
        name
        for name, value in vars(settings).items()
        if name.isupper() and not name.startswith("_") and isinstance(value, (int, float, str))
    ]
    assert "NEWTON_TOLERANCE" in names
    unread = [name for name in names if not re.search(rf"\b{name}\b", sources)]
    assert not unread
