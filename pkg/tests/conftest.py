import pytest


@pytest.fixture
def verdict(capsys):
    """Print one pass/fail line outside pytest's capture, then assert."""

    def _verdict(tag: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n{tag}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return _verdict
