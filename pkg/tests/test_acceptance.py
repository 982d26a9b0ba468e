"""Every acceptance criterion runs at its pinned tolerance and must pass."""
import pytest

from sswm.acceptance import CRITERIA


@pytest.mark.parametrize("cid,fn,desc", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(cid, fn, desc, ctx, capsys):
    result = fn(ctx)
    with capsys.disabled():
        print(result.line())
    assert result.passed, result.line()
