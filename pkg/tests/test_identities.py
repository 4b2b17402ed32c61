import pytest

from cubewitness import identities


@pytest.mark.parametrize("fn", [f for f in identities.CHECKS if f is not identities.scaling_slopes],
                         ids=lambda f: f.__name__)
def test_identity(fn):
    out = fn()
    for c in out if isinstance(out, list) else [out]:
        assert c["pass"], c


def test_scaling_slopes_small_range():
    # shorter range than the acceptance run; the trend is already visible
    for c in identities.scaling_slopes(max_index=400):
        assert c["pass"], c
