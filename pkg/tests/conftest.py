"""Every FiniteArrayModel built during a test is checked for the diff laws."""
import itertools

import pytest

from ardinterp import oracle

MODELS = []
_init = oracle.FiniteArrayModel.__init__


def _recording_init(self, *args, **kwargs):
    _init(self, *args, **kwargs)
    MODELS.append(self)


oracle.FiniteArrayModel.__init__ = _recording_init


def table_diff(x, y):
    """Largest index where two finite tables differ, 0 if none."""
    dx, dy = dict(x), dict(y)
    points = [k for k in set(dx) | set(dy) if dx.get(k, oracle.BOT) != dy.get(k, oracle.BOT)]
    return max(points, default=0)


def metric_law_failures(model):
    arrays = list(model.arrays.values()) + [()]
    bad = []
    for x, y in itertools.product(arrays, repeat=2):
        if table_diff(x, y) < 0:
            bad.append(("nonnegative", x, y))
        if table_diff(x, y) != table_diff(y, x):
            bad.append(("symmetric", x, y))
    for x, y, z in itertools.product(arrays, repeat=3):
        if max(table_diff(x, y), table_diff(y, z)) < table_diff(x, z):
            bad.append(("ultrametric", x, y, z))
    return bad


@pytest.fixture(autouse=True)
def _metric_laws_on_new_models():
    start = len(MODELS)
    yield
    for m in MODELS[start:]:
        failures = metric_law_failures(m)
        assert not failures, f"diff laws fail on {m.describe()}: {failures[:3]}"
