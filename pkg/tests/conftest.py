import functools

import pytest
from hypothesis import HealthCheck, settings

from lcbc3.field import make_field
from lcbc3.instance import normalize, random_instance, signal_spaces

settings.register_profile(
    "lcbc3",
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
)
settings.load_profile("lcbc3")

SWEEP_FIELDS = ((2, 1), (3, 1), (2, 2), (5, 1))
SWEEP_PER_FIELD = 1000


@functools.lru_cache(maxsize=None)
def sweep_instances():
    """The seeded acceptance corpus: 1000 instances per field, d cycling through 1..6."""
    out = []
    for fi, (p, n) in enumerate(SWEEP_FIELDS):
        F = make_field(p, n)
        for i in range(SWEEP_PER_FIELD):
            out.append(random_instance([fi, i], F, 1 + i % 6))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def sweep_families():
    return tuple(signal_spaces(normalize(x)) for x in sweep_instances())


@pytest.fixture(params=[(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)], ids=lambda t: f"GF{t[0]}^{t[1]}")
def field(request):
    return make_field(*request.param)
