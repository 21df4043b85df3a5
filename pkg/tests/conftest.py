import os

import pytest
from hypothesis import HealthCheck, settings

from expanderkit.graph import complete, cycle, petersen, torus

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=25, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def regular_suite():
    """Connected regular graphs with at most 16 vertices."""
    gs = [cycle(n) for n in range(3, 13)]
    gs += [complete(n) for n in range(3, 7)]
    gs += [petersen(), torus(3, 3), torus(4, 4)]
    return gs


@pytest.fixture(scope="session")
def suite():
    return regular_suite()
