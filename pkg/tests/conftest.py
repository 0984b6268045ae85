import json
from fractions import Fraction

import numpy as np
import pytest

from core.chabauty_metric import MetricParams
from core.config import ENV_PREFIX
from core.subgroup_calculus import AmbientGroup, from_generators

SAMPLE_AMBIENTS = (
    AmbientGroup(2, 0, 0),
    AmbientGroup(0, 1, 1),
    AmbientGroup(1, 1, 1),
    AmbientGroup(1, 0, 0, (4,)),
    AmbientGroup(0, 1, 0, (6,)),
    AmbientGroup(0, 2, 1),
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """No CHABAUTY_* variables leak in from the developer shell."""
    import os
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def real_line():
    return AmbientGroup(1, 0, 0)


@pytest.fixture
def plane():
    return AmbientGroup(2, 0, 0)


@pytest.fixture
def z_times_t():
    return AmbientGroup(0, 1, 1)


@pytest.fixture
def coarse_params():
    return MetricParams(Fraction(4), Fraction(1, 4))


@pytest.fixture
def default_params():
    return MetricParams(Fraction(8), Fraction(1, 40))


@pytest.fixture
def integer_lattice(real_line):
    return from_generators(real_line, disc=[[1]])


@pytest.fixture
def config_file(tmp_path):
    """Empty config location so tests never read the project's chabauty.json."""
    return str(tmp_path / "chabauty.json")


@pytest.fixture
def subgroup_json():
    def encode(ambient, cont=(), disc=()):
        return json.dumps({
            "ambient": ambient,
            "cont": [[str(x) for x in col] for col in cont],
            "disc": [[str(x) for x in col] for col in disc],
        })
    return encode


@pytest.fixture
def subgroup_pairs():
    """Seeded pairs of random subgroups, four per sample ambient group."""
    rng = np.random.default_rng(2024)

    def column(ambient, continuous):
        discrete = set(ambient.discrete_rows)
        out = []
        for i in range(ambient.dim):
            if i in discrete:
                out.append(0 if continuous else int(rng.integers(-3, 4)))
            else:
                out.append(Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))))
        return out

    def subgroup(ambient):
        cont = [column(ambient, True) for _ in range(int(rng.integers(0, 2)))]
        disc = [column(ambient, False) for _ in range(int(rng.integers(0, 3)))]
        return from_generators(ambient, cont, disc)

    return [(subgroup(g), subgroup(g)) for g in SAMPLE_AMBIENTS for _ in range(4)]
