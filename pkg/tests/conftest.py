import sys
from pathlib import Path

import pytest
from hypothesis import settings

from folkrec.corpus import Folksonomy, Post, build_index

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def folk(*posts):
    """Folksonomy from (user, resource, tags, timestamp) tuples."""
    return Folksonomy(tuple(Post(u, r, tuple(tags), ts) for u, r, tags, ts in posts))


def index_of(*posts):
    return build_index(folk(*posts))


@pytest.fixture
def small_folk():
    return folk(
        ("u1", "r1", ("a", "b"), 100),
        ("u1", "r2", ("a",), 200),
        ("u2", "r1", ("b", "c"), 150),
    )
