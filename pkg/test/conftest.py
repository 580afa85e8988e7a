import pathlib

import pytest

from parallel_rewrite import global_settings
from parallel_rewrite.document import load
from parallel_rewrite.rules import enumerate_matchings


SAMPLES = pathlib.Path(__file__).parent.parent / 'samples'


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help="Also run the long randomized Game of Life suite")


def pytest_configure(config):
    config.addinivalue_line('markers', "slow: long randomized runs, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def restore_settings():
    """The CLI writes to global_settings; keep tests independent."""
    saved = (global_settings.max_group_order, global_settings.verify_group_limit, global_settings.normalize_fresh)
    yield
    global_settings.max_group_order, global_settings.verify_group_limit, global_settings.normalize_fresh = saved


@pytest.fixture
def example_doc():
    return load(SAMPLES / 'example.grw')


@pytest.fixture
def conflict_doc():
    return load(SAMPLES / 'conflict.grw')


@pytest.fixture
def r1(example_doc):
    return example_doc.rule('r1')


@pytest.fixture
def g_ex(example_doc):
    return example_doc.graph('G')


@pytest.fixture
def g_conf(conflict_doc):
    return conflict_doc.graph('G')


@pytest.fixture
def mu(r1, g_ex):
    """The matching x↦1, y↦2, z↦3 of the worked example."""
    return next(m for m in enumerate_matchings(r1, g_ex) if m('y') == '2')


@pytest.fixture
def conflict_pair(conflict_doc, g_conf):
    """(μ, ν): y↦2 and y↦3 in the conflict example."""
    matches = enumerate_matchings(conflict_doc.rule('r1'), g_conf)
    mu = next(m for m in matches if m('y') == '2')
    nu = next(m for m in matches if m('y') == '3')
    return mu, nu


@pytest.fixture
def triangle_doc():
    return load(SAMPLES / 'triangle.grw')


@pytest.fixture
def automorphisms_doc():
    return load(SAMPLES / 'automorphisms.grw')
