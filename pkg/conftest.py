#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

'''
pytest configuration options: Monte-Carlo oracles and the end-to-end
recovery checks only run with --runslow, per the pytest examples
'''
import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="If enabled, runs the large-sample Monte-Carlo checks "
                          "and the end-to-end search recovery tests."
                     )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large-sample or end-to-end check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--runslow"):
        skip_slow = pytest.mark.skip(reason="need --runslow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)
