import pytest

from mutafuzz.minilang import parse
from mutafuzz.targets import TARGET_NAMES, target_source

_PROGRAMS = {}


def parsed_target(name: str):
    if name not in _PROGRAMS:
        _PROGRAMS[name] = parse(target_source(name), name)
    return _PROGRAMS[name]


@pytest.fixture(params=TARGET_NAMES)
def any_target(request):
    return parsed_target(request.param)
