import pytest

from bcsim import ExecutionConfig, run_execution


def inbox_sequence(result, party):
    return [(e.round, e.src, e.payload) for e in result.transcript if e.dst == party]


@pytest.fixture
def run():
    def _run(**kw):
        return run_execution(ExecutionConfig(**kw))

    return _run
