"""Holds the id of the harness run currently executing so that log lines
emitted from worker threads can be tied back to the invocation that started them
"""
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional
from uuid import uuid4


RUN_ID_CTX_KEY = "run_id"

_run_id_ctx_var: ContextVar[Optional[str]] = ContextVar(RUN_ID_CTX_KEY, default=None)


def get_run_id() -> Optional[str]:
    """Gets the run ID that has been generated for tracing the harness run
    """

    return _run_id_ctx_var.get()


def set_run_id(run_id: Optional[str]):
    """Sets the run id in the current context. Used by worker threads which
    don't inherit the context of the thread that submitted them
    """

    return _run_id_ctx_var.set(run_id)


@contextmanager
def run_context(run_id: Optional[str] = None) -> Iterator[str]:
    """Context manager which sets a run id for the duration of the block

    :param run_id: id to use, a uuid4 is generated when not given
    :type run_id: str
    :return: the run id in use
    """

    token = _run_id_ctx_var.set(run_id or str(uuid4()))
    try:
        yield _run_id_ctx_var.get()
    finally:
        _run_id_ctx_var.reset(token)
