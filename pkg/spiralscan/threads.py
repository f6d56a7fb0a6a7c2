# Using a module file to store the cap on internal parallelism.
import os

from .rules import THREADS_ENVIRONMENT_VARIABLE


def _from_environment() -> int:
    value = os.environ.get(THREADS_ENVIRONMENT_VARIABLE, "0").strip() or "0"
    try:
        requested = int(value)
    except ValueError:
        requested = 0
    return max(0, requested)


# 0 means auto (one thread per available CPU)
thread_count = _from_environment()


def change_thread_count(new_thread_count: int):
    global thread_count
    if new_thread_count < 0:
        raise ValueError(f"Thread count must be >= 0, got {new_thread_count}")
    thread_count = new_thread_count


def effective_thread_count() -> int:
    if thread_count == 0:
        return os.cpu_count() or 1
    return thread_count

# This variable is read wherever work is spread over threads.
# One can modify it directly
# spiralscan.threads.thread_count = 2
# or using the function change_thread_count(2)
