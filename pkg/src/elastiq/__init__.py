"""Elastically relaxed concurrent FIFO queues and LIFO stacks.

The structures trade strict ordering for parallelism: removals may return
an item up to k positions away from the strict head or top, and k can be
reconfigured at run time through the width/depth targets (directly or via
the contention controller).
"""

from .atomics import ReclamationDomain, ReclamationError, RefCell, WordCell
from .controller import ControllerConfig, ControllerState, controller_update
from .lanes import EMPTY, SubQueue, SubStack
from .law_queue import ChainedWindowQueue
from .lpw_queue import SplitWindowQueue
from .lpw_stack import DOWN, UP, SlidingWindowStack
from .oracle import OracleViolation, RankOracle, RankSample, summarize
from .strict import StrictQueue, StrictStack
from .window import RelaxationTargets, WindowView

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "UP",
    "DOWN",
    "ChainedWindowQueue",
    "SplitWindowQueue",
    "SlidingWindowStack",
    "StrictQueue",
    "StrictStack",
    "ControllerConfig",
    "ControllerState",
    "controller_update",
    "RankOracle",
    "RankSample",
    "OracleViolation",
    "summarize",
    "ReclamationDomain",
    "ReclamationError",
    "RefCell",
    "WordCell",
    "RelaxationTargets",
    "WindowView",
    "SubQueue",
    "SubStack",
    "__version__",
]
