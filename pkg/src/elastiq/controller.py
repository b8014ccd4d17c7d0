"""Thread-local contention-vote controller for the shared width target.

Each thread accumulates a signed contention score from the outcome of its
lane linearization attempts: successes nudge it up by a small increment,
failures pull it down hard.  When the magnitude crosses the threshold the
thread casts a vote and proposes a new shared width -- wider under
contention, narrower when uncontended.  Votes reset whenever the window
generation changes so stale opinions never leak across windows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .window import RelaxationTargets

__all__ = ["ControllerConfig", "ControllerState", "controller_update"]


@dataclass(frozen=True)
class ControllerConfig:
    succ_inc: int = 1
    fail_dec: int = 75
    threshold: int = 5000
    width_diff: int = 5

    def __post_init__(self) -> None:
        if min(self.succ_inc, self.fail_dec, self.threshold, self.width_diff) <= 0:
            raise ValueError("controller constants must be positive")


class ControllerState:
    """Per-thread accumulator; shared effect is one write to the targets."""

    __slots__ = ("contention", "version", "votes")

    def __init__(self) -> None:
        self.contention = 0
        self.version: int | None = None
        self.votes = 0


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def controller_update(
    state: ControllerState,
    cas_success: bool,
    version: int,
    current_width: int,
    targets: RelaxationTargets,
    cfg: ControllerConfig,
) -> int | None:
    """Feed one exchange outcome; returns the proposed width if one was set.

    `version` is any monotone per-window quantity (tail max for the
    queues, window version for the stack); a change resets the votes.
    """
    if state.version != version:
        state.version = version
        state.votes = 0
    if cas_success:
        state.contention += cfg.succ_inc
    else:
        state.contention -= cfg.fail_dec
    if abs(state.contention) < cfg.threshold:
        return None
    state.votes += _sign(state.contention)
    state.contention = 0
    proposal = current_width - cfg.width_diff * _sign(state.votes)
    return targets.set_width(proposal)
