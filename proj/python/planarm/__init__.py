"""Planar-arm manipulation simulator with a two-phase adaptive policy stack."""

from ._planarm import (
    Env,
    gae,
    library_size,
    reward_faucet,
    reward_peg,
    reward_pick_place,
    score_complexity,
    widened_test_ranges,
)

__all__ = [
    "Env",
    "gae",
    "library_size",
    "reward_faucet",
    "reward_peg",
    "reward_pick_place",
    "score_complexity",
    "widened_test_ranges",
]
