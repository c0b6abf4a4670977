"""Noisy binary search with an asymmetric check.

Estimates the minimum incentive that makes a target arm the agent's score
maximizer, strictly from above, while the threshold itself drifts as the
agent keeps learning.  Standard bisection narrows the bracket; whenever an
offer fails, the last known-good offer is immediately re-tested, and a second
consecutive failure ends the search with a count-dependent safety margin
(the drifting optimum has escaped the bracket upward).
"""

from __future__ import annotations

import math

import numpy as np

from .channel import InteractionChannel
from .env import one_hot_incentive


def noisy_binary_search(target: int, T: int, channel: InteractionChannel) -> float:
    """Search an incentive for ``target``; never lasts more than 2*ceil(log2 T) rounds.

    Against an agent that never explores during the call, the output ``b``
    satisfies ``0 < b - pi*(t_end) <= 4/T + ceil(log2 T)/N_target + 2/min_i N_i``
    with the counts read at the exit round.
    """
    K = channel.K
    L = math.ceil(math.log2(T))
    y_hi, y_lo = 1.0, 0.0
    y_upper = 1.0
    c1 = 0
    c2 = 0
    check = False
    while True:
        if not check:
            y_mid = 0.5 * (y_hi + y_lo)
            c1 += 1
            arm = channel.propose(one_hot_incentive(target, y_mid, K), target=target)
            if arm == target:
                if c1 >= L:
                    return y_mid + 1.0 / T
                y_upper = y_mid
                y_hi = y_mid
            else:
                check = True
                y_lo = y_mid
        else:
            # Counts as of the start of this round; used if the re-test fails.
            n = channel.counts
            n_target = max(1, int(n[target]))
            n_min = max(1, int(n.min()))
            arm = channel.propose(one_hot_incentive(target, y_upper, K), target=target)
            if arm == target:
                c2 += 1
                if c2 == L:
                    return y_upper + 2.0 / T
                check = False
            else:
                return y_upper + 1.0 / T + 1.0 / n_target + 2.0 / n_min
