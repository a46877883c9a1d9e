"""
Schedules and packet loss
=========================

Random schedules draw a set at every step; frequency-exact schedules hit
the requested shares exactly and only shuffle the order.
"""

import numpy as np

from ncs_sched.model import make_partition
from ncs_sched.scheduling import RngSeed, generate_loss_signal, generate_schedule

part = make_partition([[1, 2], [3, 4], [5]], [0.3, 0.3, 0.4])
seed = RngSeed(2)

iid = generate_schedule(part, 1000, seed)
exact = generate_schedule(part, 1000, seed, mode="frequency_exact")
print("iid counts:            ", iid.counts(3))
print("frequency_exact counts:", exact.counts(3))

# two channels; with tie_channels both see the same drops
loss = generate_loss_signal(0.4, 2, 1000, seed, mode="frequency_exact")
tied = generate_loss_signal(0.4, 2, 1000, seed, mode="frequency_exact", tie_channels=True)
print("drops per channel:", loss.channels.sum(axis=1), "tied:", tied.channels.sum(axis=1))
print("channels agree (untied):", np.mean(loss.channels[0] == loss.channels[1]))
