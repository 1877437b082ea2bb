"""Checkpoint builders shared across test modules."""

import numpy as np

from wayfarer.sim import ANT, POINT_MASS
from wayfarer.trainer import init_checkpoint, make_train_config


def untrained_checkpoint(variant_id=5, agent_kind=POINT_MASS, **episode_kwargs):
    cfg = make_train_config(
        variant_id,
        agent_kind=agent_kind,
        policy_hidden=[8],
        value_hidden=[8],
        episode_kwargs=episode_kwargs,
    )
    return init_checkpoint(cfg)


def pilot_checkpoint():
    """Hand-built PD controller: a = 0.8*(goal - pos) - 0.3*vel.

    One hidden layer driven in tanh's linear regime (inputs scaled by
    0.01, outputs scaled back by 100), reading the scaled goal block and
    pose straight out of the point-mass observation.
    """
    cfg = make_train_config(5, agent_kind=POINT_MASS, policy_hidden=[4], value_hidden=[4])
    ck = init_checkpoint(cfg)
    w1 = np.zeros_like(ck.policy.weights[0])  # (4, 14)
    c = 0.01
    # h0, h1: 0.1*(goal - pos) per axis; h2, h3: 0.3*vel per axis
    w1[0, 10], w1[0, 0] = c, -c
    w1[1, 11], w1[1, 1] = c, -c
    w1[2, 2] = c
    w1[3, 3] = c
    w2 = np.zeros_like(ck.policy.weights[1])  # (2, 4)
    w2[0, 0], w2[0, 2] = 8.0 / c, -1.0 / c
    w2[1, 1], w2[1, 3] = 8.0 / c, -1.0 / c
    ck.policy.weights = [w1, w2]
    ck.policy.biases = [np.zeros(4), np.zeros(2)]
    ck.head.log_std[:] = -3.0
    return ck


def ant_checkpoint(**episode_kwargs):
    cfg = make_train_config(
        5, agent_kind=ANT, policy_hidden=[8], value_hidden=[8], episode_kwargs=episode_kwargs
    )
    return init_checkpoint(cfg)
