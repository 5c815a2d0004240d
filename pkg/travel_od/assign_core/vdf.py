# Standard imports
from dataclasses import dataclass

import numpy as np

from travel_od.utils.errors import DomainValueError


@dataclass(frozen = True)
class VdfParams:
    alpha: float = 0.15
    beta: float = 4.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DomainValueError("VDF alpha must be nonnegative, got {}".format(self.alpha))
        if not self.beta >= 1:
            raise DomainValueError("VDF beta must be at least 1, got {}".format(self.beta))

    @classmethod
    def from_config(cls, cfg):
        return cls(float(cfg.alpha), float(cfg.beta))


def vdf_time(link, flow, params):
    # BPR: fft * (1 + alpha * (v/c)^beta)
    if flow < 0:
        raise DomainValueError("Flow on {} must be nonnegative, got {}".format(link.id, flow))

    return link.free_flow_time * (1.0 + params.alpha * (flow / link.capacity) ** params.beta)


def link_times(free_flow_time, capacity, flows, params):
    return free_flow_time * (1.0 + params.alpha * np.power(flows / capacity, params.beta))


def link_time_derivatives(free_flow_time, capacity, flows, params):
    # d time / d flow, the diagonal of the Beckmann Hessian
    return free_flow_time * params.alpha * params.beta * np.power(flows / capacity, params.beta - 1.0) / capacity
