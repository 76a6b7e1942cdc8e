"""Hypothesis strategies for model parameters."""
import numpy as np
from hypothesis import strategies as st

from sysshock.archimedean import ArchimedeanGenerator as AG
from sysshock.shock_model import ModelParams


def generators(family=None):
    options = {
        "clayton": st.floats(0.1, 10).map(AG.clayton),
        "gumbel": st.floats(1.05, 8).map(AG.gumbel),
        "independence": st.just(AG.independence()),
    }
    if family:
        return options[family]
    return st.one_of(*options.values())


@st.composite
def model_params(draw, d=None, family=None, min_alpha=0.05):
    d = draw(st.integers(2, 4)) if d is None else d
    alpha = [draw(st.floats(min_alpha, 0.95)) for _ in range(d)]
    w = np.array([draw(st.floats(0.0, 1.0)) for _ in range(d + 1)])
    if w.sum() < 1e-3:
        w[0] = 1.0
    theta = w / w.sum()
    gens = [draw(generators(family)) for _ in range(d)]
    return ModelParams(alpha, theta, gens)


def frozen_params(frozen, name):
    """ModelParams for a named set in the frozen oracle file."""
    s = frozen["param_sets"][name]
    return ModelParams(s["alpha"], s["theta"], [AG(fam, b) for fam, b in s["gens"]])
