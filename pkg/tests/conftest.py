import random

from hypothesis import settings, strategies as st

from truecon.harness import GeneratorConfig, _Gen

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def initial_processes(draw, depth=3, width=3, actions=3):
    """Initial processes drawn through the seeded generator."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    cfg = GeneratorConfig(seed=seed, count=1, max_prefix_depth=depth,
                          max_parallel_width=width, max_actions=actions)
    return _Gen(cfg, random.Random(seed)).process()


@st.composite
def reachable_states(draw, depth=3, width=3, actions=3):
    from truecon.semantics import cached_lts
    p = draw(initial_processes(depth, width, actions))
    lts = cached_lts(p)
    return lts.states[draw(st.integers(min_value=0, max_value=len(lts) - 1))]
