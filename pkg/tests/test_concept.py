import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dins.concept import (
    Concept,
    capture,
    concept_from_dict,
    concept_to_dict,
    integrate,
    is_attractor,
    match,
    membership,
    update_membership,
)
from dins.errors import ConfigError
from dins.features import STRUCTURAL

from oracles import brute_force_match, membership_weight, random_concept, random_instance, random_percept


def check_weights(con):
    for m in con.modes.values():
        assert m.wa == membership_weight(m.hits_a, con.k, con.c, con.sigma)
        assert m.wi == membership_weight(m.hits_i, con.k, con.c, con.sigma)
        assert 0 <= m.hits_i <= con.k and 0 <= m.hits_a <= con.k
    for hits, w in con.edges.values():
        assert w == membership_weight(hits, con.k, con.c, con.sigma)
    assert con.g == sum(1 for m in con.modes.values() if m.wa)
    for a, b in con.edges:
        assert a in con.modes and b in con.modes


def test_parameter_ranges():
    with pytest.raises(ConfigError):
        Concept(sigma=0.5)
    with pytest.raises(ConfigError):
        Concept(sigma=1.0)
    with pytest.raises(ConfigError):
        Concept(c=1.0)


def test_membership_examples():
    assert membership(4, 4, 0.5) == 1
    assert membership(0, 4, 0.5) == 0
    assert membership(1, 4, 0.5) == 0.5
    assert membership_weight(1, 4, 0.5, 0.8) == 0


@given(st.integers(1, 200), st.floats(0.01, 0.99))
def test_membership_monotone_and_slowed(k, c):
    qs = [membership(i, k, c) for i in range(k + 1)]
    assert qs == sorted(qs)
    assert qs[-1] == 1
    for i in range(1, k):
        assert qs[i] > i / k


def test_capture_and_repeat():
    rng = random.Random(3)
    x = random_percept(rng, 3)
    con = integrate(None, x, sigma=0.8, c=0.5)
    n = sum(1 + len({m.address for m in gr.characteristics}) for gr in x.groups)
    assert con.g == n + sum(1 for m in con.modes.values() if m.kind == con.ASSOC_KIND)
    assert all((m.hits_a, m.hits_i) == (1, 1) for m in con.modes.values())
    before = con.snapshot()
    res = match(x, con)
    integrate(con, x, res.mapping)
    assert con.snapshot() == before and con.k == 2


def test_missing_mode_goes_dormant():
    rng = random.Random(5)
    x = random_percept(rng, 3)
    con = capture(x, 0.8, 0.5)
    g = con.g
    y = random_percept(random.Random(5), 3)
    y.groups[0].characteristics = y.groups[0].characteristics[:-1] if y.groups[0].characteristics else []
    lost = len(x.groups[0].characteristics) - len(y.groups[0].characteristics)
    res = match(y, con)
    update_membership(con, y, res.mapping)
    # (1/2)^0.5 ~ 0.707 drops below 0.8
    assert con.g == g - lost
    check_weights(con)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 25), st.sampled_from([0.6, 0.7, 0.8, 0.95]),
       st.sampled_from([0.2, 0.5, 0.9]), st.booleans())
def test_update_streams_keep_weights_exact(seed, steps, sigma, c, indexed):
    rng = random.Random(seed)
    base = random_percept(rng, rng.randint(1, 4))
    con = capture(base, sigma, c, tol=rng.choice([None, 1]))
    check_weights(con)
    history = [con.snapshot()]
    for _ in range(steps):
        x = base if rng.random() < 0.5 else random_percept(rng, rng.randint(1, 4))
        res = match(x, con, use_index=indexed)
        k0 = con.k
        hits0 = {i: m.hits_a for i, m in con.modes.items()}
        update_membership(con, x, res.mapping if res else {})
        assert con.k == k0 + 1
        for i, h in hits0.items():
            if i in con.modes:
                assert con.modes[i].hits_a - h in (0, 1)
        check_weights(con)
        history.append(con.snapshot())
    assert is_attractor(history[-1:] * 2)


def test_attractor_window():
    a, b = ((1,), ()), ((2,), ())
    assert is_attractor([a] * 10)
    assert not is_attractor([a] * 5 + [b] + [a] * 4)
    assert is_attractor([b] + [a] * 10, n_stab=10)
    with pytest.raises(ValueError):
        is_attractor([a])


def test_noisy_class_converges_to_core():
    rng = random.Random(11)
    core = random_percept(rng, 3)
    con = capture(core, 0.8, 0.5)
    history = []
    for _ in range(60):
        x = random_percept(random.Random(11), 3)
        for gr in x.groups:
            if gr.characteristics and rng.random() < 0.2:
                gr.characteristics = gr.characteristics[1:]
        res = match(x, con)
        update_membership(con, x, res.mapping if res else {})
        history.append(con.snapshot())
    assert is_attractor(history, 10)
    assert con.g > 0


def test_full_match_and_one_missing():
    x = random_percept(random.Random(2), 3)
    con = capture(x, 0.8, 0.5)
    assert match(x, con).b == con.g
    y = random_percept(random.Random(2), 3)
    gi = next(i for i, gr in enumerate(y.groups) if gr.characteristics)
    y.groups[gi].characteristics = y.groups[gi].characteristics[1:]
    assert match(y, con).b == con.g - 1


@pytest.mark.parametrize("seed", range(300))
def test_matcher_equals_brute_force(seed):
    percept, con = random_instance(seed)
    for use_index in (True, False):
        res = match(percept, con, use_index=use_index)
        want = brute_force_match(percept, con, use_index)
        assert (res.b if res else None) == want
        assert res is None or res.b <= con.g


@pytest.mark.parametrize("seed", range(100))
def test_matcher_structural_floor(seed):
    percept, con = random_instance(seed + 5000)
    n = sum(1 for m in con.modes.values() if m.kind == STRUCTURAL and m.wa)
    for need in range(n + 1):
        res = match(percept, con, min_structural=need)
        want = brute_force_match(percept, con, True, need)
        assert (res.b if res else None) == want
    full = match(percept, con, full_structure=True)
    assert (full.b if full else None) == brute_force_match(percept, con, True, n)


def test_subset_concept_scores_lower():
    rng = random.Random(9)
    x = random_percept(rng, 4)
    big = capture(x, 0.8, 0.5)
    small = capture(x, 0.8, 0.5)
    drop = [i for i, m in small.modes.items() if m.kind == STRUCTURAL][-1]
    for i in [drop] + small.children(drop) + [i for i, m in small.modes.items() if drop in m.sources]:
        small.modes.pop(i, None)
    small.edges = {k: v for k, v in small.edges.items() if drop not in k}
    small._invalidate()
    assert match(x, small).b < match(x, big).b == big.g


def test_serialization_roundtrip():
    con = random_concept(random.Random(1), 8, tol=1)
    back = concept_from_dict(concept_to_dict(con))
    assert concept_to_dict(back) == concept_to_dict(con)
    assert back.snapshot() == con.snapshot()
