import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from pathnas.oracle import (
    FitnessLandscape,
    brute_force_optimum,
    fitness,
    from_document,
    hashed_noise,
    make_landscape,
    to_document,
)
from pathnas.searchspace import uniform_space


def flat(space, value=0.0):
    return [[value] * p for p in space.choice_counts]


def test_zero_landscape():
    space = uniform_space(3, 2)
    land = FitnessLandscape(space, flat(space))
    assert all(fitness(land, a) == 0.0 for a in itertools.product(range(2), repeat=3))


def test_unary_sum():
    space = uniform_space(2, 3)
    land = FitnessLandscape(space, [[0, 1, 2], [0, 1, 2]])
    assert fitness(land, (2, 2)) == 4
    assert land((1, 0)) == 1


def test_interacting_golden_value():
    land = make_landscape(uniform_space(3, 3), "interacting", 7,
                          interaction_count=4, interaction_scale=0.5)
    # frozen from a hand evaluation of the serialized document
    assert fitness(land, (2, 1, 0)) == 0.6373918717292207
    doc = json.loads(to_document(land))
    arch = (2, 1, 0)
    expected = sum(doc["unary"][l][c] for l, c in enumerate(arch))
    expected += sum(w for la, ca, lb, cb, w in doc["pairwise"] if arch[la] == ca and arch[lb] == cb)
    assert fitness(land, arch) == pytest.approx(expected, abs=1e-15)


def test_invalid_architecture():
    land = make_landscape(uniform_space(2, 3), "separable", 0)
    with pytest.raises(ValueError, match="architecture does not fit landscape space"):
        fitness(land, (0, 3))


def test_single_pairwise_term_optimum():
    space = uniform_space(2, 3)
    land = FitnessLandscape(space, flat(space), {((0, 1), (1, 2)): 1.0})
    assert brute_force_optimum(land) == ((1, 2), 1.0)


def test_brute_force_ties_are_lexicographic():
    space = uniform_space(2, 2)
    land = FitnessLandscape(space, [[0, 0], [1, 1]])
    assert brute_force_optimum(land) == ((0, 0), 1.0)


def test_brute_force_matches_independent_max():
    land = make_landscape(uniform_space(5, 3), "interacting", 11)
    archs = list(itertools.product(range(3), repeat=5))
    best_fit = max(land(a) for a in archs)
    best = min(a for a in archs if land(a) == best_fit)
    assert brute_force_optimum(land) == (best, best_fit)


def test_brute_force_refuses_large_spaces():
    with pytest.raises(ValueError, match="space too large"):
        brute_force_optimum(make_landscape(uniform_space(20, 3), "separable", 0))


@pytest.mark.parametrize("seed", range(5))
def test_separable_optimum_is_per_layer_argmax(seed):
    land = make_landscape(uniform_space(4, 3), "separable", seed)
    greedy = tuple(max(range(3), key=row.__getitem__) for row in land.unary)
    assert brute_force_optimum(land)[0] == greedy


def test_make_landscape_kinds():
    space = uniform_space(4, 3)
    sep = make_landscape(space, "separable", 3)
    assert sep.pairwise == {} and sep.noise_sigma == 0
    inter = make_landscape(space, "interacting", 3, interaction_count=10)
    assert len(inter.pairwise) == 10
    assert all(la < lb for (la, _), (lb, _) in inter.pairwise)
    noisy = make_landscape(space, "noisy", 3, noise_sigma=0.2)
    assert noisy.noise_sigma == 0.2 and noisy.unary == sep.unary
    assert all(0 <= v <= 1 for row in sep.unary for v in row)
    with pytest.raises(ValueError):
        make_landscape(space, "bumpy", 0)
    with pytest.raises(ValueError):
        make_landscape(uniform_space(2, 2), "interacting", 0, interaction_count=5)


def test_landscape_is_reproducible():
    a = make_landscape(uniform_space(4, 3), "interacting", 5)
    b = make_landscape(uniform_space(4, 3), "interacting", 5)
    assert to_document(a) == to_document(b)
    assert a == b


def test_noise_is_pure_and_seeded():
    land = make_landscape(uniform_space(3, 3), "noisy", 1, noise_sigma=0.5)
    assert land((1, 2, 0)) == land((1, 2, 0))
    assert hashed_noise(1, (1, 2, 0)) == hashed_noise(1, [1, 2, 0])
    assert hashed_noise(1, (1, 2, 0)) != hashed_noise(2, (1, 2, 0))
    other = make_landscape(uniform_space(3, 3), "noisy", 1, noise_sigma=0.5, noise_seed=99)
    assert other.unary == land.unary
    assert other((1, 2, 0)) != land((1, 2, 0))


def test_noise_is_roughly_standard_normal():
    draws = [hashed_noise(0, (i,)) for i in range(4000)]
    mean = sum(draws) / len(draws)
    var = sum((d - mean) ** 2 for d in draws) / len(draws)
    assert abs(mean) < 0.1 and abs(var - 1) < 0.1


def test_document_round_trip():
    land = make_landscape(uniform_space(4, 3), "interacting", 2)
    text = to_document(land)
    again = from_document(text)
    assert again == land
    assert to_document(again) == text
    with pytest.raises(ValueError):
        from_document(json.dumps({"format": "other"}))


def test_invalid_pairwise_keys():
    space = uniform_space(2, 2)
    with pytest.raises(ValueError):
        FitnessLandscape(space, flat(space), {((1, 0), (0, 0)): 1.0})
    with pytest.raises(ValueError):
        FitnessLandscape(space, flat(space), {((0, 2), (1, 0)): 1.0})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2), st.integers(0, 2),
       st.floats(0.01, 5.0), st.sampled_from(["separable", "interacting", "noisy"]))
def test_monotone_dominance(seed, layer, choice, delta, kind):
    space = uniform_space(3, 3)
    land = make_landscape(space, kind, seed)
    unary = [list(r) for r in land.unary]
    unary[layer][choice] += delta
    bumped = FitnessLandscape(space, unary, land.pairwise, land.noise_sigma, land.seed)
    for arch in itertools.product(range(3), repeat=3):
        diff = bumped(arch) - land(arch)
        if arch[layer] == choice:
            assert diff == pytest.approx(delta, abs=1e-9)
        else:
            assert diff == 0
