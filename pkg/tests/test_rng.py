"""Generator correctness against the reference algorithm and stream stability."""

import math

import pytest

from mechpert.rng import Xoshiro256StarStar, derive_seed

# First five outputs of the reference C implementation (splitmix64-seeded
# xoshiro256**), frozen from an independent build of the published algorithm.
REFERENCE_STREAMS = {
    0: [
        11091344671253066420,
        13793997310169335082,
        1900383378846508768,
        7684712102626143532,
        13521403990117723737,
    ],
    1: [
        12966619160104079557,
        9600361134598540522,
        10590380919521690900,
        7218738570589545383,
        12860671823995680371,
    ],
    42: [
        1546998764402558742,
        6990951692964543102,
        12544586762248559009,
        17057574109182124193,
        18295552978065317476,
    ],
}


@pytest.mark.parametrize("seed", sorted(REFERENCE_STREAMS))
def test_matches_reference_implementation(seed):
    rng = Xoshiro256StarStar(seed)
    assert [rng.next_u64() for _ in range(5)] == REFERENCE_STREAMS[seed]


def test_random_unit_interval():
    rng = Xoshiro256StarStar(7)
    values = [rng.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert 0.4 < sum(values) / len(values) < 0.6


def test_randbelow_range_and_determinism():
    a = Xoshiro256StarStar(5)
    b = Xoshiro256StarStar(5)
    draws_a = [a.randbelow(13) for _ in range(200)]
    draws_b = [b.randbelow(13) for _ in range(200)]
    assert draws_a == draws_b
    assert set(draws_a) <= set(range(13))


def test_sample_without_replacement():
    rng = Xoshiro256StarStar(11)
    population = [f"G{i:02d}" for i in range(30)]
    picked = rng.sample(population, 10)
    assert len(picked) == 10
    assert len(set(picked)) == 10
    assert set(picked) <= set(population)
    assert population == [f"G{i:02d}" for i in range(30)]  # input untouched


def test_sample_too_large():
    rng = Xoshiro256StarStar(1)
    with pytest.raises(ValueError):
        rng.sample([1, 2], 3)


def test_normal_moments():
    rng = Xoshiro256StarStar(3)
    values = [rng.normal(2.0, 0.5) for _ in range(20000)]
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    assert abs(mean - 2.0) < 0.02
    assert abs(math.sqrt(var) - 0.5) < 0.02


def test_poisson_zero_and_mean():
    rng = Xoshiro256StarStar(9)
    assert all(rng.poisson(0.0) == 0 for _ in range(10))
    draws = [rng.poisson(2.0) for _ in range(20000)]
    assert abs(sum(draws) / len(draws) - 2.0) < 0.05


def test_derive_seed_distinct_streams():
    root = 1234
    labels = ["subsample:50", "targets:50", "anchors:random", "anchors:padding"]
    derived = [derive_seed(root, label) for label in labels]
    assert len(set(derived)) == len(labels)
    assert derive_seed(root, "subsample:50") == derived[0]  # stable
