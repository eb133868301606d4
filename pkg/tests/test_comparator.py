import numpy as np
import pytest

from compgrad.comparator import (Adversarial, AlwaysMinus, AlwaysPlus, ComparisonOracle,
                                 RandomSeeded, alternating_adversary, tie_policy_from_name)
from compgrad.functions import make_hyperplane, make_quadratic


@pytest.fixture
def line():
    return make_hyperplane([1.0, 0.0])


def test_strict_comparisons(line):
    o = ComparisonOracle(line)
    assert o.compare([1.0, 0.0], [0.0, 0.0]) == 1
    assert o.compare([-1.0, 0.0], [0.0, 0.0]) == -1
    assert o.query_count == 2
    assert line.evaluations == 4


@pytest.mark.parametrize("policy,expected", [(AlwaysPlus(), 1), (AlwaysMinus(), -1)])
def test_fixed_tie_policies(line, policy, expected):
    o = ComparisonOracle(line, policy)
    assert o.compare([0.0, 1.0], [0.0, -1.0]) == expected
    assert o.ties == 1


def test_random_tie_policy_is_seeded(line):
    a = ComparisonOracle(line, RandomSeeded(7))
    b = ComparisonOracle(line, RandomSeeded(7))
    ra = [a.compare([0.0, 1.0], [0.0, 2.0]) for _ in range(50)]
    rb = [b.compare([0.0, 1.0], [0.0, 2.0]) for _ in range(50)]
    assert ra == rb
    assert set(ra) == {1, -1}


def test_adversarial_sees_history_length(line):
    seen = []

    def cb(x, y, h):
        seen.append(h)
        return alternating_adversary(x, y, h)

    o = ComparisonOracle(line, Adversarial(cb))
    o.compare([1.0, 0.0], [0.0, 0.0])
    out = [o.compare([0.0, 1.0], [0.0, 0.0]) for _ in range(3)]
    assert seen == [1, 2, 3]
    assert out == [-1, 1, -1]


def test_adversarial_must_answer_plus_or_minus(line):
    o = ComparisonOracle(line, Adversarial(lambda x, y, h: 0))
    with pytest.raises(ValueError):
        o.compare([0.0, 1.0], [0.0, 0.0])


def test_tie_epsilon_widens_ties(line):
    o = ComparisonOracle(line, AlwaysMinus(), tie_epsilon=0.5)
    assert o.compare([0.4, 0.0], [0.0, 0.0]) == -1
    assert o.compare([0.6, 0.0], [0.0, 0.0]) == 1
    with pytest.raises(ValueError):
        ComparisonOracle(line, tie_epsilon=-1)


@pytest.mark.parametrize("name", ["plus", "minus", "random", "adversarial"])
def test_compare_many_matches_sequential(name, rng):
    model = make_quadratic(3, np.diag([1.0, 0.0, 2.0]), np.array([0.0, 1.0, 0.0]))
    X = rng.standard_normal((40, 3))
    X[::3] = 0.0        # ties against the origin
    Y = np.zeros(3)
    batch = ComparisonOracle(model, tie_policy_from_name(name, 3)).compare_many(X, Y)
    seq_oracle = ComparisonOracle(model, tie_policy_from_name(name, 3))
    seq = [seq_oracle.compare(x, Y) for x in X]
    if name != "random":
        assert batch.tolist() == seq
    assert seq_oracle.query_count == 40


def test_compare_many_identical_rows_tie(line):
    o = ComparisonOracle(line, AlwaysMinus())
    x = np.array([0.1234567, 3.3])
    assert o.compare_many(np.tile(x, (4, 1)), x).tolist() == [-1] * 4


def test_domain_warning_once():
    o = ComparisonOracle(make_hyperplane([1.0], radius=1.0))
    with pytest.warns(RuntimeWarning, match="outside the declared domain"):
        o.compare([2.0], [0.0])
    o.compare([3.0], [0.0])  # no second warning


def test_reset_and_charge(line):
    o = ComparisonOracle(line)
    o.compare([1.0, 0.0], [0.0, 0.0])
    o.charge(5, ties=2)
    assert o.read_counter() == 6 and o.ties == 2
    assert line.evaluations == 12
    o.reset_counter()
    assert o.read_counter() == 0 and o.ties == 0


def test_fused_params_only_for_deterministic_ties(line):
    assert ComparisonOracle(line, AlwaysMinus()).fused_params()[-1] == -1
    assert ComparisonOracle(line, RandomSeeded(0)).fused_params() is None


def test_unknown_policy_name():
    with pytest.raises(ValueError):
        tie_policy_from_name("coin")
