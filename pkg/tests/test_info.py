import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from models import copy_pair, independent_coins, or_gate, xor
from polytree import (
    UNREPRESENTABLE,
    Explicit,
    Factored,
    InputError,
    PairTable,
    Polytree,
    TripleTable,
    VariableSpec,
    closeness,
    conditional_mutual_information,
    fit_parameters,
    mutual_information,
    triple_marginal,
)

mpmath.mp.dps = 40


def mp_entropy(probs):
    return -sum(mpmath.mpf(p) * mpmath.log(mpmath.mpf(p), 2) for p in probs if p > 0)


def mp_mutual_information(table):
    """H(X) + H(Y) - H(X, Y) at 40 digits; independent of the library path."""
    t = [[mpmath.mpf(x) for x in row] for row in table]
    rows = [sum(r) for r in t]
    cols = [sum(t[i][j] for i in range(len(t))) for j in range(len(t[0]))]
    joint = [x for r in t for x in r]
    return mp_entropy(rows) + mp_entropy(cols) - mp_entropy(joint)


def test_mi_independent_table():
    assert mutual_information([[0.25, 0.25], [0.25, 0.25]]) == pytest.approx(0.0, abs=1e-15)


def test_mi_copy_of_fair_coin_is_one_bit():
    assert mutual_information([[0.5, 0], [0, 0.5]]) == pytest.approx(1.0, abs=1e-12)


def test_mi_symmetric_noisy_table_matches_high_precision_oracle():
    table = [[0.4, 0.1], [0.1, 0.4]]
    expected = float(mp_mutual_information(table))
    assert expected == pytest.approx(0.2780, abs=1e-3)
    assert mutual_information(table) == pytest.approx(expected, abs=1e-12)


def test_cmi_three_independent_coins():
    assert conditional_mutual_information(np.full((2, 2, 2), 1 / 8)) == pytest.approx(0.0, abs=1e-15)


def test_cmi_xor_given_output_is_one_bit():
    # enumerate A, C fair with B = A xor C; condition on B (last axis)
    t = np.zeros((2, 2, 2))
    for a, c in itertools.product(range(2), repeat=2):
        t[a, c, a ^ c] += 0.25
    assert conditional_mutual_information(t) == pytest.approx(1.0, abs=1e-12)
    # same through the model
    assert conditional_mutual_information(triple_marginal(Factored(xor()), 0, 2, 1)) == pytest.approx(1.0, abs=1e-12)


def test_cmi_markov_chain_endpoints_given_middle_vanish():
    rng = np.random.default_rng(4)
    pa = rng.dirichlet([1, 1, 1])
    pb_a = rng.dirichlet([1, 1], size=3)
    pc_b = rng.dirichlet([1, 1, 1, 1], size=2)
    t = np.einsum("a,ab,bc->acb", pa, pb_a, pc_b)
    assert conditional_mutual_information(t) == pytest.approx(0.0, abs=1e-12)


def test_cmi_zero_mass_slices_contribute_nothing():
    t = np.zeros((2, 2, 3))
    t[:, :, 0] = [[0.25, 0.25], [0.25, 0.25]]
    assert conditional_mutual_information(t) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "bad",
    [
        [0.5, 0.5],
        [[0.5, 0.6], [0.0, 0.0]],
        [[-0.1, 0.6], [0.25, 0.25]],
        [[np.nan, 0.5], [0.25, 0.25]],
    ],
)
def test_malformed_pair_tables_rejected(bad):
    with pytest.raises(InputError):
        mutual_information(bad)


def test_malformed_triple_table_rejected():
    with pytest.raises(InputError):
        conditional_mutual_information(np.full((2, 2), 0.25))


def test_tables_are_read_only_copies():
    raw = np.array([[0.5, 0.0], [0.0, 0.5]])
    t = PairTable(raw)
    raw[0, 0] = 0.0
    assert t.probabilities[0, 0] == 0.5
    with pytest.raises(ValueError):
        t.probabilities[0, 0] = 1.0
    assert TripleTable(np.full((2, 3, 2), 1 / 12)).cardinalities == (2, 3, 2)


def _normalized(shape):
    return arrays(
        np.float64, shape, elements=st.floats(0.0, 1.0, allow_nan=False, allow_subnormal=False)
    ).filter(lambda a: a.sum() > 1e-3).map(lambda a: a / a.sum())


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(_normalized))
def test_mi_symmetric_and_nonnegative(p):
    i = mutual_information(p)
    assert i >= 0.0
    assert mutual_information(p.T) == i or abs(mutual_information(p.T) - i) <= 1e-15


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)).flatmap(_normalized))
def test_cmi_nonnegative(p):
    assert conditional_mutual_information(p) >= 0.0


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.integers(2, 3), st.integers(2, 3)).flatmap(_normalized))
def test_mi_agrees_with_entropy_oracle(p):
    assert mutual_information(p) == pytest.approx(float(mp_mutual_information(p.tolist())), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_information_identities_on_markov_triples(seed):
    # A -> B -> C satisfies P(A | B, C) = P(A | B)
    rng = np.random.default_rng(seed)
    ca, cb, cc = rng.integers(2, 4, size=3)
    pa = rng.dirichlet(np.ones(ca))
    pb_a = rng.dirichlet(np.ones(cb), size=ca)
    pc_b = rng.dirichlet(np.ones(cc), size=cb)
    joint = np.einsum("a,ab,bc->abc", pa, pb_a, pc_b)
    i_ab = mutual_information(joint.sum(axis=2))
    i_bc = mutual_information(joint.sum(axis=0))
    i_ac = mutual_information(joint.sum(axis=1))
    i_ab_c = conditional_mutual_information(joint)  # (A, B | C)
    i_cb_a = conditional_mutual_information(joint.transpose(2, 1, 0))  # (C, B | A)
    assert abs(i_ab - i_ac - i_ab_c) <= 1e-9
    assert abs(i_bc - i_ac - i_cb_a) <= 1e-9


def test_closeness_of_model_to_itself_is_zero():
    m = or_gate()
    assert closeness(Factored(m), m) == pytest.approx(0.0, abs=1e-12)


def test_closeness_unrepresentable_when_support_violated():
    # P = independent coins puts mass on (0, 1), where the copy model is 0
    p = Factored(independent_coins(2))
    assert closeness(p, copy_pair()) == UNREPRESENTABLE


def test_closeness_copy_pair_vs_independent_model_is_one_bit():
    # KL(copy || uniform) = 2 * 0.5 * log2(0.5 / 0.25) = 1 bit
    assert closeness(Factored(copy_pair()), independent_coins(2)) == pytest.approx(1.0, abs=1e-12)


def test_closeness_requires_matching_variables_and_exact_source():
    with pytest.raises(InputError):
        closeness(Factored(or_gate()), copy_pair())
    from polytree import Dataset, Empirical

    ds = Dataset.from_rows(copy_pair().variables, [[0, 0], [1, 1]])
    with pytest.raises(InputError):
        closeness(Empirical(ds), copy_pair())


def test_closeness_is_minimized_by_tree_fit_on_max_weight_tree():
    # brute force over all 16 labelled trees on 4 nodes
    from polytree import compute_weights, mwst
    from polytree.model import _connected

    rng = np.random.default_rng(11)
    variables = [VariableSpec(f"V{i}", 2) for i in range(4)]
    p = Explicit(variables, rng.dirichlet(np.ones(16)))
    pairs = list(itertools.combinations(range(4), 2))
    scores = {}
    for edges in itertools.combinations(pairs, 3):
        if not _connected(4, edges):
            continue
        model = fit_parameters(p, _rooted(edges))
        scores[frozenset(edges)] = closeness(p, model)
    assert len(scores) == 16
    best = mwst(compute_weights(p)).edges
    assert scores[best] <= min(scores.values()) + 1e-9


def _rooted(edges):
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    out, seen, stack = [], {0}, [0]
    while stack:
        x = stack.pop()
        for y in adj.get(x, []):
            if y not in seen:
                seen.add(y)
                out.append((x, y))
                stack.append(y)
    return out


def test_polytree_joint_used_by_closeness_is_normalized():
    m = Polytree([VariableSpec("A", 3), VariableSpec("B", 2)], ((), (0,)), ([0.2, 0.3, 0.5], np.full((3, 2), 0.5)))
    assert m.joint_table().sum() == pytest.approx(1.0, abs=1e-12)
