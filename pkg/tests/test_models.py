import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmlfraud.ansatz import ANSATZ_KINDS, AnsatzSpec, build_ansatz
from qmlfraud.circuit import bind, compose, simulate
from qmlfraud.featuremaps import FEATURE_MAP_KINDS, FeatureMapSpec, build_feature_map, input_names
from qmlfraud.models import (
    ModelError,
    ModelSpec,
    binary_cross_entropy,
    compiled,
    eqnn_forward,
    forward,
    parity_interpret,
    sigmoid,
    sqnn_forward,
    vqc_forward,
)
from qmlfraud.simcore import BasisDistribution


def spec_for(arch, n=2, fmap="ZZ", ansatz="RealAmplitudes", shots=1024, readout="parity"):
    return ModelSpec(arch, FeatureMapSpec(fmap, n), AnsatzSpec(ansatz, n), shots, readout)


def hand_state(spec, params, x):
    """Compose, bind and simulate one circuit; no batching, no cached unitaries."""
    fm = build_feature_map(spec.feature_map)
    an = build_ansatz(spec.ansatz)
    values = dict(zip(input_names(spec.n_qubits), x))
    values.update(zip(an.parameter_names, params[: spec.n_quantum_params]))
    return simulate(bind(compose(fm, an), values)).amplitudes


def popcount_parity(p):
    return sum(pi for i, pi in enumerate(p) if bin(i).count("1") % 2)


def test_parity_examples():
    assert parity_interpret(BasisDistribution([0.25] * 4)) == (0.5, 0.5)
    assert parity_interpret(BasisDistribution([0, 1, 0, 0])) == (0.0, 1.0)
    p = np.random.default_rng(0).dirichlet(np.ones(8))
    p0, p1 = parity_interpret(BasisDistribution(p))
    assert math.isclose(p1, popcount_parity(p), abs_tol=1e-15)
    assert abs(p0 + p1 - 1) <= 1e-12


def test_spec_contract():
    s = spec_for("EQNN", 3)
    assert s.n_params == 6 + 4
    with pytest.raises(ModelError):
        ModelSpec("VQC", FeatureMapSpec("Z", 2), AnsatzSpec("RealAmplitudes", 3))
    with pytest.raises(ModelError):
        ModelSpec("MLP")


def test_vqc_examples():
    spec = ModelSpec("VQC", FeatureMapSpec("Z", 2), AnsatzSpec("TwoLocal", 2), shots=0)
    pred = vqc_forward(spec, np.zeros(4), [0.0, 0.0])
    assert math.isclose(pred.p1, 0.5, abs_tol=1e-12)
    rng = np.random.default_rng(1)
    for fmap in FEATURE_MAP_KINDS:
        for ans in ANSATZ_KINDS:
            spec = spec_for("VQC", 2, fmap, ans)
            params = rng.uniform(0, 1, spec.n_params)
            x = rng.uniform(0, 1, 2)
            a = vqc_forward(spec, params, x)
            assert a == vqc_forward(spec, params, x)
            want = popcount_parity(np.abs(hand_state(spec, params, x)) ** 2)
            assert math.isclose(a.p1, want, abs_tol=1e-12)
            assert a.label == int(a.p1 >= 0.5)
    with pytest.raises(ModelError):
        vqc_forward(spec, np.zeros(3), [0.1, 0.2])


def test_qubit0_readout():
    spec = spec_for("VQC", 3, "ZZ", "EfficientSU2", readout="qubit0")
    params = np.random.default_rng(2).uniform(0, 1, spec.n_params)
    x = [0.3, 0.6, 0.9]
    p = np.abs(hand_state(spec, params, x)) ** 2
    assert math.isclose(vqc_forward(spec, params, x).p1, sum(p[1::2]), abs_tol=1e-12)


def test_sqnn_examples():
    rng = np.random.default_rng(3)
    for _ in range(50):
        fmap = FEATURE_MAP_KINDS[rng.integers(3)]
        ans = ANSATZ_KINDS[rng.integers(4)]
        n = int(rng.integers(2, 4))
        exact = spec_for("SQNN", n, fmap, ans, shots=0)
        params = rng.uniform(0, 1, exact.n_params)
        x = rng.uniform(0, 1, n)
        vqc = spec_for("VQC", n, fmap, ans)
        assert sqnn_forward(exact, params, x, seed=0) == vqc_forward(vqc, params, x)

    # all probability on the odd-parity state |01>: every shot reads p1 = 1
    spec = spec_for("SQNN", 2, shots=4096)
    odd = np.eye(4, dtype=complex)[[1]]
    assert compiled(spec).p1_from_states(odd, np.zeros(spec.n_params), seed=5)[0] == 1.0

    spec = spec_for("SQNN", 2, "ZZ", "EfficientSU2", shots=100_000)
    params = rng.uniform(0, 1, spec.n_params)
    x = [0.2, 0.7]
    exact = vqc_forward(spec_for("VQC", 2, "ZZ", "EfficientSU2"), params, x).p1
    assert abs(sqnn_forward(spec, params, x, seed=11).p1 - exact) <= 0.02
    assert sqnn_forward(spec, params, x, seed=11) == sqnn_forward(spec, params, x, seed=11)


def test_eqnn_examples():
    spec = spec_for("EQNN", 3, "Z", "RealAmplitudes")
    k = spec.n_quantum_params
    assert eqnn_forward(spec, np.zeros(spec.n_params), [0.0, 0.0, 0.0]).p1 == 0.5

    # every map starts with an H layer, so feed the zero state to the head directly
    c = 1.3
    params = np.zeros(spec.n_params)
    params[k + 2] = c
    zero_state = np.eye(8, dtype=complex)[[0]]
    p1 = compiled(spec).p1_from_states(zero_state, params)[0]
    assert math.isclose(p1, 1 / (1 + math.exp(-c)), rel_tol=1e-12)

    rng = np.random.default_rng(4)
    spec = spec_for("EQNN", 2, "ZZ", "EfficientSU2")
    params = rng.normal(size=spec.n_params)
    x = rng.uniform(0, 1, 2)
    p = np.abs(hand_state(spec, params, x)) ** 2
    z = [sum(p[i] * (-1 if (i >> q) & 1 else 1) for i in range(4)) for q in range(2)]
    w, b = params[-3:-1], params[-1]
    want = 1 / (1 + math.exp(-(w[0] * z[0] + w[1] * z[1] + b)))
    assert math.isclose(eqnn_forward(spec, params, x).p1, want, rel_tol=1e-12)
    with pytest.raises(ModelError):
        eqnn_forward(spec, params[:-1], x)


def test_eqnn_parameter_partition():
    spec = spec_for("EQNN", 3, "Pauli", "EfficientSU2")
    m = compiled(spec)
    rng = np.random.default_rng(5)
    params = rng.normal(size=spec.n_params)
    enc = m.encode(rng.uniform(0, 1, (4, 3)))
    head_moved = params.copy()
    head_moved[spec.n_quantum_params :] += 1.0
    assert np.array_equal(m.evolve(enc, params), m.evolve(enc, head_moved))


def test_forward_dispatch():
    rng = np.random.default_rng(6)
    for arch in ("VQC", "SQNN", "EQNN"):
        spec = spec_for(arch, 2, shots=0)
        params = rng.uniform(0, 1, spec.n_params)
        assert 0 <= forward(spec, params, [0.1, 0.2], seed=1).p1 <= 1


def test_bce_examples():
    assert math.isclose(binary_cross_entropy([0.5], [1]), math.log(2))
    assert binary_cross_entropy([1 - 1e-12], [1]) < 1e-11
    p = [0.9, 0.2, 0.6, 0.01]
    y = [1, 0, 0, 1]
    want = (-math.log(0.9) - math.log(0.8) - math.log(0.4) - math.log(0.01)) / 4
    assert math.isclose(binary_cross_entropy(p, y), want, rel_tol=1e-12)
    assert binary_cross_entropy([0.0, 1.0], [1, 0]) < 30
    with pytest.raises(ValueError):
        binary_cross_entropy([], [])
    with pytest.raises(ValueError):
        binary_cross_entropy([0.5], [1, 0])


@given(
    st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=1, max_size=40),
    st.randoms(use_true_random=False),
)
def test_bce_order_invariant(pairs, rnd):
    p, y = map(list, zip(*pairs))
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    p2, y2 = map(list, zip(*shuffled))
    a, b = binary_cross_entropy(p, y), binary_cross_entropy(p2, y2)
    assert a >= 0
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def test_sigmoid_symmetry():
    z = np.linspace(-40, 40, 81)
    np.testing.assert_allclose(sigmoid(z) + sigmoid(-z), 1.0, atol=1e-15)


def test_batched_evolve_matches_per_row():
    # the unitary shortcut kicks in when rows exceed 2**n
    spec = spec_for("VQC", 2, "Pauli", "PauliTwoDesign")
    m = compiled(spec)
    rng = np.random.default_rng(7)
    X = rng.uniform(0, 1, (9, 2))
    params = rng.uniform(0, 1, spec.n_params)
    batch = m.predict_proba(X, params)
    single = [vqc_forward(spec, params, x).p1 for x in X]
    np.testing.assert_allclose(batch, single, atol=1e-13)
