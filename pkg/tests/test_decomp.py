import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from xjroute.decomp import (
    XX,
    DecompositionError,
    Gate,
    NativeCircuit,
    canonical_decompose,
    decompose_su4,
    evaluate_circuit,
    is_unitary,
    ms_matrix,
    phase_aligned_distance,
    preset,
    rx,
    ry,
    single_qubit_axis_decompose,
    unitary_from_json,
)

TEMPLATE = "Ry Rx Ry | Ry Rx | Ry | Ry Rx Ry"
angles = st.floats(-2 * math.pi, 2 * math.pi)
ms_angles = st.floats(-math.pi / 4, math.pi / 4)
seeds = st.integers(0, 2**32 - 1)


def _axis_rot(axis, theta):
    x, y, z = axis
    gen = np.array([[z, x - 1j * y], [x + 1j * y, -z]])
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * gen


# -- MS gate ------------------------------------------------------------------


def test_ms_endpoints():
    assert np.allclose(ms_matrix(0), np.eye(4))
    m = ms_matrix(math.pi / 4)
    s = 1 / math.sqrt(2)
    assert np.allclose(np.diag(m), s)
    assert np.allclose(np.diag(np.fliplr(m)), -1j * s)
    # maximally entangling: same canonical class as CNOT
    can = canonical_decompose(m)
    assert sorted(abs(x) for x in (can.a, can.b, can.c)) == pytest.approx([0, 0, math.pi / 4])
    with pytest.raises(DecompositionError):
        ms_matrix(1.0)


@given(ms_angles)
def test_ms_inverse(chi):
    assert np.allclose(ms_matrix(chi) @ ms_matrix(-chi), np.eye(4), atol=1e-14)


@given(ms_angles, angles, angles)
def test_ms_commutes_with_rx(chi, a, b):
    loc = np.kron(rx(a), rx(b))
    assert np.max(np.abs(ms_matrix(chi) @ loc - loc @ ms_matrix(chi))) < 1e-12


def test_ms_does_not_commute_with_ry():
    loc = np.kron(ry(0.4), np.eye(2))
    assert np.max(np.abs(ms_matrix(0.3) @ loc - loc @ ms_matrix(0.3))) > 1e-3


# -- single-qubit axis decomposition --------------------------------------------


def test_axis_identity():
    assert single_qubit_axis_decompose(np.eye(2)) == pytest.approx((0, 0, 0, 0), abs=1e-12)


def test_axis_aligned_rx():
    got = single_qubit_axis_decompose(rx(0.7))
    assert got == pytest.approx((0, 0, 0.7, 0), abs=1e-12)


def _rebuild(u, n, m):
    a, b, g, d = single_qubit_axis_decompose(u, n, m)
    return np.exp(1j * a) * _axis_rot(n, b) @ _axis_rot(m, g) @ _axis_rot(n, d)


@pytest.mark.parametrize("seed", range(100))
def test_axis_reconstruction_haar(seed):
    u = unitary_group.rvs(2, random_state=seed)
    y, x = (0, 1, 0), (1, 0, 0)
    assert np.max(np.abs(_rebuild(u, y, x) - u)) < 1e-10


@given(seeds, st.floats(0, 2 * math.pi), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
@settings(max_examples=50)
def test_axis_reconstruction_any_orthogonal_pair(seed, phi, theta, psi):
    u = unitary_group.rvs(2, random_state=seed % 2**31)
    n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    helper = np.array([1.0, 0, 0]) if abs(n[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    m = math.cos(psi) * e1 + math.sin(psi) * e2
    assert np.max(np.abs(_rebuild(u, tuple(n), tuple(m)) - u)) < 1e-10


def test_axis_rejects_bad_input():
    with pytest.raises(DecompositionError):
        single_qubit_axis_decompose(np.array([[1, 1], [0, 1]]))
    with pytest.raises(DecompositionError):
        single_qubit_axis_decompose(np.eye(2), (0, 1, 0), (0, 1 / math.sqrt(2), 1 / math.sqrt(2)))
    with pytest.raises(DecompositionError):
        single_qubit_axis_decompose(np.eye(2), (0, 2, 0), (1, 0, 0))


# -- circuits -------------------------------------------------------------------


def test_evaluate_basics():
    assert np.allclose(evaluate_circuit(NativeCircuit()), np.eye(4))
    u = evaluate_circuit(NativeCircuit([Gate("Rx", math.pi, 0)]))
    assert phase_aligned_distance(np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)), u) < 1e-12
    with pytest.raises(DecompositionError):
        evaluate_circuit(NativeCircuit([Gate("Rz", 0.1, 0)]))


@given(ms_angles)
def test_template_with_only_the_middle_ms(chi):
    names = {"Ry", "Rx"}
    gates, ms_seen = [], 0
    for tok in TEMPLATE.split():
        if tok == "|":
            ms_seen += 1
            gates.append(Gate("MS", chi if ms_seen == 2 else 0.0))
        else:
            assert tok in names
            gates += [Gate(tok, 0.0, 0), Gate(tok, 0.0, 1)]
    circ = NativeCircuit(gates)
    assert circ.wire_pattern(0) == circ.wire_pattern(1) == TEMPLATE
    assert np.allclose(evaluate_circuit(circ), ms_matrix(chi), atol=1e-14)


def _check(u, circ):
    assert circ.ms_count == 3
    assert circ.single_qubit_count <= 18
    for g in circ.gates:
        assert -math.pi < g.angle <= math.pi
        if g.name == "MS":
            assert abs(g.angle) <= math.pi / 4 + 1e-12
    v = evaluate_circuit(circ)
    assert is_unitary(v, 1e-10)
    assert phase_aligned_distance(u, v) < 1e-9
    # the recorded global phase makes the match exact, not only up to phase
    assert np.max(np.abs(u - v)) < 1e-9


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_haar_round_trip(seed):
    u = unitary_group.rvs(4, random_state=seed % 2**31)
    circ = decompose_su4(u)
    _check(u, circ)
    assert circ.single_qubit_count == 18
    assert circ.wire_pattern(0) == circ.wire_pattern(1) == TEMPLATE


@pytest.mark.parametrize("name", ["identity", "cnot", "swap", "iswap", "ms:0.39269908169872414"])
def test_presets(name):
    u = preset(name)
    _check(u, decompose_su4(u))


def test_ms_preset_is_pi_over_eight():
    assert np.allclose(preset(f"ms:{math.pi / 8}"), ms_matrix(math.pi / 8))


@given(seeds, st.sampled_from(["cnot", "swap", "identity", "iswap"]))
@settings(max_examples=40, deadline=None)
def test_locally_equivalent_classes(seed, name):
    rng = np.random.default_rng(seed)
    locs = [unitary_group.rvs(2, random_state=rng) for _ in range(4)]
    u = np.kron(locs[0], locs[1]) @ preset(name) @ np.kron(locs[2], locs[3])
    _check(u, decompose_su4(u))


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_canonical_form(seed):
    u = unitary_group.rvs(4, random_state=seed % 2**31)
    can = canonical_decompose(u)
    assert np.max(np.abs(can.matrix() - u)) < 1e-10
    for ang in (can.a, can.b, can.c):
        assert abs(ang) <= math.pi / 4 + 1e-12
    for k in (can.k1, can.k2, can.k3, can.k4):
        assert is_unitary(k)


def test_merge_pass_counts():
    u = unitary_group.rvs(4, random_state=7)
    raw = decompose_su4(u, merge=False)
    assert raw.single_qubit_count == 24 <= 29
    merged = decompose_su4(u)
    assert merged.single_qubit_count == 18
    assert phase_aligned_distance(evaluate_circuit(raw), evaluate_circuit(merged)) < 1e-12


def test_rejects_non_unitary():
    with pytest.raises(DecompositionError):
        decompose_su4(np.diag([1, 1, 1, 2]))
    with pytest.raises(DecompositionError):
        decompose_su4(np.eye(3))


def test_json_input_and_output():
    u = preset("cnot")
    text = json.dumps([[[float(x.real), float(x.imag)] for x in row] for row in u])
    assert np.allclose(unitary_from_json(text), u)
    assert np.allclose(unitary_from_json(json.dumps(np.eye(4).tolist())), np.eye(4))
    with pytest.raises(DecompositionError):
        unitary_from_json("[[1, 0], [0, 1]]")
    data = json.loads(decompose_su4(u).to_json())
    assert sum(g["gate"] == "MS" for g in data["gates"]) == 3
    assert {"phase", "gates"} <= data.keys()


def test_ms_with_xx():
    # MS(chi) = exp(-i chi XX) written out
    chi = 0.3
    want = math.cos(chi) * np.eye(4) - 1j * math.sin(chi) * XX
    assert np.allclose(ms_matrix(chi), want)
