import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leakage_lab._tableau import Tableau
from leakage_lab.pauli_frame import (
    Frame, GateEvent, LeakModel, NoiseParams, apply_cnot, apply_measure, apply_prep, apply_relax_or_leak,
    apply_swap_relabel, bernoulli_positions, cnot_layer, measure_layer, pack, unpack,
)

QUIET = NoiseParams()


def _is_deterministic(t: Tableau, q: int, basis: str) -> bool:
    n = t.n
    col = t.x[n:2 * n, q] if basis == "Z" else t.z[n:2 * n, q]
    return not col.any()


def _tableau_pauli(t: Tableau, q: int, kind: str) -> None:
    if kind == "X":
        t.x_gate(q)
    else:
        t.h(q)
        t.x_gate(q)
        t.h(q)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_frame_matches_tableau_on_random_clifford_circuits(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    bases = rng.choice(["Z", "X"], size=n)
    clean, noisy = Tableau(n, np.random.default_rng(1)), Tableau(n, np.random.default_rng(1))
    frame = Frame.new(n)
    for q, b in enumerate(bases):
        for t in (clean, noisy):
            if b == "X":
                t.h(q)
        apply_prep(frame, q, b, QUIET, None)
    for _ in range(12):
        if rng.random() < 0.4:
            q = int(rng.integers(n))
            kind = "X" if rng.random() < 0.5 else "Z"
            _tableau_pauli(noisy, q, kind)
            (frame.x if kind == "X" else frame.z)[q] ^= np.uint64(1)
        else:
            a, b = (int(v) for v in rng.choice(n, 2, replace=False))
            clean.cnot(a, b)
            noisy.cnot(a, b)
            apply_cnot(frame, a, b, QUIET, None)
    for q in range(n):
        basis = "Z" if rng.random() < 0.5 else "X"
        if not _is_deterministic(clean, q, basis):
            continue
        m = (lambda t: t.measure_z(q)) if basis == "Z" else (lambda t: t.measure_x(q))
        flip = apply_measure(frame, q, basis, QUIET, None)[0]
        assert m(clean) ^ m(noisy) == int(flip)


@given(st.integers(1, 300), st.integers(1, 5), st.integers(0, 2**31))
def test_pack_unpack_roundtrip(shots, rows, seed):
    bits = np.random.default_rng(seed).random((rows, shots)) < 0.5
    assert np.array_equal(unpack(pack(bits), shots), bits)


@pytest.mark.parametrize("p", [1e-3, 0.05, 0.3])
def test_bernoulli_positions_rate(p):
    total = 400_000
    pos = bernoulli_positions(np.random.default_rng(3), total, p)
    assert np.all(np.diff(pos) > 0) and pos.max() < total
    sd = np.sqrt(total * p * (1 - p))
    assert abs(pos.size - total * p) < 5 * sd


def test_bernoulli_positions_edges():
    rng = np.random.default_rng(0)
    assert bernoulli_positions(rng, 10, 0.0).size == 0
    assert np.array_equal(bernoulli_positions(rng, 10, 1.0), np.arange(10))


def test_noise_params_split_and_validation():
    nz = NoiseParams.from_total(1e-3, ratio=0.1, leak_model="MS")
    assert nz.p == pytest.approx(1e-3)
    assert nz.p_leak == pytest.approx(0.1 * nz.p_depol)
    assert nz.p_relax == nz.p_leak
    assert nz.leak_model is LeakModel.MS
    with pytest.raises(ValueError):
        NoiseParams(p_leak=-0.1)
    with pytest.raises(ValueError):
        NoiseParams(leak_model="XX")


def test_gate_event_validation():
    GateEvent("CNOT", (0, 1), 0)
    with pytest.raises(ValueError):
        GateEvent("CNOT", (0,), 0)
    with pytest.raises(ValueError):
        GateEvent("CNOT", (2, 2), 0)
    with pytest.raises(ValueError):
        GateEvent("PrepZ", (0, 1), 0)


def test_operand_and_index_errors():
    f = Frame.new(3)
    with pytest.raises(ValueError):
        apply_cnot(f, 1, 1, QUIET, None)
    with pytest.raises(ValueError):
        apply_swap_relabel(f, 0, 0, QUIET, None)
    with pytest.raises(IndexError):
        apply_cnot(f, 0, 5, QUIET, None)


def _leaked_gate_stats(model, leaked_role, shots=20_000):
    f = Frame.new(2, shots)
    f.leaked[leaked_role] = ~np.uint64(0)
    cnot_layer(f, [0], [1], NoiseParams(leak_model=model), np.random.default_rng(11))
    partner = 1 - leaked_role
    return f.bits(f.x[[partner]])[0].mean(), f.bits(f.z[[partner]])[0].mean()


@pytest.mark.parametrize("leaked_role", [0, 1])
def test_dp_fully_depolarizes_sealed_partner(leaked_role):
    px, pz = _leaked_gate_stats("DP", leaked_role)
    assert px == pytest.approx(0.5, abs=0.02)
    assert pz == pytest.approx(0.5, abs=0.02)


def test_ms_leaked_control_kicks_target_with_x_only():
    px, pz = _leaked_gate_stats("MS", 0)
    assert px == pytest.approx(0.5, abs=0.02)
    assert pz == 0


def test_ms_leaked_target_kicks_control_with_z_only():
    px, pz = _leaked_gate_stats("MS", 1)
    assert px == 0
    assert pz == pytest.approx(0.5, abs=0.02)


def test_leaked_gate_does_not_propagate_frame():
    f = Frame.new(2)
    f.x[0] = 1
    f.leaked[1] = 1
    cnot_layer(f, [0], [1], NoiseParams(), None)
    assert f.x[1, 0] == 0


def test_leaked_measurement_reads_one_when_stochastic_and_zero_when_traced():
    f = Frame.new(1, 64)
    f.leaked[0] = ~np.uint64(0)
    assert unpack(measure_layer(f, [0], "Z", QUIET, np.random.default_rng(0)), 64).all()
    assert not unpack(measure_layer(f, [0], "Z", QUIET, None), 64).any()


def test_prep_clears_leakage_and_frame():
    f = Frame.new(1)
    f.leaked[0] = 1
    f.x[0] = 1
    apply_prep(f, 0, "Z", QUIET, np.random.default_rng(0))
    assert f.leaked[0, 0] == 0 and f.x[0, 0] == 0 and f.lifetime[0] == 0


def test_relaxation_returns_maximally_mixed_state():
    shots = 20_000
    f = Frame.new(1, shots)
    f.leaked[0] = ~np.uint64(0)
    apply_relax_or_leak(f, 0, NoiseParams(p_leak=0.0, p_relax=1.0), np.random.default_rng(5))
    assert not f.bits(f.leaked)[0].any()
    assert f.bits(f.x)[0].mean() == pytest.approx(0.5, abs=0.02)
    assert f.bits(f.z)[0].mean() == pytest.approx(0.5, abs=0.02)


def test_leakage_rate_per_location():
    shots = 50_000
    f = Frame.new(1, shots)
    apply_relax_or_leak(f, 0, NoiseParams(p_leak=0.02, p_relax=0.0), np.random.default_rng(2))
    rate = f.bits(f.leaked)[0].mean()
    assert rate == pytest.approx(0.02, abs=5 * np.sqrt(0.02 / shots))


def test_swap_relabel_exchanges_frames():
    f = Frame.new(2)
    f.x[0] = 1
    f.z[1] = 1
    apply_swap_relabel(f, 0, 1, QUIET, None)
    assert (f.x[:, 0].tolist(), f.z[:, 0].tolist()) == ([0, 1], [1, 0])


def test_merged_swap_equals_cnot_then_swap():
    rng = np.random.default_rng(4)
    for _ in range(20):
        bits = rng.integers(0, 2, size=4).astype(np.uint64)
        a, b = Frame.new(2), Frame.new(2)
        for fr in (a, b):
            fr.x[:, 0], fr.z[:, 0] = bits[:2], bits[2:]
        apply_swap_relabel(a, 0, 1, QUIET, None, merge_cnot=True)
        apply_cnot(b, 0, 1, QUIET, None)
        apply_swap_relabel(b, 0, 1, QUIET, None)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z)


def test_two_qubit_depolarizing_rate_and_uniformity():
    shots = 60_000
    f = Frame.new(2, shots)
    cnot_layer(f, [0], [1], NoiseParams(p_depol=0.3), np.random.default_rng(9))
    code = (f.bits(f.x[0:1])[0].astype(int) | f.bits(f.z[0:1])[0] << 1
            | f.bits(f.x[1:2])[0] << 2 | f.bits(f.z[1:2])[0] << 3)
    counts = np.bincount(code, minlength=16)
    assert counts[0] / shots == pytest.approx(0.7, abs=0.01)
    assert np.all(np.abs(counts[1:] / shots - 0.3 / 15) < 0.004)
