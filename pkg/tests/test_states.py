import json
import math

import numpy as np
import pytest
from hypothesis import given

from triality.states import (
    DensityMatrix,
    PreparationParams,
    PureState,
    density_of,
    gamma_overlap,
    prepare_state,
)
from triality.targets import equal_coherence_state

from conftest import params_strategy

S2 = 1 / math.sqrt(2)


@pytest.mark.parametrize("params, expected", [
    (PreparationParams(0, 1.1, 0), [1, 0, 0, 0]),
    (PreparationParams(1, 0, 0), [S2, 0, S2, 0]),
    (PreparationParams(1, math.pi / 2, 0), [S2, 0, 0, S2]),
])
def test_prepare_state_examples(params, expected):
    np.testing.assert_allclose(prepare_state(params).amplitudes, expected, atol=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(R=-0.1, theta=0),
    dict(R=math.inf, theta=0),
    dict(R=1, theta=-0.1),
    dict(R=1, theta=2.0),
    dict(R=1, theta=0, xi=math.nan),
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        PreparationParams(**kwargs)


def test_xi_wraps_into_range():
    assert PreparationParams(1, 0, 2 * math.pi + 0.5).xi == pytest.approx(0.5)


@given(params_strategy)
def test_prepared_state_is_normalized(p):
    assert abs(np.linalg.norm(prepare_state(p).amplitudes) - 1) <= 1e-12


def test_gamma_examples():
    assert gamma_overlap(PreparationParams(1, 0, 0)) == pytest.approx(1)
    assert abs(gamma_overlap(PreparationParams(1, math.pi / 2, 0))) < 1e-15
    # direct inner product <s_a|s_b> with s_a = h, s_b = e^{i pi} cos(pi/3) h + sin(pi/3) v
    s_a = np.array([1, 0])
    s_b = np.array([np.exp(1j * math.pi) * math.cos(math.pi / 3), math.sin(math.pi / 3)])
    oracle = np.vdot(s_a, s_b)
    assert oracle == pytest.approx(-0.5)
    assert gamma_overlap(PreparationParams(1, math.pi / 3, math.pi)) == pytest.approx(oracle, abs=1e-15)


@given(params_strategy)
def test_path_b_polarization_overlap_matches_gamma(p):
    v = prepare_state(p).amplitudes
    if p.c_b < 1e-6 or p.c_a < 1e-6:
        return
    s_a = v[:2] / np.linalg.norm(v[:2])
    s_b = v[2:] / np.linalg.norm(v[2:])
    assert abs(abs(np.vdot(s_a, s_b)) - abs(gamma_overlap(p))) <= 1e-12


def test_density_of_basis_state():
    rho = density_of(PureState([1, 0, 0, 0]))
    expected = np.zeros((4, 4)); expected[0, 0] = 1
    np.testing.assert_array_equal(rho.op, expected)


def test_density_of_equal_coherence_state():
    rho = density_of(equal_coherence_state()).op
    s3 = math.sqrt(3)
    np.testing.assert_allclose(np.diag(rho).real, [(3 + s3) / 6, 0, (3 - s3) / 12, (3 - s3) / 12], atol=1e-15)
    # off-diagonals from the explicit outer product of the amplitudes
    ab = 1 / (2 * s3)
    bb = (3 - s3) / 12
    np.testing.assert_allclose(rho[0, 2], ab, atol=1e-15)
    np.testing.assert_allclose(rho[0, 3], ab, atol=1e-15)
    np.testing.assert_allclose(rho[2, 3], bb, atol=1e-15)
    assert np.all(rho[1] == 0)


@given(params_strategy)
def test_density_is_projector(p):
    rho = density_of(prepare_state(p)).op
    assert np.max(np.abs(rho - rho.conj().T)) <= 1e-10
    assert np.max(np.abs(rho @ rho - rho)) <= 1e-10
    assert abs(np.trace(rho) - 1) <= 1e-10
    assert abs(np.trace(rho @ rho) - 1) <= 1e-10


def test_density_of_rejects_unnormalized():
    with pytest.raises(ValueError):
        density_of(np.array([1, 1, 0, 0]))
    with pytest.raises(ValueError):
        PureState([1, 1, 0, 0])


def test_density_matrix_invariants():
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(np.eye(4) / 2)
    with pytest.raises(ValueError, match="semidefinite"):
        DensityMatrix(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix(np.eye(4) / 4 + np.triu(np.ones((4, 4)), 1) * 0.1)


def test_values_are_immutable():
    s = prepare_state(PreparationParams(1, 0.3, 0.2))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_json_round_trips():
    p = PreparationParams(0.7, 0.4, 1.2)
    assert PreparationParams.from_dict(json.loads(json.dumps(p.to_dict()))) == p
    s = prepare_state(p)
    back = PureState.from_list(json.loads(json.dumps(s.to_list())))
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
    rho = density_of(s)
    back_rho = DensityMatrix.from_list(json.loads(json.dumps(rho.to_list())))
    np.testing.assert_array_equal(back_rho.op, rho.op)
    assert rho.to_list()[0][0] == [rho.op[0, 0].real, 0.0]
