import math

import numpy as np
import pytest
from hypothesis import given

from triality.metrics import vdc_closed_form
from triality.optics import (
    BS50,
    FRINGE_OFFSET,
    HWP,
    PBS,
    FringeScan,
    PhaseDelay,
    block_path,
    element_unitary,
    fringe_scan,
    params_from_waveplates,
    phase_grid,
    port_probability,
    run_preparation,
    waveplate_angles,
)
from triality.states import PreparationParams, prepare_state

from conftest import params_strategy, random_params

S2 = 1 / math.sqrt(2)


def test_hwp_zero_flips_vertical():
    u = element_unitary(HWP(0.0))
    np.testing.assert_allclose(u, np.diag([1, -1, 1, -1]))


def test_hwp_rotates_horizontal():
    phi = 0.3
    u = element_unitary(HWP(phi, acts_on="a"))
    np.testing.assert_allclose(u @ [1, 0, 0, 0], [math.cos(2 * phi), math.sin(2 * phi), 0, 0], atol=1e-15)
    np.testing.assert_allclose(u @ [0, 0, 1, 0], [0, 0, 1, 0])


def test_double_beamsplitter_swaps_paths():
    u = element_unitary(BS50())
    out = u @ u @ np.array([1, 0, 0, 0])
    assert abs(abs(out[2]) - 1) < 1e-15
    assert np.allclose(out[[0, 1, 3]], 0)


def test_pbs_routes_polarizations():
    u = element_unitary(PBS())
    np.testing.assert_array_equal(u @ [1, 0, 0, 0], [1, 0, 0, 0])
    np.testing.assert_array_equal(u @ [0, 1, 0, 0], [0, 0, 0, 1])


def test_phase_delay():
    u = element_unitary(PhaseDelay(0.4, acts_on="b"))
    np.testing.assert_allclose(np.diag(u), [1, 1, np.exp(0.4j), np.exp(0.4j)])
    u = element_unitary(PhaseDelay(0.4, acts_on="b", polarization="h"))
    np.testing.assert_allclose(np.diag(u), [1, 1, np.exp(0.4j), 1])
    with pytest.raises(ValueError):
        element_unitary(PhaseDelay(0.1, acts_on="c"))


def test_random_elements_are_unitary(rng):
    for _ in range(200):
        e = rng.choice(4)
        angle = rng.uniform(-2 * math.pi, 2 * math.pi)
        elem = [HWP(angle, acts_on=rng.choice(["a", "b", "both"])), PBS(), BS50(),
                PhaseDelay(angle, acts_on=rng.choice(["a", "b"]))][e]
        u = element_unitary(elem)
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-12


def _hand_pipeline(hwp1, hwp2, xi):
    """Independent composition with explicitly written 4x4 matrices."""
    c1, s1 = math.cos(2 * hwp1), math.sin(2 * hwp1)
    c2, s2 = math.cos(2 * hwp2), math.sin(2 * hwp2)
    U1 = np.array([[c1, s1, 0, 0], [s1, -c1, 0, 0], [0, 0, c1, s1], [0, 0, s1, -c1]])
    P = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
    U2 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, c2, s2], [0, 0, s2, -c2]])
    X = np.diag([1, 1, np.exp(1j * xi), 1])
    return X @ U2 @ P @ U1 @ np.array([1, 0, 0, 0])


@pytest.mark.parametrize("hwp1, hwp2, expected", [
    (0.0, 1.0, [1, 0, 0, 0]),
    (math.pi / 8, math.pi / 4, [S2, 0, S2, 0]),
    (math.pi / 8, math.pi / 2, [S2, 0, 0, S2]),
])
def test_run_preparation_examples(hwp1, hwp2, expected):
    oracle = _hand_pipeline(hwp1, hwp2, 0.0)
    np.testing.assert_allclose(oracle, expected, atol=1e-15)
    np.testing.assert_allclose(run_preparation(hwp1, hwp2, 0.0).amplitudes, oracle, atol=1e-15)


def test_pipeline_matches_prepare_state_on_grid():
    for hwp1 in np.linspace(0, math.pi / 4, 13):
        for hwp2 in np.linspace(math.pi / 4, math.pi / 2, 13):
            for xi in np.linspace(0, 2 * math.pi, 9, endpoint=False):
                piped = run_preparation(hwp1, hwp2, xi)
                np.testing.assert_allclose(piped.amplitudes, _hand_pipeline(hwp1, hwp2, xi), atol=1e-14)
                ref = prepare_state(params_from_waveplates(hwp1, hwp2, xi))
                assert abs(piped.overlap(ref)) >= 1 - 1e-10


@given(params_strategy)
def test_waveplate_angles_realize_params(p):
    hwp1, hwp2 = waveplate_angles(p)
    assert abs(run_preparation(hwp1, hwp2, p.xi).overlap(prepare_state(p))) >= 1 - 1e-10


def test_fringe_full_visibility():
    scan = fringe_scan(PreparationParams(1, 0), phase_grid(steps=64))
    lo, hi = scan.intensities.min(), scan.intensities.max()
    assert lo == pytest.approx(0, abs=1e-12) and hi == pytest.approx(1, abs=1e-12)
    assert (hi - lo) / (hi + lo) == pytest.approx(1, abs=1e-12)


def test_fringe_flat_when_entangled():
    scan = fringe_scan(PreparationParams(1, math.pi / 2), phase_grid(steps=32))
    np.testing.assert_allclose(scan.intensities, 0.5, atol=1e-15)


def test_fringe_equal_coherence_visibility():
    # extremal phases are -offset and pi - offset, both on this grid
    grid = np.sort(np.mod(np.linspace(0, 2 * math.pi, 64, endpoint=False) - FRINGE_OFFSET, 2 * math.pi))
    scan = fringe_scan(PreparationParams(0.5176, math.pi / 4), grid)
    lo, hi = scan.intensities.min(), scan.intensities.max()
    assert (hi - lo) / (hi + lo) == pytest.approx(0.5773257395576118, abs=1e-9)
    assert (hi - lo) / (hi + lo) == pytest.approx(0.5774, abs=1e-4)


def test_fringe_closed_form_intensity(rng):
    grid = phase_grid(steps=16)
    for p in random_params(rng, 30):
        scan = fringe_scan(p, grid)
        V = vdc_closed_form(p).V
        np.testing.assert_allclose(scan.intensities, 0.5 * (1 + V * np.cos(grid + FRINGE_OFFSET)), atol=1e-12)
        # complementary port carries the rest of the flux
        other = [port_probability(prepare_state(PreparationParams(p.R, p.theta, x)), "b") for x in grid]
        np.testing.assert_allclose(scan.intensities + other, 1, atol=1e-12)


def test_noiseless_extrema_match_closed_form(rng):
    grid = np.sort(np.mod(np.linspace(0, 2 * math.pi, 40, endpoint=False) - FRINGE_OFFSET, 2 * math.pi))
    for p in random_params(rng, 30):
        I = fringe_scan(p, grid).intensities
        assert abs((I.max() - I.min()) / (I.max() + I.min()) - vdc_closed_form(p).V) <= 1e-9


def test_fringe_poisson_counts_reproducible():
    p = PreparationParams(1, 0.3)
    a = fringe_scan(p, phase_grid(steps=16), mean_counts=1000, seed=7)
    b = fringe_scan(p, phase_grid(steps=16), mean_counts=1000, seed=7)
    np.testing.assert_array_equal(a.intensities, b.intensities)
    assert a.intensities.dtype.kind == "i" and a.noisy


def test_fringe_rejects_bad_grids():
    with pytest.raises(ValueError):
        fringe_scan(PreparationParams(1, 0), [])
    with pytest.raises(ValueError):
        fringe_scan(PreparationParams(1, 0), [1.0, 0.5])
    with pytest.raises(ValueError):
        phase_grid(steps=1)


def test_fringe_csv_round_trip():
    scan = fringe_scan(PreparationParams(1, 0.2), phase_grid(steps=8))
    text = scan.to_csv()
    assert text.splitlines()[0] == "xi,intensity"
    back = FringeScan.from_csv(text)
    np.testing.assert_array_equal(back.intensities, scan.intensities)
    noisy = fringe_scan(PreparationParams(1, 0.2), phase_grid(steps=8), mean_counts=100, seed=1)
    assert noisy.to_csv().splitlines()[0] == "xi,counts"
    np.testing.assert_array_equal(FringeScan.from_csv(noisy.to_csv()).intensities, noisy.intensities)


@pytest.mark.parametrize("R, blocked, expected", [
    (0.0, "b", 0.5),
    (1.0, "a", 0.25),
    (1.0, "b", 0.25),
    (2.0, "a", 0.4),
])
def test_block_path_examples(R, blocked, expected):
    assert block_path(PreparationParams(R, 0.7), blocked) == pytest.approx(expected, abs=1e-15)


@given(params_strategy)
def test_blocked_probabilities_sum_to_half(p):
    assert abs(block_path(p, "a") + block_path(p, "b") - 0.5) <= 1e-12


def test_block_path_counts():
    p = PreparationParams(2.0, 0.0)
    draws = [block_path(p, "a", mean_counts=1000, seed=s) for s in range(400)]
    assert all(isinstance(d, int) for d in draws)
    assert abs(np.mean(draws) - 400) < 3 * math.sqrt(400) / math.sqrt(len(draws))
