import math

import numpy as np
import pytest

from spinguide.coupling import (
    EnsembleLayout,
    SubEnsemble,
    WaveguideModel,
    two_ensemble_layout,
)
from spinguide.dicke import decompose_initial_state, predicted_lost_excitation
from spinguide.exact import (
    CollectiveBasis,
    DimensionCapError,
    build_liouvillian,
    coherent_spin_vector,
    collective_operators,
    evolve,
    initial_product_state,
)
from spinguide.ode import IntegratorConfig, detect_steady_state

MODEL = WaveguideModel()
LAM = MODEL.lambda_eff


def test_ladder_matrix_elements():
    ops = collective_operators(CollectiveBasis(counts=(1,)))
    sm = ops.s_minus[0].toarray()
    # spin-1/2, basis ordered by excitation number (ground first)
    assert sm[0, 1] == pytest.approx(1.0)
    assert sm[1, 0] == 0.0

    ops = collective_operators(CollectiveBasis(counts=(2,)))
    sm = ops.s_minus[0].toarray()
    # j = 1: <1,0|S-|1,1> = sqrt(2)
    assert sm[1, 2] == pytest.approx(math.sqrt(2.0))
    assert sm[0, 1] == pytest.approx(math.sqrt(2.0))


def test_operators_on_distinct_factors_commute():
    ops = collective_operators(CollectiveBasis(counts=(1, 1)))
    sm1, sp2 = ops.s_minus[0], ops.s_plus[1]
    comm = (sm1 @ sp2 - sp2 @ sm1).toarray()
    assert np.max(np.abs(comm)) == 0.0


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        collective_operators(CollectiveBasis(counts=(200, 200)), dim_cap=4096)
    with pytest.raises(DimensionCapError):
        initial_product_state(two_ensemble_layout(200, 200, spacing=LAM, theta=math.pi))


def test_coherent_spin_vector_populations():
    for theta, pop in ((math.pi, 1.0), (2 * math.pi / 3, 0.75), (0.0, 0.0)):
        amp = coherent_spin_vector(10, theta)
        excited = float(np.sum(np.arange(11) * np.abs(amp) ** 2)) / 10
        assert excited == pytest.approx(pop, abs=1e-12)
        assert np.abs(np.vdot(amp, amp) - 1.0) < 1e-12


def test_single_emitter_decay():
    layout = EnsembleLayout((SubEnsemble(1, 0.0, pulse_area=math.pi, pumped=True),))
    lv = build_liouvillian(MODEL, layout)
    traj, _, final = evolve(initial_product_state(layout), lv, IntegratorConfig(t_end=20.0))
    ts = np.linspace(0.0, 20.0, 60)
    assert np.max(np.abs(traj.obs_at(ts, "ee_0") - np.exp(-ts))) < 1e-7
    final.validate()


def test_half_wave_dark_state_of_two_channel_dissipator():
    # two atoms lambda/2 apart: Gamma_12 = -1, the symmetric Bell state is dark
    layout = EnsembleLayout((
        SubEnsemble(1, 0.0, pulse_area=math.pi, pumped=True),
        SubEnsemble(1, LAM / 2),
    ))
    lv = build_liouvillian(MODEL, layout)
    down = np.array([1.0, 0.0])
    up = np.array([0.0, 1.0])
    sym = (np.kron(up, down) + np.kron(down, up)) / math.sqrt(2.0)
    anti = (np.kron(up, down) - np.kron(down, up)) / math.sqrt(2.0)
    assert np.max(np.abs(lv.apply(np.outer(sym, sym)))) < 1e-12
    assert np.max(np.abs(lv.apply(np.outer(anti, anti)))) > 1.0

    # generator kernel contains the dark projector (materialized eigencheck)
    mat = lv.materialize()
    w = np.linalg.eigvals(mat)
    assert np.sum(np.abs(w) < 1e-10) == 4  # span{|dark>, |gg>} x its coherences
    vec = np.outer(sym, sym).ravel()
    assert np.max(np.abs(mat @ vec)) < 1e-12


def test_full_wavelength_steady_excitation_half():
    # |e, g> with symmetric decay keeps half an excitation in the dark state
    layout = EnsembleLayout((
        SubEnsemble(1, 0.0, pulse_area=math.pi, pumped=True),
        SubEnsemble(1, LAM),
    ))
    lv = build_liouvillian(MODEL, layout)
    traj, _, _ = evolve(initial_product_state(layout), lv, IntegratorConfig(t_end=50.0))
    assert traj.obs[-1, traj.index_of("e_total")] == pytest.approx(0.5, abs=1e-7)


def test_channel_form_equals_full_gamma_dissipator():
    layout = two_ensemble_layout(8, 12, spacing=LAM, theta=math.pi)
    lv_chan = build_liouvillian(MODEL, layout)
    lv_full = build_liouvillian(MODEL, layout, channel_form=False)
    rng = np.random.default_rng(0)
    dim = lv_chan.dimension
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x + x.conj().T
    a = lv_chan.apply(rho)
    b = lv_full.apply(rho)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


def test_fig2c_configuration_matches_dicke_prediction():
    layout = two_ensemble_layout(8, 12, spacing=LAM, theta=math.pi)
    lv = build_liouvillian(MODEL, layout)
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, t_end=8.0)
    traj, samples, final = evolve(initial_product_state(layout), lv, cfg)
    lost = traj.obs[0, traj.index_of("e_total")] - traj.obs[-1, traj.index_of("e_total")]
    predicted = predicted_lost_excitation(decompose_initial_state(layout))
    assert lost == pytest.approx(predicted, abs=1e-6)

    # trace / hermiticity / positivity hold at every sampled state
    for state in samples + [final]:
        state.validate(herm_tol=1e-11)

    # monotone total excitation for symmetric decay without initial coherences
    e_tot = traj.obs[:, traj.index_of("e_total")]
    assert np.all(np.diff(e_tot) <= 1e-9)


def test_steady_state_detected_on_exact_run():
    layout = two_ensemble_layout(8, 12, spacing=LAM, theta=math.pi)
    lv = build_liouvillian(MODEL, layout)
    traj, _, _ = evolve(initial_product_state(layout), lv, IntegratorConfig(t_end=8.0))
    names = [n for n in traj.names if n.startswith("ee")]
    t_ss = detect_steady_state(traj, window=0.25, slope=2e-5, names=names)
    assert t_ss is not None
    assert t_ss < 8.0


def test_permutational_consistency_single_vs_split():
    theta = 2 * math.pi / 3
    merged = EnsembleLayout((SubEnsemble(2, 0.0, pulse_area=theta, pumped=True),))
    split = EnsembleLayout((
        SubEnsemble(1, 0.0, pulse_area=theta, pumped=True),
        SubEnsemble(1, 0.0, pulse_area=theta, pumped=True),
    ))
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, t_end=5.0)
    t1, _, _ = evolve(initial_product_state(merged), build_liouvillian(MODEL, merged), cfg)
    t2, _, _ = evolve(initial_product_state(split), build_liouvillian(MODEL, split), cfg)
    ts = np.linspace(0.0, 5.0, 60)
    for name in ("ee_p", "e_total", "emission"):
        assert np.max(np.abs(t1.obs_at(ts, name) - t2.obs_at(ts, name))) < 1e-10


def test_fully_excited_single_ensemble_decays_to_ground():
    layout = EnsembleLayout((SubEnsemble(6, 0.0, pulse_area=math.pi, pumped=True),))
    lv = build_liouvillian(MODEL, layout)
    traj, _, final = evolve(initial_product_state(layout), lv, IntegratorConfig(t_end=30.0))
    assert traj.obs[-1, traj.index_of("e_total")] == pytest.approx(0.0, abs=1e-6)
    final.validate()


def test_initial_state_pulse_populations():
    layout = two_ensemble_layout(5, 3, spacing=LAM, theta=2 * math.pi / 3)
    state = initial_product_state(layout)
    ops = collective_operators(state.basis)
    pop = np.real(np.trace(ops.number[0].toarray() @ state.rho)) / 5
    assert pop == pytest.approx(0.75, abs=1e-12)
    pop_np = np.real(np.trace(ops.number[1].toarray() @ state.rho))
    assert pop_np == pytest.approx(0.0, abs=1e-14)
