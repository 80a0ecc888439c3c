import numpy as np
import pytest

from blockadesim.dynamics import (
    PhaseUndefinedError,
    Pulse,
    SampledEnvelope,
    Schedule,
    Wait,
    accumulated_phase,
    evolve,
    fidelity,
    wrap_phase,
)
from blockadesim.geometry import CouplingMatrix
from blockadesim.hilbert import dephasing_term, dipole_term, enumerate_basis
from blockadesim.protocols import rabi_pulse, register_basis

from .reference import rk4_evolve, two_level_propagator


def _ideal(n, n_max=1):
    return register_basis(n, n_max=n_max, blockade="ideal")


def test_half_angle_rotation():
    basis, static = _ideal(6)
    res = evolve(Schedule((rabi_pulse(6, 1.0, np.pi / 2),)), basis, static,
                 basis.basis_vector({}))
    np.testing.assert_allclose(
        [res.population({})[-1], res.population({"r": 1})[-1]],
        [0.5, 0.5], atol=1e-12,
    )


def test_full_transfer():
    basis, static = _ideal(5)
    res = evolve(Schedule((rabi_pulse(5, 1.0, np.pi),)), basis, static,
                 basis.basis_vector({}))
    assert fidelity(res.final_state, basis.basis_vector({"r": 1})) > 1 - 1e-9


def test_unnormalized_input_rejected():
    basis, static = _ideal(3)
    with pytest.raises(ValueError):
        evolve(Schedule(()), basis, static, 2.0 * basis.basis_vector({}))


def test_unitarity_without_decay():
    basis, _ = _ideal(4, n_max=2)
    sched = Schedule(
        (
            Pulse(("g", "r"), 0.9, 2.3, phase=0.3, detuning=0.5),
            Wait(1.0),
            Pulse(("q", "r"), 1.1, 1.7, phase=-0.8),
        )
    )
    res = evolve(sched, basis, [], basis.basis_vector({}), sample_dt=0.31)
    np.testing.assert_allclose(res.norm2, 1.0, atol=1e-9)


def test_time_reversal():
    basis, _ = _ideal(4, n_max=2)
    sched = Schedule(
        (
            Pulse(("g", "r"), 0.9, 2.3, phase=0.3),
            Pulse(("q", "r"), 1.1, 1.7, phase=-0.8),
            Pulse(("g", "r"), 0.5, 0.9, detuning=0.7),
        )
    )
    psi0 = basis.basis_vector({})
    fwd = evolve(sched, basis, [], psi0)
    back = evolve(sched.reversed(), basis, [], fwd.final_state)
    assert fidelity(back.final_state, psi0) > 1 - 1e-8


def test_reversal_handles_detuning_sign():
    # reversed() inverts the drive phase but keeps detunings: the inverse
    # of each segment exponential
    basis, _ = _ideal(3, n_max=1)
    p = Pulse(("g", "r"), 1.0, 0.7, phase=0.2, detuning=1.3)
    fwd = evolve(Schedule((p,)), basis, [], basis.basis_vector({}))
    rev = Schedule((p,)).reversed()
    back = evolve(rev, basis, [], fwd.final_state)
    assert fidelity(back.final_state, basis.basis_vector({})) > 1 - 1e-10


def test_rk4_oracle_pair_resolved():
    # brute-force RK4 vs exact segment exponentials, with pair coupling
    # and decay in play
    n = 3
    basis = enumerate_basis(n, ("q", "r", "p'", "p''"), 2,
                            mode="pair-resolved", ryd_max=2)
    kap = np.full((n, n), 8.0) - 8.0 * np.eye(n)
    static = [
        dipole_term(basis, CouplingMatrix(kappa=kap, c3=0.0)),
        dephasing_term(basis, 0.05),
    ]
    sched = Schedule(
        (
            Pulse(("g", "r"), 1.0, np.pi / np.sqrt(n), phase=0.4),
            Pulse(("q", "r"), 0.8, 1.1, detuning=0.6),
            Wait(0.5),
        )
    )
    psi0 = basis.basis_vector(tuple("g" for _ in range(n)))
    res = evolve(sched, basis, static, psi0)
    ref = rk4_evolve(sched, basis, static, psi0)
    assert np.abs(res.final_state - ref).max() < 1e-8


def test_envelope_pulse_matches_area():
    # resonant two-level transfer depends only on the drive area
    basis, static = _ideal(1)
    T = 2.0
    peak = np.pi / T  # sin^2 envelope has area peak*T/2 = pi/2 -> theta=pi/2
    ts = tuple(np.linspace(0, T, 81))
    env = SampledEnvelope(ts, tuple(2 * peak * np.sin(np.pi * t / T) ** 2
                                    for t in ts))
    pulse = Pulse(("g", "r"), env, T)
    assert pulse.area() == pytest.approx(np.pi, rel=1e-3)
    res = evolve(Schedule((pulse,)), basis, static, basis.basis_vector({}),
                 tol=1e-11)
    assert res.population({"r": 1})[-1] == pytest.approx(1.0, abs=1e-5)


def test_envelope_vs_rk4():
    basis, _ = _ideal(2, n_max=1)
    ts = (0.0, 0.4, 1.0, 1.5)
    env = SampledEnvelope(ts, (0.0, 1.2, 0.7, 0.1))
    sched = Schedule((Pulse(("g", "r"), env, 1.5, phase=0.3, detuning=0.2),))
    psi0 = basis.basis_vector({})
    res = evolve(sched, basis, [], psi0, tol=1e-12)
    ref = rk4_evolve(sched, basis, [], psi0)
    assert np.abs(res.final_state - ref).max() < 1e-7


def test_decay_exponential_exact():
    basis = enumerate_basis(2, ("r",), 1)
    static = [dephasing_term(basis, 0.3)]
    res = evolve(Schedule((Wait(2.0),)), basis, static,
                 basis.basis_vector({"r": 1}))
    assert res.norm2[-1] == pytest.approx(np.exp(-0.6), abs=1e-12)


def test_decay_rate_doubles():
    basis = enumerate_basis(4, ("r", "p'", "p''"), 2)
    static = [dephasing_term(basis, 0.4)]
    res = evolve(Schedule((Wait(1.0),)), basis, static,
                 basis.basis_vector({"r": 2}))
    assert res.norm2[-1] == pytest.approx(np.exp(-0.8), abs=1e-12)


def test_norm_nonincreasing_with_decay():
    basis, _ = _ideal(3, n_max=1)
    static = [dephasing_term(basis, 0.2)]
    res = evolve(Schedule((Pulse(("g", "r"), 1.0, 4.0),)), basis, static,
                 basis.basis_vector({}), sample_dt=0.1)
    assert (np.diff(res.norm2) <= 1e-12).all()


def test_fidelity_definitions():
    v = np.array([1.0, 0.0], dtype=complex)
    w = np.array([0.0, 1.0], dtype=complex)
    assert fidelity(v, v) == pytest.approx(1.0)
    assert fidelity(v, w) == 0.0
    shrunk = np.sqrt(0.99) * v
    assert fidelity(shrunk, v) == pytest.approx(0.99)
    with pytest.raises(ValueError):
        fidelity(v, np.ones(3, dtype=complex))


def test_phase_free_evolution_zero():
    basis, _ = _ideal(2, n_max=1)
    res = evolve(Schedule((Wait(3.0),)), basis, [], basis.basis_vector({}))
    assert accumulated_phase(res, {}) == pytest.approx(0.0, abs=1e-12)


def test_phase_two_pi_pulse_is_pi():
    basis = enumerate_basis(1, ("r",), 1)
    res = evolve(Schedule((Pulse(("g", "r"), 1.0, 2 * np.pi),)), basis, [],
                 basis.basis_vector({}))
    assert accumulated_phase(res, {}) == pytest.approx(np.pi, abs=1e-9)


def test_phase_light_shift_closed_form():
    omega, delta, t = 0.6, 9.0, 3.7
    basis = enumerate_basis(1, ("r",), 1)
    res = evolve(
        Schedule((Pulse(("g", "r"), omega, t, detuning=delta),)),
        basis, [], basis.basis_vector({}),
    )
    u = two_level_propagator(omega, delta, t)
    assert accumulated_phase(res, {}) == pytest.approx(
        float(np.angle(u[0, 0])), abs=1e-10
    )
    assert res.population({"r": 1})[-1] == pytest.approx(
        float(abs(u[1, 0]) ** 2), abs=1e-10
    )


def test_accumulated_phases_array():
    basis, static = _ideal(4)
    res = evolve(Schedule((rabi_pulse(4, 1.0, np.pi),)), basis, static,
                 basis.basis_vector({}))
    phases = res.accumulated_phases()
    assert phases.shape == (basis.dim,)
    # ground state was emptied, excited state was never occupied initially
    assert np.isnan(phases).all()


def test_phase_undefined_raises():
    basis, static = _ideal(4)
    res = evolve(Schedule((rabi_pulse(4, 1.0, np.pi),)), basis, static,
                 basis.basis_vector({}))
    with pytest.raises(PhaseUndefinedError):
        accumulated_phase(res, {})   # ground state fully emptied


def test_collective_enhancement_quickfit():
    import scipy.optimize

    n = 4
    basis, static = _ideal(n)
    omega = 1.0
    period = 2 * np.pi / (np.sqrt(n) * omega)
    res = evolve(
        Schedule((Pulse(("g", "r"), omega, 3 * period),)), basis, static,
        basis.basis_vector({}), sample_dt=period / 24,
    )

    def model(t, w, a):
        return a * np.sin(0.5 * w * t) ** 2

    popt, _ = scipy.optimize.curve_fit(
        model, res.times, res.population({"r": 1}),
        p0=(np.sqrt(n) * omega, 1.0),
    )
    assert abs(popt[0]) == pytest.approx(np.sqrt(n) * omega, rel=1e-6)


def test_sampling_grid():
    basis, static = _ideal(2)
    res = evolve(Schedule((Pulse(("g", "r"), 1.0, 1.0), Wait(0.5))),
                 basis, static, basis.basis_vector({}), sample_dt=0.25)
    assert res.times[0] == 0.0
    assert res.times[-1] == pytest.approx(1.5)
    for t in (0.25, 0.5, 0.75, 1.0, 1.25):
        assert np.min(np.abs(res.times - t)) < 1e-9


def test_wrap_phase():
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(3 * np.pi) == pytest.approx(np.pi)
    assert wrap_phase(0.3) == pytest.approx(0.3)
    assert wrap_phase(2 * np.pi - 0.1) == pytest.approx(-0.1)


def test_schedule_text_roundtrip():
    sched = Schedule(
        (
            Pulse(("g", "r"), 0.875, 1.3125, phase=-0.5, detuning=2.25),
            Wait(0.75),
            Pulse(("r", "q"), 1.5, 0.0),
        )
    )
    text = sched.to_text()
    again = Schedule.from_text(text)
    assert again == sched
    with pytest.raises(ValueError):
        Schedule.from_text("NOPE 1 2 3")


def test_zero_duration_pulse_is_noop():
    basis, static = _ideal(3)
    psi0 = basis.basis_vector({})
    res = evolve(Schedule((Pulse(("g", "r"), 1.0, 0.0),)), basis, static, psi0)
    assert fidelity(res.final_state, psi0) == pytest.approx(1.0)


def test_static_term_basis_mismatch():
    basis, _ = _ideal(3)
    other = enumerate_basis(4, ("r",), 1)
    with pytest.raises(ValueError):
        evolve(Schedule(()), basis, [dephasing_term(other, 0.1)],
               basis.basis_vector({}))
