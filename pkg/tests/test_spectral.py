import numpy as np
import pytest

from oscturnpike.model import OscillatorSystem
from oscturnpike.spectral import (ComplexQuadVector, apply_generator,
                                  char_residual, closeness_sums, complexify,
                                  decomplexify, diag_projection_closed_form,
                                  eigen_residual, eigvec, find_nu,
                                  inverse_basis_roundtrip_error, lambda0,
                                  mode_char_residual, mode_eigvec, riesz_vectors,
                                  rouche_certificate, spectrum)

from conftest import toy_system

SINGLE = OscillatorSystem([1.0], [1.0])


def quartic_root_oracle():
    """Positive-quadrant root of sigma^4 + sigma^2 + 2 = 0, the N=1 closed form."""
    roots = np.roots([1.0, 0.0, 1.0, 0.0, 2.0])
    (root,) = [r for r in roots if r.real > 0 and r.imag > 0]
    return root


# ---------------------------------------------------------------------------
# complexification
# ---------------------------------------------------------------------------

def test_complexify_zero():
    theta = complexify(np.zeros(8))
    assert np.all(theta.stacked == 0.0)


def test_complexify_hand_values():
    theta = complexify(np.array([1.0, 0.0, 0.0, 1.0]))
    assert theta.z[0] == 1.0 and theta.zeta[0] == 1.0
    assert theta.p[0] == 1j and theta.q[0] == -1j


def test_complexify_round_trip():
    rng = np.random.default_rng(0)
    delta = rng.standard_normal(24)
    back = decomplexify(complexify(delta))
    assert np.max(np.abs(back - delta)) < 1e-14


def test_complexify_norm_bounds_on_samples():
    rng = np.random.default_rng(1)
    for _ in range(25):
        delta = rng.standard_normal(16)
        theta = complexify(delta)
        assert theta.norm() <= 2.0 * np.linalg.norm(delta) + 1e-12
        assert np.linalg.norm(decomplexify(theta)) <= theta.norm() + 1e-12


def test_complexify_rejects_bad_shape():
    with pytest.raises(ValueError):
        complexify(np.zeros(10))


# ---------------------------------------------------------------------------
# characteristic function
# ---------------------------------------------------------------------------

def test_char_residual_negative_on_imaginary_axis():
    sys_ = toy_system(6)
    for w in (0.5, 3.3, 11.0):
        val = char_residual(1j * w, sys_)
        assert abs(val.imag) < 1e-12
        assert (val + 2.0).real < 0.0


def test_char_residual_single_mode_quartic():
    sigma = quartic_root_oracle()
    assert abs(char_residual(sigma, SINGLE)) < 1e-10


def test_char_residual_symmetries():
    sys_ = toy_system(5)
    rng = np.random.default_rng(2)
    for _ in range(10):
        sigma = complex(rng.standard_normal(), rng.standard_normal()) * 2.0
        base = char_residual(sigma, sys_)
        assert char_residual(-sigma, sys_) == pytest.approx(base, rel=1e-12)
        assert char_residual(sigma.conjugate(), sys_) == pytest.approx(
            base.conjugate(), rel=1e-12)


def test_char_residual_pole_guard():
    sys_ = toy_system(3)
    with pytest.raises(ValueError):
        char_residual(1j * sys_.omega[1], sys_)


def test_mode_char_residual_matches_direct_form():
    sys_ = toy_system(6)
    nu = 0.21 - 0.03j
    direct = char_residual(1j * sys_.omega[3] + nu, sys_)
    shifted = mode_char_residual(nu, 4, sys_)
    assert abs(direct - shifted) < 1e-12


# ---------------------------------------------------------------------------
# magnitude predictor
# ---------------------------------------------------------------------------

def test_lambda0_single_mode_value():
    assert lambda0(1, SINGLE) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_lambda0_upper_bound(beam_sys_100):
    for k in range(1, 101):
        assert 0.0 < lambda0(k, beam_sys_100) < abs(beam_sys_100.b[k - 1]) / np.sqrt(2.0)


def test_lambda0_approaches_gain_scale(beam_sys_100):
    for k in range(50, 101):
        ratio = lambda0(k, beam_sys_100) / (abs(beam_sys_100.b[k - 1]) / np.sqrt(2.0))
        assert abs(ratio - 1.0) < 0.05


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def test_find_nu_single_mode_against_quartic():
    quad = find_nu(1, SINGLE)
    oracle = quartic_root_oracle()
    assert abs(quad.sigma_plus - oracle) < 1e-11
    assert quad.eps_within_half
    assert abs(quad.eps) < quad.lambda0 / 2.0


def test_find_nu_symmetry_relations(beam_quads_100):
    # partners of sigma+ are -sigma+, conj(sigma+), -conj(sigma+)
    for quad in beam_quads_100:
        sp = quad.sigma_plus
        scale = max(1.0, abs(sp))
        assert abs(quad.sigma_neg_minus + sp) < 1e-12 * scale
        assert abs(quad.sigma_neg_plus - sp.conjugate()) < 1e-12 * scale
        assert abs(quad.sigma_minus + sp.conjugate()) < 1e-12 * scale


def test_find_nu_hyperbolic_signs(beam_quads_100):
    for quad in beam_quads_100:
        assert quad.sigma_plus.real > 0.0 and quad.sigma_neg_plus.real > 0.0
        assert quad.sigma_minus.real < 0.0 and quad.sigma_neg_minus.real < 0.0


def test_find_nu_ball_localization(beam_quads_100, beam_sys_100):
    radius = beam_sys_100.b_norm
    for quad in beam_quads_100:
        assert abs(quad.nu) <= radius


def test_find_nu_gain_bound(beam_quads_100, beam_sys_100):
    for quad in beam_quads_100:
        assert abs(quad.nu) < np.sqrt(2.0) * abs(beam_sys_100.b[quad.k - 1])


def test_find_nu_residuals(beam_quads_100):
    assert max(q.residual for q in beam_quads_100) < 1e-11


def test_hamiltonian_partner_residuals():
    sys_ = toy_system(8)
    for quad in spectrum(sys_):
        base = max(abs(char_residual(quad.sigma_plus, sys_)), 1e-13)
        assert abs(char_residual(-quad.sigma_plus, sys_)) <= 10.0 * base
        assert abs(char_residual(quad.sigma_plus.conjugate(), sys_)) <= 10.0 * base


def test_root_separation_beam(beam_quads_100, beam_sys_100):
    gap = beam_sys_100.gap_floor
    sig = np.array([q.sigma_plus for q in beam_quads_100])
    diffs = np.abs(sig[:, None] - sig[None, :])
    np.fill_diagonal(diffs, np.inf)
    assert np.min(diffs) > gap / 2.0


def test_find_nu_index_validation():
    with pytest.raises(ValueError):
        find_nu(0, SINGLE)
    with pytest.raises(ValueError):
        find_nu(2, SINGLE)


# ---------------------------------------------------------------------------
# uniqueness certificate
# ---------------------------------------------------------------------------

def test_certificate_threshold_at_half():
    cert = rouche_certificate(2, 0.5, toy_system(6))
    assert cert.threshold == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_certificate_vanishing_gains_hold():
    omega = np.arange(1.0, 7.0)
    sys_ = OscillatorSystem(omega, 1e-4 / omega)
    for k in (1, 3, 6):
        cert = rouche_certificate(k, 0.5, sys_)
        assert cert.applicable and cert.holds
        assert cert.s1 + cert.s2 + cert.s3 < 1e-6


def test_certificate_beam_mode_50(beam_sys_100):
    cert = rouche_certificate(50, 0.5, beam_sys_100)
    assert cert.applicable and cert.holds


def test_certificate_inapplicable_reported_not_raised(beam_sys_100):
    cert = rouche_certificate(1, 0.5, beam_sys_100)
    assert not cert.applicable and not cert.holds
    assert cert.x >= 1.0


# ---------------------------------------------------------------------------
# eigenvectors
# ---------------------------------------------------------------------------

def test_eigvec_feedback_normalization():
    sys_ = toy_system(6)
    for quad in spectrum(sys_):
        theta = eigvec(quad.sigma_plus, sys_)
        phi = 0.5 * np.sum(sys_.b * (theta.p - theta.q))
        assert abs(phi - 1.0) < 1e-9


def test_eigvec_residual_at_converged_roots():
    sys_ = toy_system(8)
    for quad in spectrum(sys_):
        assert eigen_residual(quad.sigma_plus, sys_) < 1e-9
        assert eigen_residual(quad.sigma_neg_minus, sys_) < 1e-9


def test_eigvec_single_mode_feedback_identity():
    quad = find_nu(1, SINGLE)
    theta = eigvec(quad.sigma_plus, SINGLE)
    assert abs((theta.p[0] - theta.q[0]) - 2.0) < 1e-9


def test_mode_eigvec_matches_direct_at_moderate_frequency():
    sys_ = toy_system(6)
    quad = find_nu(3, sys_)
    for which, sigma in [("plus", quad.sigma_plus), ("minus", quad.sigma_minus),
                         ("neg_plus", quad.sigma_neg_plus),
                         ("neg_minus", quad.sigma_neg_minus)]:
        shifted = mode_eigvec(quad, which, sys_).stacked
        direct = eigvec(sigma, sys_).stacked
        assert np.max(np.abs(shifted - direct)) < 1e-9


def test_apply_generator_linear_consistency():
    sys_ = toy_system(5)
    rng = np.random.default_rng(3)
    theta = ComplexQuadVector.from_stacked(
        rng.standard_normal(20) + 1j * rng.standard_normal(20))
    quad = find_nu(2, sys_)
    vec = eigvec(quad.sigma_plus, sys_)
    image = apply_generator(vec, sys_)
    assert np.max(np.abs(image.stacked - quad.sigma_plus * vec.stacked)) < 1e-9
    # linearity spot check
    two = apply_generator(ComplexQuadVector.from_stacked(2.0 * theta.stacked), sys_)
    one = apply_generator(theta, sys_)
    assert np.allclose(two.stacked, 2.0 * one.stacked)


# ---------------------------------------------------------------------------
# combined family
# ---------------------------------------------------------------------------

def test_riesz_vectors_unit_diagonal(beam_sys_100, beam_quads_100):
    for quad in beam_quads_100[:10] + beam_quads_100[-3:]:
        entry = riesz_vectors(quad.k, quad, beam_sys_100)
        idx = quad.k - 1
        assert abs(entry.theta_z.z[idx] - 1.0) < 1e-9
        assert abs(entry.theta_z.p[idx]) < 1e-9
        assert abs(entry.theta_zeta.zeta[idx] - 1.0) < 1e-9
        assert abs(entry.theta_p.p[idx] - 1.0) < 1e-9
        assert abs(entry.theta_q.q[idx] - 1.0) < 1e-9


def test_riesz_vectors_match_closed_form_projection():
    sys_ = toy_system(7)
    quad = find_nu(4, sys_)
    entry = riesz_vectors(4, quad, sys_)
    for name, vec in entry.vectors().items():
        expected = diag_projection_closed_form(quad, name, sys_)
        assert np.max(np.abs(vec.block_at(3) - expected)) < 1e-10


def test_inverse_basis_round_trip(riesz_family_200, beam_quads_200, beam_sys_200):
    for entry, quad in zip(riesz_family_200.entries, beam_quads_200):
        assert inverse_basis_roundtrip_error(entry, quad, beam_sys_200) < 1e-8


def test_closeness_partials_start_at_zero(riesz_family_200):
    assert riesz_family_200.quad_closeness_partials[0] == 0.0
    assert riesz_family_200.weighted_closeness_partials[0] == 0.0


def test_closeness_partials_nondecreasing(riesz_family_200):
    assert np.all(np.diff(riesz_family_200.quad_closeness_partials) >= 0.0)
    assert np.all(np.diff(riesz_family_200.weighted_closeness_partials) >= 0.0)


def test_closeness_increments_decay(riesz_family_200):
    qp = riesz_family_200.quad_closeness_partials
    assert (qp[200] - qp[100]) / qp[100] < 0.05
    wp = riesz_family_200.weighted_closeness_partials
    inc = [wp[50] - wp[25], wp[100] - wp[50], wp[200] - wp[100]]
    assert inc[2] < inc[1] < inc[0]  # converging, hence bounded


def test_closeness_sums_recompute_matches_family(beam_sys_200, riesz_family_200):
    qp, wp = closeness_sums(riesz_family_200, 1.4, beam_sys_200)
    assert np.allclose(qp, riesz_family_200.quad_closeness_partials)
    assert np.allclose(wp, riesz_family_200.weighted_closeness_partials)


def test_build_family_records_offdiag_constant(riesz_family_200):
    assert np.isfinite(riesz_family_200.offdiag_constant)
    assert riesz_family_200.offdiag_constant > 0.0
