import numpy as np
import pytest

from qnetbounds.channels import ad_lower_closed, choi, custom_channel, make_channel
from qnetbounds.emax import (PhaseCovariantSeparable, UnsupportedDims, UnsupportedKind,
                             _unit_to_params, emax_lower_sdp, emax_reduced, emax_sigma_sdp,
                             emax_upper_marginal_sdp, xform_dmax)
from qnetbounds.linalg import dmax, eigvalsh, partial_transpose


def ad(lam):
    return make_channel("amplitude_damping", lam)


def test_sigma_sdp_examples():
    assert emax_sigma_sdp(ad(0.5)).value == pytest.approx(0.584963, abs=1e-6)
    assert emax_sigma_sdp(ad(0.0)).value == pytest.approx(1.0, abs=1e-6)
    assert emax_sigma_sdp(make_channel("depolarizing", 0.7)).value == pytest.approx(0.0, abs=1e-6)


def test_lower_sdp_examples():
    assert emax_lower_sdp(ad(0.3)).value == pytest.approx(0.754169, abs=1e-6)
    assert emax_lower_sdp(ad(0.0)).value == pytest.approx(1.0, abs=1e-6)
    deph = make_channel("dephasing", 0.5)
    assert emax_lower_sdp(deph).value == pytest.approx(emax_sigma_sdp(deph).value, abs=1e-4)


def test_upper_sdp_examples():
    assert emax_upper_marginal_sdp(ad(0.5)).value == pytest.approx(0.584963, abs=1e-6)
    assert emax_upper_marginal_sdp(ad(1.0)).value == pytest.approx(0.0, abs=1e-6)
    for kind in ("dephasing", "erasure", "depolarizing"):
        ch = make_channel(kind, 0.4)
        assert emax_upper_marginal_sdp(ch).value >= emax_lower_sdp(ch).value - 1e-6


def test_sandwich_and_monotonicity():
    lams = np.linspace(0, 1, 6)
    sigma = [emax_sigma_sdp(ad(l)).value for l in lams]
    for lam, s in zip(lams, sigma):
        lower = emax_lower_sdp(ad(lam)).value
        upper = emax_upper_marginal_sdp(ad(lam)).value
        assert ad_lower_closed(lam) - 1e-4 <= lower <= s <= upper + 1e-4
    assert all(b <= a + 1e-9 for a, b in zip(sigma, sigma[1:]))


def test_results_nonnegative():
    for kind in ("dephasing", "erasure", "depolarizing", "amplitude_damping"):
        assert emax_sigma_sdp(make_channel(kind, 1.0)).value >= -1e-9


def test_unsupported_dims():
    qutrit = custom_channel([np.eye(3)], True)
    with pytest.raises(UnsupportedDims):
        emax_sigma_sdp(qutrit)


def test_custom_identity_channel():
    ch = custom_channel([np.eye(2)], True)
    assert emax_sigma_sdp(ch).value == pytest.approx(1.0, abs=1e-6)


def test_phase_covariant_family():
    s = PhaseCovariantSeparable(0.5, 0.5, 0.5, 0.5, 0.5, 1.0)
    m = s.matrix
    assert np.trace(m).real == pytest.approx(1.0)
    assert eigvalsh(m)[0] >= -1e-12
    assert eigvalsh(partial_transpose(m, (2, 2)))[0] >= -1e-12
    with pytest.raises(ValueError):
        PhaseCovariantSeparable(1.0, 1.0, 0.5, 0.5, 0.0)
    with pytest.raises(ValueError):
        PhaseCovariantSeparable(0.5, 0.5, 0.9, 0.1, 0.4)
    with pytest.raises(ValueError):
        PhaseCovariantSeparable(-0.1, 1.1, 0.5, 0.5, 0.0)


@pytest.mark.parametrize("variant", ["lower", "upper"])
def test_unit_cube_map_is_feasible(rng, variant):
    u = rng.random((200, 5 if variant == "lower" else 4))
    a, b, g, d, xi, phi = _unit_to_params(u, variant)
    np.testing.assert_allclose(a + b + g + d, 2.0, atol=1e-12)
    assert np.all(xi <= np.sqrt(np.minimum(a * b, g * d)) + 1e-12)
    assert np.all((phi >= 0) & (phi < 2 * np.pi + 1e-12))
    if variant == "upper":
        np.testing.assert_allclose(a + g, 1.0)


@pytest.mark.parametrize("kind", ["amplitude_damping", "dephasing", "depolarizing"])
def test_closed_form_block_dmax_matches_general(rng, kind):
    pi = choi(make_channel(kind, 0.35)).matrix
    a, b, g, d, xi, phi = _unit_to_params(rng.random((50, 5)), "lower")
    fast = xform_dmax(pi, a, b, g, d, xi, phi)
    mats = np.stack([PhaseCovariantSeparable(*map(float, p)).matrix
                     for p in zip(a, b, g, d, xi, phi)])
    np.testing.assert_allclose(fast, dmax(pi, mats), atol=1e-9)


def test_reduced_examples():
    assert emax_reduced(ad(0.5), "upper").value == pytest.approx(0.584963, abs=1e-3)
    assert emax_reduced(ad(0.8), "lower").value == pytest.approx(0.169925, abs=1e-3)
    assert emax_reduced(make_channel("dephasing", 0.0)).value == pytest.approx(1.0, abs=1e-3)


def test_reduced_is_deterministic():
    ch = make_channel("dephasing", 0.3)
    assert emax_reduced(ch).value == emax_reduced(ch).value


def test_reduced_rejects_other_kinds():
    with pytest.raises(UnsupportedKind):
        emax_reduced(make_channel("erasure", 0.3))
    with pytest.raises(UnsupportedKind):
        emax_reduced(custom_channel([np.eye(2)], True))
    with pytest.raises(ValueError):
        emax_reduced(ad(0.3), "sideways")
